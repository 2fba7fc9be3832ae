# app/cli.py
"""
Command line for the shrinkage toolkit.

    python -m app.cli prox-compare --betas 1,7,50 --workers 4
    python -m app.cli deblur --model itv-l1 --synthetic 256 --sp-level 0.4 --out runs/itv
    python -m app.cli metrics restored.png clean.png

Values from --config FILE.json win over flags, flags win over settings defaults.
Exit codes: 0 success, 1 domain or I/O failure, 2 invalid configuration.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import OgsError, SolverDivergenceError
from app.core.logging import setup_logging
from app.schemas.admm import TvModel
from app.schemas.geometry import BoundaryCondition
from app.schemas.prox import ShrinkFormula
from app.schemas.run import DeblurConfig, ProxCompareConfig
from app.services.experiment_service import ExperimentService
from app.utils.helpers import jsonable, load_json_config, load_weights, parse_group

logger = logging.getLogger("app.cli")

EXIT_OK, EXIT_FAILURE, EXIT_INVALID = 0, 1, 2


def _floats(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _bcs(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ogs-tv", description=settings.APP_NAME)
    parser.add_argument("--log-level", default=None, help="Overrides LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file; its values override flags")
        p.add_argument("--out", help="Directory for reports and images")
        p.add_argument("--seed", type=int)
        p.add_argument("--group", type=parse_group, help="K1xK2 or s")
        p.add_argument("--weights", help="'ones' or a headerless CSV of weights")
        p.add_argument(
            "--reproducible",
            action="store_true",
            help="Leave wall-clock fields out so reruns are byte-identical",
        )

    prox = sub.add_parser("prox-compare", help="Explicit shrinkage vs MM over a beta sweep")
    common(prox)
    prox.add_argument("--betas", type=_floats, help="Comma list, default 1,5,7,10,15,20,30,50")
    prox.add_argument("--bcs", type=_bcs, help="Comma list of zero, periodic, reflective")
    prox.add_argument("--size", type=int)
    prox.add_argument("--zero-block", type=int, dest="zero_block")
    prox.add_argument("--mm-iters", type=int, dest="mm_iters")
    prox.add_argument("--formula", choices=[f.value for f in ShrinkFormula])
    prox.add_argument("--workers", type=int)

    deblur = sub.add_parser("deblur", help="Restore a blurred, noisy image")
    common(deblur)
    deblur.add_argument("--model", choices=[m.value for m in TvModel])
    source = deblur.add_mutually_exclusive_group()
    source.add_argument("--image", help="Clean image to degrade (PNG or PGM)")
    source.add_argument("--synthetic", type=int, metavar="N", help="Built-in N x N phantom")
    deblur.add_argument("--degraded", help="Already degraded image; --image becomes the reference")
    deblur.add_argument("--kernel", help="average:m, gaussian:size:sigma or delta")
    deblur.add_argument("--bsnr", type=float)
    deblur.add_argument("--sp-level", type=float, dest="sp_level")
    for name in ("mu", "beta1", "beta2", "beta3", "gamma"):
        deblur.add_argument(f"--{name}", type=float)
    deblur.add_argument("--bc-gradient", dest="bc_gradient", choices=[b.value for b in BoundaryCondition])
    deblur.add_argument("--max-iters", type=int, dest="max_iters")
    deblur.add_argument("--rel-tol", type=float, dest="rel_tol")

    metrics = sub.add_parser("metrics", help="PSNR, ReE and MAE of an image against a reference")
    metrics.add_argument("image")
    metrics.add_argument("reference")
    return parser


_NOT_CONFIG = {"command", "log_level", "config", "reproducible"}


def resolve_config(args: argparse.Namespace) -> Dict[str, Any]:
    """Explicit flags, then the JSON file on top."""
    values = {
        key: value
        for key, value in vars(args).items()
        if key not in _NOT_CONFIG and value is not None
    }
    if "weights" in values:
        values["weights"] = load_weights(values["weights"])
        if values["weights"] is None:
            del values["weights"]
    if args.config:
        values.update(load_json_config(args.config))
    return values


def _emit(payload: Any) -> None:
    sys.stdout.write(json.dumps(jsonable(payload), indent=2, sort_keys=True) + "\n")


def _fail(exc: Exception, code: int) -> int:
    diagnostic = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, SolverDivergenceError):
        diagnostic["iteration"] = exc.iteration
    if isinstance(exc, ValidationError):
        diagnostic["message"] = [
            {"loc": list(err["loc"]), "msg": err["msg"]} for err in exc.errors()
        ]
    sys.stderr.write(json.dumps(diagnostic, indent=2, default=str) + "\n")
    return code


def run_prox_compare(args, service: ExperimentService) -> int:
    cfg = ProxCompareConfig(**resolve_config(args))
    reports = service.prox_compare(cfg)
    csv = service.comparison_csv(reports)
    sys.stdout.write(csv)
    if args.out:
        path = Path(args.out) / "prox_compare.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(csv)
        service.write_json(
            Path(args.out) / "prox_compare.json",
            {
                "config": cfg.model_dump(mode="json"),
                "rows": [r.model_dump(mode="json") for r in reports],
            },
        )
    return EXIT_OK


def run_deblur(args, service: ExperimentService) -> int:
    cfg = DeblurConfig(**resolve_config(args))
    _, _, report = service.deblur(cfg, reproducible=args.reproducible)
    _emit(report.model_dump(mode="json"))
    return EXIT_OK


def run_metrics(args, service: ExperimentService) -> int:
    _emit(service.metrics(args.image, args.reference).model_dump(mode="json"))
    return EXIT_OK


COMMANDS = {
    "prox-compare": run_prox_compare,
    "deblur": run_deblur,
    "metrics": run_metrics,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    service = ExperimentService()
    try:
        return COMMANDS[args.command](args, service)
    except ValidationError as exc:
        return _fail(exc, EXIT_INVALID)
    except OgsError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return _fail(exc, EXIT_FAILURE)


if __name__ == "__main__":
    sys.exit(main())
