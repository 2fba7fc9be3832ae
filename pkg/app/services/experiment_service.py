# app/services/experiment_service.py
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import BinaryIO, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from app.core.exceptions import InvalidArgumentError
from app.schemas.imaging import MetricsReport
from app.schemas.prox import ComparisonReport, MmConfig, ProxProblem
from app.schemas.run import DeblurConfig, DeblurReport, ProxCompareConfig
from app.services import imaging
from app.services.image_io import read_image, write_image
from app.services.oracle import compare, table_matrix
from app.services.tv_admm import default_config, solve
from app.utils.helpers import build_weights, jsonable, parse_kernel

logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = ["BC", "beta", "ReE of f", "ReE of X", "MAE of X", "regime"]


class ExperimentService:
    """Runs the comparison sweep, restorations and metrics for the CLI and the API"""

    def __init__(self, output_dir: Optional[Union[str, Path]] = None):
        self.output_dir = Path(output_dir) if output_dir is not None else None

    # Prox comparison

    def _comparison_matrix(self, cfg: ProxCompareConfig) -> np.ndarray:
        matrix = table_matrix(cfg.size, cfg.zero_block, cfg.seed)
        if len(cfg.group) == 1:
            # 1-D groups run over the flattened matrix
            return matrix.ravel()
        return matrix

    def prox_compare(self, cfg: ProxCompareConfig) -> List[ComparisonReport]:
        """One report per (bc, beta), bcs outermost, in config order."""
        data = self._comparison_matrix(cfg)
        weights = build_weights(cfg.group, cfg.weights)
        mm = MmConfig(max_iters=cfg.mm_iters)
        cells = [(bc, beta) for bc in cfg.bcs for beta in cfg.betas]

        def run(cell) -> ComparisonReport:
            bc, beta = cell
            problem = ProxProblem(data=data, beta=beta, weights=weights, bc=bc)
            report = compare(problem, mm, cfg.formula)
            logger.info(
                "bc=%s beta=%g ReE f=%.2e ReE X=%s",
                bc.value,
                beta,
                report.rel_err_objective,
                "n/a" if report.rel_err_minimizer is None else f"{report.rel_err_minimizer:.2e}",
            )
            return report

        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                return list(pool.map(run, cells))
        return [run(cell) for cell in cells]

    @staticmethod
    def comparison_frame(reports: List[ComparisonReport]) -> pd.DataFrame:
        rows = [
            {
                "BC": report.bc.value,
                "beta": report.beta,
                "ReE of f": report.rel_err_objective,
                "ReE of X": report.rel_err_minimizer,
                "MAE of X": report.mae_minimizer,
                "regime": report.regime.value,
            }
            for report in reports
        ]
        return pd.DataFrame(rows, columns=COMPARISON_COLUMNS)

    @staticmethod
    def comparison_csv(reports: List[ComparisonReport]) -> str:
        frame = ExperimentService.comparison_frame(reports)
        return frame.to_csv(index=False, float_format="%.6e", na_rep="")

    # Restoration

    def _clean_image(self, cfg: DeblurConfig) -> Optional[np.ndarray]:
        if cfg.synthetic is not None:
            return imaging.make_phantom(cfg.synthetic)
        if cfg.image is not None:
            return read_image(cfg.image)
        return None

    def deblur(
        self, cfg: DeblurConfig, reproducible: bool = False
    ) -> Tuple[np.ndarray, np.ndarray, DeblurReport]:
        """Returns the restored image, the degraded input and the report."""
        kernel = parse_kernel(cfg.kernel or cfg.default_kernel)
        clean = self._clean_image(cfg)
        bsnr_clean = bsnr_observed = None

        if cfg.degraded is not None:
            degraded = read_image(cfg.degraded)
            if clean is not None and clean.shape != degraded.shape:
                raise InvalidArgumentError(
                    f"reference {clean.shape} and degraded {degraded.shape} differ in shape"
                )
        else:
            blurred = imaging.blur_periodic(clean, kernel)
            if cfg.model.impulse:
                degraded = imaging.add_salt_pepper(blurred, cfg.sp_level, cfg.seed)
            else:
                degraded = imaging.add_gaussian_noise(blurred, cfg.bsnr, cfg.seed)
                noise = degraded - blurred
                bsnr_clean = imaging.bsnr(blurred, noise)
                bsnr_observed = imaging.bsnr(degraded, noise)

        admm = default_config(
            cfg.model,
            sp_level=cfg.sp_level,
            mu=cfg.mu,
            beta1=cfg.beta1,
            beta2=cfg.beta2,
            beta3=cfg.beta3,
            gamma=cfg.gamma,
            weights=build_weights(cfg.group, cfg.weights),
            bc_gradient=cfg.bc_gradient,
            max_iters=cfg.max_iters,
            rel_tol=cfg.rel_tol,
        )
        restored, solve_report = solve(degraded, kernel, admm, reference=clean)
        if reproducible:
            solve_report.elapsed = None

        degraded_psnr = None
        if clean is not None:
            value = imaging.psnr(degraded, clean)
            degraded_psnr = value if np.isfinite(value) else None

        resolved = cfg.model_dump(mode="json")
        resolved.update(
            kernel=kernel.describe(),
            mu=admm.mu,
            beta1=admm.beta1,
            beta2=admm.beta2,
            beta3=admm.beta3,
            gamma=admm.gamma,
        )
        report = DeblurReport(
            config=resolved,
            kernel=kernel.describe(),
            solve=solve_report,
            degraded_psnr=degraded_psnr,
            bsnr_clean=bsnr_clean,
            bsnr_observed=bsnr_observed,
        )
        out = Path(cfg.out) if cfg.out else self.output_dir
        if out is not None:
            self._write_run(out, restored, degraded, report)
        return restored, degraded, report

    def _write_run(
        self, out: Path, restored: np.ndarray, degraded: np.ndarray, report: DeblurReport
    ) -> None:
        report.restored_path = str(write_image(out / "restored.png", restored))
        report.degraded_path = str(write_image(out / "degraded.png", degraded))
        payload = report.model_dump(mode="json")
        # report files are byte-identical across reruns; timing goes to stdout only
        payload["solve"]["elapsed"] = None
        self.write_json(out / "report.json", payload)
        logger.info("wrote restoration to %s", out)

    # Metrics

    def metrics(
        self, a: Union[str, Path, BinaryIO], b: Union[str, Path, BinaryIO]
    ) -> MetricsReport:
        """Metrics of a against the reference b."""
        f, f_ref = read_image(a), read_image(b)
        value = imaging.psnr(f, f_ref)
        return MetricsReport(
            psnr=value if np.isfinite(value) else None,
            rel_err=imaging.rel_err(f, f_ref),
            mae=imaging.mae(f, f_ref),
            shape=list(f.shape),
        )

    @staticmethod
    def write_json(path: Path, payload) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(jsonable(payload), indent=2, sort_keys=True) + "\n")
        return path
