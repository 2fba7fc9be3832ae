from pathlib import Path

from fastapi import APIRouter, Depends, Query

from app.core.config import settings
from app.core.exceptions import InvalidArgumentError
from app.dependencies import get_experiment_service
from app.schemas.run import DeblurConfig, DeblurReport
from app.services.experiment_service import ExperimentService
from app.utils.helpers import resolve_under

router = APIRouter()

PATH_FIELDS = ("image", "degraded", "out")


def confine_paths(cfg: DeblurConfig) -> DeblurConfig:
    """Rewrite request file paths to live under API_DATA_ROOT"""
    given = {name: getattr(cfg, name) for name in PATH_FIELDS if getattr(cfg, name)}
    if not given:
        return cfg
    if not settings.API_DATA_ROOT:
        raise InvalidArgumentError(
            f"{', '.join(given)} need API_DATA_ROOT; use synthetic images over HTTP"
        )
    root = Path(settings.API_DATA_ROOT)
    return cfg.model_copy(
        update={name: str(resolve_under(root, value)) for name, value in given.items()}
    )


@router.post("/deblur", response_model=DeblurReport)
def deblur(
    cfg: DeblurConfig,
    reproducible: bool = Query(False, description="Leave out wall-clock time"),
    service: ExperimentService = Depends(get_experiment_service),
):
    """Degrade (unless a degraded image is given) and restore with the selected model"""
    _, _, report = service.deblur(confine_paths(cfg), reproducible=reproducible)
    return report
