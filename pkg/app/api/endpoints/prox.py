from typing import List

from fastapi import APIRouter, Depends
from fastapi.responses import PlainTextResponse

from app.dependencies import get_experiment_service
from app.schemas.prox import ComparisonReport
from app.schemas.run import ProxCompareConfig
from app.services.experiment_service import ExperimentService

router = APIRouter()


@router.post("/compare", response_model=List[ComparisonReport])
def compare_prox(
    cfg: ProxCompareConfig,
    service: ExperimentService = Depends(get_experiment_service),
):
    """Explicit shrinkage against the MM oracle for every (bc, beta) cell"""
    return service.prox_compare(cfg)


@router.post("/compare.csv", response_class=PlainTextResponse)
def compare_prox_csv(
    cfg: ProxCompareConfig,
    service: ExperimentService = Depends(get_experiment_service),
):
    """Same sweep, rendered with the comparison table columns"""
    return service.comparison_csv(service.prox_compare(cfg))
