from fastapi import APIRouter, Depends, File, UploadFile

from app.dependencies import get_experiment_service
from app.schemas.imaging import MetricsReport
from app.services.experiment_service import ExperimentService

router = APIRouter()


@router.post("", response_model=MetricsReport)
def image_metrics(
    image: UploadFile = File(..., description="Image to score"),
    reference: UploadFile = File(..., description="Ground truth"),
    service: ExperimentService = Depends(get_experiment_service),
):
    """PSNR, relative error and MAE of an uploaded image against a reference"""
    return service.metrics(image.file, reference.file)
