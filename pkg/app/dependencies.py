from functools import lru_cache

from app.services.experiment_service import ExperimentService


@lru_cache
def get_experiment_service() -> ExperimentService:
    """Experiment service shared by the routers; runs write files only when given an out dir"""
    return ExperimentService()
