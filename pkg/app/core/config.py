from typing import Dict, List, Union
from pydantic_settings import BaseSettings
from pydantic import field_validator
from decouple import config


class Settings(BaseSettings):
    # Application Settings
    APP_NAME: str = config("APP_NAME", default="OGS-TV Shrinkage Toolkit")
    APP_VERSION: str = config("APP_VERSION", default="1.0.0")
    DEBUG: bool = config("DEBUG", default=False, cast=bool)

    # Logging
    LOG_LEVEL: str = config("LOG_LEVEL", default="INFO")

    # Group geometry
    FFT_WINDOW_THRESHOLD: int = config("FFT_WINDOW_THRESHOLD", default=64, cast=int)

    # Shrinkage regimes
    LARGE_BETA_FACTOR: float = config("LARGE_BETA_FACTOR", default=30.0, cast=float)

    # Oracles
    MM_ITERATIONS: int = config("MM_ITERATIONS", default=20, cast=int)
    MM_NORM_FLOOR: float = config("MM_NORM_FLOOR", default=1e-12, cast=float)
    ZERO_NORM_TOL: float = config("ZERO_NORM_TOL", default=1e-10, cast=float)
    BRUTE_FORCE_EPSILON: float = config("BRUTE_FORCE_EPSILON", default=1e-9, cast=float)
    BRUTE_FORCE_TOL: float = config("BRUTE_FORCE_TOL", default=1e-10, cast=float)
    BRUTE_FORCE_MAX_ITERS: int = config(
        "BRUTE_FORCE_MAX_ITERS", default=2000, cast=int
    )

    # ADMM
    ADMM_MAX_ITERS: int = config("ADMM_MAX_ITERS", default=500, cast=int)
    ADMM_REL_TOL: float = config("ADMM_REL_TOL", default=1e-5, cast=float)
    GAMMA: float = config("GAMMA", default=1.618, cast=float)

    # Gaussian-noise (L2) models
    L2_BETA1_ATV: float = config("L2_BETA1_ATV", default=35.0, cast=float)
    L2_BETA1_ITV: float = config("L2_BETA1_ITV", default=100.0, cast=float)
    L2_BETA2: float = config("L2_BETA2", default=20.0, cast=float)
    L2_MU: float = config("L2_MU", default=1e5, cast=float)

    # Impulse-noise (L1) models
    L1_BETA1: float = config("L1_BETA1", default=80.0, cast=float)
    L1_BETA2: float = config("L1_BETA2", default=2000.0, cast=float)
    L1_BETA3: float = config("L1_BETA3", default=1.0, cast=float)
    L1_MU_ATV: Dict[float, float] = {0.3: 180.0, 0.4: 140.0, 0.5: 100.0}
    L1_MU_ITV: Dict[float, float] = {0.3: 140.0, 0.4: 100.0, 0.5: 80.0}

    # HTTP API file access; empty disables image, degraded and out paths in requests
    API_DATA_ROOT: str = config("API_DATA_ROOT", default="")

    # CORS Settings
    BACKEND_CORS_ORIGINS: List[str] = [
        "http://localhost:3000",
        "http://localhost:8080",
    ]

    @field_validator("BACKEND_CORS_ORIGINS", mode="before")
    @classmethod
    def assemble_cors_origins(cls, v: Union[str, List[str]]) -> Union[List[str], str]:
        if isinstance(v, str) and not v.startswith("["):
            return [i.strip() for i in v.split(",")]
        elif isinstance(v, (list, str)):
            return v
        raise ValueError(v)

    class Config:
        case_sensitive = True
        env_file = ".env"
        extra = "ignore"


settings = Settings()
