# app/schemas/run.py
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.core.config import settings
from app.schemas.admm import GOLDEN_RATIO, SolveReport, TvModel
from app.schemas.geometry import BoundaryCondition
from app.schemas.prox import ShrinkFormula

DEFAULT_BETAS = [1.0, 5.0, 7.0, 10.0, 15.0, 20.0, 30.0, 50.0]


def _group_dims(v: List[int]) -> List[int]:
    if len(v) not in (1, 2) or any(k < 1 for k in v):
        raise ValueError(f"group must be one or two positive sizes, got {v}")
    return v


class ProxCompareConfig(BaseModel):
    """Explicit shrinkage vs MM on the seeded matrix with a zero block"""

    betas: List[float] = Field(default_factory=lambda: list(DEFAULT_BETAS))
    bcs: List[BoundaryCondition] = Field(
        default_factory=lambda: [BoundaryCondition.ZERO, BoundaryCondition.PERIODIC]
    )
    size: int = Field(100, ge=1)
    zero_block: int = Field(11, ge=0)
    group: List[int] = Field(default_factory=lambda: [3, 3])
    weights: Optional[List[Any]] = Field(
        None, description="Weight vector or matrix; unit weights when omitted"
    )
    seed: int = 0
    mm_iters: int = Field(settings.MM_ITERATIONS, ge=1)
    formula: ShrinkFormula = ShrinkFormula.CLIPPED_SUM
    workers: int = Field(1, ge=1)

    @field_validator("betas")
    @classmethod
    def positive_betas(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("at least one beta is required")
        if any(not b > 0 for b in v):
            raise ValueError(f"every beta must be positive, got {v}")
        return v

    @field_validator("group")
    @classmethod
    def valid_group(cls, v: List[int]) -> List[int]:
        return _group_dims(v)

    @model_validator(mode="after")
    def block_fits(self) -> "ProxCompareConfig":
        if self.zero_block > self.size:
            raise ValueError("zero_block cannot exceed size")
        if any(k > self.size for k in self.group):
            raise ValueError(f"group {self.group} does not fit a {self.size}-sample matrix")
        return self


class DeblurConfig(BaseModel):
    """
    One restoration run.

    The clean image comes from a file (image) or the built-in phantom
    (synthetic); it is blurred and corrupted unless an already degraded image
    is given, in which case the clean image only serves as reference.
    """

    model: TvModel = TvModel.ATV_L2
    image: Optional[str] = None
    synthetic: Optional[int] = Field(None, ge=16)
    degraded: Optional[str] = None
    kernel: Optional[str] = Field(
        None, description="average:m, gaussian:size:sigma or delta; model default when omitted"
    )
    group: List[int] = Field(default_factory=lambda: [3, 3])
    weights: Optional[List[List[float]]] = None
    bsnr: float = Field(40.0, description="Gaussian noise level in dB, L2 models")
    sp_level: float = Field(0.3, ge=0.0, le=1.0, description="Impulse noise level, L1 models")
    seed: int = 0
    mu: Optional[float] = Field(None, gt=0)
    beta1: Optional[float] = Field(None, gt=0)
    beta2: Optional[float] = Field(None, gt=0)
    beta3: Optional[float] = Field(None, gt=0)
    gamma: Optional[float] = Field(None, gt=0, lt=GOLDEN_RATIO)
    bc_gradient: BoundaryCondition = BoundaryCondition.ZERO
    max_iters: int = Field(settings.ADMM_MAX_ITERS, ge=1)
    rel_tol: float = Field(settings.ADMM_REL_TOL, gt=0)
    out: Optional[str] = None

    @field_validator("group")
    @classmethod
    def valid_group(cls, v: List[int]) -> List[int]:
        if len(v) != 2:
            raise ValueError("TV groups are K1 x K2")
        return _group_dims(v)

    @model_validator(mode="after")
    def one_source(self) -> "DeblurConfig":
        if self.image is not None and self.synthetic is not None:
            raise ValueError("give either image or synthetic, not both")
        if self.image is None and self.synthetic is None and self.degraded is None:
            raise ValueError("one of image, synthetic or degraded is required")
        return self

    @property
    def default_kernel(self) -> str:
        return "gaussian:7:5" if self.model.impulse else "average:9"


class DeblurReport(BaseModel):
    config: Dict[str, Any]
    kernel: str
    solve: SolveReport
    degraded_psnr: Optional[float] = None
    bsnr_clean: Optional[float] = Field(None, description="Achieved BSNR against the blurred image")
    bsnr_observed: Optional[float] = Field(None, description="Achieved BSNR against the observed image")
    restored_path: Optional[str] = None
    degraded_path: Optional[str] = None
