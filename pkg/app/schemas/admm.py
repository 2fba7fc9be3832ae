# app/schemas/admm.py
import math
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.config import settings
from app.schemas.geometry import BoundaryCondition, GroupShape2D, GroupWeights

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


class TvModel(str, Enum):
    """Anisotropic/isotropic OGS-TV with a Gaussian (L2) or impulse (L1) fidelity"""

    ATV_L2 = "atv-l2"
    ITV_L2 = "itv-l2"
    ATV_L1 = "atv-l1"
    ITV_L1 = "itv-l1"

    @property
    def isotropic(self) -> bool:
        return self in (TvModel.ITV_L2, TvModel.ITV_L1)

    @property
    def impulse(self) -> bool:
        return self in (TvModel.ATV_L1, TvModel.ITV_L1)


def _default_weights() -> GroupWeights:
    return GroupWeights.ones(GroupShape2D(k1=3, k2=3))


class AdmmConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: TvModel = TvModel.ATV_L2
    mu: float = Field(..., gt=0, description="Fidelity weight")
    beta1: float = Field(..., gt=0, description="Penalty on v = grad f")
    beta2: float = Field(..., gt=0, description="Penalty on u = f (L2) or z = Hf - g (L1)")
    beta3: float = Field(1.0, gt=0, description="Penalty on u = f, impulse models only")
    gamma: float = Field(settings.GAMMA, gt=0, lt=GOLDEN_RATIO)
    weights: GroupWeights = Field(default_factory=_default_weights)
    bc_gradient: BoundaryCondition = BoundaryCondition.ZERO
    max_iters: int = Field(settings.ADMM_MAX_ITERS, ge=1)
    rel_tol: float = Field(settings.ADMM_REL_TOL, gt=0)

    @field_validator("weights")
    @classmethod
    def matrix_weights(cls, v: GroupWeights) -> GroupWeights:
        if v.values.ndim != 2:
            raise ValueError("TV groups need a K1 x K2 weight matrix")
        return v

    @property
    def shape(self) -> GroupShape2D:
        return self.weights.shape


class AdmmState(BaseModel):
    """
    Iterate of one ADMM sweep.

    v stacks the two gradient auxiliaries (vx, vy for ATV, the channels of A for
    ITV) and lambda_v their multipliers. z and lambda_z exist for impulse models.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    f: np.ndarray
    v: np.ndarray
    u: np.ndarray
    lambda_v: np.ndarray
    lambda_u: np.ndarray
    z: Optional[np.ndarray] = None
    lambda_z: Optional[np.ndarray] = None
    objective: float


class SolveReport(BaseModel):
    model: TvModel
    iterations: int
    converged: bool
    objective_trajectory: List[float]
    psnr: Optional[float] = Field(None, description="Against the reference, null if identical")
    rel_err: Optional[float] = None
    elapsed: Optional[float] = Field(None, description="Wall-clock seconds")
