# app/schemas/prox.py
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import settings
from app.schemas.geometry import BoundaryCondition, GroupWeights


class Regime(str, Enum):
    """Where beta sits relative to the accuracy bounds of the explicit formula"""

    EXACT_SMALL_BETA = "exact_small_beta"
    EXACT_LARGE_BETA = "exact_large_beta"
    APPROXIMATE = "approximate"


class ShrinkFormula(str, Enum):
    """Explicit OGS formulas: clip each group term, or clip the summed reciprocals"""

    CLIPPED_SUM = "clipped_sum"
    CLIPPED_TOTAL = "clipped_total"


class ProxProblem(BaseModel):
    """min_z ||z||_{w,2,1} + beta/2 ||z - x||^2 over translation-invariant groups"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    data: np.ndarray
    beta: float = Field(..., description="Fidelity weight")
    weights: GroupWeights
    bc: BoundaryCondition = Field(
        BoundaryCondition.ZERO, description="Boundary rule for the groups"
    )
    stacked: bool = Field(
        False, description="Leading axis holds channels that share the groups"
    )

    @field_validator("data", mode="before")
    @classmethod
    def finite_data(cls, v) -> np.ndarray:
        arr = np.asarray(v, dtype=float)
        if arr.size == 0:
            raise ValueError("data must be non-empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("data must be finite")
        return arr

    @field_validator("beta")
    @classmethod
    def positive_beta(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("beta must be positive")
        return v

    @model_validator(mode="after")
    def groups_fit_data(self) -> "ProxProblem":
        group_ndim = self.weights.values.ndim
        if self.data.ndim != group_ndim + int(self.stacked):
            raise ValueError(
                f"{group_ndim}-D groups need {group_ndim + int(self.stacked)}-D data, "
                f"got {self.data.ndim}-D"
            )
        sample_shape = self.data.shape[1:] if self.stacked else self.data.shape
        if any(k > n for k, n in zip(self.weights.values.shape, sample_shape)):
            raise ValueError(
                f"group {self.weights.values.shape} is larger than the signal {sample_shape}"
            )
        return self

    @property
    def sample_shape(self):
        return self.data.shape[1:] if self.stacked else self.data.shape


class ShrinkResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    minimizer: np.ndarray
    objective: float
    regime: Regime


class MmConfig(BaseModel):
    max_iters: int = Field(settings.MM_ITERATIONS, ge=1)
    record_trajectory: bool = True
    norm_floor: float = Field(settings.MM_NORM_FLOOR, gt=0)


class ComparisonReport(BaseModel):
    """Explicit formula against the MM iteration on one problem"""

    beta: float
    bc: BoundaryCondition
    regime: Regime
    formula: ShrinkFormula = ShrinkFormula.CLIPPED_SUM
    rel_err_objective: float
    rel_err_minimizer: Optional[float] = Field(
        None, description="Omitted when the MM minimizer is zero"
    )
    mae_minimizer: float
    objective_trajectory: List[float] = Field(
        default_factory=list, description="Explicit result, replicated per MM step"
    )
    mm_trajectory: List[float] = Field(default_factory=list)
