# app/schemas/geometry.py
from enum import Enum
from functools import cached_property
from typing import Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class BoundaryCondition(str, Enum):
    """How a signal is continued past its ends"""

    PERIODIC = "periodic"
    ZERO = "zero"
    REFLECTIVE = "reflective"


class GroupShape1D(BaseModel):
    """Window of s consecutive samples anchored at i: [i - s_l, i + s_r]"""

    model_config = ConfigDict(frozen=True)

    s: int = Field(..., gt=0, description="Group size")

    @property
    def s_l(self) -> int:
        return (self.s - 1) // 2

    @property
    def s_r(self) -> int:
        return self.s // 2

    @property
    def dims(self) -> Tuple[int, ...]:
        return (self.s,)

    @property
    def size(self) -> int:
        return self.s


class GroupShape2D(BaseModel):
    """K1 x K2 box anchored at (i, j): rows [i - l1, i + r1], cols [j - l2, j + r2]"""

    model_config = ConfigDict(frozen=True)

    k1: int = Field(..., gt=0, description="Group rows")
    k2: int = Field(..., gt=0, description="Group columns")

    @property
    def l1(self) -> int:
        return (self.k1 - 1) // 2

    @property
    def r1(self) -> int:
        return self.k1 // 2

    @property
    def l2(self) -> int:
        return (self.k2 - 1) // 2

    @property
    def r2(self) -> int:
        return self.k2 // 2

    @property
    def dims(self) -> Tuple[int, ...]:
        return (self.k1, self.k2)

    @property
    def size(self) -> int:
        return self.k1 * self.k2


GroupShape = Union[GroupShape1D, GroupShape2D]


def shape_for(dims: Tuple[int, ...]) -> GroupShape:
    if len(dims) == 1:
        return GroupShape1D(s=dims[0])
    if len(dims) == 2:
        return GroupShape2D(k1=dims[0], k2=dims[1])
    raise ValueError(f"groups are 1-D or 2-D, got dims {dims}")


class GroupWeights(BaseModel):
    """
    Weight vector w_g (or matrix W_g) shared by every group.

    Signs carry no information for a norm, so values are stored as absolute values.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def absolute_finite_values(cls, v) -> np.ndarray:
        arr = np.abs(np.asarray(v, dtype=float))
        if arr.ndim not in (1, 2) or arr.size == 0:
            raise ValueError("weights must be a non-empty vector or matrix")
        if not np.all(np.isfinite(arr)):
            raise ValueError("weights must be finite")
        if not np.any(arr > 0):
            raise ValueError("at least one weight must be strictly positive")
        arr.setflags(write=False)
        return arr

    @classmethod
    def ones(cls, shape: GroupShape) -> "GroupWeights":
        return cls(values=np.ones(shape.dims))

    @property
    def shape(self) -> GroupShape:
        return shape_for(self.values.shape)

    @cached_property
    def squared(self) -> np.ndarray:
        return self.values**2

    @cached_property
    def squared_norm(self) -> float:
        return float(np.sum(self.squared))

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.squared_norm))
