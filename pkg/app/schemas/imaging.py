# app/schemas/imaging.py
import math
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class KernelKind(str, Enum):
    AVERAGE = "average"
    GAUSSIAN = "gaussian"
    DELTA = "delta"


class BlurKernel(BaseModel):
    """Normalized point spread function with an odd footprint, centred on its middle tap"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: KernelKind
    size: int = Field(1, ge=1, description="Nominal footprint before odd padding")
    sigma: Optional[float] = Field(None, gt=0)
    taps: np.ndarray

    @field_validator("taps", mode="before")
    @classmethod
    def normalized_odd_taps(cls, v) -> np.ndarray:
        arr = np.asarray(v, dtype=float)
        if arr.ndim != 2 or any(k % 2 == 0 for k in arr.shape):
            raise ValueError(f"kernel taps must be an odd 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or not math.isclose(arr.sum(), 1.0, abs_tol=1e-12):
            raise ValueError("kernel taps must be finite and sum to 1")
        arr.setflags(write=False)
        return arr

    @property
    def shape(self):
        return self.taps.shape

    def describe(self) -> str:
        if self.kind is KernelKind.GAUSSIAN:
            return f"gaussian:{self.size}:{self.sigma:g}"
        if self.kind is KernelKind.AVERAGE:
            return f"average:{self.size}"
        return "delta"


class MetricsReport(BaseModel):
    """PSNR is null when the two images are identical"""

    psnr: Optional[float] = None
    rel_err: float
    mae: float
    shape: List[int]
