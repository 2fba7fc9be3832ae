from .geometry import (
    BoundaryCondition,
    GroupShape,
    GroupShape1D,
    GroupShape2D,
    GroupWeights,
)
from .prox import ComparisonReport, MmConfig, ProxProblem, Regime, ShrinkFormula, ShrinkResult
from .admm import AdmmConfig, AdmmState, SolveReport, TvModel
from .imaging import BlurKernel, KernelKind, MetricsReport
from .run import DeblurConfig, DeblurReport, ProxCompareConfig

__all__ = [
    "BoundaryCondition",
    "GroupShape",
    "GroupShape1D",
    "GroupShape2D",
    "GroupWeights",
    "ComparisonReport",
    "MmConfig",
    "ProxProblem",
    "Regime",
    "ShrinkFormula",
    "ShrinkResult",
    "AdmmConfig",
    "AdmmState",
    "SolveReport",
    "TvModel",
    "BlurKernel",
    "KernelKind",
    "MetricsReport",
    "DeblurConfig",
    "DeblurReport",
    "ProxCompareConfig",
]
