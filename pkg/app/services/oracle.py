# app/services/oracle.py
"""
Reference solvers for the overlapping-group prox.

mm_prox is the majorization-minimization fixed point iteration; every step
minimizes the quadratic upper bound ||g||^2 / (2 ||g_t||) of each group norm,
so the objective never increases. brute_force_prox minimizes a smoothed copy of
the objective with damped Newton steps and is only meant for small problems.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import linalg

from app.core.config import settings
from app.core.exceptions import InvalidArgumentError, OracleConvergenceError
from app.schemas.prox import (
    ComparisonReport,
    MmConfig,
    ProxProblem,
    ShrinkFormula,
)
from app.services.group_geometry import AnchorDomain, extend, half_widths, odd_kernel, spread
from app.services.ogs_prox import (
    as_channels,
    classify_regime,
    domain_energy,
    evaluate_objective,
    ogs_shrink,
)

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_ENTRIES = 64
# smoothing continuation: 1e-3, 1e-5, ... down to the requested epsilon
CONTINUATION_START = 1e-3
CONTINUATION_FACTOR = 1e-2
# relative resolution of objective values
ROUNDING = float(np.finfo(float).eps)
# objective increases smaller than this (relative) are rounding, not divergence
MONOTONE_SLACK = 1e-12


def mm_prox(
    problem: ProxProblem, cfg: Optional[MmConfig] = None
) -> Tuple[np.ndarray, List[float]]:
    """Run the MM iteration from z = x; returns the last iterate and the objective trajectory."""
    cfg = cfg or MmConfig()
    w2 = problem.weights.squared
    domain = AnchorDomain(problem.sample_shape, w2, problem.bc)
    mask = domain.anchor_mask()

    x = problem.data
    z = x.copy()
    trajectory = [evaluate_objective(z, problem)] if cfg.record_trajectory else []

    for step in range(cfg.max_iters):
        norms = np.sqrt(domain_energy(as_channels(z, problem.stacked), w2, domain))
        inverse = np.where(mask, 1.0 / np.maximum(norms, cfg.norm_floor), 0.0)
        curvature = domain.fold(spread(inverse, w2, None, domain.inner_bc))
        if problem.stacked:
            curvature = curvature[np.newaxis]
        z = x / (1.0 + curvature / problem.beta)

        if cfg.record_trajectory:
            value = evaluate_objective(z, problem)
            previous = trajectory[-1]
            if value > previous + MONOTONE_SLACK * max(abs(previous), 1.0):
                logger.warning(
                    "MM objective increased at step %d: %.15g -> %.15g",
                    step + 1,
                    previous,
                    value,
                )
            trajectory.append(value)

    return z, trajectory


class _SmoothedObjective:
    """sum_j sqrt(||B_j z||^2 + eps^2) + beta/2 ||z - x||^2 with explicit window matrices."""

    def __init__(self, problem: ProxProblem, epsilon: float):
        self.problem = problem
        self.epsilon = epsilon
        self.channels = as_channels(problem.data, problem.stacked)
        self.n = int(np.prod(problem.sample_shape))
        self.windows = self._window_matrices()
        # Q_j = B_j^T B_j
        self.gram = np.einsum("jtn,jtm->jnm", self.windows, self.windows)

    def _window_matrices(self) -> np.ndarray:
        problem = self.problem
        kernel = odd_kernel(problem.weights.values)
        halves = half_widths(problem.weights.values)
        domain = AnchorDomain(problem.sample_shape, problem.weights.squared, problem.bc)
        mask = domain.anchor_mask()

        columns = []
        for i in range(self.n):
            unit = np.zeros(self.n)
            unit[i] = 1.0
            lifted = domain.lift(unit.reshape(problem.sample_shape))
            padded = extend(lifted, domain.inner_bc, [(h, h) for h in halves])
            windows = sliding_window_view(padded, kernel.shape) * kernel
            columns.append(windows[mask].reshape(int(mask.sum()), kernel.size))
        return np.stack(columns, axis=-1)

    def _parts(self, z: np.ndarray):
        flat = z.reshape(len(self.channels), self.n)
        projected = np.einsum("jtn,cn->cjt", self.windows, flat)
        radii = np.sqrt(np.sum(projected**2, axis=(0, 2)) + self.epsilon**2)
        return flat, projected, radii

    def value(self, z: np.ndarray) -> float:
        _, _, radii = self._parts(z)
        fidelity = 0.5 * self.problem.beta * float(np.sum((z - self.channels) ** 2))
        return float(np.sum(radii)) + fidelity

    def gradient(self, z: np.ndarray) -> np.ndarray:
        flat, projected, radii = self._parts(z)
        pulled = np.einsum("jtn,cjt->cn", self.windows, projected / radii[None, :, None])
        data = self.channels.reshape(flat.shape)
        return (pulled + self.problem.beta * (flat - data)).reshape(self.channels.shape)

    def hessian(self, z: np.ndarray) -> np.ndarray:
        flat, projected, radii = self._parts(z)
        c, n = flat.shape
        pulled = np.einsum("jtn,cjt->cjn", self.windows, projected)
        block = np.einsum("jnm,j->nm", self.gram, 1.0 / radii)
        hess = np.einsum("cjn,djm,j->cndm", pulled, pulled, -1.0 / radii**3)
        for ch in range(c):
            hess[ch, :, ch, :] += block + self.problem.beta * np.eye(n)
        return hess.reshape(c * n, c * n)


def brute_force_prox(
    problem: ProxProblem,
    epsilon: Optional[float] = None,
    tol: Optional[float] = None,
    max_iters: Optional[int] = None,
) -> np.ndarray:
    """
    Minimize the epsilon-smoothed objective, continuing from heavier smoothing.

    Each level of smoothing_schedule(epsilon) is solved by damped Newton and
    warm-starts the next. OracleConvergenceError means a level neither reached
    its stopping rule nor could decrease the objective any further.
    """
    epsilon = settings.BRUTE_FORCE_EPSILON if epsilon is None else epsilon
    tol = settings.BRUTE_FORCE_TOL if tol is None else tol
    max_iters = settings.BRUTE_FORCE_MAX_ITERS if max_iters is None else max_iters
    if epsilon <= 0 or tol <= 0:
        raise InvalidArgumentError("epsilon and tol must be positive")
    if problem.data.size > BRUTE_FORCE_MAX_ENTRIES:
        raise InvalidArgumentError(
            f"brute-force oracle handles at most {BRUTE_FORCE_MAX_ENTRIES} entries, "
            f"got {problem.data.size}"
        )

    objective = _SmoothedObjective(problem, epsilon)
    z = problem.data.copy()
    for stage in smoothing_schedule(epsilon):
        objective.epsilon = stage
        z = _newton_minimize(objective, z, tol, max_iters)
    return z


def smoothing_schedule(epsilon: float) -> List[float]:
    """Decreasing smoothing levels ending at epsilon; each stage warm-starts the next."""
    stages = []
    level = CONTINUATION_START
    while level > 10.0 * epsilon:
        stages.append(level)
        level *= CONTINUATION_FACTOR
    stages.append(epsilon)
    return stages


def _newton_minimize(
    objective: _SmoothedObjective, z: np.ndarray, tol: float, max_iters: int
) -> np.ndarray:
    """
    Damped Newton on one smoothing level.

    Stops when the gradient norm is below tol, or when the Newton decrement
    g^T H^-1 g / 2 drops below the rounding resolution of the objective. Near a
    zero group the Hessian grows like 1/epsilon.
    """
    value = objective.value(z)
    grad = objective.gradient(z)
    grad_norm = float(np.linalg.norm(grad))

    for iteration in range(max_iters):
        if grad_norm <= tol:
            logger.debug(
                "brute force (eps=%.1e) converged in %d iterations", objective.epsilon, iteration
            )
            return z

        g = grad.ravel()
        newton = True
        try:
            direction = -linalg.solve(objective.hessian(z), g, assume_a="pos")
        except (linalg.LinAlgError, ValueError):
            newton = False
            direction = -g
        slope = float(direction @ g)
        if slope >= 0:
            newton = False
            direction, slope = -g, -float(g @ g)
        if newton and -0.5 * slope <= ROUNDING * max(abs(value), 1.0):
            logger.debug(
                "brute force (eps=%.1e) stopped on Newton decrement %.3e, gradient norm %.3e",
                objective.epsilon,
                -0.5 * slope,
                grad_norm,
            )
            return z
        direction = direction.reshape(z.shape)

        step = 1.0
        while step > 1e-20:
            candidate = z + step * direction
            candidate_value = objective.value(candidate)
            if candidate_value <= value + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            if grad_norm <= np.sqrt(tol):
                logger.debug(
                    "brute force stalled at rounding floor, gradient norm %.3e", grad_norm
                )
                return z
            raise OracleConvergenceError(iteration, grad_norm, z)

        z, value = candidate, candidate_value
        grad = objective.gradient(z)
        grad_norm = float(np.linalg.norm(grad))

    if grad_norm <= tol:
        return z
    raise OracleConvergenceError(max_iters, grad_norm, z)


def compare(
    problem: ProxProblem,
    cfg: Optional[MmConfig] = None,
    formula: ShrinkFormula = ShrinkFormula.CLIPPED_SUM,
) -> ComparisonReport:
    """Explicit shrinkage against MM, with the three comparison metrics."""
    cfg = cfg or MmConfig()
    explicit = ogs_shrink(problem, formula)
    z_mm, mm_trajectory = mm_prox(problem, cfg)

    f_mm = mm_trajectory[-1] if mm_trajectory else evaluate_objective(z_mm, problem)
    gap = abs(explicit.objective - f_mm)
    rel_err_objective = gap / abs(f_mm) if f_mm != 0 else gap

    diff = explicit.minimizer - z_mm
    mm_norm = float(np.linalg.norm(z_mm))
    if mm_norm <= settings.ZERO_NORM_TOL * float(np.linalg.norm(problem.data)):
        rel_err_minimizer = None
    else:
        rel_err_minimizer = float(np.linalg.norm(diff)) / mm_norm

    return ComparisonReport(
        beta=problem.beta,
        bc=problem.bc,
        regime=classify_regime(problem.beta, problem.weights),
        formula=formula,
        rel_err_objective=float(rel_err_objective),
        rel_err_minimizer=rel_err_minimizer,
        mae_minimizer=float(np.mean(np.abs(diff))),
        objective_trajectory=[explicit.objective] * (cfg.max_iters + 1),
        mm_trajectory=mm_trajectory,
    )


def table_matrix(size: int = 100, zero_block: int = 11, seed: int = 0) -> np.ndarray:
    """Seeded uniform [0, 1) square matrix with a centred zero_block x zero_block hole."""
    if size < 1 or not 0 <= zero_block <= size:
        raise InvalidArgumentError(
            f"need size >= 1 and 0 <= zero_block <= size, got {size}, {zero_block}"
        )
    matrix = np.random.default_rng(seed).random((size, size))
    start = (size - zero_block) // 2
    matrix[start : start + zero_block, start : start + zero_block] = 0.0
    return matrix
