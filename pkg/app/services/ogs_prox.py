# app/services/ogs_prox.py
import logging
from typing import Tuple

import numpy as np

from app.core.config import settings
from app.core.exceptions import InvalidArgumentError
from app.schemas.geometry import BoundaryCondition, GroupWeights
from app.schemas.prox import ProxProblem, Regime, ShrinkFormula, ShrinkResult
from app.services.group_geometry import AnchorDomain, group_energy, spread

logger = logging.getLogger(__name__)


def soft_threshold(x: np.ndarray, beta: float) -> np.ndarray:
    """sgn(x) * max(|x| - 1/beta, 0), the prox of the l1 norm"""
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - 1.0 / beta, 0.0)


def group_threshold(x: np.ndarray, beta: float) -> np.ndarray:
    """x/||x|| * max(||x|| - 1/beta, 0), zero when x is zero"""
    x = np.asarray(x, dtype=float)
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        return np.zeros_like(x)
    return x * (max(norm - 1.0 / beta, 0.0) / norm)


def regime_bounds(weights: GroupWeights) -> Tuple[float, float]:
    """Betas at or below the first bound, or at or above the second, are exact"""
    lower = weights.norm / np.sqrt(weights.values.size)
    return lower, settings.LARGE_BETA_FACTOR * lower


def classify_regime(beta: float, weights: GroupWeights) -> Regime:
    lower, upper = regime_bounds(weights)
    if beta <= lower:
        return Regime.EXACT_SMALL_BETA
    if beta >= upper:
        return Regime.EXACT_LARGE_BETA
    return Regime.APPROXIMATE


def as_channels(data: np.ndarray, stacked: bool) -> np.ndarray:
    return data if stacked else data[np.newaxis]


def domain_energy(
    channels: np.ndarray, w2: np.ndarray, domain: AnchorDomain
) -> np.ndarray:
    return sum(
        group_energy(domain.lift(c) ** 2, w2, None, domain.inner_bc) for c in channels
    )


def ogs_norm(
    z: np.ndarray,
    weights: GroupWeights,
    bc: BoundaryCondition = BoundaryCondition.ZERO,
    stacked: bool = False,
) -> float:
    """Sum over anchors of the weighted group norm (Frobenius for 2-D groups)"""
    channels = as_channels(np.asarray(z, dtype=float), stacked)
    domain = AnchorDomain(channels.shape[1:], weights.squared, bc)
    energy = domain_energy(channels, weights.squared, domain)
    return float(np.sum(np.sqrt(energy[domain.anchor_mask()])))


def evaluate_objective(z: np.ndarray, problem: ProxProblem) -> float:
    """||z||_{w,2,1} + beta/2 ||z - x||^2 under the problem's boundary rule"""
    z = np.asarray(z, dtype=float)
    if z.shape != problem.data.shape:
        raise InvalidArgumentError(
            f"z has shape {z.shape}, problem data has shape {problem.data.shape}"
        )
    penalty = ogs_norm(z, problem.weights, problem.bc, problem.stacked)
    return penalty + 0.5 * problem.beta * float(np.sum((z - problem.data) ** 2))


def shrink_gain(
    problem: ProxProblem, formula: ShrinkFormula = ShrinkFormula.CLIPPED_SUM
) -> np.ndarray:
    """Per-sample gain G(x_i) (or the clipped 1 - F(x_i)/beta) in [0, 1]"""
    weights, beta = problem.weights, problem.beta
    w2 = weights.squared
    channels = as_channels(problem.data, problem.stacked)
    domain = AnchorDomain(channels.shape[1:], w2, problem.bc)

    norms = np.sqrt(domain_energy(channels, w2, domain))
    # a zero group holds only zero samples, so any finite reciprocal will do
    safe = np.where(norms > 0, norms, 1.0)

    if formula is ShrinkFormula.CLIPPED_TOTAL:
        reciprocal_sum = spread(1.0 / safe, w2, None, domain.inner_bc)
        gain = np.maximum(1.0 - reciprocal_sum / beta, 0.0)
    else:
        terms = np.maximum(1.0 / weights.squared_norm - 1.0 / (beta * safe), 0.0)
        gain = spread(terms, w2, None, domain.inner_bc)
    return np.clip(domain.crop(gain), 0.0, 1.0)


def ogs_shrink(
    problem: ProxProblem, formula: ShrinkFormula = ShrinkFormula.CLIPPED_SUM
) -> ShrinkResult:
    """
    Explicit minimizer of the overlapping-group prox, z_i = G(x_i) * x_i.

    G(x_i) sums, over the groups j holding sample i, the clipped terms
    max(w^2/||w||^2 - w^2/(beta ||w o (x_j)_g||), 0): one correlation for the
    group norms and one convolution to spread the terms back. Unit weights give
    the unweighted formula; a 1x1 group gives soft thresholding.
    """
    gain = shrink_gain(problem, formula)
    minimizer = (gain[np.newaxis] if problem.stacked else gain) * problem.data
    regime = classify_regime(problem.beta, problem.weights)
    logger.debug(
        "ogs_shrink beta=%.4g bc=%s regime=%s", problem.beta, problem.bc.value, regime.value
    )
    return ShrinkResult(
        minimizer=minimizer,
        objective=evaluate_objective(minimizer, problem),
        regime=regime,
    )
