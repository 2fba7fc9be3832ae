# app/services/tv_admm.py
"""
ADMM solvers for OGS total variation restoration.

Images, blur and gradients are periodic, so every f-update is a pointwise
division in the 2-D DFT domain. The gradient auxiliaries are shrunk with the
explicit OGS formula under their own boundary rule (zero by default).
"""
import logging
import time
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import (
    InvalidArgumentError,
    SolverDivergenceError,
    SpectralSystemError,
)
from app.schemas.admm import AdmmConfig, AdmmState, SolveReport, TvModel
from app.schemas.imaging import BlurKernel
from app.schemas.prox import ProxProblem
from app.services.imaging import (
    as_image,
    blur_adjoint,
    blur_periodic,
    kernel_eigenvalues,
    psnr,
    rel_err,
)
from app.services.ogs_prox import ogs_norm, regime_bounds, shrink_gain, soft_threshold

logger = logging.getLogger(__name__)

IterateCallback = Callable[[int, AdmmState], None]


def grad(f: np.ndarray) -> np.ndarray:
    """Forward differences with periodic wrap, stacked as (gx, gy); gx runs along rows."""
    f = np.asarray(f, dtype=float)
    return np.stack([np.roll(f, -1, axis=0) - f, np.roll(f, -1, axis=1) - f])


def grad_adjoint(p: np.ndarray) -> np.ndarray:
    """grad^* (p): backward differences, the negative divergence."""
    px, py = p
    return (np.roll(px, 1, axis=0) - px) + (np.roll(py, 1, axis=1) - py)


def div(p: np.ndarray) -> np.ndarray:
    return -grad_adjoint(p)


def project_box(f: np.ndarray) -> np.ndarray:
    return np.clip(f, 0.0, 1.0)


@lru_cache(maxsize=8)
def laplacian_eigenvalues(shape: Tuple[int, int]) -> np.ndarray:
    """|Dx^|^2 + |Dy^|^2, the spectrum of grad^* grad; cached per shape, read-only."""
    delta = np.zeros(shape)
    delta[0, 0] = 1.0
    dx, dy = np.fft.fft2(grad(delta), axes=(-2, -1))
    spectrum = np.abs(dx) ** 2 + np.abs(dy) ** 2
    spectrum.setflags(write=False)
    return spectrum


class SpectralSystem:
    """(c_grad grad^*grad + c_blur H^*H + c_id I) f = rhs, diagonal under the 2-D DFT."""

    def __init__(self, kernel_eigs: np.ndarray, coeffs: Sequence[float]):
        c_grad, c_blur, c_id = coeffs
        laplacian = laplacian_eigenvalues(tuple(kernel_eigs.shape))
        self.field = c_grad * laplacian + c_blur * np.abs(kernel_eigs) ** 2 + c_id
        smallest = float(self.field.min())
        if not smallest > 0:
            raise SpectralSystemError(
                f"spectral coefficients must be positive, smallest is {smallest:.3e}"
            )

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return np.real(np.fft.ifft2(np.fft.fft2(rhs) / self.field))


def spectral_solve(
    rhs: np.ndarray, kernel_eigs: np.ndarray, coeffs: Sequence[float]
) -> np.ndarray:
    return SpectralSystem(kernel_eigs, coeffs).solve(rhs)


def default_mu(model: TvModel, sp_level: Optional[float] = None) -> float:
    """Fidelity weight per model; impulse models interpolate the per-noise-level table."""
    model = TvModel(model)
    if not model.impulse:
        return settings.L2_MU
    table = settings.L1_MU_ITV if model.isotropic else settings.L1_MU_ATV
    levels = sorted(table)
    level = levels[0] if sp_level is None else sp_level
    return float(np.interp(level, levels, [table[k] for k in levels]))


def default_config(
    model: TvModel, sp_level: Optional[float] = None, **overrides
) -> AdmmConfig:
    """Penalties and mu from settings for one model; keyword overrides win."""
    model = TvModel(model)
    if model.impulse:
        values = dict(
            beta1=settings.L1_BETA1, beta2=settings.L1_BETA2, beta3=settings.L1_BETA3
        )
    else:
        beta1 = settings.L2_BETA1_ITV if model.isotropic else settings.L2_BETA1_ATV
        values = dict(beta1=beta1, beta2=settings.L2_BETA2)
    values["mu"] = default_mu(model, sp_level)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return AdmmConfig(model=model, **values)


def tv_penalty(f: np.ndarray, cfg: AdmmConfig) -> float:
    g = grad(f)
    if cfg.model.isotropic:
        return ogs_norm(g, cfg.weights, cfg.bc_gradient, stacked=True)
    return ogs_norm(g[0], cfg.weights, cfg.bc_gradient) + ogs_norm(
        g[1], cfg.weights, cfg.bc_gradient
    )


def objective(f: np.ndarray, g: np.ndarray, kernel: BlurKernel, cfg: AdmmConfig) -> float:
    """Model objective at f (box constraint dropped, u = f)."""
    residual = blur_periodic(f, kernel) - g
    if cfg.model.impulse:
        fidelity = cfg.mu * float(np.sum(np.abs(residual)))
    else:
        fidelity = 0.5 * cfg.mu * float(np.sum(residual**2))
    return fidelity + tv_penalty(f, cfg)


def _shrink_gradients(target: np.ndarray, cfg: AdmmConfig) -> np.ndarray:
    if cfg.model.isotropic:
        problem = ProxProblem(
            data=target, beta=cfg.beta1, weights=cfg.weights, bc=cfg.bc_gradient, stacked=True
        )
        return shrink_gain(problem)[np.newaxis] * target
    out = np.empty_like(target)
    for channel in range(2):
        problem = ProxProblem(
            data=target[channel], beta=cfg.beta1, weights=cfg.weights, bc=cfg.bc_gradient
        )
        out[channel] = shrink_gain(problem) * target[channel]
    return out


def _check_inputs(g, kernel: BlurKernel, cfg: AdmmConfig, impulse: bool) -> np.ndarray:
    g = as_image(g, "degraded image")
    if cfg.model.impulse is not impulse:
        raise InvalidArgumentError(f"model {cfg.model.value} needs the other solver")
    if any(k > n for k, n in zip(kernel.shape, g.shape)):
        raise InvalidArgumentError(f"kernel {kernel.shape} is larger than the image {g.shape}")
    if any(k > n for k, n in zip(cfg.weights.values.shape, g.shape)):
        raise InvalidArgumentError(f"group {cfg.weights.values.shape} is larger than {g.shape}")
    _, accurate = regime_bounds(cfg.weights)
    if cfg.beta1 < accurate:
        logger.warning(
            "beta1=%.4g is below %.4g; the explicit shrinkage is approximate there",
            cfg.beta1,
            accurate,
        )
    return g


def _finite_or_raise(state: AdmmState, iteration: int) -> None:
    arrays = [state.f, state.v, state.u, state.lambda_v, state.lambda_u]
    if state.z is not None:
        arrays += [state.z, state.lambda_z]
    if not all(np.all(np.isfinite(a)) for a in arrays) or not np.isfinite(state.objective):
        raise SolverDivergenceError("non-finite values in the ADMM iterate", iteration)


def _converged(previous: float, current: float, rel_tol: float) -> bool:
    if previous == 0.0:
        return current == 0.0
    return abs(current - previous) / abs(previous) < rel_tol


def _run(
    cfg: AdmmConfig,
    sweep: Callable[[AdmmState], AdmmState],
    initial: AdmmState,
    on_iterate: Optional[IterateCallback],
) -> Tuple[np.ndarray, SolveReport]:
    started = time.perf_counter()
    state = initial
    trajectory = [state.objective]
    converged = False
    iterations = 0

    for iteration in range(1, cfg.max_iters + 1):
        try:
            state = sweep(state)
        except ValidationError as exc:
            # non-finite gradients are rejected by the prox problem
            raise SolverDivergenceError(str(exc.errors()[0]["msg"]), iteration) from exc
        _finite_or_raise(state, iteration)
        trajectory.append(state.objective)
        iterations = iteration
        logger.debug("%s iteration %d objective %.10g", cfg.model.value, iteration, state.objective)
        if on_iterate is not None:
            on_iterate(iteration, state)
        if _converged(trajectory[-2], trajectory[-1], cfg.rel_tol):
            converged = True
            break

    if converged:
        logger.info("%s converged in %d iterations", cfg.model.value, iterations)
    else:
        logger.warning("%s stopped at the %d-iteration cap", cfg.model.value, cfg.max_iters)
    report = SolveReport(
        model=cfg.model,
        iterations=iterations,
        converged=converged,
        objective_trajectory=trajectory,
        elapsed=time.perf_counter() - started,
    )
    return state.f, report


def solve_l2(
    g,
    kernel: BlurKernel,
    cfg: AdmmConfig,
    on_iterate: Optional[IterateCallback] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """Gaussian-noise model: v-shrink, u-projection, f-solve, multiplier step."""
    g = _check_inputs(g, kernel, cfg, impulse=False)
    system = SpectralSystem(
        kernel_eigenvalues(kernel, g.shape), (cfg.beta1, cfg.mu, cfg.beta2)
    )
    blurred_data = cfg.mu * blur_adjoint(g, kernel)
    step1, step2 = cfg.gamma * cfg.beta1, cfg.gamma * cfg.beta2

    f0 = g.copy()
    initial = AdmmState(
        f=f0,
        v=grad(f0),
        u=project_box(f0),
        lambda_v=np.zeros((2,) + g.shape),
        lambda_u=np.zeros(g.shape),
        objective=objective(f0, g, kernel, cfg),
    )

    def sweep(state: AdmmState) -> AdmmState:
        v = _shrink_gradients(grad(state.f) + state.lambda_v / cfg.beta1, cfg)
        u = project_box(state.f + state.lambda_u / cfg.beta2)
        rhs = (
            grad_adjoint(cfg.beta1 * v - state.lambda_v)
            + blurred_data
            + cfg.beta2 * u
            - state.lambda_u
        )
        f = system.solve(rhs)
        return AdmmState(
            f=f,
            v=v,
            u=u,
            lambda_v=state.lambda_v - step1 * (v - grad(f)),
            lambda_u=state.lambda_u - step2 * (u - f),
            objective=objective(f, g, kernel, cfg),
        )

    return _run(cfg, sweep, initial, on_iterate)


def solve_l1(
    g,
    kernel: BlurKernel,
    cfg: AdmmConfig,
    on_iterate: Optional[IterateCallback] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """Impulse-noise model: adds z = Hf - g, soft-thresholded at mu/beta2."""
    g = _check_inputs(g, kernel, cfg, impulse=True)
    system = SpectralSystem(
        kernel_eigenvalues(kernel, g.shape), (cfg.beta1, cfg.beta2, cfg.beta3)
    )
    blurred_data = cfg.beta2 * blur_adjoint(g, kernel)
    step1, step2, step3 = (cfg.gamma * b for b in (cfg.beta1, cfg.beta2, cfg.beta3))

    f0 = g.copy()
    initial = AdmmState(
        f=f0,
        v=grad(f0),
        u=project_box(f0),
        z=blur_periodic(f0, kernel) - g,
        lambda_v=np.zeros((2,) + g.shape),
        lambda_z=np.zeros(g.shape),
        lambda_u=np.zeros(g.shape),
        objective=objective(f0, g, kernel, cfg),
    )

    def sweep(state: AdmmState) -> AdmmState:
        v = _shrink_gradients(grad(state.f) + state.lambda_v / cfg.beta1, cfg)
        residual = blur_periodic(state.f, kernel) - g
        z = soft_threshold(residual + state.lambda_z / cfg.beta2, cfg.beta2 / cfg.mu)
        u = project_box(state.f + state.lambda_u / cfg.beta3)
        rhs = (
            grad_adjoint(cfg.beta1 * v - state.lambda_v)
            + blur_adjoint(cfg.beta2 * z - state.lambda_z, kernel)
            + blurred_data
            + cfg.beta3 * u
            - state.lambda_u
        )
        f = system.solve(rhs)
        hf = blur_periodic(f, kernel)
        return AdmmState(
            f=f,
            v=v,
            u=u,
            z=z,
            lambda_v=state.lambda_v - step1 * (v - grad(f)),
            lambda_z=state.lambda_z - step2 * (z - (hf - g)),
            lambda_u=state.lambda_u - step3 * (u - f),
            objective=objective(f, g, kernel, cfg),
        )

    return _run(cfg, sweep, initial, on_iterate)


def solve(
    g,
    kernel: BlurKernel,
    cfg: AdmmConfig,
    reference: Optional[np.ndarray] = None,
    on_iterate: Optional[IterateCallback] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """Dispatch on cfg.model; PSNR and relative error are filled in when a reference is given."""
    solver = solve_l1 if cfg.model.impulse else solve_l2
    restored, report = solver(g, kernel, cfg, on_iterate)
    if reference is not None:
        value = psnr(restored, reference)
        report.psnr = value if np.isfinite(value) else None
        report.rel_err = rel_err(restored, reference)
    return restored, report
