# app/services/imaging.py
"""Degradation pipeline and quality metrics for grayscale images in [0, 1]."""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from app.core.exceptions import InvalidArgumentError
from app.schemas.imaging import BlurKernel, KernelKind

logger = logging.getLogger(__name__)


def as_image(img, name: str = "image") -> np.ndarray:
    arr = np.asarray(img, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise InvalidArgumentError(f"{name} must be a non-empty 2-D array, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} has non-finite pixels")
    return arr


def _pad_odd(taps: np.ndarray) -> np.ndarray:
    pads = [(1, 0) if k % 2 == 0 else (0, 0) for k in taps.shape]
    return np.pad(taps, pads)


def make_kernel(
    kind: KernelKind, size: int = 1, sigma: Optional[float] = None
) -> BlurKernel:
    kind = KernelKind(kind)
    if kind is KernelKind.DELTA:
        return BlurKernel(kind=kind, size=1, taps=np.ones((1, 1)))
    if size < 1:
        raise InvalidArgumentError(f"kernel size must be >= 1, got {size}")

    if kind is KernelKind.AVERAGE:
        taps = np.full((size, size), 1.0 / size**2)
        return BlurKernel(kind=kind, size=size, taps=_pad_odd(taps))

    if sigma is None or sigma <= 0:
        raise InvalidArgumentError(f"gaussian kernel needs sigma > 0, got {sigma}")
    # same centred grid as fspecial: half-integer offsets for even sizes
    offsets = np.arange(size) - (size - 1) / 2.0
    dx, dy = np.meshgrid(offsets, offsets, indexing="ij")
    taps = np.exp(-(dx**2 + dy**2) / (2.0 * sigma**2))
    taps /= taps.sum()
    return BlurKernel(kind=kind, size=size, sigma=sigma, taps=_pad_odd(taps))


def _check_kernel_fits(img: np.ndarray, kernel: BlurKernel) -> None:
    if any(k > n for k, n in zip(kernel.shape, img.shape)):
        raise InvalidArgumentError(
            f"kernel {kernel.shape} is larger than the image {img.shape}"
        )


def blur_periodic(img, kernel: BlurKernel) -> np.ndarray:
    """H f: circular convolution (imfilter 'circular', 'conv')."""
    img = as_image(img)
    _check_kernel_fits(img, kernel)
    return ndimage.convolve(img, kernel.taps, mode="wrap")


def blur_adjoint(img, kernel: BlurKernel) -> np.ndarray:
    """H^* g: circular correlation with the same taps."""
    img = as_image(img)
    _check_kernel_fits(img, kernel)
    return ndimage.correlate(img, kernel.taps, mode="wrap")


def kernel_eigenvalues(kernel: BlurKernel, shape: Tuple[int, int]) -> np.ndarray:
    """2-D DFT of the kernel zero-padded to shape with its centre moved to (0, 0)."""
    if any(k > n for k, n in zip(kernel.shape, shape)):
        raise InvalidArgumentError(f"kernel {kernel.shape} is larger than {shape}")
    padded = np.zeros(shape)
    k1, k2 = kernel.shape
    padded[:k1, :k2] = kernel.taps
    padded = np.roll(padded, (-(k1 // 2), -(k2 // 2)), axis=(0, 1))
    return np.fft.fft2(padded)


def bsnr(signal, noise) -> float:
    """20 log10(||signal|| / ||noise||); inf for zero noise."""
    noise_norm = float(np.linalg.norm(noise))
    if noise_norm == 0.0:
        return float("inf")
    return 20.0 * np.log10(float(np.linalg.norm(signal)) / noise_norm)


def gaussian_noise(img, bsnr_db: float, rng_seed: Optional[int] = None) -> np.ndarray:
    """Zero-mean Gaussian noise scaled to the requested BSNR against img."""
    img = as_image(img)
    signal_norm = float(np.linalg.norm(img))
    if signal_norm == 0.0:
        raise InvalidArgumentError("BSNR is undefined for an all-zero image")
    raw = np.random.default_rng(rng_seed).standard_normal(img.shape)
    target = signal_norm / 10.0 ** (bsnr_db / 20.0)
    return raw * (target / np.linalg.norm(raw))


def add_gaussian_noise(img, bsnr_db: float, rng_seed: Optional[int] = None) -> np.ndarray:
    """
    Observed image g + eta with ||eta|| set from the noise-free img.

    The observed image itself contains the noise, so scaling is done against
    the clean blurred image; bsnr(observed, observed - img) gives the figure
    measured the other way.
    """
    img = as_image(img)
    noise = gaussian_noise(img, bsnr_db, rng_seed)
    noisy = img + noise
    logger.debug(
        "gaussian noise: target %.2f dB, against observed %.2f dB",
        bsnr_db,
        bsnr(noisy, noise),
    )
    return noisy


def add_salt_pepper(img, level: float, rng_seed: Optional[int] = None) -> np.ndarray:
    """Each pixel goes to 0 with probability level/2, to 1 with probability level/2."""
    img = as_image(img)
    if not 0.0 <= level <= 1.0:
        raise InvalidArgumentError(f"salt-and-pepper level must be in [0, 1], got {level}")
    draw = np.random.default_rng(rng_seed).random(img.shape)
    out = img.copy()
    out[draw < level / 2.0] = 0.0
    out[(draw >= level / 2.0) & (draw < level)] = 1.0
    return out


def _pair(f, f_ref) -> Tuple[np.ndarray, np.ndarray]:
    f, f_ref = np.asarray(f, dtype=float), np.asarray(f_ref, dtype=float)
    if f.shape != f_ref.shape:
        raise InvalidArgumentError(f"shape mismatch: {f.shape} vs {f_ref.shape}")
    return f, f_ref


def psnr(f, f_ref, peak: float = 1.0) -> float:
    """10 log10(m n peak^2 / ||f - f_ref||^2); inf when the images agree."""
    f, f_ref = _pair(f, f_ref)
    err = float(np.sum((f - f_ref) ** 2))
    if err == 0.0:
        return float("inf")
    return 10.0 * np.log10(f.size * peak**2 / err)


def rel_err(f, f_ref) -> float:
    f, f_ref = _pair(f, f_ref)
    ref_norm = float(np.linalg.norm(f_ref))
    if ref_norm == 0.0:
        raise InvalidArgumentError("relative error against an all-zero reference")
    return float(np.linalg.norm(f - f_ref)) / ref_norm


def mae(f, f_ref) -> float:
    f, f_ref = _pair(f, f_ref)
    return float(np.mean(np.abs(f - f_ref)))


def make_phantom(size: int = 256) -> np.ndarray:
    """Piecewise-constant test scene: background, a bar, a disk, a triangle and two squares."""
    if size < 16:
        raise InvalidArgumentError(f"phantom needs size >= 16, got {size}")
    rows, cols = np.mgrid[0:size, 0:size] / float(size)
    img = np.full((size, size), 0.2)
    img[(rows > 0.1) & (rows < 0.45) & (cols > 0.1) & (cols < 0.9)] = 0.6
    img[(rows - 0.68) ** 2 + (cols - 0.3) ** 2 < 0.18**2] = 0.85
    img[(rows > 0.55) & (rows < 0.9) & (cols > 0.55) & (cols - 0.55 < rows - 0.55)] = 0.4
    img[(rows > 0.2) & (rows < 0.3) & (cols > 0.2) & (cols < 0.3)] = 1.0
    img[(rows > 0.8) & (rows < 0.88) & (cols > 0.08) & (cols < 0.16)] = 0.0
    return img
