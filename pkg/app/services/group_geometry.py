# app/services/group_geometry.py
"""
Overlapping-group windows and the two correlations every shrinkage formula
reduces to.

group_energy correlates the squared signal with the squared weights (one
weighted group norm per anchor); spread is its exact adjoint and accumulates
per-anchor values back onto the samples each group covers.
"""
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal as sps

from app.core.config import settings
from app.core.exceptions import InvalidArgumentError
from app.schemas.geometry import BoundaryCondition, GroupShape

PadSpec = Union[int, Sequence[int], Sequence[Tuple[int, int]]]

_NUMPY_PAD_MODE = {
    BoundaryCondition.ZERO: "constant",
    BoundaryCondition.PERIODIC: "wrap",
    BoundaryCondition.REFLECTIVE: "symmetric",
}


def _normalize_pad(pad: PadSpec, ndim: int) -> Tuple[Tuple[int, int], ...]:
    if isinstance(pad, (int, np.integer)):
        pads = ((int(pad), int(pad)),) * ndim
    else:
        items = list(pad)
        if len(items) != ndim:
            raise InvalidArgumentError(f"pad needs {ndim} entries, got {len(items)}")
        pads = tuple(
            (int(p), int(p)) if np.isscalar(p) else (int(p[0]), int(p[1]))
            for p in items
        )
    if any(left < 0 or right < 0 for left, right in pads):
        raise InvalidArgumentError("pad extents must be nonnegative")
    return pads


def extend(
    signal: np.ndarray, bc: BoundaryCondition, pad: PadSpec
) -> np.ndarray:
    """Continue a 1-D or 2-D signal past its ends according to bc.

    Reflective is the whole-sample mirror: [1, 2, 3] -> [1, 1, 2, 3, 3].
    """
    arr = np.asarray(signal, dtype=float)
    if arr.size == 0:
        raise InvalidArgumentError("cannot extend an empty signal")
    pads = _normalize_pad(pad, arr.ndim)
    return np.pad(arr, pads, mode=_NUMPY_PAD_MODE[BoundaryCondition(bc)])


def _index_map(n: int, left: int, right: int, bc: BoundaryCondition) -> np.ndarray:
    idx = np.arange(n)
    if bc is BoundaryCondition.ZERO:
        return np.pad(idx, (left, right), mode="constant", constant_values=-1)
    return np.pad(idx, (left, right), mode=_NUMPY_PAD_MODE[bc])


def fold(
    extended: np.ndarray,
    shape: Tuple[int, ...],
    pads: Tuple[Tuple[int, int], ...],
    bc: BoundaryCondition,
) -> np.ndarray:
    """Adjoint of extend: sum every extended sample back onto its source."""
    out = np.asarray(extended, dtype=float)
    for axis, (n, (left, right)) in enumerate(zip(shape, pads)):
        idx = _index_map(n, left, right, bc)
        keep = idx >= 0
        moved = np.moveaxis(out, axis, 0)
        acc = np.zeros((n,) + moved.shape[1:])
        np.add.at(acc, idx[keep], moved[keep])
        out = np.moveaxis(acc, 0, axis)
    return out


def odd_kernel(weights_sq: np.ndarray) -> np.ndarray:
    """Prepend a zero along every even axis so the anchor sits at the centre.

    An even size s becomes s + 1 with w = [0, w]; the window [i - s_l, i + s_r]
    is unchanged because the extra tap carries no weight.
    """
    kernel = np.asarray(weights_sq, dtype=float)
    pads = [(1, 0) if k % 2 == 0 else (0, 0) for k in kernel.shape]
    return np.pad(kernel, pads) if any(p[0] for p in pads) else kernel


def half_widths(weights_sq: np.ndarray) -> Tuple[int, ...]:
    return tuple(k // 2 for k in odd_kernel(weights_sq).shape)


def check_fits(
    data_shape: Tuple[int, ...], weights_sq: np.ndarray, shape: Optional[GroupShape]
) -> None:
    dims = np.asarray(weights_sq).shape
    if shape is not None and tuple(shape.dims) != tuple(dims):
        raise InvalidArgumentError(
            f"weights of shape {dims} do not match group shape {shape.dims}"
        )
    if len(dims) != len(data_shape):
        raise InvalidArgumentError(
            f"{len(dims)}-D groups cannot window a {len(data_shape)}-D signal"
        )
    if any(k > n for k, n in zip(dims, data_shape)):
        raise InvalidArgumentError(
            f"group {dims} is larger than the signal {data_shape}"
        )


def _method(kernel: np.ndarray, method: Optional[str]) -> str:
    if method is not None:
        return method
    return "fft" if kernel.size >= settings.FFT_WINDOW_THRESHOLD else "direct"


def group_energy(
    signal_sq: np.ndarray,
    weights_sq: np.ndarray,
    shape: Optional[GroupShape],
    bc: BoundaryCondition,
    method: Optional[str] = None,
) -> np.ndarray:
    """Squared weighted group norm ||w o (x_i)_g||^2 at every anchor of the input."""
    signal_sq = np.asarray(signal_sq, dtype=float)
    check_fits(signal_sq.shape, weights_sq, shape)
    kernel = odd_kernel(weights_sq)
    pads = tuple((h, h) for h in half_widths(weights_sq))
    ext = extend(signal_sq, bc, pads)
    out = sps.correlate(ext, kernel, mode="valid", method=_method(kernel, method))
    # FFT round-off can leave tiny negatives
    return np.maximum(out, 0.0)


def spread(
    values: np.ndarray,
    weights_sq: np.ndarray,
    shape: Optional[GroupShape],
    bc: BoundaryCondition,
    method: Optional[str] = None,
) -> np.ndarray:
    """Accumulate per-anchor values onto the samples each group covers.

    Output[i] = sum over anchors j whose window holds i of
    weights_sq[position of i in j] * values[j]; the exact adjoint of the
    windowed weighting used by group_energy.
    """
    values = np.asarray(values, dtype=float)
    check_fits(values.shape, weights_sq, shape)
    kernel = odd_kernel(weights_sq)
    pads = tuple((h, h) for h in half_widths(weights_sq))
    full = sps.convolve(values, kernel, mode="full", method=_method(kernel, method))
    return fold(full, values.shape, pads, BoundaryCondition(bc))


def window_sum(
    signal: np.ndarray,
    weights_sq: np.ndarray,
    shape: Optional[GroupShape],
    bc: BoundaryCondition,
    method: Optional[str] = None,
) -> np.ndarray:
    """Linear windowed weighting W(a)[i] = sum_k weights_sq[k] * a_ext[i - s_l + k]."""
    signal = np.asarray(signal, dtype=float)
    check_fits(signal.shape, weights_sq, shape)
    kernel = odd_kernel(weights_sq)
    pads = tuple((h, h) for h in half_widths(weights_sq))
    ext = extend(signal, bc, pads)
    return sps.correlate(ext, kernel, mode="valid", method=_method(kernel, method))


class AnchorDomain:
    """
    Where the anchors of a proximal problem live.

    Periodic problems anchor a group at every sample. Zero and reflective
    problems are posed on the signal extended by twice the half-width: every
    anchor whose window meets the signal is counted, so each original sample is
    covered by the full weight ||w||^2.
    """

    def __init__(
        self,
        data_shape: Tuple[int, ...],
        weights_sq: np.ndarray,
        bc: BoundaryCondition,
    ):
        self.data_shape = tuple(data_shape)
        self.bc = BoundaryCondition(bc)
        self.halves = half_widths(weights_sq)
        if self.bc is BoundaryCondition.PERIODIC:
            self.pads = tuple((0, 0) for _ in self.halves)
            self.inner_bc = BoundaryCondition.PERIODIC
        else:
            self.pads = tuple((2 * h, 2 * h) for h in self.halves)
            self.inner_bc = BoundaryCondition.ZERO

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(n + l + r for n, (l, r) in zip(self.data_shape, self.pads))

    def lift(self, x: np.ndarray) -> np.ndarray:
        if self.bc is BoundaryCondition.PERIODIC:
            return np.asarray(x, dtype=float)
        return extend(x, self.bc, self.pads)

    def crop(self, y: np.ndarray) -> np.ndarray:
        index = tuple(slice(l, l + n) for n, (l, _) in zip(self.data_shape, self.pads))
        return y[index]

    def fold(self, y: np.ndarray) -> np.ndarray:
        """Adjoint of lift."""
        if self.bc is BoundaryCondition.PERIODIC:
            return y
        return fold(y, self.data_shape, self.pads, self.bc)

    def anchor_mask(self) -> np.ndarray:
        """Anchors that take part in the penalty."""
        mask = np.ones(self.shape, dtype=bool)
        if self.bc is BoundaryCondition.PERIODIC:
            return mask
        for axis, (h, n) in enumerate(zip(self.halves, self.data_shape)):
            keep = np.zeros(n + 4 * h, dtype=bool)
            keep[h : h + n + 2 * h] = True
            view = [np.newaxis] * len(self.shape)
            view[axis] = slice(None)
            mask &= keep[tuple(view)]
        return mask
