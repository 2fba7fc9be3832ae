# app/utils/helpers.py
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from app.core.exceptions import InvalidArgumentError
from app.schemas.geometry import GroupWeights, shape_for
from app.schemas.imaging import BlurKernel, KernelKind
from app.services.imaging import make_kernel


def parse_group(text: str) -> List[int]:
    """'3x3' -> [3, 3], '5' -> [5]."""
    try:
        dims = [int(part) for part in text.lower().split("x")]
    except ValueError:
        raise InvalidArgumentError(f"group must look like K1xK2 or s, got '{text}'") from None
    if len(dims) not in (1, 2) or any(k < 1 for k in dims):
        raise InvalidArgumentError(f"group must look like K1xK2 or s, got '{text}'")
    return dims


def parse_kernel(text: str) -> BlurKernel:
    """average:m, gaussian:size:sigma or delta."""
    kind, *params = text.lower().split(":")
    try:
        if kind == KernelKind.DELTA.value and not params:
            return make_kernel(KernelKind.DELTA)
        if kind == KernelKind.AVERAGE.value and len(params) == 1:
            return make_kernel(KernelKind.AVERAGE, int(params[0]))
        if kind == KernelKind.GAUSSIAN.value and len(params) == 2:
            return make_kernel(KernelKind.GAUSSIAN, int(params[0]), float(params[1]))
    except ValueError as exc:
        raise InvalidArgumentError(f"bad kernel parameters in '{text}': {exc}") from exc
    raise InvalidArgumentError(
        f"kernel must be average:m, gaussian:size:sigma or delta, got '{text}'"
    )


def build_weights(group: Sequence[int], values: Optional[Any] = None) -> GroupWeights:
    """Unit weights for the group, or the given values checked against its shape."""
    shape = shape_for(tuple(group))
    if values is None:
        return GroupWeights.ones(shape)
    values = np.asarray(values, dtype=float)
    if len(shape.dims) == 1:
        # a CSV row holds a 1-D weight vector
        values = values.ravel()
    weights = GroupWeights(values=values)
    if tuple(weights.values.shape) != tuple(shape.dims):
        raise InvalidArgumentError(
            f"weights of shape {weights.values.shape} do not match group {tuple(shape.dims)}"
        )
    return weights


def load_weights(source: str) -> Optional[List[List[float]]]:
    """'ones' -> None (unit weights); otherwise a headerless CSV matrix or vector."""
    if source == "ones":
        return None
    path = Path(source)
    if not path.exists():
        raise InvalidArgumentError(f"weights file {path} does not exist")
    frame = pd.read_csv(path, header=None)
    return frame.to_numpy(dtype=float).tolist()


def load_json_config(path: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgumentError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidArgumentError(f"config {path} must hold a JSON object")
    return data


def jsonable(value: Any) -> Any:
    """Replace non-finite floats with None so reports stay strict JSON."""
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, (float, np.floating)) and not np.isfinite(value):
        return None
    return value


def resolve_under(root: Path, relative: str) -> Path:
    """Resolve relative against root; paths that escape root are rejected."""
    base = Path(root).resolve()
    target = (base / relative).resolve()
    if not target.is_relative_to(base):
        raise InvalidArgumentError(f"path {relative!r} is outside the data root")
    return target
