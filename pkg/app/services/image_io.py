# app/services/image_io.py
import logging
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from app.core.exceptions import ImageIOError

logger = logging.getLogger(__name__)

# Pillow writes binary P5 for mode "L" through its PPM plugin
_FORMATS = {".png": "PNG", ".pgm": "PPM"}

Source = Union[str, Path, BinaryIO]


def _format_for(path: Path) -> str:
    try:
        return _FORMATS[path.suffix.lower()]
    except KeyError:
        raise ImageIOError(
            f"unsupported image format '{path.suffix}' for {path}; use .png or .pgm"
        ) from None


def read_image(source: Source) -> np.ndarray:
    """8-bit grayscale PNG or PGM as floats in [0, 1]."""
    label = str(source) if isinstance(source, (str, Path)) else "upload"
    if isinstance(source, (str, Path)):
        _format_for(Path(source))
    try:
        with Image.open(source) as image:
            image.load()
            if image.mode != "L":
                raise ImageIOError(f"{label}: expected 8-bit grayscale, got mode {image.mode}")
            pixels = np.asarray(image, dtype=float)
    except ImageIOError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise ImageIOError(f"{label}: {exc}") from exc
    logger.debug("read %s %s", label, pixels.shape)
    return pixels / 255.0


def write_image(path: Union[str, Path], img) -> Path:
    """Clip to [0, 1], quantize to 8 bits and save; the suffix picks the format."""
    path = Path(path)
    fmt = _format_for(path)
    arr = np.asarray(img, dtype=float)
    if arr.ndim != 2:
        raise ImageIOError(f"only 2-D grayscale images can be written, got {arr.shape}")
    quantized = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(quantized).save(path, format=fmt)
    except OSError as exc:
        raise ImageIOError(f"{path}: {exc}") from exc
    return path
