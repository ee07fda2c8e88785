"""Frame types and intensity conversions.

Frames are ``(H, W, 3)`` ``uint8`` arrays with planes ordered blue, green,
red (index 0, 1, 2). Gray images are ``(H, W)`` arrays, either ``float64``
while being filtered or ``uint8`` for display and output. Edge maps are
``(H, W)`` boolean arrays.

All real-to-8-bit conversions in the package round half up.
"""

from __future__ import annotations

import math

import numba
import numpy as np

BLUE, GREEN, RED = 0, 1, 2

# ITU-R BT.601 luma
DEFAULT_LUMA = (0.299, 0.587, 0.114)

MIN_SIDE = 3


def round_half_up(values) -> np.ndarray:
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5)


def to_u8(values) -> np.ndarray:
    """Round half up and saturate to ``uint8``."""
    return np.clip(round_half_up(values), 0, 255).astype(np.uint8)


def validate_frame(frame: np.ndarray) -> np.ndarray:
    """Check ``frame`` is a usable BGR frame and return it as an array.

    Raises ``ValueError`` on wrong rank, channel count, dtype or a side
    shorter than 3 pixels.
    """
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[2] != 3:
        raise ValueError(f"frame must have shape (H, W, 3), got {frame.shape}")
    if frame.dtype != np.uint8:
        raise ValueError(f"frame must be uint8, got {frame.dtype}")
    h, w = frame.shape[:2]
    if h < MIN_SIDE or w < MIN_SIDE:
        raise ValueError(f"frame must be at least {MIN_SIDE}x{MIN_SIDE}, got {w}x{h}")
    return frame


@numba.njit(cache=True, nogil=True)
def _luma(frame, wr, wg, wb, as_u8):
    h, w = frame.shape[:2]
    out = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        for x in range(w):
            v = wr * frame[y, x, 2] + wg * frame[y, x, 1] + wb * frame[y, x, 0]
            if as_u8:
                v = min(max(math.floor(v + 0.5), 0.0), 255.0)
            out[y, x] = v
    return out


def to_grayscale(frame: np.ndarray, weights=DEFAULT_LUMA, as_u8: bool = True) -> np.ndarray:
    """Luma of a BGR frame.

    ``weights`` are (red, green, blue) coefficients. With ``as_u8`` the
    result is rounded half up to ``uint8``, otherwise it is returned as
    ``float64``.
    """
    frame = validate_frame(frame)
    wr, wg, wb = (float(w) for w in weights)
    gray = _luma(np.ascontiguousarray(frame), wr, wg, wb, as_u8)
    return gray.astype(np.uint8) if as_u8 else gray


def normalize_to_u8(image: np.ndarray) -> np.ndarray:
    """Stretch ``[min, max]`` of ``image`` linearly onto ``[0, 255]``.

    A constant image maps to all zeros. Boolean input is treated as {0, 1}.
    """
    if isinstance(image, np.ndarray) and image.dtype == np.bool_:
        if image.size and image.any() and not image.all():
            return image.view(np.uint8) * np.uint8(255)
        if image.size:
            return np.zeros(image.shape, dtype=np.uint8)
    img = np.asarray(image, dtype=np.float64)
    if img.size == 0:
        raise ValueError("image must have at least one pixel")
    lo = img.min()
    hi = img.max()
    if hi == lo:
        return np.zeros(img.shape, dtype=np.uint8)
    return to_u8((img - lo) / (hi - lo) * 255.0)
