"""Canny edge extraction on raw Sobel magnitudes.

There is no Gaussian stage here; the bilateral filter upstream does the
smoothing. Magnitudes stay in Sobel units, so for 8-bit input they lie in
``[0, sqrt(2) * 1020] ~ [0, 1442.5]`` and the high threshold is accepted on
``[1, 1443]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

TH_MIN = 1.0
TH_MAX = 1443.0
LOW_RATIO = 1.0 / 3.0

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T.copy()


@dataclass(frozen=True)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray

    @property
    def direction(self) -> np.ndarray:
        """Radians, ``atan2(gy, gx)`` with y pointing down."""
        return np.arctan2(self.gy, self.gx)


@dataclass(frozen=True)
class CannyThresholds:
    th_high: float
    th_low: float

    @classmethod
    def from_high(cls, th_high: float) -> "CannyThresholds":
        th_high = float(th_high)
        if not TH_MIN <= th_high <= TH_MAX:
            raise ValueError(f"th_high must lie in [{TH_MIN:g}, {TH_MAX:g}], got {th_high}")
        return cls(th_high, th_high * LOW_RATIO)


@numba.njit(cache=True, nogil=True)
def _sobel(img):
    # mirror border: index -1 reads 1, index n reads n - 2
    h, w = img.shape
    gx = np.empty((h, w), dtype=np.float64)
    gy = np.empty((h, w), dtype=np.float64)
    mag = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        ym = y - 1 if y > 0 else 1
        yp = y + 1 if y < h - 1 else h - 2
        top = img[ym]
        mid = img[y]
        bot = img[yp]
        for x in range(w):
            xm = x - 1 if x > 0 else 1
            xp = x + 1 if x < w - 1 else w - 2
            dx = (top[xp] - top[xm]) + 2.0 * (mid[xp] - mid[xm]) + (bot[xp] - bot[xm])
            dy = (bot[xm] - top[xm]) + 2.0 * (bot[x] - top[x]) + (bot[xp] - top[xp])
            gx[y, x] = dx
            gy[y, x] = dy
            mag[y, x] = math.sqrt(dx * dx + dy * dy)
    return gx, gy, mag


def sobel_gradients(image: np.ndarray) -> GradientField:
    img = np.ascontiguousarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {img.shape}")
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise ValueError(f"image must be at least 3x3 for a 3x3 Sobel kernel, got {img.shape}")
    return GradientField(*_sobel(img))


@numba.njit(cache=True, nogil=True)
def _non_max_suppress(mag, gx, gy, floor):
    # Direction bins 0/45/90/135 deg. A pixel must beat its backward neighbour
    # strictly and match-or-beat its forward one, so a two-pixel plateau (the
    # exact Sobel response of an ideal step) thins to one pixel.
    h, w = mag.shape
    keep = np.zeros((h, w), dtype=np.bool_)
    tan22 = 0.41421356237309503  # tan(22.5 deg)
    for y in range(h):
        ym = y - 1 if y > 0 else 1
        yp = y + 1 if y < h - 1 else h - 2
        for x in range(w):
            m = mag[y, x]
            if m == 0.0 or m < floor:
                continue
            xm = x - 1 if x > 0 else 1
            xp = x + 1 if x < w - 1 else w - 2
            ax = abs(gx[y, x])
            ay = abs(gy[y, x])
            if ay <= tan22 * ax:
                back = mag[y, xm]
                fwd = mag[y, xp]
            elif ax <= tan22 * ay:
                back = mag[ym, x]
                fwd = mag[yp, x]
            elif (gx[y, x] > 0) == (gy[y, x] > 0):
                # 45 deg: gradient along (+1, +1)
                back = mag[ym, xm]
                fwd = mag[yp, xp]
            else:
                # 135 deg: gradient along (-1, +1)
                back = mag[ym, xp]
                fwd = mag[yp, xm]
            if m > back and m >= fwd:
                keep[y, x] = True
    return keep


def non_max_suppression(field: GradientField, floor: float = 0.0) -> np.ndarray:
    """Thin ``field`` to ridge pixels; pixels weaker than ``floor`` are dropped outright."""
    return _non_max_suppress(field.magnitude, field.gx, field.gy, floor)


@numba.njit(cache=True, nogil=True)
def _hysteresis(mag, keep, low, high):
    h, w = mag.shape
    out = np.zeros((h, w), dtype=np.bool_)
    stack = np.empty(h * w, dtype=np.int64)
    for y0 in range(h):
        for x0 in range(w):
            if out[y0, x0] or not keep[y0, x0] or not mag[y0, x0] > high:
                continue
            out[y0, x0] = True
            top = 0
            stack[top] = y0 * w + x0
            top += 1
            while top > 0:
                top -= 1
                y = stack[top] // w
                x = stack[top] % w
                for yy in range(max(y - 1, 0), min(y + 2, h)):
                    for xx in range(max(x - 1, 0), min(x + 2, w)):
                        if not out[yy, xx] and keep[yy, xx] and mag[yy, xx] >= low:
                            out[yy, xx] = True
                            stack[top] = yy * w + xx
                            top += 1
    return out


def hysteresis(magnitude: np.ndarray, candidates: np.ndarray, th: CannyThresholds) -> np.ndarray:
    """Keep candidate pixels 8-connected (through other kept pixels) to one
    with magnitude above ``th_high``; candidates below ``th_low`` never count."""
    return _hysteresis(
        np.ascontiguousarray(magnitude, dtype=np.float64),
        np.ascontiguousarray(candidates, dtype=np.bool_),
        th.th_low,
        th.th_high,
    )


@numba.njit(cache=True, nogil=True)
def _magnitude(img):
    h, w = img.shape
    mag = np.empty((h, w), dtype=np.float64)
    for y in range(h):
        ym = y - 1 if y > 0 else 1
        yp = y + 1 if y < h - 1 else h - 2
        top = img[ym]
        mid = img[y]
        bot = img[yp]
        for x in range(w):
            xm = x - 1 if x > 0 else 1
            xp = x + 1 if x < w - 1 else w - 2
            dx = (top[xp] - top[xm]) + 2.0 * (mid[xp] - mid[xm]) + (bot[xp] - bot[xm])
            dy = (bot[xm] - top[xm]) + 2.0 * (bot[x] - top[x]) + (bot[xp] - top[xp])
            mag[y, x] = math.sqrt(dx * dx + dy * dy)
    return mag


@numba.njit(cache=True, nogil=True)
def _thin(img, mag, floor):
    # Same rule as _non_max_suppress, recomputing gx and gy only at the few
    # pixels that clear the floor instead of storing full gradient planes.
    h, w = mag.shape
    keep = np.zeros((h, w), dtype=np.bool_)
    tan22 = 0.41421356237309503
    for y in range(h):
        ym = y - 1 if y > 0 else 1
        yp = y + 1 if y < h - 1 else h - 2
        top = img[ym]
        mid = img[y]
        bot = img[yp]
        for x in range(w):
            m = mag[y, x]
            if m == 0.0 or m < floor:
                continue
            xm = x - 1 if x > 0 else 1
            xp = x + 1 if x < w - 1 else w - 2
            gx = (top[xp] - top[xm]) + 2.0 * (mid[xp] - mid[xm]) + (bot[xp] - bot[xm])
            gy = (bot[xm] - top[xm]) + 2.0 * (bot[x] - top[x]) + (bot[xp] - top[xp])
            ax = abs(gx)
            ay = abs(gy)
            if ay <= tan22 * ax:
                back = mag[y, xm]
                fwd = mag[y, xp]
            elif ax <= tan22 * ay:
                back = mag[ym, x]
                fwd = mag[yp, x]
            elif (gx > 0) == (gy > 0):
                back = mag[ym, xm]
                fwd = mag[yp, xp]
            else:
                back = mag[ym, xp]
                fwd = mag[yp, xm]
            if m > back and m >= fwd:
                keep[y, x] = True
    return keep


def canny(image: np.ndarray, th_high: float) -> np.ndarray:
    """Binary edge map of ``image`` with ``th_low = th_high / 3``.

    Equivalent to ``hysteresis(mag, non_max_suppression(sobel_gradients(image), th_low), th)``
    without materializing the gradient planes.
    """
    th = CannyThresholds.from_high(th_high)
    img = np.ascontiguousarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {img.shape}")
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise ValueError(f"image must be at least 3x3 for a 3x3 Sobel kernel, got {img.shape}")
    mag = _magnitude(img)
    return _hysteresis(mag, _thin(img, mag, th.th_low), th.th_low, th.th_high)
