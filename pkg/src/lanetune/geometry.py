"""Triangular ROI masking and Hough line counting.

The line count produced here is only a control signal for the threshold
tuner; nothing downstream draws or uses the lines themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numba
import numpy as np


@dataclass(frozen=True)
class TriangleROI:
    """Triangle in pixel coordinates (x right, y down) for a ``width x height`` image."""

    width: int
    height: int
    apex: tuple[float, float]
    base_left: tuple[float, float]
    base_right: tuple[float, float]

    def __post_init__(self):
        for name, (x, y) in (("apex", self.apex), ("base_left", self.base_left), ("base_right", self.base_right)):
            if not (0 <= x <= self.width - 1 and 0 <= y <= self.height - 1):
                raise ValueError(f"ROI {name} {(x, y)} lies outside a {self.width}x{self.height} image")
        if not self.apex[1] < min(self.base_left[1], self.base_right[1]):
            raise ValueError("ROI apex must lie strictly above the base")
        if self.area <= 0:
            raise ValueError("ROI triangle is degenerate")

    @classmethod
    def for_image(cls, width: int, height: int, apex_x_frac: float = 0.5, apex_y_frac: float = 0.25) -> "TriangleROI":
        """Apex at ``(apex_x_frac * width, apex_y_frac * height)`` from the top-left
        corner, base along the full bottom row."""
        return cls(
            width,
            height,
            (apex_x_frac * width, apex_y_frac * height),
            (0.0, float(height - 1)),
            (float(width - 1), float(height - 1)),
        )

    @property
    def area(self) -> float:
        (ax, ay), (bx, by), (cx, cy) = self.apex, self.base_left, self.base_right
        return abs((bx - ax) * (cy - ay) - (by - ay) * (cx - ax)) / 2.0

    def contains(self, x, y):
        """Closed point-in-triangle test; works elementwise on arrays."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        verts = (self.apex, self.base_left, self.base_right)
        signs = []
        for (x0, y0), (x1, y1) in zip(verts, verts[1:] + verts[:1]):
            signs.append((x1 - x0) * (y - y0) - (y1 - y0) * (x - x0))
        d0, d1, d2 = signs
        neg = (d0 < 0) | (d1 < 0) | (d2 < 0)
        pos = (d0 > 0) | (d1 > 0) | (d2 > 0)
        return ~(neg & pos)

    def mask(self) -> np.ndarray:
        return _roi_mask_cached(self)


@lru_cache(maxsize=16)
def _roi_mask_cached(roi: TriangleROI) -> np.ndarray:
    ys, xs = np.mgrid[0 : roi.height, 0 : roi.width]
    m = roi.contains(xs, ys)
    m.setflags(write=False)
    return m


def roi_mask(edges: np.ndarray, roi: TriangleROI) -> np.ndarray:
    """Clear every edge pixel outside the closed ROI triangle."""
    edges = np.asarray(edges, dtype=bool)
    if edges.shape != (roi.height, roi.width):
        raise ValueError(f"edge map shape {edges.shape} does not match ROI size {(roi.height, roi.width)}")
    return edges & roi.mask()


@dataclass(frozen=True)
class HoughParams:
    rho_resolution: float = 1.0  # pixels
    theta_resolution: float = 1.0  # degrees
    vote_threshold: int = 3

    def __post_init__(self):
        if not self.rho_resolution > 0 or not self.theta_resolution > 0:
            raise ValueError("Hough resolutions must be positive")
        if self.vote_threshold < 1:
            raise ValueError(f"vote_threshold must be >= 1, got {self.vote_threshold}")

    @property
    def thetas_deg(self) -> np.ndarray:
        n = math.ceil(180.0 / self.theta_resolution - 1e-9)
        return np.arange(n, dtype=np.float64) * self.theta_resolution


class Line(NamedTuple):
    rho: float  # pixels, signed
    theta: float  # degrees in [0, 180)
    votes: int


@dataclass(frozen=True)
class LineSet:
    lines: tuple[Line, ...]

    @property
    def count(self) -> int:
        return len(self.lines)


def trig_tables(thetas_deg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = np.deg2rad(thetas_deg)
    cos_t = np.cos(t)
    sin_t = np.sin(t)
    # exact zeros at 90 deg (and 0/180) keep axis-aligned lines on bin centres
    cos_t[np.isclose(cos_t, 0.0, atol=1e-12)] = 0.0
    sin_t[np.isclose(sin_t, 0.0, atol=1e-12)] = 0.0
    return cos_t, sin_t


@numba.njit(cache=True, nogil=True)
def _accumulate(ys, xs, cos_t, sin_t, offset, n_rho):
    # Votes, plus the summed squared distance (in bins) of each voter from its
    # bin centre, stored theta-major so the theta-outer loop writes one row at
    # a time. Also returns each row's occupied rho range.
    # cos_t and sin_t arrive pre-divided by the rho resolution.
    n_theta = cos_t.shape[0]
    acc = np.zeros((n_theta, n_rho), dtype=np.int32)
    resid = np.zeros((n_theta, n_rho), dtype=np.float64)
    lo = np.full(n_theta, n_rho, dtype=np.int64)
    hi = np.full(n_theta, -1, dtype=np.int64)
    for t in range(n_theta):
        c = cos_t[t]
        s = sin_t[t]
        a = n_rho
        b = -1
        for p in range(ys.shape[0]):
            v = xs[p] * c + ys[p] * s
            r = int(math.floor(v + 0.5))
            d = v - r
            r += offset
            acc[t, r] += 1
            resid[t, r] += d * d
            a = min(a, r)
            b = max(b, r)
        lo[t] = a
        hi[t] = b
    return acc, resid, lo, hi


@numba.njit(cache=True, nogil=True)
def _better(v1, e1, r1, t1, v2, e2, r2, t2):
    # more votes, then smaller residual, then lower (rho, theta) index
    if v1 != v2:
        return v1 > v2
    if e1 != e2:
        return e1 < e2
    if r1 != r2:
        return r1 < r2
    return t1 < t2


@numba.njit(cache=True, nogil=True)
def _range_best(acc, resid, t, lo, hi):
    best = lo
    for r in range(lo + 1, hi + 1):
        if _better(acc[t, r], resid[t, r], r, t, acc[t, best], resid[t, best], best, t):
            best = r
    return best


BLOCK = 32  # rho cells per cached block


@numba.njit(cache=True, nogil=True)
def _best_of_blocks(acc, resid, bbest, t, lo, hi):
    best = bbest[t, lo // BLOCK]
    for k in range(lo // BLOCK + 1, hi // BLOCK + 1):
        r = bbest[t, k]
        if _better(acc[t, r], resid[t, r], r, t, acc[t, best], resid[t, best], best, t):
            best = r
    return best


@numba.njit(cache=True, nogil=True)
def _bucket(ys, xs, c, s, offset, lo, hi, perm, start):
    # counting sort of pixel indices by rho bin for one theta
    n = ys.shape[0]
    start[lo : hi + 2] = 0
    for p in range(n):
        r = int(math.floor(xs[p] * c + ys[p] * s + 0.5)) + offset
        start[r + 1] += 1
    for r in range(lo + 1, hi + 2):
        start[r] += start[r - 1]
    fill = start[lo : hi + 1].copy()
    for p in range(n):
        r = int(math.floor(xs[p] * c + ys[p] * s + 0.5)) + offset
        perm[fill[r - lo]] = p
        fill[r - lo] += 1


@numba.njit(cache=True, nogil=True)
def _extract(ys, xs, cos_t, sin_t, offset, acc, resid, lo, hi, threshold, max_lines):
    # Greedy peak extraction: take the best cell, retire the pixels that voted
    # for it, repeat until the best cell has fewer than `threshold` votes.
    # Every BLOCK-cell run of a theta row caches its best rho and every row
    # caches its best block. Votes only ever fall, so a cache entry needs a
    # rescan only when the cell it points at was decremented. Voters of a
    # cell are found through a per-theta bucket index built on first use.
    n_theta, n_rho = acc.shape
    out_r = np.empty(max_lines, dtype=np.int64)
    out_t = np.empty(max_lines, dtype=np.int64)
    out_v = np.empty(max_lines, dtype=np.int64)
    n_out = 0
    n = ys.shape[0]
    if n == 0 or max_lines == 0:
        return out_r[:0], out_t[:0], out_v[:0]

    nb = (n_rho + BLOCK - 1) // BLOCK
    bbest = np.zeros((n_theta, nb), dtype=np.int64)
    best = np.empty(n_theta, dtype=np.int64)
    for t in range(n_theta):
        for k in range(lo[t] // BLOCK, hi[t] // BLOCK + 1):
            bbest[t, k] = _range_best(acc, resid, t, max(k * BLOCK, lo[t]), min(k * BLOCK + BLOCK - 1, hi[t]))
        best[t] = _best_of_blocks(acc, resid, bbest, t, lo[t], hi[t])
    bdirty = np.zeros((n_theta, nb), dtype=np.bool_)
    dirty_k = np.empty(nb * n_theta, dtype=np.int64)
    dirty_t = np.empty(nb * n_theta, dtype=np.int64)
    cdirty = np.zeros(n_theta, dtype=np.bool_)
    alive = np.ones(n, dtype=np.bool_)
    gone = np.empty(n, dtype=np.int64)
    # pages of rows never bucketed are never touched
    perm = np.empty((n_theta, n), dtype=np.int32)
    start = np.empty((n_theta, n_rho + 1), dtype=np.int64)
    indexed = np.zeros(n_theta, dtype=np.bool_)

    while n_out < max_lines:
        bt = 0
        for t in range(1, n_theta):
            if _better(acc[t, best[t]], resid[t, best[t]], best[t], t,
                       acc[bt, best[bt]], resid[bt, best[bt]], best[bt], bt):
                bt = t
        br = best[bt]
        v = acc[bt, br]
        if v < threshold:
            break
        out_r[n_out] = br
        out_t[n_out] = bt
        out_v[n_out] = v
        n_out += 1
        if not indexed[bt]:
            _bucket(ys, xs, cos_t[bt], sin_t[bt], offset, lo[bt], hi[bt], perm[bt], start[bt])
            indexed[bt] = True
        n_gone = 0
        for i in range(start[bt, br], start[bt, br + 1]):
            p = perm[bt, i]
            if alive[p]:
                alive[p] = False
                gone[n_gone] = p
                n_gone += 1
        # theta-outer so each accumulator row is touched once per line
        n_dirty = 0
        for t in range(n_theta):
            c = cos_t[t]
            s = sin_t[t]
            for i in range(n_gone):
                p = gone[i]
                q = xs[p] * c + ys[p] * s
                rb = int(math.floor(q + 0.5))
                d = q - rb
                r = rb + offset
                acc[t, r] -= 1
                resid[t, r] -= d * d
                k = r // BLOCK
                if r == bbest[t, k] and not bdirty[t, k]:
                    bdirty[t, k] = True
                    dirty_k[n_dirty] = k
                    dirty_t[n_dirty] = t
                    n_dirty += 1
        for i in range(n_dirty):
            k = dirty_k[i]
            t = dirty_t[i]
            bdirty[t, k] = False
            bbest[t, k] = _range_best(acc, resid, t, max(k * BLOCK, lo[t]), min(k * BLOCK + BLOCK - 1, hi[t]))
            if k == best[t] // BLOCK:
                cdirty[t] = True
        for i in range(n_dirty):
            t = dirty_t[i]
            if cdirty[t]:
                best[t] = _best_of_blocks(acc, resid, bbest, t, lo[t], hi[t])
                cdirty[t] = False
    return out_r[:n_out], out_t[:n_out], out_v[:n_out]


@numba.njit(cache=True, nogil=True)
def _coords(edges):
    # row-major edge coordinates, like np.nonzero but as float64
    h, w = edges.shape
    n = 0
    for y in range(h):
        for x in range(w):
            n += edges[y, x]
    ys = np.empty(n, dtype=np.float64)
    xs = np.empty(n, dtype=np.float64)
    i = 0
    for y in range(h):
        for x in range(w):
            if edges[y, x]:
                ys[i] = y
                xs[i] = x
                i += 1
    return ys, xs


def _prepare(edges: np.ndarray, params: HoughParams):
    edges = np.ascontiguousarray(edges, dtype=bool)
    h, w = edges.shape
    offset = math.ceil(math.hypot(w, h) / params.rho_resolution)
    ys, xs = _coords(edges)
    cos_t, sin_t = trig_tables(params.thetas_deg)
    inv_res = 1.0 / params.rho_resolution
    cos_t *= inv_res
    sin_t *= inv_res
    acc, resid, lo, hi = _accumulate(ys, xs, cos_t, sin_t, offset, 2 * offset + 1)
    return ys, xs, cos_t, sin_t, offset, acc, resid, lo, hi


def hough_accumulator(edges: np.ndarray, params: HoughParams):
    """Vote and residual arrays of shape ``(n_rho, n_theta)``, the rho index
    of rho = 0, and the edge coordinates that voted."""
    ys, xs, _, _, offset, acc, resid, _, _ = _prepare(edges, params)
    return acc.T, resid.T, offset, (ys, xs)


def hough_count(edges: np.ndarray, params: HoughParams | None = None, max_lines: int | None = None) -> LineSet:
    """Lines found by greedy extraction from the rho-theta accumulator.

    Each reported line's ``votes`` counts the edge pixels in its bin that
    no earlier line had claimed. ``max_lines`` stops the search early.
    """
    params = params or HoughParams()
    ys, xs, cos_t, sin_t, offset, acc, resid, lo, hi = _prepare(edges, params)
    limit = len(ys) if max_lines is None else min(max_lines, len(ys))
    rs, ts, vs = _extract(
        ys, xs, cos_t, sin_t, offset, acc, resid, lo, hi, params.vote_threshold, max(limit, 0),
    )
    thetas = params.thetas_deg
    lines = tuple(
        Line((int(r) - offset) * params.rho_resolution, float(thetas[t]), int(v))
        for r, t, v in zip(rs, ts, vs)
    )
    return LineSet(lines)
