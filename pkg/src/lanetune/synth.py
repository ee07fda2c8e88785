"""Deterministic synthetic road clips with ground truth.

Scenes are flat asphalt with straight lane marks converging on a vanishing
point at the image centre, plus optional Gaussian noise and rain streaks.
Frame ``i`` draws its randomness from ``default_rng([seed, i])`` so frames
can be rendered in any order and still match.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .evaluation import ABSENT, H_SAMPLES_720, LaneRecord
from .imaging import round_half_up, to_u8

DEFAULT_LANE_X = {1: (0.3,), 2: (0.25, 0.75), 3: (0.1, 0.5, 0.9)}


@dataclass(frozen=True)
class SceneSpec:
    width: int = 1280
    height: int = 720
    lane_count: int = 2
    lane_bottom_x: tuple[float, ...] | None = None  # fractions of width; defaults by lane_count
    lane_width: float = 14.0  # pixels at the bottom row, shrinking toward the vanishing point
    mark_top: float = 0.55  # marks are drawn below this fraction of the height
    line_intensity: float = 210.0
    asphalt_intensity: float = 90.0
    noise_sigma: float = 0.0
    rain_streaks: int = 0  # per frame
    rain_length: float = 40.0
    rain_intensity: float = 235.0
    seed: int = 0

    def __post_init__(self):
        def bad(name, why):
            raise ValueError(f"{name}: {why}")

        if self.width < 16 or self.height < 16:
            bad("width" if self.width < 16 else "height", "must be at least 16")
        if not 1 <= self.lane_count <= 3:
            bad("lane_count", f"must be 1-3, got {self.lane_count}")
        if self.lane_bottom_x is not None:
            xs = tuple(float(v) for v in self.lane_bottom_x)
            if len(xs) != self.lane_count:
                bad("lane_bottom_x", f"needs {self.lane_count} entries, got {len(xs)}")
            object.__setattr__(self, "lane_bottom_x", xs)
        if not self.lane_width > 0:
            bad("lane_width", "must be positive")
        if not 0.5 < self.mark_top < 1.0:
            bad("mark_top", "must lie in (0.5, 1) so marks stay below the vanishing point")
        for name in ("line_intensity", "asphalt_intensity", "rain_intensity"):
            if not 0 <= getattr(self, name) <= 255:
                bad(name, "must lie in [0, 255]")
        if self.noise_sigma < 0:
            bad("noise_sigma", "must be non-negative")
        if self.rain_streaks < 0:
            bad("rain_streaks", "must be non-negative")
        if not self.rain_length > 0:
            bad("rain_length", "must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "SceneSpec":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ValueError(f"{key}: unknown scene field")
        return cls(**data)

    @property
    def vanishing_point(self) -> tuple[float, float]:
        return self.width / 2.0, self.height / 2.0

    @property
    def bottom_xs(self) -> tuple[float, ...]:
        fracs = self.lane_bottom_x or DEFAULT_LANE_X[self.lane_count]
        return tuple(f * (self.width - 1) for f in fracs)

    @property
    def h_samples(self) -> list[int]:
        scale = self.height / 720.0
        return [int(v) for v in round_half_up(np.array(H_SAMPLES_720) * scale)]


def lane_center_x(spec: SceneSpec, bottom_x: float, y):
    vx, vy = spec.vanishing_point
    t = (np.asarray(y, dtype=np.float64) - vy) / (spec.height - 1 - vy)
    return vx + (bottom_x - vx) * t


def render_background(spec: SceneSpec) -> np.ndarray:
    """Noise-free gray scene, ``float64`` of shape ``(H, W)``."""
    h, w = spec.height, spec.width
    img = np.full((h, w), spec.asphalt_intensity, dtype=np.float64)
    _, vy = spec.vanishing_point
    y0 = int(math.ceil(spec.mark_top * h))
    ys = np.arange(y0, h, dtype=np.float64)[:, None]
    xs = np.arange(w, dtype=np.float64)[None, :]
    half = spec.lane_width / 2.0 * (ys - vy) / (h - 1 - vy)
    cover = np.zeros((h - y0, w))
    for bx in spec.bottom_xs:
        cx = lane_center_x(spec, bx, ys)
        # horizontal box coverage, anti-aliased over one pixel
        np.maximum(cover, np.clip(half + 0.5 - np.abs(xs - cx), 0.0, 1.0), out=cover)
    img[y0:] += cover * (spec.line_intensity - spec.asphalt_intensity)
    return img


def _draw_streak(img, rng, spec: SceneSpec):
    h, w = img.shape
    x0 = rng.uniform(0, w - 1)
    y0 = rng.uniform(0, h - 1)
    angle = rng.normal(0.0, math.radians(10.0))
    length = spec.rain_length * rng.uniform(0.5, 1.5)
    dx, dy = math.sin(angle), math.cos(angle)
    x1, y1 = x0 + dx * length, y0 + dy * length
    xa, xb = int(max(0, math.floor(min(x0, x1)) - 1)), int(min(w, math.ceil(max(x0, x1)) + 2))
    ya, yb = int(max(0, math.floor(min(y0, y1)) - 1)), int(min(h, math.ceil(max(y0, y1)) + 2))
    if xa >= xb or ya >= yb:
        return
    ys, xs = np.mgrid[ya:yb, xa:xb].astype(np.float64)
    # distance to the segment, 1 px wide with a linear falloff
    t = np.clip((xs - x0) * dx + (ys - y0) * dy, 0.0, length)
    dist = np.hypot(xs - (x0 + t * dx), ys - (y0 + t * dy))
    alpha = np.clip(1.0 - dist, 0.0, 1.0) * 0.8
    patch = img[ya:yb, xa:xb]
    patch += alpha * (spec.rain_intensity - patch)


def render_frame(spec: SceneSpec, index: int, background: np.ndarray | None = None) -> np.ndarray:
    """Frame ``index`` as a BGR ``uint8`` array."""
    base = render_background(spec) if background is None else background
    rng = np.random.default_rng([spec.seed, index])
    img = base.copy()
    for _ in range(spec.rain_streaks):
        _draw_streak(img, rng, spec)
    frame = np.repeat(img[:, :, None], 3, axis=2)
    if spec.noise_sigma > 0:
        frame = frame + rng.normal(0.0, spec.noise_sigma, size=frame.shape)
    return to_u8(frame)


def ground_truth(spec: SceneSpec, raw_file: str) -> LaneRecord:
    ys = spec.h_samples
    top = spec.mark_top * spec.height
    lanes = []
    for bx in spec.bottom_xs:
        lane = []
        for y in ys:
            x = int(round_half_up(lane_center_x(spec, bx, y)))
            lane.append(x if y >= top and 0 <= x < spec.width else ABSENT)
        lanes.append(lane)
    return LaneRecord(lanes, list(ys), raw_file)


def frame_name(index: int) -> str:
    return f"frame_{index:05d}.png"


def generate_clip(spec: SceneSpec, n_frames: int) -> tuple[list[np.ndarray], list[LaneRecord]]:
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    background = render_background(spec)
    frames = [render_frame(spec, i, background) for i in range(n_frames)]
    truth = [ground_truth(spec, frame_name(i)) for i in range(n_frames)]
    return frames, truth
