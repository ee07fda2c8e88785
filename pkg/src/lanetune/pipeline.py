"""Per-frame preprocessing with a one-frame-delayed threshold feedback loop.

Frame N is filtered and edge-detected with the threshold produced while
processing frame N-1. Its ROI line count then sets the threshold for
frame N+1. Each clip starts from a fresh state.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator

import numpy as np

from . import imaging
from .edges import TH_MAX, TH_MIN, canny
from .filtering import BilateralParams, bilateral_filter
from .fuzzy import FuzzySystem, TunerState, tune
from .geometry import HoughParams, TriangleROI, hough_count, roi_mask

SOURCES = {"Edge": None, "Blue": imaging.BLUE, "Green": imaging.GREEN, "Red": imaging.RED}


@dataclass(frozen=True)
class ChannelSpec:
    """Source for output planes 0, 1, 2 (blue, green, red)."""

    planes: tuple[str, str, str] = ("Edge", "Green", "Edge")

    def __post_init__(self):
        planes = tuple(self.planes)
        if len(planes) != 3:
            raise ValueError(f"channel spec needs exactly 3 entries, got {len(planes)}")
        for p in planes:
            if p not in SOURCES:
                raise ValueError(f"unknown channel source {p!r}; choose from {sorted(SOURCES)}")
        object.__setattr__(self, "planes", planes)

    @classmethod
    def parse(cls, text: str) -> "ChannelSpec":
        return cls(tuple(part.strip().capitalize() for part in text.split(",")))

    def __str__(self):
        return ",".join(self.planes)


@dataclass(frozen=True)
class PipelineConfig:
    bilateral: BilateralParams = field(default_factory=BilateralParams)
    roi_apex: tuple[float, float] = (0.5, 0.25)  # fractions of (width, height) from the top-left
    hough: HoughParams = field(default_factory=HoughParams)
    fuzzy: FuzzySystem = field(default_factory=FuzzySystem)
    channels: ChannelSpec = field(default_factory=ChannelSpec)
    initial_threshold: float = 1.0
    th_min: float = TH_MIN
    th_max: float = TH_MAX
    line_count_cap: int = 1000
    output_edges: str = "full"  # "full" or "roi"
    luma: tuple[float, float, float] = imaging.DEFAULT_LUMA

    def __post_init__(self):
        if not TH_MIN <= self.th_min <= self.th_max <= TH_MAX:
            raise ValueError(f"clamp bounds must satisfy {TH_MIN} <= th_min <= th_max <= {TH_MAX}")
        if not self.th_min <= self.initial_threshold <= self.th_max:
            raise ValueError("initial_threshold must lie within the clamp bounds")
        if self.output_edges not in ("full", "roi"):
            raise ValueError(f"output_edges must be 'full' or 'roi', got {self.output_edges!r}")
        if self.line_count_cap < 1:
            raise ValueError("line_count_cap must be >= 1")

    def initial_state(self) -> TunerState:
        return TunerState(self.initial_threshold, th_min=self.th_min, th_max=self.th_max)

    def roi_for(self, width: int, height: int) -> TriangleROI:
        return TriangleROI.for_image(width, height, *self.roi_apex)


@dataclass
class FrameTrace:
    frame_index: int
    th_high_used: float
    line_count: int
    delta_applied: float
    edge_pixel_count_pre_roi: int
    edge_pixel_count_post_roi: int
    stage_ms: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def channel_allocate(frame: np.ndarray, edges: np.ndarray, spec: ChannelSpec | None = None) -> np.ndarray:
    """Build the output frame, taking each plane from the edge map or the input."""
    spec = spec or ChannelSpec()
    frame = imaging.validate_frame(frame)
    edges = np.asarray(edges)
    if edges.shape != frame.shape[:2]:
        raise ValueError(f"edge map shape {edges.shape} does not match frame {frame.shape[:2]}")
    out = np.empty_like(frame)
    edge_plane = None
    for i, src in enumerate(spec.planes):
        if src == "Edge":
            if edge_plane is None:
                edge_plane = imaging.normalize_to_u8(edges)
            out[..., i] = edge_plane
        else:
            out[..., i] = frame[..., SOURCES[src]]
    return out


def process_frame(
    state: TunerState, frame: np.ndarray, config: PipelineConfig | None = None
) -> tuple[np.ndarray, TunerState, FrameTrace]:
    config = config or PipelineConfig()
    frame = imaging.validate_frame(frame)
    h, w = frame.shape[:2]

    t0 = time.perf_counter()
    gray = imaging.to_grayscale(frame, config.luma)
    smooth = bilateral_filter(gray, config.bilateral)
    t1 = time.perf_counter()
    edges = canny(smooth, state.th_high)
    t2 = time.perf_counter()
    masked = roi_mask(edges, config.roi_for(w, h))
    t3 = time.perf_counter()
    lines = hough_count(masked, config.hough, max_lines=config.line_count_cap)
    t4 = time.perf_counter()
    next_state = tune(state, lines.count, config.fuzzy)
    t5 = time.perf_counter()
    out = channel_allocate(frame, edges if config.output_edges == "full" else masked, config.channels)
    t6 = time.perf_counter()

    timings = {
        "denoise": (t1 - t0) * 1e3,
        "canny": (t2 - t1) * 1e3,
        "roi": (t3 - t2) * 1e3,
        "hough": (t4 - t3) * 1e3,
        "tune": (t5 - t4) * 1e3,
        "channels": (t6 - t5) * 1e3,
        "total": (t6 - t0) * 1e3,
    }
    trace = FrameTrace(
        frame_index=state.frame_index,
        th_high_used=state.th_high,
        line_count=lines.count,
        delta_applied=next_state.last_delta,
        edge_pixel_count_pre_roi=int(edges.sum()),
        edge_pixel_count_post_roi=int(masked.sum()),
        stage_ms=timings,
    )
    return out, next_state, trace


def iter_clip(frames: Iterable[np.ndarray], config: PipelineConfig | None = None) -> Iterator[tuple[np.ndarray, FrameTrace]]:
    """Lazily process a clip; raises if it is empty or changes size."""
    config = config or PipelineConfig()
    state = config.initial_state()
    shape = None
    for i, frame in enumerate(frames):
        frame = np.asarray(frame)
        if shape is None:
            shape = frame.shape
        elif frame.shape != shape:
            raise ValueError(f"frame {i} has shape {frame.shape}, clip started with {shape}")
        out, state, trace = process_frame(state, frame, config)
        yield out, trace
    if shape is None:
        raise ValueError("clip contains no frames")


def process_clip(frames: Iterable[np.ndarray], config: PipelineConfig | None = None) -> tuple[list[np.ndarray], list[FrameTrace]]:
    outputs, traces = [], []
    for out, trace in iter_clip(frames, config):
        outputs.append(out)
        traces.append(trace)
    return outputs, traces
