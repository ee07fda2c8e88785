"""Single-input Mamdani controller for the Canny high threshold.

The input is the Hough line count inside the ROI; the output is a signed
step added to the threshold for the next frame. Inference is the usual
Mamdani stack: min implication, max aggregation, centroid on a fixed grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .edges import TH_MAX, TH_MIN

INF = math.inf


@dataclass(frozen=True)
class MembershipFunction:
    """Piecewise-linear membership.

    ``points`` is a triangle ``(a, b, c)`` or a trapezoid ``(a, b, c, d)``.
    Infinite ``a == b`` or ``c == d`` give an open shoulder that stays at 1
    out to the end of the domain.
    """

    label: str
    points: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if len(pts) == 3:
            pts = (pts[0], pts[1], pts[1], pts[2])
        if len(pts) != 4:
            raise ValueError(f"{self.label}: expected 3 or 4 breakpoints, got {len(self.points)}")
        if any(math.isnan(p) for p in pts) or list(pts) != sorted(pts):
            raise ValueError(f"{self.label}: breakpoints must be non-decreasing, got {self.points}")
        if math.isinf(pts[1]) and pts[1] == pts[2]:
            raise ValueError(f"{self.label}: plateau must contain a finite point")
        object.__setattr__(self, "points", pts)

    def __call__(self, x):
        return membership(self, x)


def membership(mf: MembershipFunction, x):
    """Degree of ``x`` in ``mf``; scalar in, float out, array in, array out."""
    a, b, c, d = mf.points
    xs = np.asarray(x, dtype=np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        rise = (xs - a) / (b - a) if b > a else np.ones_like(xs)
        fall = (d - xs) / (d - c) if d > c else np.ones_like(xs)
    mu = np.where(
        (xs < a) | (xs > d),
        0.0,
        np.where(xs < b, rise, np.where(xs > c, fall, 1.0)),
    )
    mu = np.clip(mu, 0.0, 1.0)
    return float(mu) if mu.ndim == 0 else mu


@dataclass(frozen=True)
class FuzzyRule:
    antecedent: str
    consequent: str


def default_inputs() -> tuple[MembershipFunction, ...]:
    return (
        MembershipFunction("Too few", (-INF, -INF, 2.0, 5.0)),
        MembershipFunction("Few", (2.0, 5.0, 10.0)),
        MembershipFunction("Good", (5.0, 10.0, 20.0, 25.0)),
        MembershipFunction("Many", (20.0, 30.0, 40.0)),
        MembershipFunction("Too many", (30.0, 40.0, INF, INF)),
    )


def default_outputs() -> tuple[MembershipFunction, ...]:
    return (
        MembershipFunction("Minus2", (-1.5, -1.0, -0.5)),
        MembershipFunction("Minus1", (-0.5, -0.25, 0.0)),
        MembershipFunction("Zero", (-0.5, 0.0, 0.5)),
        MembershipFunction("Add1", (0.0, 0.25, 0.5)),
        MembershipFunction("Add2", (3.5, 4.0, 4.5)),
    )


def default_rules() -> tuple[FuzzyRule, ...]:
    return (
        FuzzyRule("Too few", "Minus2"),
        FuzzyRule("Few", "Minus1"),
        FuzzyRule("Good", "Zero"),
        FuzzyRule("Many", "Add1"),
        FuzzyRule("Too many", "Add2"),
    )


@dataclass(frozen=True)
class FuzzySystem:
    inputs: tuple[MembershipFunction, ...] = field(default_factory=default_inputs)
    outputs: tuple[MembershipFunction, ...] = field(default_factory=default_outputs)
    rules: tuple[FuzzyRule, ...] = field(default_factory=default_rules)
    output_range: tuple[float, float] = (-1.5, 4.5)
    samples: int = 4096

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "output_range", tuple(float(v) for v in self.output_range))
        in_labels = [mf.label for mf in self.inputs]
        out_labels = {mf.label for mf in self.outputs}
        if len(set(in_labels)) != len(in_labels):
            raise ValueError("input membership labels must be unique")
        if len(out_labels) != len(self.outputs):
            raise ValueError("output membership labels must be unique")
        seen = [r.antecedent for r in self.rules]
        if sorted(seen) != sorted(in_labels):
            raise ValueError(f"every input label needs exactly one rule; inputs {in_labels}, rules cover {seen}")
        for r in self.rules:
            if r.consequent not in out_labels:
                raise ValueError(f"rule {r.antecedent!r} -> unknown output {r.consequent!r}")
        lo, hi = self.output_range
        if not lo < hi or self.samples < 2:
            raise ValueError("output_range must be increasing and samples >= 2")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.output_range[0], self.output_range[1], self.samples)

    def input(self, label: str) -> MembershipFunction:
        return next(mf for mf in self.inputs if mf.label == label)

    def output(self, label: str) -> MembershipFunction:
        return next(mf for mf in self.outputs if mf.label == label)

    def fuzzify(self, x: float) -> dict[str, float]:
        return {mf.label: membership(mf, x) for mf in self.inputs}


def aggregate(line_count: float, system: FuzzySystem) -> np.ndarray:
    """Max of the min-clipped consequents, sampled on ``system.grid``."""
    grid = system.grid
    agg = np.zeros_like(grid)
    degrees = system.fuzzify(line_count)
    for rule in system.rules:
        strength = degrees[rule.antecedent]
        if strength <= 0.0:
            continue
        clipped = np.minimum(membership(system.output(rule.consequent), grid), strength)
        np.maximum(agg, clipped, out=agg)
    return agg


def fis_delta(line_count: float, system: FuzzySystem | None = None) -> float:
    """Crisp threshold step for ``line_count`` (centroid of the aggregate)."""
    if line_count < 0:
        raise ValueError(f"line_count must be non-negative, got {line_count}")
    system = system or FuzzySystem()
    agg = aggregate(line_count, system)
    area = agg.sum()
    if area <= 0.0:
        return 0.0
    return float((system.grid * agg).sum() / area)


@dataclass(frozen=True)
class TunerState:
    th_high: float = 1.0
    frame_index: int = 0
    last_line_count: int = 0
    last_delta: float = 0.0
    th_min: float = TH_MIN
    th_max: float = TH_MAX

    def __post_init__(self):
        if not self.th_min <= self.th_high <= self.th_max:
            raise ValueError(f"th_high {self.th_high} outside [{self.th_min}, {self.th_max}]")


def tune(state: TunerState, line_count: float, system: FuzzySystem | None = None) -> TunerState:
    delta = fis_delta(line_count, system)
    th = min(max(state.th_high + delta, state.th_min), state.th_max)
    return replace(
        state,
        th_high=th,
        frame_index=state.frame_index + 1,
        last_line_count=line_count,
        last_delta=delta,
    )
