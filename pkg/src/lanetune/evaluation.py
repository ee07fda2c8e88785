"""Tusimple-style lane scoring.

Records are one JSON object per line with ``lanes`` (lists of x positions,
-2 where the lane is absent), ``h_samples`` (the y anchors) and
``raw_file``. A predicted lane point is correct when it is present and
within ``px_threshold`` pixels of the ground-truth x at the same anchor.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, TextIO

ABSENT = -2
MAX_LANES = 4
PX_THRESHOLD = 20.0
MATCH_THRESHOLD = 0.85

# y anchors for 720-row frames
H_SAMPLES_720 = tuple(range(160, 711, 10))


class LaneFormatError(ValueError):
    pass


class JoinError(ValueError):
    """Prediction and ground-truth files do not cover the same frames."""

    def __init__(self, missing=(), unexpected=(), duplicates=()):
        self.missing = sorted(missing)
        self.unexpected = sorted(unexpected)
        self.duplicates = sorted(duplicates)
        parts = []
        if self.duplicates:
            parts.append("duplicate raw_file: " + ", ".join(self.duplicates))
        if self.missing:
            parts.append("no prediction for: " + ", ".join(self.missing))
        if self.unexpected:
            parts.append("no ground truth for: " + ", ".join(self.unexpected))
        super().__init__("; ".join(parts))


@dataclass
class LaneRecord:
    lanes: list[list[float]]
    h_samples: list[float]
    raw_file: str
    extra: dict = field(default_factory=dict)

    def validate(self, width: int | None = None) -> "LaneRecord":
        name = self.raw_file or "<unnamed>"
        if len(self.lanes) > MAX_LANES:
            raise LaneFormatError(f"{name}: {len(self.lanes)} lanes, at most {MAX_LANES} allowed")
        n = len(self.h_samples)
        for i, lane in enumerate(self.lanes):
            if len(lane) != n:
                raise LaneFormatError(f"{name}: lane {i} has {len(lane)} points but h_samples has {n}")
            for x in lane:
                if x == ABSENT:
                    continue
                if x < 0 or (width is not None and x >= width):
                    raise LaneFormatError(f"{name}: lane {i} has out-of-range x {x}")
        return self

    def to_json(self) -> str:
        obj = {"lanes": self.lanes, "h_samples": self.h_samples, "raw_file": self.raw_file}
        obj.update(self.extra)
        return json.dumps(obj)


def parse_lane_records(stream: Iterable[str] | TextIO) -> list[LaneRecord]:
    """Parse line-delimited lane records, skipping blank lines."""
    records = []
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LaneFormatError(f"line {lineno}: malformed JSON ({exc.msg})") from None
        if not isinstance(obj, dict):
            raise LaneFormatError(f"line {lineno}: expected an object")
        try:
            lanes = obj.pop("lanes")
            h_samples = obj.pop("h_samples")
            raw_file = obj.pop("raw_file")
        except KeyError as exc:
            raise LaneFormatError(f"line {lineno}: missing key {exc.args[0]!r}") from None
        if not isinstance(lanes, list) or not all(isinstance(lane, list) for lane in lanes):
            raise LaneFormatError(f"line {lineno}: 'lanes' must be a list of lists")
        rec = LaneRecord(lanes, h_samples, str(raw_file), obj)
        try:
            rec.validate()
        except LaneFormatError as exc:
            raise LaneFormatError(f"line {lineno}: {exc}") from None
        records.append(rec)
    return records


def read_lane_file(path) -> list[LaneRecord]:
    with open(path, encoding="utf-8") as fh:
        return parse_lane_records(fh)


def write_lane_file(path, records: Iterable[LaneRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def lane_point_accuracy(pred, gt, px_threshold: float = PX_THRESHOLD) -> float:
    if len(pred) != len(gt):
        raise ValueError(f"lane lengths differ: {len(pred)} vs {len(gt)}")
    total = correct = 0
    for p, g in zip(pred, gt):
        if g == ABSENT:
            continue
        total += 1
        if p != ABSENT and abs(p - g) < px_threshold:
            correct += 1
    return correct / total if total else 0.0


class Scores(NamedTuple):
    accuracy: float
    precision: float
    recall: float


@dataclass
class FrameCounts:
    accuracy_sum: float = 0.0
    true_positives: int = 0
    gt_lanes: int = 0
    pred_lanes: int = 0

    def __iadd__(self, other: "FrameCounts") -> "FrameCounts":
        self.accuracy_sum += other.accuracy_sum
        self.true_positives += other.true_positives
        self.gt_lanes += other.gt_lanes
        self.pred_lanes += other.pred_lanes
        return self


def _present(lanes):
    # lanes with no points at all carry nothing to score
    return [lane for lane in lanes if any(x != ABSENT for x in lane)]


def evaluate_frame(pred: LaneRecord, gt: LaneRecord, px_threshold=PX_THRESHOLD, match_threshold=MATCH_THRESHOLD) -> FrameCounts:
    if list(pred.h_samples) != list(gt.h_samples):
        raise LaneFormatError(f"{gt.raw_file}: prediction h_samples differ from ground truth")
    gts = _present(gt.lanes)
    preds = _present(pred.lanes)
    pairs = sorted(
        (
            (-lane_point_accuracy(p, g, px_threshold), gi, pi)
            for gi, g in enumerate(gts)
            for pi, p in enumerate(preds)
        )
    )
    counts = FrameCounts(gt_lanes=len(gts), pred_lanes=len(preds))
    used_g, used_p = set(), set()
    for neg_acc, gi, pi in pairs:
        if gi in used_g or pi in used_p:
            continue
        used_g.add(gi)
        used_p.add(pi)
        counts.accuracy_sum += -neg_acc
        if -neg_acc >= match_threshold:
            counts.true_positives += 1
    return counts


def _index(records, label):
    out, dups = {}, set()
    for rec in records:
        if rec.raw_file in out:
            dups.add(f"{rec.raw_file} ({label})")
        out[rec.raw_file] = rec
    return out, dups


def evaluate_clip(
    preds: Iterable[LaneRecord],
    gts: Iterable[LaneRecord],
    px_threshold: float = PX_THRESHOLD,
    match_threshold: float = MATCH_THRESHOLD,
) -> Scores:
    """Accuracy, precision and recall summed over every frame.

    Lanes are paired greedily per frame by descending point accuracy (ties
    to the lower ground-truth index). Unmatched ground-truth lanes add 0 to
    the accuracy sum. Ratios with an empty denominator are reported as 0.
    """
    pred_by, pdup = _index(preds, "pred")
    gt_by, gdup = _index(gts, "gt")
    missing = gt_by.keys() - pred_by.keys()
    unexpected = pred_by.keys() - gt_by.keys()
    if pdup or gdup or missing or unexpected:
        raise JoinError(missing, unexpected, pdup | gdup)

    total = FrameCounts()
    for name in sorted(gt_by):
        total += evaluate_frame(pred_by[name], gt_by[name], px_threshold, match_threshold)
    accuracy = total.accuracy_sum / total.gt_lanes if total.gt_lanes else 0.0
    precision = total.true_positives / total.pred_lanes if total.pred_lanes else 0.0
    recall = total.true_positives / total.gt_lanes if total.gt_lanes else 0.0
    return Scores(accuracy, precision, recall)
