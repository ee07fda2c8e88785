"""Frame files, clip discovery and trace serialization."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterator

import numpy as np
from PIL import Image

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff"}
LIST_SUFFIXES = {".txt", ".lst"}


class FrameError(RuntimeError):
    pass


def read_frame(path) -> np.ndarray:
    """Load an image file as a BGR ``uint8`` frame."""
    try:
        with Image.open(path) as im:
            rgb = np.asarray(im.convert("RGB"))
    except (OSError, ValueError) as exc:
        raise FrameError(f"cannot read frame {path}: {exc}") from exc
    return np.ascontiguousarray(rgb[:, :, ::-1])


def write_frame(path, frame: np.ndarray) -> None:
    Image.fromarray(np.ascontiguousarray(frame[:, :, ::-1])).save(path, format="PNG")


def list_frames(source) -> list[Path]:
    """Frame paths of one clip.

    A directory yields its image files in lexicographic name order. A list
    file yields its non-blank lines in file order, relative paths resolved
    against the list file's directory.
    """
    source = Path(source)
    if source.is_dir():
        return sorted(p for p in source.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
    if source.is_file() and source.suffix.lower() in LIST_SUFFIXES:
        out = []
        for line in source.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                p = Path(line)
                out.append(p if p.is_absolute() else source.parent / p)
        return out
    if not source.exists():
        raise FrameError(f"input {source} does not exist")
    raise FrameError(f"input {source} is neither a directory nor a list file ({', '.join(sorted(LIST_SUFFIXES))})")


def discover_clips(source) -> list[tuple[str, list[Path]]]:
    """Split an input into named clips.

    A directory holding frames is one clip; a directory holding only
    sub-directories is one clip per sub-directory that has frames.
    """
    source = Path(source)
    frames = list_frames(source)
    if frames or not source.is_dir():
        return [(source.stem if source.is_file() else source.name, frames)]
    clips = []
    for sub in sorted(p for p in source.iterdir() if p.is_dir()):
        sub_frames = list_frames(sub)
        if sub_frames:
            clips.append((sub.name, sub_frames))
    return clips


def iter_frames(paths) -> Iterator[np.ndarray]:
    for p in paths:
        yield read_frame(p)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            raise ValueError(f"cannot serialize non-finite value {v}")
        text = f"{v:.6f}"
        return "0.000000" if text == "-0.000000" else text
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    return json.dumps(value)


def dumps_fixed(obj) -> str:
    """JSON text with every float written to exactly 6 decimal places."""
    return _fmt(obj)
