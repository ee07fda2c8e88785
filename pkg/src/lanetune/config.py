"""YAML configuration for the pipeline.

Every key is optional; missing keys take the built-in defaults. A dump of
the effective configuration can be fed straight back in.
"""

from __future__ import annotations

import copy
import math
from typing import Any

import yaml

from .filtering import BilateralParams
from .fuzzy import FuzzyRule, FuzzySystem, MembershipFunction
from .geometry import HoughParams
from .pipeline import ChannelSpec, PipelineConfig


class ConfigError(ValueError):
    pass


def _points(mf: MembershipFunction) -> list[float]:
    a, b, c, d = mf.points
    pts = [a, b, d] if b == c and not math.isinf(b) else [a, b, c, d]
    return [float(p) for p in pts]


def config_to_dict(cfg: PipelineConfig) -> dict[str, Any]:
    fz = cfg.fuzzy
    return {
        "bilateral": {
            "kernel_size": cfg.bilateral.kernel_size,
            "sigma_spatial": float(cfg.bilateral.sigma_spatial),
            "sigma_intensity": float(cfg.bilateral.sigma_intensity),
            "border": cfg.bilateral.border,
        },
        "roi": {"apex_x": float(cfg.roi_apex[0]), "apex_y": float(cfg.roi_apex[1])},
        "hough": {
            "rho_resolution": float(cfg.hough.rho_resolution),
            "theta_resolution": float(cfg.hough.theta_resolution),
            "vote_threshold": cfg.hough.vote_threshold,
            "line_count_cap": cfg.line_count_cap,
        },
        "canny": {
            "initial_threshold": float(cfg.initial_threshold),
            "th_min": float(cfg.th_min),
            "th_max": float(cfg.th_max),
        },
        "fuzzy": {
            "inputs": {mf.label: _points(mf) for mf in fz.inputs},
            "outputs": {mf.label: _points(mf) for mf in fz.outputs},
            "rules": {r.antecedent: r.consequent for r in fz.rules},
            "output_range": [float(v) for v in fz.output_range],
            "samples": fz.samples,
        },
        "output": {"channels": list(cfg.channels.planes), "edges": cfg.output_edges},
        "luma": [float(v) for v in cfg.luma],
    }


DEFAULTS = config_to_dict(PipelineConfig())


def _merge(base: dict, update: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in update.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{where}'")
        # fuzzy tables are replaced wholesale so labels can change
        if isinstance(base[key], dict) and isinstance(value, dict) and where not in (
            "fuzzy.inputs", "fuzzy.outputs", "fuzzy.rules",
        ):
            out[key] = _merge(base[key], value, where + ".")
        else:
            out[key] = value
    return out


def config_from_dict(data: dict | None) -> PipelineConfig:
    d = _merge(DEFAULTS, data or {})
    section = None
    try:
        section = "bilateral"
        bilateral = BilateralParams(**d["bilateral"])
        section = "hough"
        h = d["hough"]
        hough = HoughParams(h["rho_resolution"], h["theta_resolution"], int(h["vote_threshold"]))
        section = "fuzzy"
        fz = d["fuzzy"]
        fuzzy = FuzzySystem(
            inputs=tuple(MembershipFunction(k, tuple(v)) for k, v in fz["inputs"].items()),
            outputs=tuple(MembershipFunction(k, tuple(v)) for k, v in fz["outputs"].items()),
            rules=tuple(FuzzyRule(k, v) for k, v in fz["rules"].items()),
            output_range=tuple(fz["output_range"]),
            samples=int(fz["samples"]),
        )
        section = "output"
        channels = ChannelSpec(tuple(d["output"]["channels"]))
        section = "pipeline"
        return PipelineConfig(
            bilateral=bilateral,
            roi_apex=(float(d["roi"]["apex_x"]), float(d["roi"]["apex_y"])),
            hough=hough,
            fuzzy=fuzzy,
            channels=channels,
            initial_threshold=float(d["canny"]["initial_threshold"]),
            th_min=float(d["canny"]["th_min"]),
            th_max=float(d["canny"]["th_max"]),
            line_count_cap=int(h["line_count_cap"]),
            output_edges=d["output"]["edges"],
            luma=tuple(float(v) for v in d["luma"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def parse_override(text: str) -> dict:
    """Turn ``"a.b=value"`` into ``{"a": {"b": value}}`` (value parsed as YAML)."""
    if "=" not in text:
        raise ConfigError(f"override must look like key.path=value, got {text!r}")
    key, raw = text.split("=", 1)
    value = yaml.safe_load(raw)
    out: dict = {}
    node = out
    parts = key.strip().split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    return out


def deep_update(base: dict, update: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in update.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_update(out[k], v)
        else:
            out[k] = v
    return out


def load_config(path=None, overrides=()) -> PipelineConfig:
    data: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh)
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        data = loaded or {}
    for item in overrides:
        data = deep_update(data, parse_override(item) if isinstance(item, str) else item)
    return config_from_dict(data)


def dump_config(cfg: PipelineConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=None)
