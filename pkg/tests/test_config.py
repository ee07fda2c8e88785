import math

import pytest

from lanetune.config import (
    ConfigError,
    config_from_dict,
    config_to_dict,
    dump_config,
    load_config,
    parse_override,
)
from lanetune.fuzzy import fis_delta
from lanetune.pipeline import PipelineConfig


def test_defaults_round_trip(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(dump_config(PipelineConfig()))
    assert load_config(path) == PipelineConfig()


def test_default_values():
    d = config_to_dict(PipelineConfig())
    assert d["bilateral"] == {"kernel_size": 7, "sigma_spatial": 50.0, "sigma_intensity": 25.0, "border": "reflect"}
    assert d["hough"]["vote_threshold"] == 3 and d["hough"]["theta_resolution"] == 1.0
    assert d["canny"]["initial_threshold"] == 1.0
    assert d["roi"] == {"apex_x": 0.5, "apex_y": 0.25}
    assert d["fuzzy"]["inputs"]["Too many"] == [30.0, 40.0, math.inf, math.inf]
    assert d["output"]["channels"] == ["Edge", "Green", "Edge"]


def test_overrides_apply_in_order(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("hough:\n  vote_threshold: 4\nbilateral:\n  sigma_spatial: 25\n")
    cfg = load_config(path, ["hough.vote_threshold=6", "output.channels=[Edge, Green, Red]"])
    assert cfg.hough.vote_threshold == 6
    assert cfg.bilateral.sigma_spatial == 25.0
    assert cfg.channels.planes == ("Edge", "Green", "Red")


def test_fuzzy_tables_replaced_wholesale():
    cfg = config_from_dict({"fuzzy": {
        "inputs": {"low": [-math.inf, -math.inf, 0, 10], "high": [0, 10, math.inf, math.inf]},
        "rules": {"low": "Minus2", "high": "Add2"},
    }})
    assert fis_delta(0, cfg.fuzzy) == pytest.approx(-1.0, abs=1e-6)
    assert fis_delta(100, cfg.fuzzy) == pytest.approx(4.0, abs=1e-6)


def test_parse_override():
    assert parse_override("a.b.c=1.5") == {"a": {"b": {"c": 1.5}}}
    assert parse_override("x=edge") == {"x": "edge"}
    with pytest.raises(ConfigError):
        parse_override("novalue")


@pytest.mark.parametrize("data,where", [
    ({"bilateral": {"kernel_size": 4}}, "bilateral"),
    ({"hough": {"bogus": 1}}, "hough.bogus"),
    ({"fuzzy": {"rules": {"Good": "Zero"}}}, "fuzzy"),
    ({"output": {"channels": ["Edge", "Green"]}}, "output"),
    ({"canny": {"initial_threshold": 0}}, "pipeline"),
])
def test_errors_name_section(data, where):
    with pytest.raises(ConfigError, match=where):
        config_from_dict(data)


def test_top_level_must_be_mapping(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(path)
