import hashlib
import json

import numpy as np
import pytest

from lanetune import io
from lanetune.cli import main
from lanetune.evaluation import LaneRecord, evaluate_clip, read_lane_file, write_lane_file


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture
def clip(tmp_path):
    out = tmp_path / "clip"
    spec = tmp_path / "scene.yaml"
    spec.write_text("width: 160\nheight: 96\nnoise_sigma: 5\n")
    assert main(["synth", str(spec), "-n", "10", "-o", str(out), "--seed", "4"]) == 0
    return out


def test_png_round_trip(tmp_path, rng):
    frame = rng.integers(0, 256, (9, 11, 3), dtype=np.uint8)
    io.write_frame(tmp_path / "f.png", frame)
    assert np.array_equal(io.read_frame(tmp_path / "f.png"), frame)


def test_list_file_order_and_relative_paths(tmp_path, rng):
    (tmp_path / "sub").mkdir()
    for name in ("b.png", "a.png"):
        io.write_frame(tmp_path / "sub" / name, rng.integers(0, 256, (4, 4, 3), dtype=np.uint8))
    lst = tmp_path / "order.txt"
    lst.write_text("sub/b.png\n\n# comment\nsub/a.png\n")
    assert [p.name for p in io.list_frames(lst)] == ["b.png", "a.png"]
    assert [p.name for p in io.list_frames(tmp_path / "sub")] == ["a.png", "b.png"]


def test_dumps_fixed():
    assert io.dumps_fixed({"a": 1, "b": 0.5, "c": -0.0000001, "d": [2.0]}) == \
        '{"a": 1, "b": 0.500000, "c": 0.000000, "d": [2.000000]}'
    with pytest.raises(ValueError):
        io.dumps_fixed(float("nan"))


def test_synth_writes_frames_and_truth(clip):
    assert len(list(clip.glob("frame_*.png"))) == 10
    truth = read_lane_file(clip / "ground_truth.json")
    assert len(truth) == 10 and len(truth[0].lanes) == 2


def test_synth_one_frame_and_checksums(tmp_path):
    for d in ("a", "b"):
        assert main(["synth", "-n", "1", "-o", str(tmp_path / d), "--seed", "9"]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == ["frame_00000.png", "ground_truth.json"]
    assert all(digest(tmp_path / "a" / f) == digest(tmp_path / "b" / f) for f in files)


def test_synth_invalid_spec(tmp_path, capsys):
    spec = tmp_path / "bad.yaml"
    spec.write_text("lane_count: 9\n")
    assert main(["synth", str(spec), "-n", "1", "-o", str(tmp_path / "o")]) != 0
    assert "lane_count" in capsys.readouterr().err


def test_process_outputs(clip, tmp_path):
    out = tmp_path / "out"
    assert main(["process", str(clip), "-o", str(out), "-q"]) == 0
    pngs = sorted(p.name for p in out.glob("*.png"))
    assert pngs == sorted(p.name for p in clip.glob("*.png"))
    lines = (out / "trace.jsonl").read_text().splitlines()
    assert len(lines) == 10
    first = json.loads(lines[0])
    assert list(first) == ["frame_index", "th_high_used", "line_count", "delta_applied",
                           "edge_pixel_count_pre_roi", "edge_pixel_count_post_roi"]
    assert '"th_high_used": 1.000000' in lines[0]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["frame_count"] == 10
    last = json.loads(lines[-1])
    assert summary["final_threshold"] == pytest.approx(last["th_high_used"] + last["delta_applied"], abs=2e-6)
    assert set(summary["mean_stage_ms"]) >= {"denoise", "canny", "hough", "total"}
    assert len((out / "timings.jsonl").read_text().splitlines()) == 10
    assert (out / "config.yaml").exists()


def test_process_trace_timings_flag(clip, tmp_path):
    out = tmp_path / "out"
    assert main(["process", str(clip), "-o", str(out), "-q", "--trace-timings"]) == 0
    assert "stage_ms" in json.loads((out / "trace.jsonl").read_text().splitlines()[0])


def test_process_flags_override_config(clip, tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("canny:\n  initial_threshold: 3\n")
    out = tmp_path / "out"
    assert main(["process", str(clip), "-o", str(out), "-q", "-c", str(cfg),
                 "--initial-threshold", "20", "--channels", "blue,green,red"]) == 0
    assert json.loads((out / "trace.jsonl").read_text().splitlines()[0])["th_high_used"] == 20.0
    assert np.array_equal(io.read_frame(out / "frame_00003.png"), io.read_frame(clip / "frame_00003.png"))


def test_process_several_clips_reset_state(clip, tmp_path):
    out = tmp_path / "out"
    assert main(["process", str(clip), str(clip.parent / "clip"), "-o", str(out), "-q"]) != 0  # name clash
    root = tmp_path / "clips"
    root.mkdir()
    for name in ("one", "two"):
        (root / name).mkdir()
        for p in sorted(clip.glob("*.png"))[:3]:
            (root / name / p.name).write_bytes(p.read_bytes())
    assert main(["process", str(root), "-o", str(out), "-q"]) == 0
    for name in ("one", "two"):
        first = json.loads((out / name / "trace.jsonl").read_text().splitlines()[0])
        assert first["th_high_used"] == 1.0


def test_process_list_file(clip, tmp_path):
    lst = tmp_path / "frames.txt"
    lst.write_text("clip/frame_00002.png\nclip/frame_00000.png\n")
    out = tmp_path / "out"
    assert main(["process", str(lst), "-o", str(out), "-q"]) == 0
    assert sorted(p.name for p in out.glob("*.png")) == ["frame_00000.png", "frame_00002.png"]


def test_process_empty_dir(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert main(["process", str(tmp_path / "empty"), "-o", str(tmp_path / "o")]) != 0
    assert "no frames found" in capsys.readouterr().err


def test_process_unreadable_frame(clip, tmp_path, capsys):
    (clip / "frame_00004.png").write_bytes(b"not a png")
    assert main(["process", str(clip), "-o", str(tmp_path / "o"), "-q"]) != 0
    assert "frame_00004.png" in capsys.readouterr().err


def test_process_dimension_change(clip, tmp_path, capsys):
    io.write_frame(clip / "frame_00005.png", np.zeros((20, 20, 3), np.uint8))
    assert main(["process", str(clip), "-o", str(tmp_path / "o"), "-q"]) != 0
    assert "frame 5" in capsys.readouterr().err


def test_eval_self_and_library_equivalence(clip, tmp_path, capsys):
    gt = clip / "ground_truth.json"
    assert main(["eval", str(gt), str(gt)]) == 0
    assert capsys.readouterr().out.strip() == '{"accuracy":1.0,"precision":1.0,"recall":1.0}'

    truth = read_lane_file(gt)
    preds = [LaneRecord([[x + 25 * (i % 2) if x != -2 else x for x in lane] for lane in r.lanes[:1]],
                        r.h_samples, r.raw_file) for i, r in enumerate(truth)]
    write_lane_file(tmp_path / "pred.json", preds)
    assert main(["eval", str(tmp_path / "pred.json"), str(gt), "--px-threshold", "20"]) == 0
    got = json.loads(capsys.readouterr().out)
    assert tuple(got.values()) == tuple(evaluate_clip(preds, truth))


def test_eval_failures(clip, tmp_path, capsys):
    gt = clip / "ground_truth.json"
    bad = tmp_path / "bad.json"
    bad.write_text("{oops\n")
    assert main(["eval", str(bad), str(gt)]) != 0
    assert "parse" in capsys.readouterr().err
    part = tmp_path / "part.json"
    write_lane_file(part, read_lane_file(gt)[:8])
    assert main(["eval", str(part), str(gt)]) != 0
    err = capsys.readouterr().err
    assert "frame_00008.png" in err and "frame_00009.png" in err


def test_dump_config(capsys, tmp_path):
    assert main(["dump-config", "--set", "hough.vote_threshold=5"]) == 0
    text = capsys.readouterr().out
    assert "vote_threshold: 5" in text
    assert main(["process", "--dump-config", "--sigma-spatial", "25"]) == 0
    assert "sigma_spatial: 25.0" in capsys.readouterr().out
    assert main(["dump-config", "--set", "hough.nope=1"]) != 0
