import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lanetune.fuzzy import TunerState
from lanetune.pipeline import (
    ChannelSpec,
    PipelineConfig,
    channel_allocate,
    iter_clip,
    process_clip,
    process_frame,
)
from lanetune.synth import SceneSpec, render_frame


@pytest.fixture(scope="module")
def road():
    return render_frame(SceneSpec(width=640, height=360, noise_sigma=5, seed=3), 0)


def test_channel_identity_spec(rng):
    frame = rng.integers(0, 256, (6, 7, 3), dtype=np.uint8)
    edges = rng.random((6, 7)) < 0.5
    assert np.array_equal(channel_allocate(frame, edges, ChannelSpec(("Blue", "Green", "Red"))), frame)


def test_channel_empty_edges(rng):
    frame = rng.integers(0, 256, (6, 7, 3), dtype=np.uint8)
    out = channel_allocate(frame, np.zeros((6, 7), bool))
    assert (out[..., 0] == 0).all() and (out[..., 2] == 0).all()
    assert np.array_equal(out[..., 1], frame[..., 1])


def test_channel_single_edge_pixel(rng):
    frame = rng.integers(0, 256, (6, 7, 3), dtype=np.uint8)
    edges = np.zeros((6, 7), bool)
    edges[2, 5] = True
    out = channel_allocate(frame, edges)
    for plane in (0, 2):
        assert out[2, 5, plane] == 255
        assert out[..., plane].sum() == 255


def test_channel_spec_parse():
    assert ChannelSpec.parse("edge, green ,RED").planes == ("Edge", "Green", "Red")
    assert str(ChannelSpec()) == "Edge,Green,Edge"
    with pytest.raises(ValueError):
        ChannelSpec.parse("edge,green")
    with pytest.raises(ValueError):
        ChannelSpec.parse("edge,green,alpha")


def test_constant_frame_keeps_threshold_at_floor():
    frame = np.full((40, 60, 3), 128, np.uint8)
    out, state, trace = process_frame(PipelineConfig().initial_state(), frame)
    assert trace.th_high_used == 1.0
    assert trace.line_count == 0 and trace.edge_pixel_count_pre_roi == 0
    assert state.th_high == 1.0


def test_one_frame_clip(road):
    outs, traces = process_clip([road])
    assert len(outs) == 1 and traces[0].th_high_used == 1.0 and traces[0].frame_index == 0


def test_empty_clip_and_shape_change(road):
    with pytest.raises(ValueError, match="no frames"):
        process_clip([])
    with pytest.raises(ValueError, match="frame 1"):
        process_clip([road, road[:-2]])


def _det(traces):
    return [{k: v for k, v in t.to_dict().items() if k != "stage_ms"} for t in traces]


def test_deterministic_and_reset_per_clip(road):
    frames = [road, road, road]
    a_out, a_tr = process_clip(frames)
    b_out, b_tr = process_clip(frames)
    assert all(np.array_equal(x, y) for x, y in zip(a_out, b_out))
    assert _det(a_tr) == _det(b_tr)
    assert b_tr[0].th_high_used == 1.0


def test_contract_on_road_clip(road):
    frames = [road] * 25
    outs, traces = process_clip(frames)
    for frame, out in zip(frames, outs):
        assert out.shape == frame.shape and out.dtype == np.uint8
        assert np.array_equal(out[..., 1], frame[..., 1])
    for t0, t1 in zip(traces, traces[1:]):
        assert t1.th_high_used == min(max(t0.th_high_used + t0.delta_applied, 1.0), 1443.0)
        assert t1.frame_index == t0.frame_index + 1
        assert t0.edge_pixel_count_post_roi <= t0.edge_pixel_count_pre_roi
    ths = [t.th_high_used for t in traces]
    final = ths[-1]
    k = next(i for i, th in enumerate(ths) if abs(th - final) <= 0.5)
    assert all(b >= a for a, b in zip(ths[: k + 1], ths[1 : k + 1]))
    assert all(abs(b - a) <= 0.5 for a, b in zip(ths[k:], ths[k + 1 :]))


def test_roi_output_edges(road):
    full, _, _ = process_frame(PipelineConfig(initial_threshold=5.0).initial_state(), road,
                               PipelineConfig(initial_threshold=5.0))
    cfg = PipelineConfig(initial_threshold=5.0, output_edges="roi")
    roi_out, _, trace = process_frame(cfg.initial_state(), road, cfg)
    assert (roi_out[..., 0] > 0).sum() == trace.edge_pixel_count_post_roi
    assert (full[..., 0] > 0).sum() == trace.edge_pixel_count_pre_roi
    assert not (roi_out[..., 0] & ~cfg.roi_for(640, 360).mask() * 255).any()


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(initial_threshold=0.5)
    with pytest.raises(ValueError):
        PipelineConfig(output_edges="masked")
    with pytest.raises(ValueError):
        PipelineConfig(th_min=10, th_max=5, initial_threshold=7)


@given(arrays(np.uint8, st.tuples(st.integers(3, 20), st.integers(3, 20), st.just(3))), st.floats(1, 1443))
def test_invariants_on_arbitrary_frames(frame, th):
    state = TunerState(th)
    out, nxt, trace = process_frame(state, frame)
    assert out.shape == frame.shape
    assert np.array_equal(out[..., 1], frame[..., 1])
    assert np.array_equal(out[..., 0], out[..., 2])
    assert set(np.unique(out[..., 0])) <= {0, 255}
    assert nxt.th_high == min(max(th + trace.delta_applied, 1.0), 1443.0)


def test_iter_clip_is_lazy(road):
    def frames():
        yield road
        raise RuntimeError("should not be pulled")

    gen = iter_clip(frames())
    out, trace = next(gen)
    assert trace.frame_index == 0
