import numpy as np
import pytest

from bridgeroom import errors, jsonio
from bridgeroom.deformation import (
    METERS_PER_INCH,
    DisplacementHistory,
    FeaModel,
    PlaybackConfig,
    bind_points,
    check_serviceability,
    color_by_displacement,
    deformed_positions,
    export_frame,
    read_fea_model_json,
    read_history_csv,
    sample_displacement,
    track_nodes,
    write_fea_model_json,
    write_history_csv,
)
from bridgeroom.pointcloud import PointCloud, RigidTransform, apply_transform


def line_model(n_nodes=3, span_in=128.0):
    ids = list(range(1, n_nodes + 1))
    pos = [[float(i), 0.0, 0.0] for i in range(n_nodes)]
    return FeaModel(node_ids=ids, positions=pos, span_length_in=span_in,
                    vertical_axis="z", midspan_nodes=[ids[n_nodes // 2]])


def zero_history(node_ids, dt=0.5, duration=2.0):
    n = int(np.floor(duration / dt)) + 1
    return DisplacementHistory(dt=dt, duration=duration,
                               samples={i: np.zeros((n, 3))
                                        for i in node_ids})


# -------------------------------------------------------------------- binding

def test_bind_coincident_point():
    model = FeaModel(node_ids=[7, 9], positions=[[1.0, 2.0, 3.0],
                                                 [5.0, 5.0, 5.0]],
                     span_length_in=100.0, vertical_axis="z",
                     midspan_nodes=[7])
    pc = PointCloud(points=[[1.0, 2.0, 3.0]])
    assert bind_points(pc, model).node_ids.tolist() == [7]


def test_bind_tie_breaks_to_lowest_id():
    model = FeaModel(node_ids=[9, 3], positions=[[1.0, 0.0, 0.0],
                                                 [-1.0, 0.0, 0.0]],
                     span_length_in=100.0, vertical_axis="z",
                     midspan_nodes=[3])
    pc = PointCloud(points=[[0.0, 0.0, 0.0]])
    assert bind_points(pc, model).node_ids.tolist() == [3]


def test_bind_matches_brute_force_scan():
    rng = np.random.default_rng(0)
    ids = rng.permutation(np.arange(10, 30))[:20]
    pos = rng.uniform(-5.0, 5.0, size=(20, 3))
    model = FeaModel(node_ids=ids, positions=pos, span_length_in=100.0,
                     vertical_axis="y", midspan_nodes=[int(ids[0])])
    pc = PointCloud(points=rng.uniform(-6.0, 6.0, size=(500, 3)))
    got = bind_points(pc, model).node_ids
    for i, p in enumerate(pc.points):
        d = np.linalg.norm(pos - p, axis=1)
        best = d.min()
        candidates = ids[d == best]
        assert got[i] == candidates.min()


def test_bind_invariant_under_shared_rigid_transform():
    rng = np.random.default_rng(1)
    ids = np.arange(1, 9)
    pos = rng.uniform(-2.0, 2.0, size=(8, 3))
    model = FeaModel(node_ids=ids, positions=pos, span_length_in=100.0,
                     vertical_axis="z", midspan_nodes=[4])
    pc = PointCloud(points=rng.uniform(-3.0, 3.0, size=(100, 3)))
    angle = 0.9
    rot = np.array([[np.cos(angle), -np.sin(angle), 0.0],
                    [np.sin(angle), np.cos(angle), 0.0],
                    [0.0, 0.0, 1.0]])
    t = RigidTransform(rot, [3.0, -1.0, 2.0])
    moved_model = FeaModel(node_ids=ids,
                           positions=apply_transform(
                               PointCloud(points=pos), t).points,
                           span_length_in=100.0, vertical_axis="z",
                           midspan_nodes=[4])
    a = bind_points(pc, model).node_ids
    b = bind_points(apply_transform(pc, t), moved_model).node_ids
    assert np.array_equal(a, b)


def test_bind_empty_cloud_rejected():
    with pytest.raises(errors.EmptyCloud):
        bind_points(PointCloud(points=np.zeros((0, 3))), line_model())


# ------------------------------------------------------------------- sampling

def test_sample_exact_at_instants():
    h = DisplacementHistory(dt=0.25, duration=0.5, samples={
        1: np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])})
    assert np.array_equal(sample_displacement(h, 1, 0.25), [1.0, 2.0, 3.0])
    assert np.array_equal(sample_displacement(h, 1, 0.5), [4.0, 5.0, 6.0])


def test_sample_linear_midpoint():
    h = DisplacementHistory(dt=0.1, duration=0.1, samples={
        2: np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.002]])})
    np.testing.assert_allclose(sample_displacement(h, 2, 0.05),
                               [0.0, 0.0, 0.001])


def test_sample_out_of_range_and_unknown_node():
    h = zero_history([1], dt=0.5, duration=2.0)
    with pytest.raises(errors.OutOfRange):
        sample_displacement(h, 1, 2.5)
    with pytest.raises(errors.OutOfRange):
        sample_displacement(h, 1, -0.1)
    with pytest.raises(errors.UnknownNode):
        sample_displacement(h, 99, 0.0)


# -------------------------------------------------------------- deformed view

def test_deformed_scale_zero_is_base_exactly():
    rng = np.random.default_rng(2)
    model = line_model()
    pc = PointCloud(points=rng.uniform(0.0, 2.0, size=(10, 3)))
    h = DisplacementHistory(dt=0.5, duration=1.0, samples={
        i: rng.normal(0, 0.01, size=(3, 3)) for i in (1, 2, 3)})
    binding = bind_points(pc, model)
    out = deformed_positions(pc, binding, h, 0.7,
                             PlaybackConfig(scale=0.0))
    assert np.array_equal(out, pc.points)


def test_deformed_axis_mask_freezes_axes():
    rng = np.random.default_rng(3)
    model = line_model()
    pc = PointCloud(points=rng.uniform(0.0, 2.0, size=(10, 3)))
    h = DisplacementHistory(dt=0.5, duration=1.0, samples={
        i: rng.normal(0, 0.01, size=(3, 3)) for i in (1, 2, 3)})
    binding = bind_points(pc, model)
    out = deformed_positions(pc, binding, h, 0.6,
                             PlaybackConfig(scale=5.0, axis_mask=(0, 0, 1)))
    assert np.array_equal(out[:, :2], pc.points[:, :2])
    assert not np.array_equal(out[:, 2], pc.points[:, 2])


def test_deformed_matches_per_point_formula():
    """Hand-evaluated p + s*(m*u) per point at s=50, t=0.37."""
    rng = np.random.default_rng(4)
    model = FeaModel(node_ids=[1, 2], positions=[[0.0, 0.0, 0.0],
                                                 [4.0, 0.0, 0.0]],
                     span_length_in=100.0, vertical_axis="z",
                     midspan_nodes=[1])
    pc = PointCloud(points=rng.uniform(-1.0, 5.0, size=(10, 3)))
    h = DisplacementHistory(dt=0.1, duration=1.0, samples={
        1: rng.normal(0, 0.01, size=(11, 3)),
        2: rng.normal(0, 0.01, size=(11, 3))})
    binding = bind_points(pc, model)
    cfg = PlaybackConfig(scale=50.0, speed=2.0, axis_mask=(1, 0, 1))
    out = deformed_positions(pc, binding, h, 0.37, cfg)
    mask = np.array([1.0, 0.0, 1.0])
    for i in range(10):
        u = sample_displacement(h, int(binding.node_ids[i]), 0.37)
        np.testing.assert_allclose(out[i], pc.points[i] + 50.0 * (mask * u),
                                   atol=1e-15)


def test_deformed_linear_in_scale_exactly():
    """With dyadic inputs every float op is exact, so doubling the scale
    exactly doubles the offsets."""
    model = FeaModel(node_ids=[1, 2], positions=[[0.0, 0.0, 0.0],
                                                 [1.0, 0.0, 0.0]],
                     span_length_in=100.0, vertical_axis="z",
                     midspan_nodes=[1])
    pc = PointCloud(points=[[0.25, 0.5, -0.75], [0.875, 1.5, 2.0]])
    u = np.array([[0.0, 0.0, 0.0],
                  [2.0 ** -9, -(2.0 ** -10), 2.0 ** -8]])
    h = DisplacementHistory(dt=0.5, duration=0.5, samples={
        1: u.copy(), 2: 2.0 * u})
    binding = bind_points(pc, model)
    t = 0.5
    base = pc.points
    one = deformed_positions(pc, binding, h, t, PlaybackConfig(scale=8.0))
    two = deformed_positions(pc, binding, h, t, PlaybackConfig(scale=16.0))
    assert np.array_equal(two - base, 2.0 * (one - base))


def test_deformed_ignores_speed():
    rng = np.random.default_rng(5)
    model = line_model()
    pc = PointCloud(points=rng.uniform(0.0, 2.0, size=(5, 3)))
    h = DisplacementHistory(dt=0.5, duration=1.0, samples={
        i: rng.normal(0, 0.01, size=(3, 3)) for i in (1, 2, 3)})
    binding = bind_points(pc, model)
    slow = deformed_positions(pc, binding, h, 0.4,
                              PlaybackConfig(scale=3.0, speed=0.5))
    fast = deformed_positions(pc, binding, h, 0.4,
                              PlaybackConfig(scale=3.0, speed=4.0))
    assert np.array_equal(slow, fast)


# ------------------------------------------------------------------- coloring

def test_colormap_stops():
    limit = 0.01
    out = color_by_displacement([0.0, limit / 2, limit, 2 * limit], limit)
    assert out.tolist() == [[0, 0, 255], [0, 255, 0], [255, 0, 0],
                            [255, 0, 0]]


def test_colormap_quarter_points_round_half_up():
    limit = 1.0
    out = color_by_displacement([0.25, 0.75], limit)
    assert out.tolist() == [[0, 128, 128], [128, 128, 0]]


def test_colormap_red_channel_monotone():
    rng = np.random.default_rng(6)
    mags = np.sort(rng.uniform(0.0, 2.0, size=300))
    out = color_by_displacement(mags, 1.0)
    assert np.all(np.diff(out[:, 0].astype(int)) >= 0)


def test_colormap_rejects_bad_limit():
    with pytest.raises(errors.NonPositiveLimit):
        color_by_displacement([0.0], 0.0)


# ------------------------------------------------------------- serviceability

def test_limit_derivation_and_unit_conversion():
    model = line_model(span_in=128.0)
    assert model.limit_in == 0.128
    assert 0.128 * METERS_PER_INCH == 0.0032512  # 0.128 in = 3.2512 mm


def test_all_zero_history_passes():
    model = line_model()
    report = check_serviceability(zero_history([1, 2, 3]), model)
    assert report.violations == []
    assert all(not e.violated for e in report.entries)
    assert all(e.peak_in == 0.0 for e in report.entries)


def test_amplified_midspan_node_flagged():
    """Peak of 0.130 in vertical on the midspan node crosses the
    0.128 in limit; every other node stays clear."""
    model = line_model(span_in=128.0)
    h = zero_history([1, 2, 3], dt=0.5, duration=2.0)
    h.samples[2][3, 2] = 0.130 * METERS_PER_INCH
    report = check_serviceability(h, model)
    assert report.violations == [2]
    by_node = {e.node_id: e for e in report.entries}
    assert by_node[2].violated
    assert by_node[2].peak_in == pytest.approx(0.130)
    assert by_node[2].t_peak == pytest.approx(1.5)
    assert not by_node[1].violated and not by_node[3].violated


def test_peak_exactly_at_limit_is_not_violated():
    model = line_model(span_in=128.0)
    h = zero_history([1, 2, 3])
    h.samples[2][1, 2] = 0.128 * METERS_PER_INCH
    report = check_serviceability(h, model)
    assert report.violations == []


def test_vertical_axis_selects_component():
    model = FeaModel(node_ids=[1], positions=[[0.0, 0.0, 0.0]],
                     span_length_in=128.0, vertical_axis="y",
                     midspan_nodes=[1])
    h = zero_history([1])
    h.samples[1][2, 1] = -0.2 * METERS_PER_INCH  # sign must not matter
    report = check_serviceability(h, model)
    assert report.violations == [1]
    assert report.entries[0].peak_in == pytest.approx(0.2)


def test_node_set_mismatch_rejected():
    model = line_model()
    with pytest.raises(errors.NodeSetMismatch):
        check_serviceability(zero_history([1, 2]), model)
    with pytest.raises(errors.NodeSetMismatch):
        check_serviceability(zero_history([1, 2, 3, 4]), model)


def test_verdict_invariant_under_playback_configs():
    """100 random configs drive the rendering path; the serviceability
    report bytes never move."""
    rng = np.random.default_rng(7)
    model = line_model(span_in=128.0)
    h = zero_history([1, 2, 3], dt=0.25, duration=2.0)
    h.samples[2][:, 2] = rng.normal(0.0, 0.001, size=9)
    h.samples[2][4, 2] = 0.130 * METERS_PER_INCH
    pc = PointCloud(points=rng.uniform(0.0, 2.0, size=(20, 3)))
    binding = bind_points(pc, model)

    def report_text():
        rep = check_serviceability(h, model)
        return jsonio.dumps({
            "limit_in": rep.limit_in,
            "violations": rep.violations,
            "peaks": [e.peak_in for e in rep.entries],
        })

    reference = report_text()
    for _ in range(100):
        cfg = PlaybackConfig(scale=float(rng.uniform(0.0, 100.0)),
                             speed=float(rng.uniform(0.1, 10.0)),
                             axis_mask=tuple(rng.integers(0, 2, size=3)))
        deformed_positions(pc, binding, h, float(rng.uniform(0.0, 2.0)), cfg)
        assert report_text() == reference


# ------------------------------------------------------------------- tracking

def test_track_zero_history_no_warnings():
    model = line_model()
    traces = track_nodes(zero_history([1, 2, 3]), [2], model)
    assert len(traces) == 1
    assert traces[0].warnings == []


def test_track_single_sample_interval():
    model = line_model(span_in=128.0)
    h = zero_history([1, 2, 3], dt=0.5, duration=2.0)
    h.samples[2][3, 2] = 0.2 * METERS_PER_INCH
    trace = track_nodes(h, [2], model)[0]
    assert trace.warnings == [(1.5, 1.5)]


def test_track_sinusoid_matches_threshold_scan():
    model = line_model(span_in=128.0)
    limit_m = model.limit_in * METERS_PER_INCH
    dt, duration = 0.01, 4.0
    n = int(np.floor(duration / dt)) + 1
    t = np.arange(n) * dt
    wave = 1.5 * limit_m * np.sin(2 * np.pi * 0.5 * t)
    h = DisplacementHistory(dt=dt, duration=duration, samples={
        1: np.zeros((n, 3)), 3: np.zeros((n, 3)),
        2: np.column_stack([np.zeros(n), np.zeros(n), wave])})
    trace = track_nodes(h, [2], model)[0]

    exceed = np.abs(wave) / METERS_PER_INCH > model.limit_in
    expected = []
    k = 0
    while k < n:
        if exceed[k]:
            start = k
            while k + 1 < n and exceed[k + 1]:
                k += 1
            expected.append((start * dt, k * dt))
        k += 1
    assert trace.warnings == expected
    assert len(expected) == 4  # two lobes per period, two periods
    assert np.array_equal(trace.vertical, wave)


def test_track_unknown_node():
    model = line_model()
    with pytest.raises(errors.UnknownNode):
        track_nodes(zero_history([1, 2, 3]), [42], model)


# ----------------------------------------------------------------- frame view

def test_export_frame_colors_ignore_scale():
    """Palette encodes raw displacement against the limit in meters, so
    visual exaggeration cannot change colors."""
    rng = np.random.default_rng(8)
    model = line_model(span_in=128.0)
    pc = PointCloud(points=rng.uniform(0.0, 2.0, size=(12, 3)))
    h = zero_history([1, 2, 3], dt=0.5, duration=1.0)
    h.samples[2][1, 2] = 0.064 * METERS_PER_INCH  # half the limit
    binding = bind_points(pc, model)
    small = export_frame(pc, binding, h, 0.5, PlaybackConfig(scale=1.0),
                         model)
    large = export_frame(pc, binding, h, 0.5, PlaybackConfig(scale=80.0),
                         model)
    assert np.array_equal(small.colors, large.colors)
    mid_points = binding.node_ids == 2
    assert np.all(small.colors[mid_points] == [0, 255, 0])
    assert np.all(small.colors[~mid_points] == [0, 0, 255])


# ------------------------------------------------------------------- file I/O

def test_model_json_round_trip():
    model = FeaModel(node_ids=[5, 2, 9],
                     positions=[[0.1, 0.2, 0.3], [1.0, 2.0, 3.0],
                                [0.125, -0.5, 2.25]],
                     span_length_in=128.0, vertical_axis="y",
                     midspan_nodes=[2, 9])
    back = read_fea_model_json(write_fea_model_json(model))
    assert back.node_ids.tolist() == [5, 2, 9]
    assert np.array_equal(back.positions, model.positions)
    assert back.span_length_in == 128.0
    assert back.vertical_axis == "y"
    assert back.midspan_nodes == [2, 9]


def test_model_validation():
    with pytest.raises(ValueError):
        FeaModel(node_ids=[1, 1], positions=[[0, 0, 0], [1, 0, 0]],
                 span_length_in=100.0, vertical_axis="z", midspan_nodes=[])
    with pytest.raises(ValueError):
        FeaModel(node_ids=[1], positions=[[0, 0, 0]], span_length_in=0.0,
                 vertical_axis="z", midspan_nodes=[])
    with pytest.raises(ValueError):
        FeaModel(node_ids=[1], positions=[[0, 0, 0]], span_length_in=10.0,
                 vertical_axis="w", midspan_nodes=[])
    with pytest.raises(ValueError):
        FeaModel(node_ids=[1], positions=[[0, 0, 0]], span_length_in=10.0,
                 vertical_axis="z", midspan_nodes=[2])
    with pytest.raises(errors.EmptyModel):
        FeaModel(node_ids=[], positions=np.zeros((0, 3)),
                 span_length_in=10.0, vertical_axis="z", midspan_nodes=[])


def test_history_csv_round_trip_exact():
    rng = np.random.default_rng(9)
    h = DisplacementHistory(dt=0.125, duration=0.5, samples={
        3: rng.normal(0, 0.01, size=(5, 3)),
        1: rng.normal(0, 0.01, size=(5, 3))})
    back = read_history_csv(write_history_csv(h))
    assert back.dt == h.dt
    assert back.duration == h.duration
    for node_id in (1, 3):
        assert np.array_equal(back.samples[node_id], h.samples[node_id])


def test_history_csv_rejects_missing_node_rows():
    h = zero_history([1, 2], dt=0.5, duration=1.0)
    text = write_history_csv(h)
    lines = text.splitlines()
    del lines[3]  # drop one node at one time step
    with pytest.raises(ValueError):
        read_history_csv("\n".join(lines))


def test_history_validates_series_shape():
    with pytest.raises(ValueError):
        DisplacementHistory(dt=0.5, duration=1.0,
                            samples={1: np.zeros((2, 3))})
