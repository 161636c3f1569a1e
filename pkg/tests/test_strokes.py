import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tracelab.strokes import (
    LengthMapping,
    Stroke,
    build_length_mapping,
    resample_stroke,
)

from conftest import make_sketch, random_sim_sketch


def stroke(points):
    return Stroke.from_samples([(x, y, i * 16) for i, (x, y) in enumerate(points)])


class TestStrokeInvariants:
    def test_empty_stroke_rejected(self):
        with pytest.raises(ValueError):
            Stroke(np.empty((0, 2)), [])

    def test_decreasing_timestamps_rejected(self):
        with pytest.raises(ValueError, match="non-decreasing"):
            Stroke.from_samples([(0, 0, 10), (1, 1, 5)])

    def test_negative_timestamp_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            Stroke.from_samples([(0, 0, -1)])

    def test_samples_round_trip(self):
        s = stroke([(0.5, 1.25), (3.0, 4.0)])
        assert [(p.x, p.y, p.t_ms) for p in s.samples] == [
            (0.5, 1.25, 0), (3.0, 4.0, 16)]

    def test_arrays_are_immutable(self):
        s = stroke([(0, 0), (1, 1)])
        with pytest.raises(ValueError):
            s.xy[0, 0] = 5.0


class TestResample:
    def test_single_point_returns_itself(self):
        assert resample_stroke(stroke([(5, 5)]), 1.0).tolist() == [[5.0, 5.0]]

    def test_line_3_4_5(self):
        # independent oracle: point k is k/5 of the way from (0,0) to (3,4)
        out = resample_stroke(stroke([(0, 0), (3, 4)]), 1.0)
        expected = np.array([[3 * k / 5, 4 * k / 5] for k in range(6)])
        assert out.shape == (6, 2)
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_duplicate_sample_is_ignored(self):
        a = resample_stroke(stroke([(0, 0), (3, 4)]), 1.0)
        b = resample_stroke(stroke([(0, 0), (0, 0), (3, 4)]), 1.0)
        np.testing.assert_array_equal(a, b)

    def test_vertex_positions_are_exact(self):
        # arc position 5 lands exactly on the middle vertex
        out = resample_stroke(stroke([(0, 0), (3, 4), (3, 10)]), 1.0)
        assert out[5].tolist() == [3.0, 4.0]
        assert out[-1].tolist() == [3.0, 10.0]

    def test_fractional_tail_is_dropped(self):
        out = resample_stroke(stroke([(0, 0), (5.5, 0)]), 1.0)
        assert out.shape == (6, 2)
        assert out[-1].tolist() == [5.0, 0.0]

    def test_spacing_validation(self):
        with pytest.raises(ValueError):
            resample_stroke(stroke([(0, 0), (1, 0)]), 0.0)

    @given(spacing=st.sampled_from([0.5, 1.0, 2.0]),
           n=st.integers(min_value=2, max_value=8),
           seed=st.integers(min_value=0, max_value=10_000))
    @settings(max_examples=60, deadline=None)
    def test_point_count_matches_floor_formula(self, spacing, n, seed):
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 100, size=(n, 2))
        s = Stroke.from_samples([(x, y, i * 16) for i, (x, y) in enumerate(pts)])
        length = s.length()
        if length == 0.0:
            return
        out = resample_stroke(s, spacing)
        assert out.shape[0] == int(length / spacing + 1e-6) + 1


class TestBuildLengthMapping:
    def test_empty_sketch(self):
        m = build_length_mapping(make_sketch([]))
        assert m.is_empty and m.total_length == 0.0

    def test_all_zero_length_strokes(self):
        m = build_length_mapping(make_sketch([[(5, 5, 0)], [(9, 9, 40)]]))
        assert m.is_empty and m.total_length == 0.0

    def test_single_line_closed_form(self):
        m = build_length_mapping(make_sketch([[(0, 0, 0), (10, 0, 160)]]))
        expected = np.array([[k, 0.0, k] for k in range(11)])
        np.testing.assert_array_equal(m.points, expected)
        assert m.total_length == 10.0

    def test_pen_up_jump_accumulates_z_without_gap(self):
        # two length-5 segments; manual z accumulation oracle
        sketch = make_sketch([
            [(0, 0, 0), (0, 5, 80)],
            [(50, 0, 160), (50, 5, 240)],
        ])
        m = build_length_mapping(sketch)
        assert m.total_length == 10.0
        z = m.points[:, 2]
        np.testing.assert_array_equal(z, [0, 1, 2, 3, 4, 5, 5, 6, 7, 8, 9, 10])
        second = m.points[6:]
        assert (second[:, 0] == 50.0).all()
        assert second[0, 2] == 5.0 and second[-1, 2] == 10.0

    def test_sub_spacing_stroke_adds_ink_without_z(self):
        sketch = make_sketch([
            [(0, 0, 0), (3, 0, 50)],
            [(10, 10, 100), (10.5, 10, 120)],
            [(20, 0, 200), (22, 0, 260)],
        ])
        m = build_length_mapping(sketch)
        # middle stroke is shorter than the spacing: one point, no z advance
        np.testing.assert_array_equal(m.points[:, 2], [0, 1, 2, 3, 3, 3, 4, 5])
        assert m.points[4].tolist() == [10.0, 10.0, 3.0]
        assert m.total_length == 5.0

    def test_timing_invariance(self):
        pts = [[(0, 0), (30, 40)], [(50, 50), (80, 10), (20, 20)]]
        a = make_sketch([[(x, y, i * 16) for i, (x, y) in enumerate(s)] for s in pts])
        b = make_sketch([[(x, y, i * 1000 + 7) for i, (x, y) in enumerate(s)] for s in pts])
        np.testing.assert_array_equal(build_length_mapping(a).points,
                                      build_length_mapping(b).points)

    def test_z_monotone_and_first_zero_on_random_sketches(self):
        for seed in range(25):
            m = build_length_mapping(random_sim_sketch(seed))
            z = m.points[:, 2]
            assert z[0] == 0.0
            assert (np.diff(z) >= 0).all()
            assert z[-1] == m.total_length

    @given(seed=st.integers(min_value=0, max_value=500),
           split_idx=st.integers(min_value=1, max_value=50))
    @settings(max_examples=40, deadline=None)
    def test_segmentation_invariance(self, seed, split_idx):
        # splitting any stroke at an interior resample point changes nothing
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 100, size=(5, 2)).round(2)
        base = Stroke.from_samples([(x, y, i * 16) for i, (x, y) in enumerate(pts)])
        resampled = resample_stroke(base, 1.0)
        if resampled.shape[0] < 3:
            return
        k = 1 + split_idx % (resampled.shape[0] - 2)
        split_at = resampled[k]
        cum = np.concatenate(([0.0], np.cumsum(
            np.linalg.norm(np.diff(base.xy, axis=0), axis=1))))
        j = int(np.searchsorted(cum, float(k), side="right"))
        first = np.vstack([base.xy[:j], split_at])
        second = np.vstack([split_at, base.xy[j:]])
        whole = make_sketch([[(x, y, i) for i, (x, y) in enumerate(base.xy)]],
                            canvas_w=100, canvas_h=100)
        parts = make_sketch([
            [(x, y, i) for i, (x, y) in enumerate(first)],
            [(x, y, 1000 + i) for i, (x, y) in enumerate(second)],
        ], canvas_w=100, canvas_h=100)
        ma = build_length_mapping(whole)
        mb = build_length_mapping(parts)
        assert ma.total_length == mb.total_length
        assert ma.n_points == mb.n_points
        np.testing.assert_array_equal(ma.points[:, 2], mb.points[:, 2])
        np.testing.assert_allclose(ma.points, mb.points, atol=1e-9)


class TestLengthMappingInvariants:
    def test_rejects_decreasing_z(self):
        with pytest.raises(ValueError):
            LengthMapping([[0, 0, 0], [1, 0, 2], [2, 0, 1]], 2.0)

    def test_rejects_nonzero_start(self):
        with pytest.raises(ValueError):
            LengthMapping([[0, 0, 1]], 1.0)

    def test_rejects_z_beyond_total(self):
        with pytest.raises(ValueError):
            LengthMapping([[0, 0, 0], [1, 0, 5]], 4.0)
