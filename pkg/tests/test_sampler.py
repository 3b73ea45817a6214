import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from manhattan_cox.geom import ModelParams, Orientation, Palm, Window
from manhattan_cox.sampler import (
    AlreadyConditioned,
    CoxSample,
    LineSet,
    empirical_line_density,
    line_length_in_disc,
    make_rng,
    palm_condition,
    sample_cox,
    sample_mplp,
)

N_SEEDS = 10_000


def empty_lines(hw=5.0):
    return LineSet([], [], Window(hw))


class TestSampleMplp:
    def test_vanishing_intensity_gives_no_lines(self):
        lines = sample_mplp(ModelParams(1e-9, 1.0), Window(1.0), 3)
        assert lines.n_vertical == 0 and lines.n_horizontal == 0

    def test_mean_vertical_count(self):
        # Poisson mean lambda_l * 2W = 100
        p, w = ModelParams(10, 1), Window(5)
        counts = [sample_mplp(p, w, s).n_vertical for s in range(N_SEEDS)]
        assert np.mean(counts) == pytest.approx(100.0, rel=0.01)

    def test_deterministic(self):
        p, w = ModelParams(3, 1), Window(4)
        assert sample_mplp(p, w, 42) == sample_mplp(p, w, 42)

    def test_seeds_differ(self):
        p, w = ModelParams(3, 1), Window(4)
        assert sample_mplp(p, w, 1) != sample_mplp(p, w, 2)

    def test_offsets_sorted_in_window(self):
        lines = sample_mplp(ModelParams(20, 1), Window(2.5), 11)
        for arr in (lines.vertical_offsets, lines.horizontal_offsets):
            assert np.all(np.diff(arr) >= 0)
            assert np.all(np.abs(arr) <= 2.5)
        assert lines.palm is Palm.NONE

    def test_horizontal_counts_in_region_are_poisson(self):
        # horizontal lines meeting K = [-3, 3] x [-1, 1.5]: mean lambda_l * nu_1(K_y) = 2.5
        p, w = ModelParams(1.0, 1.0), Window(5)
        counts = np.array(
            [np.count_nonzero((h >= -1.0) & (h <= 1.5)) for h in
             (sample_mplp(p, w, s).horizontal_offsets for s in range(N_SEEDS))]
        )
        mean = 2.5
        top = 7
        observed = np.array([np.sum(counts == k) for k in range(top)] + [np.sum(counts >= top)])
        probs = np.append(stats.poisson.pmf(np.arange(top), mean), stats.poisson.sf(top - 1, mean))
        _, pval = stats.chisquare(observed, probs * counts.size)
        assert pval > 0.01

    def test_rejects_negative_seed(self):
        with pytest.raises(ValueError):
            make_rng(-1)

    def test_rejects_float_seed(self):
        with pytest.raises(TypeError):
            make_rng(1.5)


class TestPalmCondition:
    def test_intersection_on_empty(self):
        lines = palm_condition(empty_lines(), "intersection")
        assert lines.vertical_offsets.tolist() == [0.0]
        assert lines.horizontal_offsets.tolist() == [0.0]
        assert lines.palm is Palm.TYPICAL_INTERSECTION

    def test_typical_point_on_empty(self):
        lines = palm_condition(empty_lines(), "typical-point")
        assert lines.vertical_offsets.size == 0
        assert lines.horizontal_offsets.tolist() == [0.0]

    def test_twice_rejected(self):
        lines = palm_condition(sample_mplp(ModelParams(2, 1), Window(3), 0), "intersection")
        with pytest.raises(AlreadyConditioned):
            palm_condition(lines, "intersection")

    def test_palm_flags_on_lines(self):
        base = LineSet([-1.0, 2.0], [0.5], Window(3))
        lines = palm_condition(base, "typical-point")
        flagged = [ln for ln in lines.lines() if ln.palm_added]
        assert len(flagged) == 1
        assert flagged[0].orientation is Orientation.HORIZONTAL and flagged[0].offset == 0.0

    def test_keeps_existing_lines_sorted(self):
        base = LineSet([-1.0, 2.0], [-0.5, 0.5], Window(3))
        lines = palm_condition(base, "intersection")
        assert lines.vertical_offsets.tolist() == [-1.0, 0.0, 2.0]
        assert lines.horizontal_offsets.tolist() == [-0.5, 0.0, 0.5]


class TestSampleCox:
    def test_mean_count_on_one_line(self):
        # Poisson mean lambda_c * 2W = 20
        lines = LineSet([], [0.0], Window(5))
        p = ModelParams(1.0, 2.0)
        counts = [sample_cox(lines, p, s).n_points for s in range(N_SEEDS)]
        assert np.mean(counts) == pytest.approx(20.0, rel=0.01)

    def test_zero_lines(self):
        cox = sample_cox(empty_lines(), ModelParams(1, 1), 0)
        assert cox.n_points == 0
        assert cox.n_vertical_lines == 0 and cox.n_horizontal_lines == 0

    def test_typical_point_atom_flagged_not_stored(self):
        lines = palm_condition(empty_lines(), "typical-point")
        for s in range(50):
            cox = sample_cox(lines, ModelParams(1, 3), s)
            assert cox.has_atom_at_origin
            assert not np.any(cox.horizontal_coords == 0.0)

    def test_intersection_has_no_atom(self):
        lines = palm_condition(empty_lines(), "intersection")
        assert not sample_cox(lines, ModelParams(1, 3), 0).has_atom_at_origin

    def test_counts_on_disjoint_lines_uncorrelated(self):
        lines = LineSet([], [-1.0, 1.0], Window(5))
        p = ModelParams(1.0, 1.0)
        pairs = np.array([
            np.diff(sample_cox(lines, p, s).horizontal_starts) for s in range(N_SEEDS)
        ])
        r = np.corrcoef(pairs[:, 0], pairs[:, 1])[0, 1]
        assert abs(r) < 3.0 / np.sqrt(N_SEEDS)

    def test_deterministic(self):
        lines = sample_mplp(ModelParams(2, 1), Window(3), 5)
        p = ModelParams(2, 1)
        assert sample_cox(lines, p, 9) == sample_cox(lines, p, 9)

    @settings(max_examples=40, deadline=None)
    @given(
        st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.5, 5),
        st.integers(0, 2**32), st.sampled_from(["intersection", "typical-point"]),
    )
    def test_points_inside_window_and_sorted(self, lam_l, lam_c, hw, seed, mode):
        p = ModelParams(lam_l, lam_c)
        lines = palm_condition(sample_mplp(p, Window(hw), seed), mode)
        cox = sample_cox(lines, p, seed)
        assert cox.n_vertical_lines == lines.n_vertical
        assert cox.n_horizontal_lines == lines.n_horizontal
        for arr in cox.vertical + cox.horizontal:
            assert np.all(np.abs(arr) <= hw)
            assert np.all(np.diff(arr) >= 0)
        xy = cox.points_2d(lines)
        assert xy.shape == (cox.n_points, 2)


class TestCoxSampleLayout:
    def test_from_lists_round_trip(self):
        cox = CoxSample.from_lists([[2.0, -1.0]], [[], [0.5]])
        assert cox.vertical_points(0).tolist() == [-1.0, 2.0]
        assert cox.horizontal_points(0).size == 0
        assert cox.horizontal_points(1).tolist() == [0.5]

    def test_points_2d(self):
        lines = LineSet([1.0], [0.0, 3.0], Window(5))
        cox = CoxSample.from_lists([[2.0]], [[-1.0], []])
        assert sorted(map(tuple, cox.points_2d(lines).tolist())) == [(-1.0, 0.0), (1.0, 2.0)]


class TestLineDensity:
    def test_chord_lengths(self):
        lines = LineSet([0.0], [0.6], Window(1.0))
        assert line_length_in_disc(lines, 1.0) == pytest.approx(2.0 + 1.6)

    def test_zero_trials_rejected(self):
        with pytest.raises(ValueError):
            empirical_line_density(ModelParams(1, 1), Window(10), 0, 0)

    @pytest.mark.parametrize("lam_l", [1.0, 10.0])
    def test_mean_line_length_per_area(self, lam_l):
        est = empirical_line_density(ModelParams(lam_l, 1.0), Window(10), N_SEEDS, 2024)
        assert est == pytest.approx(2.0 * lam_l, rel=0.02)
