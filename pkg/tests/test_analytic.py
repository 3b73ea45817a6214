import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate

from manhattan_cox.analytic import (
    BranchDomain,
    ConditioningState,
    EventId,
    NegativeDistance,
    cdf_given_state,
    cdf_intersection,
    cdf_typical,
    cdf_typical_assembled,
    cdf_typical_shared_lines,
    cdf_typical_theorem2,
    cdf_w1,
    cdf_w1_branch1,
    cdf_w1_branch2,
    cdf_w2,
    cdf_w2_branch1,
    cdf_w2_branch2,
    cdf_z1,
    cond_cdf_rm,
    pdf_s,
    pdf_x1x2,
    prob_event,
    quantile,
    shared_line_excess,
    shared_line_exponent,
)
from manhattan_cox.geom import ModelParams

INTERSECTION_REGIMES = [(10, 3), (1, 3), (10, 0.5), (1, 0.5)]
TYPICAL_REGIMES = [(10, 5), (1, 5), (10, 0.5), (1, 0.5)]

densities = st.floats(0.2, 20)
params_st = st.builds(ModelParams, densities, densities)


@st.composite
def states(draw, hi=5.0):
    a = draw(st.floats(0.0, hi))
    b = draw(st.floats(0.0, hi))
    return ConditioningState(min(a, b), max(a, b))


def printed_branch1(w, l, c):
    return 1 - math.exp(-3 * c * w - 3 * l * w + (3 * l / (2 * c)) * (1 - math.exp(-2 * c * w)))


def printed_branch2(w, x, l, c):
    bracket = 3 + 2 * math.exp(-2 * c * x) - math.exp(-2 * c * w) - 4 * math.exp(-c * (x + w))
    return 1 - math.exp(-3 * c * w - 3 * l * w + (l / (2 * c)) * bracket)


class TestCdfIntersection:
    def test_zero(self):
        assert cdf_intersection(0.0, ModelParams(1, 0.5)) == 0.0

    def test_sparse_regime_value(self):
        expected = 1 - math.exp(-6 + 4 * (1 - math.exp(-1)))
        assert cdf_intersection(1.0, ModelParams(1, 0.5)) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(0.9689, abs=5e-5)

    @pytest.mark.parametrize("t", [0.01, 0.3, 2.0])
    def test_vanishing_line_density(self, t):
        assert cdf_intersection(t, ModelParams(1e-12, 0.8)) == pytest.approx(1 - math.exp(-3.2 * t), rel=1e-9)

    def test_negative(self):
        with pytest.raises(NegativeDistance):
            cdf_intersection(-0.1, ModelParams(1, 1))

    def test_vectorized(self):
        t = np.array([0.0, 0.5, 1.0])
        p = ModelParams(2, 1)
        assert np.array_equal(cdf_intersection(t, p), [cdf_intersection(x, p) for x in t])

    @pytest.mark.parametrize("lam_l,lam_c", INTERSECTION_REGIMES + TYPICAL_REGIMES)
    def test_slope_at_zero(self, lam_l, lam_c):
        h = 1e-4
        slope = (cdf_intersection(h, ModelParams(lam_l, lam_c)) - 0.0) / h
        assert slope == pytest.approx(4 * lam_c, rel=1e-3)

    @settings(max_examples=200)
    @given(params_st)
    def test_monotone_bounded(self, p):
        t = np.linspace(0, 10 / min(p.lambda_l, p.lambda_c), 400)
        f = cdf_intersection(t, p)
        assert f[0] == 0.0
        assert np.all(np.diff(f) >= 0)
        assert np.all((f >= 0) & (f < 1) | (f == 1.0))
        assert f[-1] > 1 - 1e-6

    @settings(max_examples=100)
    @given(densities, st.floats(0.01, 5))
    def test_nondecreasing_in_point_density(self, lam_l, t):
        cs = np.linspace(0.2, 20, 60)
        vals = [cdf_intersection(t, ModelParams(lam_l, c)) for c in cs]
        assert np.all(np.diff(vals) >= -1e-15)


class TestVerticalLineDistances:
    def test_pdf_s_at_zero(self):
        assert pdf_s(0.0, ModelParams(3.5, 1)) == 3.5

    def test_pdf_s_value(self):
        assert pdf_s(1.0, ModelParams(2, 1)) == 2 * math.exp(-2)

    def test_pdf_s_normalized(self):
        p = ModelParams(1.3, 1)
        val, _ = integrate.quad(lambda s: pdf_s(s, p), 0, np.inf)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_pdf_s_negative(self):
        with pytest.raises(NegativeDistance):
            pdf_s(-1.0, ModelParams(1, 1))

    def test_joint_at_origin(self):
        assert pdf_x1x2(ConditioningState(0, 0), ModelParams(3, 1)) == 18.0

    def test_joint_normalized(self):
        p = ModelParams(1.7, 1)
        val, _ = integrate.dblquad(
            lambda x1, x2: pdf_x1x2(ConditioningState(x1, x2), p), 0, np.inf, 0, lambda x2: x2
        )
        assert val == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("x1", [0.0, 0.4, 2.0])
    def test_closer_marginal(self, x1):
        p = ModelParams(1.7, 1)
        val, _ = integrate.quad(lambda x2: pdf_x1x2(ConditioningState(x1, x2), p), x1, np.inf)
        assert val == pytest.approx(2 * 1.7 * math.exp(-2 * 1.7 * x1), rel=1e-9)

    def test_state_ordering(self):
        with pytest.raises(ValueError):
            ConditioningState(2.0, 1.0)


class TestEvents:
    def test_degenerate_state(self):
        s, p = ConditioningState(0, 0), ModelParams(1, 2)
        assert prob_event(EventId.E3, s, p) == 1.0
        assert [prob_event(e, s, p) for e in (EventId.E1, EventId.E2, EventId.E4)] == [0.0, 0.0, 0.0]

    def test_both_hit_at_median(self):
        c = 0.7
        x = math.log(2) / c
        assert prob_event(EventId.E2, ConditioningState(x, x), ModelParams(1, c)) == pytest.approx(0.25, abs=1e-15)

    @settings(max_examples=300)
    @given(states(), params_st)
    def test_partition(self, s, p):
        total = sum(prob_event(e, s, p) for e in EventId)
        assert abs(total - 1.0) <= 1e-14
        assert all(0.0 <= prob_event(e, s, p) <= 1.0 for e in EventId)


class TestWBranches:
    def test_zero(self):
        p, s = ModelParams(2, 1), ConditioningState(0.5, 1.0)
        assert cdf_w1_branch1(0.0, p) == 0.0
        assert cdf_w2_branch1(0.0, p, s) == 0.0

    @pytest.mark.parametrize("w", [0.1, 1.0, 3.0])
    def test_vanishing_line_density(self, w):
        assert cdf_w1_branch1(w, ModelParams(1e-12, 0.6)) == pytest.approx(1 - math.exp(-1.8 * w), rel=1e-9)

    def test_domains(self):
        p, s = ModelParams(1, 1), ConditioningState(0.5, 1.0)
        with pytest.raises(BranchDomain):
            cdf_w1_branch1(1.5, p, s)
        with pytest.raises(BranchDomain):
            cdf_w1_branch2(0.9, s, p)
        with pytest.raises(BranchDomain):
            cdf_w2_branch1(0.6, p, s)
        with pytest.raises(BranchDomain):
            cdf_w2_branch2(0.4, s, p)

    @settings(max_examples=300)
    @given(states(), params_st)
    def test_continuity_at_switch(self, s, p):
        assert abs(cdf_w1_branch1(s.x2, p, s) - cdf_w1_branch2(s.x2, s, p)) <= 1e-12
        assert abs(cdf_w2_branch1(s.x1, p, s) - cdf_w2_branch2(s.x1, s, p)) <= 1e-12

    @settings(max_examples=200)
    @given(states(hi=2.0), st.floats(0.2, 5), st.floats(0.2, 5), st.floats(0, 3))
    def test_match_printed_forms(self, s, lam_l, lam_c, extra):
        p = ModelParams(lam_l, lam_c)
        w_lo = s.x2 * min(extra, 1.0)
        assert cdf_w1_branch1(w_lo, p, s) == pytest.approx(printed_branch1(w_lo, lam_l, lam_c), abs=1e-13)
        w_hi = s.x2 + extra
        assert cdf_w1_branch2(w_hi, s, p) == pytest.approx(printed_branch2(w_hi, s.x2, lam_l, lam_c), abs=1e-13)
        w_hi = s.x1 + extra
        assert cdf_w2_branch2(w_hi, s, p) == pytest.approx(printed_branch2(w_hi, s.x1, lam_l, lam_c), abs=1e-13)

    @settings(max_examples=100)
    @given(states(), params_st)
    def test_dispatch_monotone(self, s, p):
        w = np.linspace(0, 3 * (s.x2 + 1), 300)
        for f in (cdf_w1(w, s, p), cdf_w2(w, s, p)):
            assert f[0] == 0.0
            assert np.all(np.diff(f) >= 0)
            assert np.all((f >= 0) & (f <= 1))

    def test_dispatch_picks_pieces(self):
        p, s = ModelParams(1.2, 0.8), ConditioningState(0.3, 0.9)
        assert cdf_w1(0.5, s, p) == cdf_w1_branch1(0.5, p, s)
        assert cdf_w1(1.5, s, p) == cdf_w1_branch2(1.5, s, p)
        assert cdf_w2(0.2, s, p) == cdf_w2_branch1(0.2, p, s)
        assert cdf_w2(0.5, s, p) == cdf_w2_branch2(0.5, s, p)

    def test_z1_same_as_w1(self):
        p, s = ModelParams(1.2, 0.8), ConditioningState(0.3, 0.9)
        w = np.linspace(0, 3, 31)
        assert np.array_equal(cdf_z1(w, s, p), cdf_w1(w, s, p))


def boundaries(e, s):
    return {
        EventId.E1: [s.x1],
        EventId.E2: [s.x1],
        EventId.E3: [s.x1, s.x2, s.x1 + s.x2],
        EventId.E4: [s.x1, s.x2],
    }[e]


class TestConditionalCdfs:
    @pytest.mark.parametrize("e", list(EventId))
    def test_zero(self, e):
        assert cond_cdf_rm(e, 0.0, ConditioningState(0.4, 0.9), ModelParams(1, 1)) == 0.0

    @pytest.mark.parametrize("rm", [0.4, 0.41, 5.0])
    def test_e1_past_x1(self, rm):
        assert cond_cdf_rm(EventId.E1, rm, ConditioningState(0.4, 0.9), ModelParams(1, 1)) == 1.0

    @settings(max_examples=200)
    @given(st.sampled_from(list(EventId)), states(), params_st)
    def test_continuity_at_region_boundaries(self, e, s, p):
        assume(s.x1 > 1e-3 and s.x2 - s.x1 > 1e-3)
        for b in boundaries(e, s):
            eps = 1e-13 * max(b, 1.0)
            left = cond_cdf_rm(e, b - eps, s, p)
            right = cond_cdf_rm(e, b + eps, s, p)
            at = cond_cdf_rm(e, b, s, p)
            assert abs(left - right) <= 1e-10
            assert abs(at - right) <= 1e-10

    @settings(max_examples=100)
    @given(st.sampled_from(list(EventId)), states(), params_st)
    def test_monotone_bounded(self, e, s, p):
        assume(s.x1 > 1e-6)
        r = np.linspace(0, 3 * (s.x1 + s.x2) + 1, 400)
        f = cond_cdf_rm(e, r, s, p)
        assert np.all((f >= -1e-15) & (f <= 1 + 1e-15))
        assert np.all(np.diff(f) >= -1e-13)

    def test_total_probability(self):
        s, p, r = ConditioningState(0.3, 0.7), ModelParams(1.5, 2.0), 0.8
        direct = sum(cond_cdf_rm(e, r, s, p) * prob_event(e, s, p) for e in EventId)
        assert cdf_given_state(r, s, p) == pytest.approx(direct, abs=1e-15)


class TestTypicalPoint:
    def test_zero(self):
        p = ModelParams(1, 0.5)
        assert cdf_typical_theorem2(0.0, p) == 0.0
        assert cdf_typical_assembled(0.0, p) == 0.0

    def test_far_tail(self):
        assert cdf_typical_theorem2(20.0, ModelParams(1, 0.5)) == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("rm", [0.5, 1.0, 2.0])
    def test_routes_agree_sparse(self, rm):
        p = ModelParams(1, 0.5)
        assert abs(cdf_typical_theorem2(rm, p) - cdf_typical_assembled(rm, p)) <= 1e-6

    @pytest.mark.parametrize("lam_l,lam_c", TYPICAL_REGIMES)
    def test_slope_at_zero(self, lam_l, lam_c):
        h = 1e-4
        p = ModelParams(lam_l, lam_c)
        assert cdf_typical_theorem2(h, p) / h == pytest.approx(2 * lam_c, rel=1e-3)
        assert cdf_typical_assembled(h, p) / h == pytest.approx(2 * lam_c, rel=1e-3)

    def test_negative(self):
        with pytest.raises(NegativeDistance):
            cdf_typical_theorem2(-1.0, ModelParams(1, 1))

    def test_vectorized_wrapper(self):
        p = ModelParams(1, 0.5)
        r = np.array([0.0, 0.5, 1.0])
        assert np.array_equal(cdf_typical(r, p), [cdf_typical_theorem2(x, p) for x in r])

    @settings(max_examples=10, deadline=None)
    @given(params_st, st.floats(0.01, 3))
    def test_elementary_bounds(self, p, r):
        # R <= r if a point on the x-axis line lies within r; R <= r needs such a
        # point or a crossing within r
        l, c = p.lambda_l, p.lambda_c
        f = cdf_typical_theorem2(r, p)
        assert -math.expm1(-2 * c * r) - 1e-9 <= f <= -math.expm1(-2 * (l + c) * r) + 1e-9

    @settings(max_examples=8, deadline=None)
    @given(params_st)
    def test_monotone_bounded_and_routes_agree(self, p):
        top = quantile(lambda t: cdf_intersection(t, p), 0.999, hint=1.0)
        grid = np.linspace(0, 2 * top, 10)
        thm = np.array([cdf_typical_theorem2(r, p) for r in grid])
        asm = np.array([cdf_typical_assembled(r, p) for r in grid])
        assert np.all((thm >= 0) & (thm <= 1))
        assert np.all(np.diff(thm) >= -1e-9)
        assert np.max(np.abs(thm - asm)) <= 1e-6


def zone_chord(y, w, x1, x2, side):
    """Length of the line at height y inside the W1 (side 1) or W2 (side 2) zone.

    W1: L1 ball of radius w about (x1, 0), right of u = x1 - x2.
    W2: L1 ball of radius w about (-x2, 0), left of u = x1 - x2.
    """
    room = w - abs(y)
    if room <= 0:
        return 0.0
    if side == 1:
        lo, hi = max(x1 - room, x1 - x2), x1 + room
    else:
        lo, hi = -x2 - room, min(-x2 + room, x1 - x2)
    return max(hi - lo, 0.0)


def exponent_by_lines(w1, w2, x1, x2, l, c):
    # Poisson horizontal lines of density l on the whole y axis
    def g(y):
        return (1 - math.exp(-c * zone_chord(y, w1, x1, x2, 1))) * (1 - math.exp(-c * zone_chord(y, w2, x1, x2, 2)))

    top = min(w1, w2)
    if top <= 0:
        return 0.0
    pts = sorted({v for v in (w1 - x2, w2 - x1, x2 - w1, x1 - w2) if -top < v < top} | {0.0})
    return l * integrate.quad(g, -top, top, points=pts, epsabs=1e-13, epsrel=1e-11, limit=200)[0]


class TestSharedLines:
    @settings(max_examples=200, deadline=None)
    @given(params_st, states(2.0), st.floats(0.0, 4.0), st.floats(0.0, 4.0))
    def test_exponent_matches_line_integral(self, p, s, w1, w2):
        got = shared_line_exponent(w1, w2, s, p)
        want = exponent_by_lines(w1, w2, s.x1, s.x2, p.lambda_l, p.lambda_c)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-13)

    def test_exponent_zero_without_overlap(self):
        p, s = ModelParams(1, 0.5), ConditioningState(0.2, 0.7)
        assert shared_line_exponent(0.0, 1.0, s, p) == 0.0
        assert shared_line_exponent(1.0, 0.0, s, p) == 0.0

    def test_exponent_vectorized(self):
        p, s = ModelParams(2, 1), ConditioningState(0.3, 0.5)
        w = np.array([0.1, 0.6, 1.4])
        got = shared_line_exponent(w, 0.8, s, p)
        assert got.shape == (3,)
        for wi, gi in zip(w, got):
            assert gi == shared_line_exponent(float(wi), 0.8, s, p)

    @pytest.mark.parametrize("lc", TYPICAL_REGIMES)
    def test_excess_by_independent_double_integral(self, lc):
        p = ModelParams(*lc)
        l, c = lc
        rm = 0.8 * quantile(lambda t: cdf_typical(t, p), 0.5, hint=1 / c)

        def surv(w, xo):
            return 1 - (printed_branch1(w, l, c) if w <= xo else printed_branch2(w, xo, l, c))

        def f(x1, x2):
            w1, w2 = rm - x1, rm - x2
            k = math.exp(-(l + c) * (x1 + x2)) * surv(w1, x2) * surv(w2, x1)
            return 2 * l * l * k * math.expm1(exponent_by_lines(w1, w2, x1, x2, l, c))

        want = integrate.dblquad(f, 0, rm, 0, lambda x2: x2, epsabs=1e-9, epsrel=1e-6)[0]
        assert shared_line_excess(rm, p) == pytest.approx(want, rel=1e-4, abs=1e-9)

    @settings(max_examples=20, deadline=None)
    @given(params_st, st.floats(0.05, 3.0), st.floats(0.1, 10.0))
    def test_excess_scale_invariant(self, p, u, s):
        # distances scale as 1/density, so the excess depends on (l r, c r) only
        rm = u / p.lambda_c
        q = ModelParams(p.lambda_l * s, p.lambda_c * s)
        assert shared_line_excess(rm / s, q) == pytest.approx(shared_line_excess(rm, p), rel=1e-6, abs=1e-12)

    @pytest.mark.parametrize("lc", TYPICAL_REGIMES)
    def test_excess_nonnegative_and_vanishing(self, lc):
        p = ModelParams(*lc)
        assert shared_line_excess(0.0, p) == 0.0
        grid = np.linspace(0, 20 / min(lc), 41)[1:]
        vals = [shared_line_excess(float(r), p) for r in grid]
        assert min(vals) >= 0.0
        assert vals[-1] < 1e-8

    @pytest.mark.parametrize("lc", TYPICAL_REGIMES)
    def test_corrected_cdf_is_a_cdf(self, lc):
        p = ModelParams(*lc)
        l, c = lc
        grid = np.linspace(0, 10 / min(lc), 60)
        f = np.array([cdf_typical_shared_lines(float(r), p) for r in grid])
        assert f[0] == 0.0
        assert np.all(np.diff(f) >= -1e-9)
        assert np.all(f >= -np.expm1(-2 * c * grid) - 1e-9)
        assert np.all(f <= cdf_typical(grid, p) + 1e-12)


class TestQuantile:
    @pytest.mark.parametrize("prob", [0.1, 0.5, 0.999])
    def test_exponential_limit(self, prob):
        p = ModelParams(1e-12, 0.5)
        t = quantile(lambda x: cdf_intersection(x, p), prob, xtol=1e-13)
        assert t == pytest.approx(-math.log1p(-prob) / 2.0, rel=1e-9)

    def test_bad_probability(self):
        with pytest.raises(ValueError):
            quantile(lambda x: x, 1.0)
