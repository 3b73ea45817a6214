"""Exact distributions of the shortest path distance to the nearest Cox point.

Two reference points are covered:

* the typical intersection of the line process, whose nearest-point path
  distance has a closed-form CDF (:func:`cdf_intersection`);
* the typical Cox point, whose CDF is a sum of single and double integrals
  over the distances ``x1 <= x2`` to the nearest vertical lines on either
  side (:func:`cdf_typical_theorem2`). :func:`cdf_typical_assembled` gets the
  same quantity by integrating the conditional CDFs of the four events
  against the joint density of ``(x1, x2)`` and serves as its oracle.

Notation: ``l`` is the line density ``lambda_l``, ``c`` the point density
``lambda_c``. ``D1`` and ``D2`` are the distances to the nearest points on the
reference line in the direction of the closer and the farther intersection.
The events are

    E1: D1 <= x1, D2 > x2      E2: D1 <= x1, D2 <= x2
    E3: D1 > x1,  D2 > x2      E4: D1 > x1,  D2 <= x2

All functions accept scalars or numpy arrays for the distance arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .geom import ManhattanCoxError, ModelParams
from .quadrature import QuadratureFailure, QuadSpec, integrate_2d, integrate_adaptive

# Overshoot of [0, 1] tolerated (and clamped) in final probabilities.
CLAMP_SLACK = 1e-10
# Slack on branch domains, so that w == x2 +- rounding is accepted by both pieces.
_DOMAIN_SLACK = 1e-12


class NegativeDistance(ManhattanCoxError, ValueError):
    pass


class BranchDomain(ManhattanCoxError, ValueError):
    pass


class EventId(Enum):
    E1 = 1
    E2 = 2
    E3 = 3
    E4 = 4


@dataclass(frozen=True)
class ConditioningState:
    """Distances to the closer (``x1``) and farther (``x2``) nearest intersection."""

    x1: float
    x2: float

    def __post_init__(self):
        if not (0.0 <= self.x1 <= self.x2 < math.inf):
            raise ValueError(f"need 0 <= x1 <= x2 < inf, got x1={self.x1}, x2={self.x2}")


def _nonneg(value, name="distance"):
    arr = np.asarray(value, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise NegativeDistance(f"{name} must be >= 0")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _clamp(p: float) -> float:
    if p < -CLAMP_SLACK or p > 1.0 + CLAMP_SLACK:
        raise QuadratureFailure(f"probability {p!r} lies outside [0, 1] beyond rounding slack")
    return min(max(p, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Typical intersection
# ---------------------------------------------------------------------------

def cdf_intersection(t, params: ModelParams):
    """CDF of the path distance from the typical intersection to its nearest point.

    ``1 - exp(-4 c t - 4 l t + (2 l / c) (1 - exp(-2 c t)))``.
    """
    t = _nonneg(t)
    l, c = params.lambda_l, params.lambda_c
    expo = -4.0 * (c + l) * t - (2.0 * l / c) * np.expm1(-2.0 * c * t)
    # + 0.0 turns the -0.0 at t = 0 into 0.0
    return _out(-np.expm1(expo) + 0.0)


# ---------------------------------------------------------------------------
# Distances to the nearest vertical lines
# ---------------------------------------------------------------------------

def pdf_s(s, params: ModelParams):
    """Density of the distance to the nearest vertical line on one side."""
    s = _nonneg(s, "s")
    l = params.lambda_l
    return _out(l * np.exp(-l * s))


def pdf_x1x2(state: ConditioningState, params: ModelParams) -> float:
    """Joint density of the closer and farther intersection distances."""
    if state.x1 > state.x2:
        return 0.0
    l = params.lambda_l
    return 2.0 * l * l * math.exp(-l * (state.x1 + state.x2))


def _pdf_x1x2(x1, x2, l):
    return 2.0 * l * l * np.exp(-l * (x1 + x2))


# ---------------------------------------------------------------------------
# Event probabilities given (x1, x2)
# ---------------------------------------------------------------------------

def _prob_events(x1, x2, c):
    hit1 = -np.expm1(-c * x1)  # P(D1 <= x1)
    hit2 = -np.expm1(-c * x2)  # P(D2 <= x2)
    miss1 = np.exp(-c * x1)
    miss2 = np.exp(-c * x2)
    return hit1 * miss2, hit1 * hit2, miss1 * miss2, miss1 * hit2


def prob_event(e: EventId, state: ConditioningState, params: ModelParams) -> float:
    probs = _prob_events(state.x1, state.x2, params.lambda_c)
    return float(probs[EventId(e).value - 1])


# ---------------------------------------------------------------------------
# Conditional CDFs of W1 / W2 given E3 (two pieces each)
# ---------------------------------------------------------------------------

def _log_surv_b1(w, l, c):
    """log P(W > w) on the first piece (square exclusion zone)."""
    return -3.0 * (c + l) * w - (1.5 * l / c) * np.expm1(-2.0 * c * w)


def _log_surv_b2(w, x_other, l, c):
    """log P(W > w) on the second piece (pentagonal exclusion zone).

    ``x_other`` is the distance to the intersection on the opposite side
    (``x2`` for W1, ``x1`` for W2). The bracket
    ``3 + 2 e^{-2 c x} - e^{-2 c w} - 4 e^{-c (x + w)}`` is evaluated as
    ``3 (1 - e^{-2 c w}) + 2 (e^{-c x} - e^{-c w})^2`` to avoid cancellation.
    """
    gap = np.exp(-c * x_other) * -np.expm1(-c * (w - x_other))
    bracket = -3.0 * np.expm1(-2.0 * c * w) + 2.0 * gap * gap
    return -3.0 * (c + l) * w + (0.5 * l / c) * bracket


def _check_branch(w, lo, hi, name):
    w = _nonneg(w, "w")
    if lo is not None and np.any(w < lo - _DOMAIN_SLACK * (1.0 + abs(lo))):
        raise BranchDomain(f"{name} is defined for w >= {lo}")
    if hi is not None and np.any(w > hi + _DOMAIN_SLACK * (1.0 + abs(hi))):
        raise BranchDomain(f"{name} is defined for w <= {hi}")
    return w


def cdf_w1_branch1(w, params: ModelParams, state: ConditioningState = None):
    """First piece of the conditional CDF of W1, valid for ``0 <= w <= x2``.

    The value does not depend on ``state``; it is only used for the domain
    check when given.
    """
    w = _check_branch(w, None, None if state is None else state.x2, "cdf_w1_branch1")
    return _out(-np.expm1(_log_surv_b1(w, params.lambda_l, params.lambda_c)))


def cdf_w1_branch2(w, state: ConditioningState, params: ModelParams):
    """Second piece of the conditional CDF of W1, valid for ``w >= x2``."""
    w = _check_branch(w, state.x2, None, "cdf_w1_branch2")
    return _out(-np.expm1(_log_surv_b2(w, state.x2, params.lambda_l, params.lambda_c)))


def cdf_w2_branch1(w, params: ModelParams, state: ConditioningState = None):
    """First piece of the conditional CDF of W2, valid for ``0 <= w <= x1``."""
    w = _check_branch(w, None, None if state is None else state.x1, "cdf_w2_branch1")
    return _out(-np.expm1(_log_surv_b1(w, params.lambda_l, params.lambda_c)))


def cdf_w2_branch2(w, state: ConditioningState, params: ModelParams):
    """Second piece of the conditional CDF of W2, valid for ``w >= x1``."""
    w = _check_branch(w, state.x1, None, "cdf_w2_branch2")
    return _out(-np.expm1(_log_surv_b2(w, state.x1, params.lambda_l, params.lambda_c)))


def _log_surv_w(w, x_other, l, c):
    """log P(W > w) for either W1 (x_other = x2) or W2 (x_other = x1)."""
    w = np.maximum(np.asarray(w, dtype=float), 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(w <= x_other, _log_surv_b1(w, l, c), _log_surv_b2(w, x_other, l, c))


def cdf_w1(w, state: ConditioningState, params: ModelParams):
    w = _nonneg(w, "w")
    return _out(-np.expm1(_log_surv_w(w, state.x2, params.lambda_l, params.lambda_c)))


def cdf_w2(w, state: ConditioningState, params: ModelParams):
    w = _nonneg(w, "w")
    return _out(-np.expm1(_log_surv_w(w, state.x1, params.lambda_l, params.lambda_c)))


# The conditional CDF of Z1 (event E4) coincides with that of W1.
cdf_z1 = cdf_w1


# ---------------------------------------------------------------------------
# Conditional CDFs of R_m given each event and (x1, x2)
# ---------------------------------------------------------------------------

def _cond_cdf_e1(r, x1, x2, l, c):
    with np.errstate(invalid="ignore", divide="ignore"):
        inside = np.expm1(-c * r) / np.expm1(-c * x1)
    return np.where(r <= x1, inside, 1.0)


def _cond_cdf_e2(r, x1, x2, l, c):
    with np.errstate(invalid="ignore", divide="ignore"):
        num = -np.expm1(-2.0 * c * r) + np.expm1(-c * r) * (np.exp(-c * x1) + np.exp(-c * x2))
        inside = num / (np.expm1(-c * x1) * np.expm1(-c * x2))
    return np.where(r < x1, inside, 1.0)


def _f_b1(w, l, c):
    return -np.expm1(_log_surv_b1(np.maximum(w, 0.0), l, c))


def _f_b2(w, x_other, l, c):
    return -np.expm1(_log_surv_b2(np.maximum(w, 0.0), x_other, l, c))


def _cond_cdf_e3(r, x1, x2, l, c):
    with np.errstate(over="ignore", invalid="ignore"):
        f11 = _f_b1(r - x1, l, c)
        f21 = _f_b1(r - x2, l, c)
        f12 = _f_b2(r - x1, x2, l, c)
        f22 = _f_b2(r - x2, x1, l, c)
    return np.select(
        [r < x1, r < x2, r < x1 + x2],
        [0.0, f11, f11 + f21 - f11 * f21],
        f12 + f22 - f12 * f22,
    )


def _cond_cdf_e4(r, x1, x2, l, c):
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        low = np.expm1(-c * r) / np.expm1(-c * x2)
        z11 = _f_b1(r - x1, l, c)
        mid = 1.0 - (1.0 - z11) * (np.exp(-c * r) - np.exp(-c * x2)) / -np.expm1(-c * x2)
    return np.select([r <= x1, r < x2], [low, mid], 1.0)


_COND = {
    EventId.E1: _cond_cdf_e1,
    EventId.E2: _cond_cdf_e2,
    EventId.E3: _cond_cdf_e3,
    EventId.E4: _cond_cdf_e4,
}


def _cond_cdf(e: EventId, r, x1, x2, l, c):
    r, x1, x2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, x1, x2)))
    vals = _COND[e](r, x1, x2, l, c)
    # R_m > 0 almost surely; this also settles the 0/0 corners at x1 = 0 or x2 = 0.
    return np.where(r <= 0.0, 0.0, vals)


def cond_cdf_rm(e: EventId, rm, state: ConditioningState, params: ModelParams):
    """CDF of the nearest path distance given event ``e`` and ``(x1, x2)``."""
    rm = _nonneg(rm, "rm")
    return _out(_cond_cdf(EventId(e), rm, state.x1, state.x2, params.lambda_l, params.lambda_c))


def cdf_given_state(rm, state: ConditioningState, params: ModelParams):
    """Law of total probability over the four events, given ``(x1, x2)``."""
    rm = _nonneg(rm, "rm")
    return _out(_cdf_given(rm, state.x1, state.x2, params.lambda_l, params.lambda_c))


def _cdf_given(r, x1, x2, l, c):
    probs = _prob_events(x1, x2, c)
    total = 0.0
    for e, p in zip(EventId, probs):
        total = total + _cond_cdf(e, r, x1, x2, l, c) * p
    return total


# ---------------------------------------------------------------------------
# Typical point: closed expression and assembled oracle
# ---------------------------------------------------------------------------

def _tail_cut_assembled(rm: float, params: ModelParams, quad: QuadSpec) -> float:
    if quad.tail_cut is not None:
        return max(quad.tail_cut, rm)
    # Integrand <= f_{X2}, and P(X2 > T) <= 2 exp(-l T).
    return rm + math.log(2.0 / quad.abs_tol) / params.lambda_l


def cdf_typical_theorem2(rm: float, params: ModelParams, quad: QuadSpec = QuadSpec()) -> float:
    """CDF of the path distance from the typical point to its nearest neighbor.

    Evaluates the closed expression: one exponential, one single integral and
    three double integrals over the triangle ``0 <= x1 <= x2 <= rm``, whose
    inner integrands switch between the two pieces of the W1/W2 CDFs along
    ``x1 + x2 = rm``.
    """
    rm = float(_nonneg(rm, "rm"))
    if rm == 0.0:
        return 0.0
    l, c = params.lambda_l, params.lambda_c
    k = l + c

    def s11(x1):  # 1 - F_{W1,1}(rm - x1)
        return np.exp(_log_surv_b1(rm - x1, l, c))

    lead = math.exp(-2.0 * k * rm)

    single = integrate_adaptive(lambda x1: s11(x1) * np.exp(-k * x1), 0.0, rm, quad)
    term_single = 2.0 * l * math.exp(-k * rm) * single

    def upper_both_b1(x2, x1):
        s21 = math.exp(float(_log_surv_b1(rm - x2, l, c)))
        return math.exp(-k * x2) * s21 * s11(x1) * np.exp(-k * x1)

    def both_b2(x2, x1):
        s12 = np.exp(_log_surv_b2(rm - x1, x2, l, c))
        s22 = np.exp(_log_surv_b2(rm - x2, x1, l, c))
        return math.exp(-k * x2) * s12 * s22 * np.exp(-k * x1)

    double_a = integrate_2d(upper_both_b1, (0.5 * rm, rm), lambda x2: (rm - x2, x2), quad)
    double_b = integrate_2d(both_b2, (0.5 * rm, rm), lambda x2: (0.0, rm - x2), quad)
    double_c = integrate_2d(both_b2, (0.0, 0.5 * rm), lambda x2: (0.0, x2), quad)
    value = 1.0 - lead - term_single - 2.0 * l * l * (double_a + double_b + double_c)
    return _clamp(value)


def cdf_typical_assembled(rm: float, params: ModelParams, quad: QuadSpec = QuadSpec()) -> float:
    """Oracle route: integrate the event-conditional CDFs against f(x1, x2).

    The domain ``0 <= x1 <= x2`` is split at every kink of the integrand
    (``x2 = rm/2, rm`` outside; ``x1 = rm - x2, rm`` inside) and truncated
    where the remaining mass of ``X2`` is below ``abs_tol``.
    """
    rm = float(_nonneg(rm, "rm"))
    if rm == 0.0:
        return 0.0
    l, c = params.lambda_l, params.lambda_c
    cut = _tail_cut_assembled(rm, params, quad)

    def integrand(x2, x1):
        return _cdf_given(rm, x1, x2, l, c) * _pdf_x1x2(x1, x2, l)

    value = integrate_2d(
        integrand,
        (0.0, cut),
        lambda x2: (0.0, x2),
        quad,
        outer_breaks=(0.5 * rm, rm),
        inner_breaks=lambda x2: (rm - x2, rm),
    )
    return _clamp(value)


# ---------------------------------------------------------------------------
# Typical point: horizontal lines shared by the W1 and W2 zones
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def _zone_lengths(y, w, x_other):
    """Length of the horizontal line at height ``y`` inside a cut W zone of radius ``w``."""
    room = w - y
    return room + np.minimum(room, x_other)


def _shared_exponent(w1, x2, w2, x1, l, c):
    top = np.maximum(np.minimum(w1, w2), 0.0)
    knots = np.sort(
        np.stack([np.zeros_like(top), np.clip(w1 - x2, 0.0, top), np.clip(w2 - x1, 0.0, top), top]), axis=0
    )
    total = np.zeros_like(top)
    for lo, hi in zip(knots[:-1], knots[1:]):
        half = 0.5 * (hi - lo)
        y = (0.5 * (hi + lo))[..., None] + half[..., None] * _GL_NODES
        a = _zone_lengths(y, w1[..., None], x2[..., None])
        b = _zone_lengths(y, w2[..., None], x1[..., None])
        total = total + half * np.sum(_GL_WEIGHTS * np.expm1(-c * a) * np.expm1(-c * b), axis=-1)
    return 2.0 * l * total


def shared_line_exponent(w1, w2, state: ConditioningState, params: ModelParams):
    """``log P(W1 > w1, W2 > w2) - log P(W1 > w1) - log P(W2 > w2)`` given E3.

    The W1 and W2 zones are disjoint, but a horizontal line can cross both.
    Since the number of such lines is Poisson, the two void events are
    positively correlated. The product of the marginal survivals therefore
    undercounts the joint survival by the factor ``exp`` of this quantity.
    """
    w1, w2 = np.broadcast_arrays(_nonneg(w1, "w1"), _nonneg(w2, "w2"))
    x1 = np.full(w1.shape, float(state.x1))
    x2 = np.full(w1.shape, float(state.x2))
    return _out(_shared_exponent(w1, x2, w2, x1, params.lambda_l, params.lambda_c))


def shared_line_excess(rm: float, params: ModelParams, quad: QuadSpec = QuadSpec()) -> float:
    """Amount by which :func:`cdf_typical_theorem2` exceeds the true CDF at ``rm``.

    That expression treats W1 and W2 as independent given E3. The missing
    factor ``exp(shared_line_exponent)`` on the joint survival is integrated
    over ``0 <= x1 <= x2 <= rm`` (only there do both W terms enter).
    """
    rm = float(_nonneg(rm, "rm"))
    if rm == 0.0:
        return 0.0
    l, c = params.lambda_l, params.lambda_c
    k = l + c

    def integrand(x2, x1):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.full(x1.shape, x2)
        w1, w2 = rm - x1, rm - x2
        log_s = _log_surv_w(w1, x2, l, c) + _log_surv_w(w2, x1, l, c) - k * (x1 + x2)
        shared = _shared_exponent(w1, x2, w2, x1, l, c)
        # S1 S2 e^C is a joint survival, so this form cannot overflow
        return np.exp(log_s + shared) * -np.expm1(-shared)

    value = integrate_2d(
        integrand,
        (0.0, rm),
        lambda x2: (0.0, x2),
        quad,
        outer_breaks=(0.5 * rm,),
        inner_breaks=lambda x2: (rm - x2,),
    )
    return 2.0 * l * l * value


def cdf_typical_shared_lines(rm: float, params: ModelParams, quad: QuadSpec = QuadSpec()) -> float:
    """Typical-point CDF with the shared-line dependence of W1 and W2 restored."""
    return _clamp(cdf_typical_theorem2(rm, params, quad) - shared_line_excess(rm, params, quad))


def cdf_typical(rm, params: ModelParams, quad: QuadSpec = QuadSpec()):
    """Vectorized convenience wrapper around :func:`cdf_typical_theorem2`."""
    arr = _nonneg(rm, "rm")
    if arr.ndim == 0:
        return cdf_typical_theorem2(float(arr), params, quad)
    return np.array([cdf_typical_theorem2(float(v), params, quad) for v in arr.ravel()]).reshape(arr.shape)


def quantile(cdf: Callable[[float], float], p: float, hint: float = 1.0, xtol: float = 1e-10) -> float:
    """Smallest ``t`` with ``cdf(t) >= p``, by bracketing and bisection."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    lo, hi = 0.0, max(hint, 1e-12)
    while cdf(hi) < p:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            raise ValueError("quantile bracket diverged")
    while hi - lo > xtol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if cdf(mid) >= p:
            hi = mid
        else:
            lo = mid
    return hi
