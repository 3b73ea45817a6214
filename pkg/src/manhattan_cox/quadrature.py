"""Adaptive Gauss-Kronrod quadrature for piecewise-smooth integrands.

The integrand is called with a 1D array of abscissae and must return an
array of the same shape. Kinks and jumps must be passed as ``breaks``: the
interval is split there before any refinement, because a kink inside a
panel only converges algebraically.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .geom import ManhattanCoxError


class QuadratureFailure(ManhattanCoxError, ArithmeticError):
    pass


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances for one integral.

    ``tail_cut`` truncates improper integrals; leave it ``None`` to let each
    caller derive a cut whose neglected tail is below ``abs_tol``.
    """

    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    tail_cut: Optional[float] = None
    max_panels: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.tail_cut is not None and not self.tail_cut > 0:
            raise ValueError("tail_cut must be positive")
        if self.max_panels < 1:
            raise ValueError("max_panels must be >= 1")


# 21-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
# 10-point Gauss weights on the odd-indexed nodes.
_XK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077600525363348,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KW = np.concatenate([_WK[:-1], _WK[::-1]])


def _gw_full() -> np.ndarray:
    # Gauss nodes are the odd-indexed Kronrod abscissae in the half list.
    w = np.zeros(21)
    half = np.zeros(11)
    half[1:11:2] = _WG
    w[:10] = half[:10]
    w[10:] = half[::-1]
    return w


_GW = _gw_full()


def _panel(f, a: float, b: float):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fx = np.asarray(f(c + h * _NODES), dtype=float)
    if fx.shape != _NODES.shape:
        fx = np.broadcast_to(fx, _NODES.shape)
    if not np.all(np.isfinite(fx)):
        raise QuadratureFailure(f"integrand is not finite on [{a}, {b}]")
    kron = h * float(fx @ _KW)
    gauss = h * float(fx @ _GW)
    return kron, abs(kron - gauss)


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    quad: QuadSpec = QuadSpec(),
    breaks: Iterable[float] = (),
) -> float:
    """Integrate ``f`` over ``[a, b]``, splitting first at ``breaks``.

    Panels with the largest error estimate are bisected until the summed
    estimate is below ``max(abs_tol, rel_tol * |result|)``.
    """
    a = float(a)
    b = float(b)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integration limits must be finite; truncate at a tail cut first")
    if b < a:
        raise ValueError(f"lower limit {a} exceeds upper limit {b}")
    if a == b:
        return 0.0
    cuts = sorted({a, b, *(float(x) for x in breaks if a < x < b)})
    heap = []
    total = 0.0
    err = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        val, e = _panel(f, lo, hi)
        total += val
        err += e
        heapq.heappush(heap, (-e, lo, hi, val))
    panels = len(heap)
    while err > max(quad.abs_tol, quad.rel_tol * abs(total)):
        if panels >= quad.max_panels:
            raise QuadratureFailure(
                f"tolerance not met on [{a}, {b}]: error estimate {err:.3e} after {panels} panels"
            )
        neg_e, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise QuadratureFailure(f"panel [{lo}, {hi}] cannot be split further")
        v1, e1 = _panel(f, lo, mid)
        v2, e2 = _panel(f, mid, hi)
        total += v1 + v2 - val
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        panels += 1
    return total


def integrate_2d(
    f: Callable[[float, np.ndarray], np.ndarray],
    outer: tuple,
    inner: Callable[[float], tuple],
    quad: QuadSpec = QuadSpec(),
    outer_breaks: Iterable[float] = (),
    inner_breaks: Callable[[float], Iterable[float]] = lambda u: (),
) -> float:
    """Iterated integral ``int_a^b int_{g(u)}^{h(u)} f(u, v) dv du``.

    ``inner(u)`` returns the inner limits ``(g(u), h(u))``; ``f(u, v)`` is
    vectorized in ``v``. The inner integrals run at a tenth of the outer
    tolerance so their errors do not dominate.
    """
    inner_quad = QuadSpec(quad.abs_tol * 0.1, quad.rel_tol * 0.1, quad.tail_cut, quad.max_panels)
    breaks_out = list(outer_breaks)

    def outer_integrand(us: np.ndarray) -> np.ndarray:
        vals = np.empty(us.shape)
        for k, u in enumerate(us.tolist()):
            lo, hi = inner(u)
            if hi <= lo:
                vals[k] = 0.0
                continue
            vals[k] = integrate_adaptive(lambda v: f(u, v), lo, hi, inner_quad, inner_breaks(u))
        return vals

    return integrate_adaptive(outer_integrand, outer[0], outer[1], quad, breaks_out)
