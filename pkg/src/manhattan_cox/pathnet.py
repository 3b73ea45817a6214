"""Path network over a sampled line set and exact nearest-point path distances.

The network is materialized lazily: a node is ``(x, y, i, j)`` where ``i`` is
the index of the vertical line through it (or -1) and ``j`` the index of the
horizontal line (or -1). Neighbors along a line are found by bisection in the
sorted offset and point lists, so a Dijkstra search that stops at the first
Cox point only touches the part of the network within the answer's distance.
:meth:`PathNetwork.nodes` and :meth:`PathNetwork.edges` enumerate the full
graph when it is needed explicitly.

Window truncation
-----------------
Every path of length ``d`` from the origin stays inside the L1 ball of radius
``d``, which lies inside the square window whenever ``d <= half_width``. All
lines crossing the window and all points inside it are sampled, so a distance
``d <= half_width`` found on the truncated network cannot be improved by
anything outside the window: the result is exact.

When it is not (no point found, or ``d > half_width``), the same realization
is extended to a window of twice the size: new lines are drawn in the annulus
and every old line receives points on its newly exposed parts. The extended
sample is an exact draw of the process in the larger window, and the
realization inside the old window is unchanged. Hence the accepted distance
equals the distance in the untruncated process, so accepted trials follow its
law exactly. Resampling from scratch at each attempt would not have this
property: the accepted value would be conditioned on falling below the
attempt's window.
"""

from __future__ import annotations

import heapq
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

import numpy as np

from .geom import ManhattanCoxError, Mode, ModelParams, Palm, Window
from .sampler import (
    CoxSample,
    LineSet,
    Seed,
    make_rng,
    palm_condition,
    sample_cox,
    sample_mplp,
)

MERGE_TOL = 1e-12
INF = math.inf

TAG_INTERSECTION = "intersection"
TAG_COX = "cox_point"
TAG_ORIGIN = "origin"


class OriginNotOnNetwork(ManhattanCoxError):
    pass


class NoPointFound(ManhattanCoxError):
    pass


class WindowOverflow(ManhattanCoxError):
    pass


@dataclass(frozen=True)
class DistanceResult:
    distance: float
    witness: Tuple[float, float]
    exact: bool
    half_width: float = INF
    attempts: int = 1


def _canonical(points: np.ndarray, crossings: List[float], drop_zero: bool) -> List[float]:
    """Snap points onto crossing offsets and merge near-coincident points."""
    if points.size == 0:
        return []
    pts = np.array(points, dtype=float)
    if crossings:
        cross = np.asarray(crossings)
        idx = np.searchsorted(cross, pts)
        lo = cross[np.clip(idx - 1, 0, cross.size - 1)]
        hi = cross[np.clip(idx, 0, cross.size - 1)]
        pts = np.where(np.abs(pts - lo) <= MERGE_TOL, lo, pts)
        pts = np.where(np.abs(pts - hi) <= MERGE_TOL, hi, pts)
    out: List[float] = []
    for p in pts.tolist():
        if drop_zero and abs(p) <= MERGE_TOL:
            continue
        if out and p - out[-1] <= MERGE_TOL:
            continue
        out.append(p)
    return out


class PathNetwork:
    """Graph of intersections, Cox points and the origin along the lines."""

    def __init__(self, lines: LineSet, points: CoxSample):
        if lines.palm is Palm.NONE:
            raise OriginNotOnNetwork("the origin lies on no line; Palm-condition the line set first")
        if (points.n_vertical_lines, points.n_horizontal_lines) != (lines.n_vertical, lines.n_horizontal):
            raise ValueError("Cox sample does not match the line set")
        self.lines = lines
        self.points = points
        self.half_width = lines.window.half_width
        self._V: List[float] = lines.vertical_offsets.tolist()
        self._H: List[float] = lines.horizontal_offsets.tolist()
        self._vcache: Dict[int, List[float]] = {}
        self._hcache: Dict[int, List[float]] = {}
        self.j0 = self._H.index(0.0)
        self.i0 = self._V.index(0.0) if 0.0 in self._V else -1
        # Typical-point origin: a node on the x-axis line that is not an intersection.
        self._origin_on_x_only = self.i0 < 0
        self.atom_at_origin = points.has_atom_at_origin
        self.origin_is_cox = (not self.atom_at_origin) and (
            0.0 in self.horizontal_points(self.j0)
            or (self.i0 >= 0 and 0.0 in self.vertical_points(self.i0))
        )

    # -- line contents -------------------------------------------------
    def vertical_points(self, i: int) -> List[float]:
        pts = self._vcache.get(i)
        if pts is None:
            drop = self.atom_at_origin and self._V[i] == 0.0
            pts = _canonical(self.points.vertical_points(i), self._H, drop)
            self._vcache[i] = pts
        return pts

    def horizontal_points(self, j: int) -> List[float]:
        pts = self._hcache.get(j)
        if pts is None:
            drop = self.atom_at_origin and self._H[j] == 0.0
            pts = _canonical(self.points.horizontal_points(j), self._V, drop)
            self._hcache[j] = pts
        return pts

    @property
    def origin(self) -> Tuple[float, float, int, int]:
        return (0.0, 0.0, self.i0, self.j0)

    # -- adjacency -----------------------------------------------------
    def neighbors(self, x: float, y: float, i: int, j: int) -> Iterator[Tuple[float, float, int, int, bool, float]]:
        """Yield ``(x, y, i, j, is_cox, weight)`` for the adjacent nodes."""
        if i >= 0:
            pts = self.vertical_points(i)
            H = self._H
            k = bisect_right(H, y)
            c = H[k] if k < len(H) else INF
            m = bisect_right(pts, y)
            p = pts[m] if m < len(pts) else INF
            if c < INF or p < INF:
                if c <= p:
                    yield (x, c, i, k, p == c, c - y)
                else:
                    yield (x, p, i, -1, True, p - y)
            k = bisect_left(H, y) - 1
            c = H[k] if k >= 0 else -INF
            m = bisect_left(pts, y) - 1
            p = pts[m] if m >= 0 else -INF
            if c > -INF or p > -INF:
                if c >= p:
                    yield (x, c, i, k, p == c, y - c)
                else:
                    yield (x, p, i, -1, True, y - p)
        if j >= 0:
            pts = self.horizontal_points(j)
            V = self._V
            stop_at_origin = self._origin_on_x_only and j == self.j0
            k = bisect_right(V, x)
            c = V[k] if k < len(V) else INF
            m = bisect_right(pts, x)
            p = pts[m] if m < len(pts) else INF
            if stop_at_origin and x < 0.0 and 0.0 < min(c, p):
                yield (0.0, 0.0, -1, j, False, -x)
            elif c < INF or p < INF:
                if c <= p:
                    yield (c, y, k, j, p == c, c - x)
                else:
                    yield (p, y, -1, j, True, p - x)
            k = bisect_left(V, x) - 1
            c = V[k] if k >= 0 else -INF
            m = bisect_left(pts, x) - 1
            p = pts[m] if m >= 0 else -INF
            if stop_at_origin and x > 0.0 and 0.0 > max(c, p):
                yield (0.0, 0.0, -1, j, False, x)
            elif c > -INF or p > -INF:
                if c >= p:
                    yield (c, y, k, j, p == c, x - c)
                else:
                    yield (p, y, -1, j, True, x - p)

    # -- explicit enumeration -----------------------------------------
    def nodes(self) -> Dict[Tuple[float, float], FrozenSet[str]]:
        """Every node keyed by its coordinates, with its tags."""
        tags: Dict[Tuple[float, float], set] = {}
        for x in self._V:
            for y in self._H:
                tags.setdefault((x, y), set()).add(TAG_INTERSECTION)
        for i, x in enumerate(self._V):
            for y in self.vertical_points(i):
                tags.setdefault((x, y), set()).add(TAG_COX)
        for j, y in enumerate(self._H):
            for x in self.horizontal_points(j):
                tags.setdefault((x, y), set()).add(TAG_COX)
        tags.setdefault((0.0, 0.0), set()).add(TAG_ORIGIN)
        return {k: frozenset(v) for k, v in tags.items()}

    def edges(self) -> List[Tuple[Tuple[float, float], Tuple[float, float], float]]:
        """Edges between consecutive nodes along every line."""
        out = []
        for i, x in enumerate(self._V):
            stops = set(self._H) | set(self.vertical_points(i))
            for a, b in _pairs(sorted(stops)):
                out.append(((x, a), (x, b), b - a))
        for j, y in enumerate(self._H):
            stops = set(self._V) | set(self.horizontal_points(j))
            if j == self.j0:
                stops.add(0.0)
            for a, b in _pairs(sorted(stops)):
                out.append(((a, y), (b, y), b - a))
        return out

    def cox_nodes(self) -> List[Tuple[float, float]]:
        return [k for k, t in self.nodes().items() if TAG_COX in t]


def _pairs(seq):
    return zip(seq[:-1], seq[1:])


def build_network(lines: LineSet, points: CoxSample) -> PathNetwork:
    return PathNetwork(lines, points)


def shortest_path_to_nearest(net: PathNetwork) -> DistanceResult:
    """Dijkstra from the origin, stopping at the first Cox point settled.

    Equidistant candidates are resolved by the smaller ``(x, y)`` witness,
    which the heap ordering gives for free. The origin atom of the
    typical-point setting is never a candidate.
    """
    hw = net.half_width
    if net.origin_is_cox:
        return DistanceResult(0.0, (0.0, 0.0), True, hw)
    x0, y0, i0, j0 = net.origin
    heap = [(0.0, x0, y0, i0, j0, False)]
    done = set()
    while heap:
        d, x, y, i, j, is_cox = heapq.heappop(heap)
        if (x, y) in done:
            continue
        if is_cox:
            return DistanceResult(d, (x, y), d <= hw, hw)
        done.add((x, y))
        for nx, ny, ni, nj, ncox, w in net.neighbors(x, y, i, j):
            if (nx, ny) not in done:
                heapq.heappush(heap, (d + w, nx, ny, ni, nj, ncox))
    raise NoPointFound("the network contains no Cox point")


def l1_nearest(lines: LineSet, points: CoxSample) -> float:
    """Minimum of |x| + |y| over the Cox points (origin atom excluded)."""
    xy = points.points_2d(lines)
    if xy.shape[0] == 0:
        return INF
    return float(np.min(np.abs(xy[:, 0]) + np.abs(xy[:, 1])))


def initial_half_width(params: ModelParams) -> float:
    return max(3.0 / params.lambda_c, 3.0 / params.lambda_l)


def default_max_half_width(params: ModelParams) -> float:
    return 1e4 / params.lambda_c


def _attempt_seeds(seed: int, attempt: int):
    ss = np.random.SeedSequence([int(seed), attempt])
    return ss.spawn(2)


def extend_realization(
    lines: LineSet, points: CoxSample, params: ModelParams, new_half_width: float, seed: Seed
) -> Tuple[LineSet, CoxSample]:
    """Grow a realization to a larger window without touching its interior.

    Lines crossing the annulus between the old and new squares are added and
    every line is populated on the part of it that lies outside the old
    window, so the result is an exact sample in the new window that agrees
    with ``(lines, points)`` inside the old one.
    """
    old = lines.window.half_width
    new = float(new_half_width)
    if new <= old:
        raise ValueError("the new window must be larger than the old one")
    rng = make_rng(seed)
    ring = new - old

    def annulus(n):
        return np.where(rng.random(n) < 0.5, -1.0, 1.0) * rng.uniform(old, new, size=n)

    lam_l, lam_c = params.lambda_l, params.lambda_c
    out = {}
    for name, offsets, getter, count in (
        ("vertical", lines.vertical_offsets, points.vertical_points, points.n_vertical_lines),
        ("horizontal", lines.horizontal_offsets, points.horizontal_points, points.n_horizontal_lines),
    ):
        per_line = []
        for k in range(count):
            extra = annulus(rng.poisson(lam_c * 2.0 * ring))
            per_line.append((float(offsets[k]), np.concatenate([getter(k), extra])))
        for off in annulus(rng.poisson(lam_l * 2.0 * ring)):
            pts = rng.uniform(-new, new, size=rng.poisson(lam_c * 2.0 * new))
            per_line.append((float(off), pts))
        per_line.sort(key=lambda item: item[0])
        out[name] = per_line

    grown = LineSet(
        [o for o, _ in out["vertical"]],
        [o for o, _ in out["horizontal"]],
        Window(new),
        lines.palm,
    )
    cox = CoxSample.from_lists(
        [p for _, p in out["vertical"]],
        [p for _, p in out["horizontal"]],
        points.has_atom_at_origin,
    )
    return grown, cox


def simulate_realization(
    params: ModelParams,
    mode,
    seed: int,
    *,
    half_width: Optional[float] = None,
    max_half_width: Optional[float] = None,
) -> Tuple[LineSet, CoxSample, DistanceResult]:
    """Sample one Palm-conditioned realization and its exact nearest distance.

    The window starts at ``half_width`` (default ``max(3/lambda_c,
    3/lambda_l)``) and doubles, extending the same realization, until the
    nearest distance fits inside it.
    """
    mode = Mode.parse(mode)
    hw = initial_half_width(params) if half_width is None else float(half_width)
    cap = default_max_half_width(params) if max_half_width is None else float(max_half_width)
    if hw > cap:
        raise WindowOverflow(f"initial half-width {hw} exceeds the cap {cap}")
    s_lines, s_points = _attempt_seeds(seed, 0)
    lines = palm_condition(sample_mplp(params, Window(hw), s_lines), mode)
    points = sample_cox(lines, params, s_points)
    attempt = 0
    while True:
        attempt += 1
        try:
            res = shortest_path_to_nearest(build_network(lines, points))
        except NoPointFound:
            res = None
        if res is not None and res.exact:
            return lines, points, DistanceResult(res.distance, res.witness, True, hw, attempt)
        hw *= 2.0
        if hw > cap:
            raise WindowOverflow(
                f"window half-width would exceed the cap {cap} km; parameters are pathological"
            )
        lines, points = extend_realization(
            lines, points, params, hw, np.random.SeedSequence([int(seed), attempt])
        )


def simulate_distance(params: ModelParams, mode, seed: int, **kwargs) -> DistanceResult:
    return simulate_realization(params, mode, seed, **kwargs)[2]
