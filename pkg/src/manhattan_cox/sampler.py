"""Seeded sampling of the Manhattan line process and the Cox process on it.

Offsets and point positions are drawn with the order-statistics construction:
a Poisson count first, then that many i.i.d. uniforms on the window. For a
homogeneous Poisson process restricted to a bounded interval this is an exact
draw.

Every sampler takes an integer seed (or a :class:`numpy.random.SeedSequence`)
and is a pure function of its arguments, so trials with seeds ``seed + i`` are
independent, reproducible streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Tuple, Union

import numpy as np

from .geom import Line, ManhattanCoxError, ModelParams, Orientation, Palm, Window

Seed = Union[int, np.random.SeedSequence]


class AlreadyConditioned(ManhattanCoxError):
    pass


def make_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be a non-negative integer, got {seed!r}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LineSet:
    """Vertical and horizontal line offsets of a realization inside a window."""

    vertical_offsets: np.ndarray
    horizontal_offsets: np.ndarray
    window: Window
    palm: Palm = Palm.NONE

    def __post_init__(self):
        hw = self.window.half_width
        for name in ("vertical_offsets", "horizontal_offsets"):
            arr = np.array(getattr(self, name), dtype=float).ravel()
            if arr.size and (np.any(np.diff(arr) < 0)):
                arr = np.sort(arr)
            if arr.size and (arr[0] < -hw or arr[-1] > hw):
                raise ValueError(f"{name} must lie inside [-{hw}, {hw}]")
            object.__setattr__(self, name, _frozen(arr))
        palm = Palm(self.palm)
        object.__setattr__(self, "palm", palm)
        if palm is Palm.TYPICAL_INTERSECTION and not (
            _has_zero(self.vertical_offsets) and _has_zero(self.horizontal_offsets)
        ):
            raise ValueError("typical-intersection line sets must contain both axis lines")
        if palm is Palm.TYPICAL_POINT and not _has_zero(self.horizontal_offsets):
            raise ValueError("typical-point line sets must contain the horizontal axis line")

    def __eq__(self, other):
        if not isinstance(other, LineSet):
            return NotImplemented
        return (
            self.window == other.window
            and self.palm is other.palm
            and np.array_equal(self.vertical_offsets, other.vertical_offsets)
            and np.array_equal(self.horizontal_offsets, other.horizontal_offsets)
        )

    @property
    def n_vertical(self) -> int:
        return int(self.vertical_offsets.size)

    @property
    def n_horizontal(self) -> int:
        return int(self.horizontal_offsets.size)

    @property
    def n_lines(self) -> int:
        return self.n_vertical + self.n_horizontal

    def lines(self) -> Iterator[Line]:
        """Vertical lines first, then horizontal, each in offset order."""
        vert_palm = self.palm is Palm.TYPICAL_INTERSECTION
        horiz_palm = self.palm is not Palm.NONE
        for x in self.vertical_offsets:
            yield Line(Orientation.VERTICAL, float(x), vert_palm and x == 0.0)
        for y in self.horizontal_offsets:
            yield Line(Orientation.HORIZONTAL, float(y), horiz_palm and y == 0.0)


def _has_zero(arr: np.ndarray) -> bool:
    i = int(np.searchsorted(arr, 0.0))
    return i < arr.size and arr[i] == 0.0


def _insert_zero(arr: np.ndarray) -> np.ndarray:
    if _has_zero(arr):
        return arr
    i = int(np.searchsorted(arr, 0.0))
    return np.insert(arr, i, 0.0)


@dataclass(frozen=True, eq=False)
class CoxSample:
    """Cox points along the lines of a :class:`LineSet`.

    Coordinates are stored flat per orientation, sorted by line and then by
    position, with ``*_starts`` giving the slice boundaries of every line
    (CSR layout). A vertical line carries y-coordinates, a horizontal line
    x-coordinates. The atom at the origin of the typical-point setting is
    only flagged, never stored.
    """

    vertical_coords: np.ndarray
    vertical_starts: np.ndarray
    horizontal_coords: np.ndarray
    horizontal_starts: np.ndarray
    has_atom_at_origin: bool = False

    @classmethod
    def from_lists(cls, vertical, horizontal, has_atom_at_origin=False) -> "CoxSample":
        vc, vs = _pack(vertical)
        hc, hs = _pack(horizontal)
        return cls(vc, vs, hc, hs, has_atom_at_origin)

    def __post_init__(self):
        for name in ("vertical_coords", "horizontal_coords"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=float)))
        for name in ("vertical_starts", "horizontal_starts"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=np.int64)))

    def __eq__(self, other):
        if not isinstance(other, CoxSample):
            return NotImplemented
        return self.has_atom_at_origin == other.has_atom_at_origin and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("vertical_coords", "vertical_starts", "horizontal_coords", "horizontal_starts")
        )

    @property
    def n_vertical_lines(self) -> int:
        return int(self.vertical_starts.size - 1)

    @property
    def n_horizontal_lines(self) -> int:
        return int(self.horizontal_starts.size - 1)

    @property
    def n_points(self) -> int:
        return int(self.vertical_coords.size + self.horizontal_coords.size)

    def vertical_points(self, i: int) -> np.ndarray:
        return self.vertical_coords[self.vertical_starts[i]:self.vertical_starts[i + 1]]

    def horizontal_points(self, j: int) -> np.ndarray:
        return self.horizontal_coords[self.horizontal_starts[j]:self.horizontal_starts[j + 1]]

    @property
    def vertical(self) -> Tuple[np.ndarray, ...]:
        return tuple(self.vertical_points(i) for i in range(self.n_vertical_lines))

    @property
    def horizontal(self) -> Tuple[np.ndarray, ...]:
        return tuple(self.horizontal_points(j) for j in range(self.n_horizontal_lines))

    def points_2d(self, lines: LineSet) -> np.ndarray:
        """All Cox points as an (n, 2) array of (x, y), origin atom excluded."""
        vx = np.repeat(lines.vertical_offsets, np.diff(self.vertical_starts))
        hy = np.repeat(lines.horizontal_offsets, np.diff(self.horizontal_starts))
        xs = np.concatenate([vx, self.horizontal_coords])
        ys = np.concatenate([self.vertical_coords, hy])
        return np.column_stack([xs, ys])


def _pack(per_line) -> Tuple[np.ndarray, np.ndarray]:
    arrays = [np.sort(np.asarray(a, dtype=float).ravel()) for a in per_line]
    counts = [a.size for a in arrays]
    starts = np.zeros(len(arrays) + 1, dtype=np.int64)
    starts[1:] = np.cumsum(counts)
    coords = np.concatenate(arrays) if arrays else np.empty(0)
    return coords, starts


def sample_mplp(params: ModelParams, window: Window, seed: Seed) -> LineSet:
    """Draw the line offsets of a Manhattan Poisson line process in ``window``."""
    rng = make_rng(seed)
    hw = window.half_width
    mean = params.lambda_l * window.length
    n_v, n_h = rng.poisson(mean, size=2)
    vertical = np.sort(rng.uniform(-hw, hw, size=n_v))
    horizontal = np.sort(rng.uniform(-hw, hw, size=n_h))
    return LineSet(vertical, horizontal, window, Palm.NONE)


def palm_condition(lines: LineSet, mode) -> LineSet:
    """Add the axis line(s) through the origin (Slivnyak).

    The typical intersection gets both the x-axis and the y-axis line; the
    typical point sits on a horizontal line, so only the x-axis line is added.
    """
    from .geom import Mode

    if lines.palm is not Palm.NONE:
        raise AlreadyConditioned(f"line set is already conditioned ({lines.palm.value})")
    palm = Mode.parse(mode).palm
    horizontal = _insert_zero(lines.horizontal_offsets)
    vertical = lines.vertical_offsets
    if palm is Palm.TYPICAL_INTERSECTION:
        vertical = _insert_zero(vertical)
    return LineSet(vertical, horizontal, lines.window, palm)


def sample_cox(lines: LineSet, params: ModelParams, seed: Seed) -> CoxSample:
    """Populate every line of ``lines`` with an independent 1D Poisson process."""
    rng = make_rng(seed)
    hw = lines.window.half_width
    n_v, n_h = lines.n_vertical, lines.n_horizontal
    counts = rng.poisson(params.lambda_c * lines.window.length, size=n_v + n_h)
    total = int(counts.sum())
    coords = rng.uniform(-hw, hw, size=total)
    line_ids = np.repeat(np.arange(n_v + n_h), counts)
    coords = coords[np.lexsort((coords, line_ids))]
    starts = np.zeros(n_v + n_h + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    split = starts[n_v]
    return CoxSample(
        vertical_coords=coords[:split],
        vertical_starts=starts[: n_v + 1],
        horizontal_coords=coords[split:],
        horizontal_starts=starts[n_v:] - split,
        has_atom_at_origin=lines.palm is Palm.TYPICAL_POINT,
    )


def line_length_in_disc(lines: LineSet, radius: float) -> float:
    """Total length of the lines of ``lines`` inside the disc b(o, radius)."""
    total = 0.0
    for offsets in (lines.vertical_offsets, lines.horizontal_offsets):
        inside = offsets[np.abs(offsets) < radius]
        total += float(np.sum(2.0 * np.sqrt(radius * radius - inside * inside)))
    return total


def empirical_line_density(params: ModelParams, window: Window, n_trials: int, seed: Seed) -> float:
    """Monte-Carlo mean line length per unit area inside the inscribed disc."""
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(int(seed))
    radius = window.half_width
    area = math.pi * radius * radius
    total = 0.0
    for child in root.spawn(n_trials):
        total += line_length_in_disc(sample_mplp(params, window, child), radius)
    return total / (n_trials * area)
