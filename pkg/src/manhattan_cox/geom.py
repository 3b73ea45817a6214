"""Shared value types, parameter validation and the package exception hierarchy.

Units are fixed throughout: distances in km, line densities in lines/km and
point densities in points/km.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

# Increments more negative than this are treated as genuine non-monotonicity.
MONOTONE_SLACK = 1e-12


class ManhattanCoxError(Exception):
    """Base class for all errors raised by this package."""


class NonPositiveDensity(ManhattanCoxError, ValueError):
    def __init__(self, which: str, value: float):
        super().__init__(f"{which} must be > 0, got {value!r}")
        self.which = which
        self.value = value


class NonMonotoneCdf(ManhattanCoxError, ValueError):
    pass


class Orientation(Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class Palm(Enum):
    """Which reference point the line set has been conditioned on."""

    NONE = "none"
    TYPICAL_INTERSECTION = "typical-intersection"
    TYPICAL_POINT = "typical-point"


class Mode(Enum):
    """Reference point for shortest path distance experiments."""

    INTERSECTION = "intersection"
    TYPICAL_POINT = "typical-point"

    @property
    def palm(self) -> Palm:
        if self is Mode.INTERSECTION:
            return Palm.TYPICAL_INTERSECTION
        return Palm.TYPICAL_POINT

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        if isinstance(value, Palm):
            if value is Palm.TYPICAL_INTERSECTION:
                return cls.INTERSECTION
            if value is Palm.TYPICAL_POINT:
                return cls.TYPICAL_POINT
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown mode {value!r}; expected 'intersection' or 'typical-point'")


@dataclass(frozen=True)
class ModelParams:
    """Densities of the Manhattan line process and of the points on each line.

    ``lambda_l`` is the density of each of the two 1D Poisson processes that
    generate the vertical and horizontal line offsets; ``lambda_c`` is the
    density of the Poisson process of points on every line.
    """

    lambda_l: float
    lambda_c: float

    def __post_init__(self):
        for name in ("lambda_l", "lambda_c"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value) and value > 0):
                raise NonPositiveDensity(name, value)
        object.__setattr__(self, "lambda_l", float(self.lambda_l))
        object.__setattr__(self, "lambda_c", float(self.lambda_c))

    @property
    def mu_l(self) -> float:
        """Line density (mean line length per unit area)."""
        return 2.0 * self.lambda_l


def validate_params(lambda_l: float, lambda_c: float) -> ModelParams:
    return ModelParams(lambda_l, lambda_c)


@dataclass(frozen=True)
class Window:
    """Closed square [-half_width, half_width]^2."""

    half_width: float

    def __post_init__(self):
        hw = self.half_width
        if not (math.isfinite(hw) and hw > 0):
            raise ValueError(f"half_width must be a positive finite number, got {hw!r}")
        object.__setattr__(self, "half_width", float(hw))

    @property
    def length(self) -> float:
        return 2.0 * self.half_width

    def contains(self, x: float, y: float) -> bool:
        return abs(x) <= self.half_width and abs(y) <= self.half_width


@dataclass(frozen=True)
class Line:
    orientation: Orientation
    offset: float
    palm_added: bool = False


class CdfKind(Enum):
    ANALYTIC = "analytic"
    EMPIRICAL = "empirical"


def dkw_halfwidth(n_trials: int, alpha: float = 0.05) -> float:
    """Half-width of the Dvoretzky-Kiefer-Wolfowitz confidence band."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n_trials))


@dataclass(frozen=True)
class CdfCurve:
    """CDF values sampled on a strictly increasing distance grid.

    Values are checked for monotonicity at construction; decrements smaller
    than ``MONOTONE_SLACK`` (quadrature noise) are clamped to the previous
    value, anything larger raises :class:`NonMonotoneCdf`.
    """

    grid: np.ndarray
    values: np.ndarray
    kind: CdfKind = CdfKind.ANALYTIC
    n_trials: Optional[int] = None
    dkw_halfwidth: Optional[float] = None
    alpha: Optional[float] = None
    label: str = ""
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        values = np.array(self.values, dtype=float)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise ValueError("grid and values must be 1D and of equal length")
        if grid.size and not np.all(np.isfinite(grid)):
            raise ValueError("grid must be finite")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(~np.isfinite(values)) or np.any(values < 0) or np.any(values > 1):
            raise NonMonotoneCdf("CDF values must lie in [0, 1]")
        values = _enforce_monotone(values)
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        kind = CdfKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is CdfKind.EMPIRICAL:
            if self.n_trials is None or self.n_trials < 1:
                raise ValueError("empirical curves need n_trials >= 1")
            alpha = 0.05 if self.alpha is None else self.alpha
            object.__setattr__(self, "alpha", alpha)
            object.__setattr__(self, "dkw_halfwidth", dkw_halfwidth(self.n_trials, alpha))

    def __len__(self):
        return self.grid.size

    def same_grid(self, other: "CdfCurve") -> bool:
        return self.grid.shape == other.grid.shape and bool(np.array_equal(self.grid, other.grid))


def _enforce_monotone(values: np.ndarray) -> np.ndarray:
    out = values.copy()
    for k in range(1, out.size):
        step = out[k] - out[k - 1]
        if step < 0:
            if step < -MONOTONE_SLACK:
                raise NonMonotoneCdf(
                    f"CDF decreases by {-step:.3e} at index {k}"
                )
            out[k] = out[k - 1]
    return out


def as_sorted_array(values: Sequence[float]) -> np.ndarray:
    arr = np.sort(np.asarray(values, dtype=float))
    arr.setflags(write=False)
    return arr
