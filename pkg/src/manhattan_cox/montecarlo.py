"""Seeded Monte-Carlo batches, empirical CDFs and comparison with the exact CDFs."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Union

import numpy as np

from .analytic import cdf_intersection, cdf_typical, quantile
from .geom import CdfCurve, CdfKind, ManhattanCoxError, Mode, ModelParams, dkw_halfwidth
from .pathnet import simulate_distance
from .quadrature import QuadSpec

THREADS_ENV = "MANHATTAN_COX_THREADS"
DEFAULT_ALPHA = 0.05
QUADRATURE_SLACK = 0.002
MIN_TRIALS = 100


class GridMismatch(ManhattanCoxError, ValueError):
    pass


@dataclass(frozen=True)
class ValidationReport:
    regime: str
    mode: str
    lambda_l: float
    lambda_c: float
    n_trials: int
    seed: Optional[int]
    ks_statistic: float
    dkw_halfwidth: float
    tolerance: float
    passed: bool
    worst_distance_km: float
    worst_empirical: float
    worst_analytic: float

    def to_dict(self) -> dict:
        return asdict(self)


def worker_count(requested: Optional[int] = None) -> int:
    n = requested
    if n is None:
        env = os.environ.get(THREADS_ENV)
        n = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(n))


def _run_chunk(args):
    params, mode, seeds = args
    return [simulate_distance(params, mode, s).distance for s in seeds]


def simulate_distances(
    params: ModelParams, mode, n_trials: int, seed: int, workers: Optional[int] = None
) -> np.ndarray:
    """Nearest path distances of trials with seeds ``seed, seed + 1, ...``.

    The output order is the trial order whatever the number of workers, so
    results are bit-identical across machines.
    """
    mode = Mode.parse(mode)
    seeds = range(seed, seed + n_trials)
    n_workers = min(worker_count(workers), max(1, n_trials // 1000))
    if n_workers == 1:
        return np.array(_run_chunk((params, mode, seeds)), dtype=float)
    bounds = np.linspace(0, n_trials, 4 * n_workers + 1).astype(int)
    chunks = [(params, mode, seeds[a:b]) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        parts = list(pool.map(_run_chunk, chunks))
    return np.concatenate([np.asarray(p, dtype=float) for p in parts])


def empirical_curve(
    samples: np.ndarray, grid, alpha: float = DEFAULT_ALPHA, label: str = "", seed: Optional[int] = None
) -> CdfCurve:
    """Right-continuous empirical CDF of ``samples`` evaluated on ``grid``."""
    ordered = np.sort(np.asarray(samples, dtype=float))
    grid = np.asarray(grid, dtype=float)
    values = np.searchsorted(ordered, grid, side="right") / ordered.size
    return CdfCurve(grid, values, CdfKind.EMPIRICAL, n_trials=int(ordered.size), alpha=alpha, label=label, seed=seed)


def estimate_cdf(
    params: ModelParams,
    mode,
    n_trials: int,
    grid,
    seed: int,
    *,
    alpha: float = DEFAULT_ALPHA,
    workers: Optional[int] = None,
) -> CdfCurve:
    if n_trials < MIN_TRIALS:
        raise ValueError(f"n_trials must be >= {MIN_TRIALS}, got {n_trials}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    samples = simulate_distances(params, mode, n_trials, seed, workers)
    return empirical_curve(samples, grid, alpha, label=f"empirical-{Mode.parse(mode).value}", seed=seed)


def analytic_cdf(params: ModelParams, mode, quad: QuadSpec = QuadSpec()) -> Callable:
    """The exact CDF for ``mode`` as a vectorized function of distance."""
    mode = Mode.parse(mode)
    if mode is Mode.INTERSECTION:
        return lambda t: cdf_intersection(t, params)
    return lambda t: cdf_typical(t, params, quad)


def analytic_curve(params: ModelParams, mode, grid, quad: QuadSpec = QuadSpec()) -> CdfCurve:
    fn = analytic_cdf(params, mode, quad)
    grid = np.asarray(grid, dtype=float)
    return CdfCurve(grid, np.atleast_1d(fn(grid)), CdfKind.ANALYTIC, label=f"analytic-{Mode.parse(mode).value}")


def default_grid(params: ModelParams, mode, size: int = 200, upper_prob: float = 0.999) -> np.ndarray:
    """``size`` uniform points from 0 to the analytic ``upper_prob`` quantile."""
    if size < 2:
        raise ValueError("grid size must be >= 2")
    fn = analytic_cdf(params, mode)
    hint = 1.0 / (params.lambda_c + params.lambda_l)
    top = quantile(lambda t: float(fn(t)), upper_prob, hint=hint, xtol=1e-9)
    return np.linspace(0.0, top, size)


def ks_compare(
    empirical: CdfCurve,
    analytic: Union[CdfCurve, Callable],
    *,
    tolerance: Optional[float] = None,
    regime: str = "",
    mode=None,
    params: Optional[ModelParams] = None,
) -> ValidationReport:
    """Largest absolute CDF gap over the grid, judged against the DKW band.

    The default tolerance is the DKW half-width of ``empirical`` plus a
    0.002 slack for quadrature and grid effects.
    """
    if isinstance(analytic, CdfCurve):
        if not empirical.same_grid(analytic):
            raise GridMismatch("curves are sampled on different grids")
        reference = np.asarray(analytic.values)
    else:
        reference = np.atleast_1d(np.asarray(analytic(empirical.grid), dtype=float))
        if reference.shape != empirical.grid.shape:
            raise GridMismatch("analytic function returned a different number of values than the grid")
    gaps = np.abs(np.asarray(empirical.values) - reference)
    k = int(np.argmax(gaps)) if gaps.size else 0
    ks = float(gaps[k]) if gaps.size else 0.0
    dkw = float(empirical.dkw_halfwidth or 0.0)
    tol = dkw + QUADRATURE_SLACK if tolerance is None else float(tolerance)
    return ValidationReport(
        regime=regime,
        mode=Mode.parse(mode).value if mode is not None else "",
        lambda_l=params.lambda_l if params else float("nan"),
        lambda_c=params.lambda_c if params else float("nan"),
        n_trials=int(empirical.n_trials or 0),
        seed=empirical.seed,
        ks_statistic=ks,
        dkw_halfwidth=dkw,
        tolerance=tol,
        passed=bool(ks <= tol),
        worst_distance_km=float(empirical.grid[k]) if gaps.size else 0.0,
        worst_empirical=float(empirical.values[k]) if gaps.size else 0.0,
        worst_analytic=float(reference[k]) if gaps.size else 0.0,
    )


def validate(
    params: ModelParams,
    mode,
    n_trials: int,
    seed: int,
    *,
    grid_size: int = 200,
    regime: str = "",
    workers: Optional[int] = None,
):
    """Simulate, evaluate the exact CDF on the default grid and compare.

    Returns ``(report, empirical_curve, analytic_curve)``.
    """
    grid = default_grid(params, mode, grid_size)
    emp = estimate_cdf(params, mode, n_trials, grid, seed, workers=workers)
    ana = analytic_curve(params, mode, grid)
    report = ks_compare(emp, ana, regime=regime, mode=mode, params=params)
    return report, emp, ana


__all__ = [
    "GridMismatch",
    "ValidationReport",
    "analytic_cdf",
    "analytic_curve",
    "default_grid",
    "dkw_halfwidth",
    "empirical_curve",
    "estimate_cdf",
    "ks_compare",
    "simulate_distances",
    "validate",
    "worker_count",
]
