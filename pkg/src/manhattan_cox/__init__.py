"""Nearest shortest-path distance to a Cox process on a Manhattan Poisson line process.

Layers, bottom up: :mod:`geom` (parameters, curves), :mod:`sampler` (lines
and points), :mod:`pathnet` (the street graph and its Dijkstra search),
:mod:`analytic` and :mod:`quadrature` (exact CDFs), :mod:`montecarlo`
(empirical CDFs and KS checks) and :mod:`cli`.
"""

from .analytic import (
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
    cdf_w2,
    cdf_z1,
    cond_cdf_rm,
    pdf_s,
    pdf_x1x2,
    prob_event,
    quantile,
    shared_line_excess,
    shared_line_exponent,
)
from .geom import (
    CdfCurve,
    CdfKind,
    ManhattanCoxError,
    Mode,
    ModelParams,
    NonMonotoneCdf,
    NonPositiveDensity,
    Orientation,
    Palm,
    Window,
    dkw_halfwidth,
    validate_params,
)
from .montecarlo import ValidationReport, estimate_cdf, ks_compare, simulate_distances, validate
from .pathnet import DistanceResult, build_network, l1_nearest, shortest_path_to_nearest, simulate_distance
from .quadrature import QuadSpec, QuadratureFailure
from .sampler import CoxSample, LineSet, palm_condition, sample_cox, sample_mplp

__version__ = "0.1.0"
