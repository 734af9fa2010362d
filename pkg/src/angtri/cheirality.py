"""Signed depths, cheirality, parallax and outlier classification.

Nothing here silently re-triangulates: callers get the classification and
decide.  :func:`triangulate_with_retry` is the one opt-in fallback.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParallelLines
from .geom_core import PARALLEL_TOL, _closest_params, _line_angle
from .types import STATUSES, CorrectionResult, Method, RelativeGeometry, Status


class CheiralityClass(str, enum.Enum):
    BOTH_POSITIVE = "both_positive"
    RAY0_NEGATIVE = "ray0_negative"
    RAY1_NEGATIVE = "ray1_negative"
    BOTH_NEGATIVE = "both_negative"
    AT_INFINITY = "at_infinity"


class Observation(str, enum.Enum):
    INLIER = "inlier"
    LOW_PARALLAX = "low_parallax"
    OUTLIER = "outlier"
    CHEIRALITY_FAIL = "cheirality_fail"


# alias kept for callers that think in terms of the failing condition
ParallelRays = ParallelLines


@dataclass(frozen=True)
class Thresholds:
    """Classification thresholds in radians (the CLI takes degrees)."""

    outlier: float = math.radians(2.0)
    parallax: float = math.radians(0.5)

    def __post_init__(self):
        if not (self.outlier > 0 and self.parallax > 0):
            raise ValueError("thresholds must be positive angles")

    @classmethod
    def from_degrees(cls, outlier_deg: float = 2.0, parallax_deg: float = 0.5) -> "Thresholds":
        return cls(math.radians(outlier_deg), math.radians(parallax_deg))


@dataclass(frozen=True)
class CheiralityReport:
    lambda0: float
    lambda1: float
    klass: CheiralityClass
    parallax_angle: float
    is_outlier: bool = False


def compute_depths(g: RelativeGeometry, corr: CorrectionResult):
    """Signed distances along the unit corrected rays to their intersection."""
    d0, d1 = corr.unit_directions()
    if np.linalg.norm(np.cross(d0, d1)) < PARALLEL_TOL:
        raise ParallelRays("corrected rays are parallel")
    s0, s1 = _closest_params(g.c0, d0, g.c1, d1)
    return float(s0), float(s1)


def check_cheirality(lambda0: float, lambda1: float, at_infinity: bool = False) -> CheiralityClass:
    if at_infinity:
        return CheiralityClass.AT_INFINITY
    if lambda0 > 0 and lambda1 > 0:
        return CheiralityClass.BOTH_POSITIVE
    if lambda0 <= 0 and lambda1 <= 0:
        return CheiralityClass.BOTH_NEGATIVE
    return CheiralityClass.RAY0_NEGATIVE if lambda0 <= 0 else CheiralityClass.RAY1_NEGATIVE


def cheirality_report(
    g: RelativeGeometry, corr: CorrectionResult, thresholds: Thresholds | None = None
) -> CheiralityReport:
    thresholds = thresholds or Thresholds()
    d0, d1 = corr.unit_directions()
    parallax = float(_line_angle(d0, d1))
    try:
        lambda0, lambda1 = compute_depths(g, corr)
        klass = check_cheirality(lambda0, lambda1)
    except ParallelRays:
        lambda0 = lambda1 = math.inf
        klass = CheiralityClass.AT_INFINITY
    return CheiralityReport(
        lambda0, lambda1, klass, parallax,
        is_outlier=corr.theta0 + corr.theta1 > thresholds.outlier,
    )


def classify_observation(
    g: RelativeGeometry,
    corr: CorrectionResult,
    report: CheiralityReport,
    thresholds: Thresholds | None = None,
) -> Observation:
    """Priority: outlier, then cheirality failure, then low parallax."""
    thresholds = thresholds or Thresholds()
    if corr.theta0 + corr.theta1 > thresholds.outlier:
        return Observation.OUTLIER
    if report.klass is not CheiralityClass.BOTH_POSITIVE and report.klass is not CheiralityClass.AT_INFINITY:
        return Observation.CHEIRALITY_FAIL
    raw_parallax = float(_line_angle(g.m0, g.m1))
    if raw_parallax < thresholds.parallax or report.klass is CheiralityClass.AT_INFINITY:
        return Observation.LOW_PARALLAX
    return Observation.INLIER


_OBS = tuple(Observation)


def classify_batch(m0, m1, theta0, theta1, lambda0, lambda1, status, thresholds: Thresholds | None = None):
    """Vectorized :func:`classify_observation`; returns indices into ``tuple(Observation)``.

    Records whose correction failed (NaN angles) count as outliers.
    """
    thresholds = thresholds or Thresholds()
    cost = theta0 + theta1
    outlier = ~(cost <= thresholds.outlier)
    at_inf = np.isin(status, [STATUSES.index(Status.LOW_PARALLAX), STATUSES.index(Status.PARALLEL_RAYS)])
    behind = ~at_inf & ~((lambda0 > 0) & (lambda1 > 0))
    low = (_line_angle(m0, m1) < thresholds.parallax) | at_inf
    out = np.full(len(cost), _OBS.index(Observation.INLIER))
    out = np.where(low, _OBS.index(Observation.LOW_PARALLAX), out)
    out = np.where(behind, _OBS.index(Observation.CHEIRALITY_FAIL), out)
    out = np.where(outlier, _OBS.index(Observation.OUTLIER), out)
    return out


def status_codes(lambda0, lambda1, parallel, low):
    """Triangulation status per record, as indices into ``types.STATUSES``."""
    ok = (lambda0 > 0) & (lambda1 > 0)
    out = np.where(ok, STATUSES.index(Status.OK), STATUSES.index(Status.CHEIRALITY_VIOLATION))
    out = np.where(low, STATUSES.index(Status.LOW_PARALLAX), out)
    return np.where(parallel, STATUSES.index(Status.PARALLEL_RAYS), out)


DEFAULT_RETRY_ORDER = (Method.L1, Method.LINF, Method.L2)


def triangulate_with_retry(g: RelativeGeometry, order=DEFAULT_RETRY_ORDER):
    """Try each method in turn until one yields a point in front of both cameras.

    Returns ``(output, method)`` for the first success, or the last attempt
    and ``None`` when every method fails.
    """
    from .triangulators import triangulate

    out = None
    for method in order:
        try:
            out = triangulate(g, method)
        except ValueError:
            continue
        if out.status is Status.OK:
            return out, Method(method)
    return out, None
