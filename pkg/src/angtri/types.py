"""Domain records passed between the triangulation, cheirality and I/O layers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBaseline, ZeroVector
from .geom_core import ZERO_TOL, as_vec3


class Method(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"
    MIDPOINT = "midpoint"


class Branch(str, enum.Enum):
    CORRECTED_RAY0 = "corrected_ray0"
    CORRECTED_RAY1 = "corrected_ray1"
    PLANE_A = "plane_a"
    PLANE_B = "plane_b"
    SVD = "svd"
    NONE = "none"


class Status(str, enum.Enum):
    OK = "ok"
    CHEIRALITY_VIOLATION = "cheirality_violation"
    LOW_PARALLAX = "low_parallax"
    PARALLEL_RAYS = "parallel_rays"
    # batch/CLI only: the correction itself was undefined for this record
    DEGENERATE = "degenerate"


# integer codes used by the vectorized paths, indexable into these tuples
BRANCHES = tuple(Branch)
STATUSES = tuple(Status)


@dataclass(frozen=True)
class RelativeGeometry:
    """One correspondence expressed in the reference frame.

    ``m0`` is camera 0's bearing rotated into the reference frame, ``m1`` is
    camera 1's bearing and ``t = c0 - c1`` is the baseline.
    """

    c0: np.ndarray
    c1: np.ndarray
    m0: np.ndarray
    m1: np.ndarray
    t: np.ndarray = field(init=False)

    def __post_init__(self):
        for name in ("c0", "c1", "m0", "m1"):
            object.__setattr__(self, name, as_vec3(getattr(self, name), name))
        if np.linalg.norm(self.m0) < ZERO_TOL or np.linalg.norm(self.m1) < ZERO_TOL:
            raise ZeroVector("ray directions must be nonzero")
        t = self.c0 - self.c1
        if np.linalg.norm(t) < ZERO_TOL:
            raise DegenerateBaseline("camera centers coincide")
        object.__setattr__(self, "t", t)

    @classmethod
    def from_pose(cls, R, c0, c1, f0, f1) -> "RelativeGeometry":
        """Build from bearings in each camera frame; ``R`` rotates camera 0 into the reference frame."""
        R = np.asarray(R, dtype=float)
        return cls(c0=c0, c1=c1, m0=R @ as_vec3(f0, "f0"), m1=f1)

    def rotated(self, Q) -> "RelativeGeometry":
        Q = np.asarray(Q, dtype=float)
        return RelativeGeometry(Q @ self.c0, Q @ self.c1, Q @ self.m0, Q @ self.m1)


@dataclass(frozen=True)
class CorrectionResult:
    """Corrected ray directions (in the input scale) with their angular errors in radians."""

    m0_corr: np.ndarray
    m1_corr: np.ndarray
    theta0: float
    theta1: float
    branch: Branch
    plane_normal: np.ndarray

    @property
    def sum_angles(self) -> float:
        return self.theta0 + self.theta1

    @property
    def max_angle(self) -> float:
        return max(self.theta0, self.theta1)

    @property
    def sum_sin_sq(self) -> float:
        return float(np.sin(self.theta0) ** 2 + np.sin(self.theta1) ** 2)

    def unit_directions(self):
        return (
            self.m0_corr / np.linalg.norm(self.m0_corr),
            self.m1_corr / np.linalg.norm(self.m1_corr),
        )


@dataclass(frozen=True)
class TriangulationOutput:
    """A triangulated point with signed depths along the (corrected) unit rays.

    For ``LOW_PARALLAX`` and ``PARALLEL_RAYS`` the ``point`` field holds a unit
    direction toward the point at infinity, not a position.
    """

    point: np.ndarray
    lambda0: float
    lambda1: float
    correction: CorrectionResult
    method: Method
    status: Status
