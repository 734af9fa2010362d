"""Elementary 3D geometry on rays, planes and skew lines.

Vectors are plain ``numpy`` arrays of shape ``(3,)``.  The private helpers
(prefixed with an underscore) broadcast over leading dimensions so the batch
code paths can reuse them on ``(N, 3)`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateProjection, EpipoleDegenerate, ParallelLines, ZeroVector

# ||m0_hat x m1_hat|| below this -> parallel lines
PARALLEL_TOL = 1e-12
# relative size of a projected direction below which it is considered vanished
DEGENERACY_TOL = 1e-9
ZERO_TOL = 1e-15
UNIT_TOL = 1e-12


def as_vec3(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have shape (3,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite components: {arr}")
    return arr


def unit(v) -> np.ndarray:
    """Return ``v / ||v||``; raises :class:`ZeroVector` for a (near) zero input."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < ZERO_TOL:
        raise ZeroVector(f"cannot normalize vector of norm {n:g}")
    return v / n


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _cross(a, b):
    """Cross product over the last axis; faster than ``np.cross`` for (N, 3) arrays."""
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=-1)


def _norm(a):
    return np.sqrt(_dot(a, a))


def _unit(a):
    return a / _norm(a)[..., None]


def _project(m, n_hat):
    return m - _dot(m, n_hat)[..., None] * n_hat


def _line_angle(a, b):
    """Angle in [0, pi/2] between the lines spanned by ``a`` and ``b``."""
    a_hat = _unit(a)
    b_hat = _unit(b)
    return np.arctan2(_norm(_cross(a_hat, b_hat)), np.abs(_dot(a_hat, b_hat)))


def _closest_params(c0, m0, c1, m1):
    """Line parameters (s0, s1) of the closest pair between c0 + s0 m0 and c1 + s1 m1."""
    t = c0 - c1
    q = _cross(m0, m1)
    qq = _dot(q, q)
    s0 = _dot(q, _cross(m1, t)) / qq
    s1 = _dot(q, _cross(m0, t)) / qq
    return s0, s1


@dataclass(frozen=True)
class Line3:
    """The line ``origin + s * direction``; the direction need not be unit."""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", as_vec3(self.origin, "origin"))
        object.__setattr__(self, "direction", as_vec3(self.direction, "direction"))
        if np.linalg.norm(self.direction) < ZERO_TOL:
            raise ZeroVector("line direction must be nonzero")

    def at(self, s: float) -> np.ndarray:
        return self.origin + s * self.direction


@dataclass(frozen=True)
class Plane3:
    """The plane ``normal . (x - point) = 0`` with a unit normal."""

    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", as_vec3(self.point, "point"))
        n = as_vec3(self.normal, "normal")
        if abs(n @ n - 1.0) > UNIT_TOL:
            raise ValueError("plane normal must be a unit vector; use Plane3.from_normal")
        object.__setattr__(self, "normal", n)

    @classmethod
    def from_normal(cls, point, normal) -> "Plane3":
        return cls(point, unit(as_vec3(normal, "normal")))


def triple_product(a, b, c) -> float:
    """Scalar triple product ``a . (b x c)``."""
    return float(np.dot(as_vec3(a), np.cross(as_vec3(b), as_vec3(c))))


def point_plane_distance(p, plane: Plane3) -> float:
    return float(abs(plane.normal @ (as_vec3(p, "p") - plane.point)))


def _check_not_parallel(L0: Line3, L1: Line3) -> None:
    cross = np.cross(unit(L0.direction), unit(L1.direction))
    if np.linalg.norm(cross) < PARALLEL_TOL:
        raise ParallelLines("line directions are parallel")


def skew_line_distance(L0: Line3, L1: Line3) -> float:
    _check_not_parallel(L0, L1)
    t = L0.origin - L1.origin
    q = np.cross(L0.direction, L1.direction)
    return float(abs(t @ unit(q)))


def closest_points(L0: Line3, L1: Line3):
    """Closest pair between two non-parallel lines.

    Returns ``(r0, r1, s0, s1)`` with ``r0 = L0.at(s0)`` and ``r1 = L1.at(s1)``.
    For intersecting lines both points are the intersection.
    """
    _check_not_parallel(L0, L1)
    s0, s1 = _closest_params(L0.origin, L0.direction, L1.origin, L1.direction)
    s0, s1 = float(s0), float(s1)
    return L0.at(s0), L1.at(s1), s0, s1


def project_direction_onto_plane(m, n_hat) -> np.ndarray:
    """Remove the component of ``m`` along the unit normal ``n_hat``."""
    m = as_vec3(m, "m")
    n_hat = as_vec3(n_hat, "n_hat")
    out = _project(m, n_hat)
    if np.linalg.norm(out) < DEGENERACY_TOL * np.linalg.norm(m):
        raise DegenerateProjection("direction is parallel to the plane normal")
    return out


def angle_between_directions(a, b) -> float:
    """Angle between the lines spanned by ``a`` and ``b``, in [0, pi/2]."""
    a = as_vec3(a, "a")
    b = as_vec3(b, "b")
    if np.linalg.norm(a) < ZERO_TOL or np.linalg.norm(b) < ZERO_TOL:
        raise ZeroVector("angle undefined for a zero vector")
    return float(_line_angle(a, b))


def min_pivot_angle(L0: Line3, L1: Line3):
    """Smallest rotation of ``L0`` about its origin that makes it meet ``L1``.

    The optimal pivoted line is the projection of ``L0`` onto the plane
    through ``L0.origin`` containing ``L1``.  Returns ``(theta0, m0_pivoted)``.

    If ``L0`` is normal to that plane every in-plane direction is equally
    good; the direction from ``L0.origin`` toward the closest point of ``L1``
    is returned with ``theta0 = pi/2``.
    """
    c0, m0 = L0.origin, L0.direction
    c1, m1 = L1.origin, L1.direction
    t = c0 - c1
    n1 = np.cross(m1, t)
    if np.linalg.norm(n1) < PARALLEL_TOL * np.linalg.norm(m1) * max(np.linalg.norm(t), ZERO_TOL):
        raise EpipoleDegenerate("the pivot point lies on the target line")
    n1_hat = unit(n1)
    m0_hat = unit(m0)
    sin_theta = min(abs(float(n1_hat @ m0_hat)), 1.0)
    try:
        m0_new = project_direction_onto_plane(m0, n1_hat)
    except DegenerateProjection:
        m1_hat = unit(m1)
        foot = c1 + ((c0 - c1) @ m1_hat) * m1_hat
        return float(np.pi / 2), foot - c0
    return float(np.arcsin(sin_theta)), m0_new
