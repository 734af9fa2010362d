"""Closed-form two-view corrections under angular error, plus point recovery.

Every correction moves the measured rays onto a common epipolar plane (a
plane containing the baseline), after which they intersect.  The three
methods differ in which plane they pick:

* ``l1`` keeps the ray that is better aligned with the baseline and projects
  the other one onto the plane through it, minimizing ``theta0 + theta1``;
* ``l2`` takes the plane normal from the middle right singular vector of the
  baseline-projected ray matrix, minimizing ``sin^2 theta0 + sin^2 theta1``;
* ``linf`` uses the plane that equalizes both errors, minimizing
  ``max(theta0, theta1)``.

The ``*_batch`` functions operate on ``(N, 3)`` arrays and are the single
implementation; the per-correspondence functions wrap them.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import cheirality
from .errors import (
    BothNormalsDegenerate,
    DegenerateProjection,
    EpipoleDegenerate,
    SingularSpectrum,
    ZeroVector,
)
from .geom_core import (
    DEGENERACY_TOL,
    PARALLEL_TOL,
    ZERO_TOL,
    _closest_params,
    _cross,
    _dot,
    _line_angle,
    _norm,
    _project,
    _unit,
    as_vec3,
)
from .types import (
    BRANCHES,
    STATUSES,
    Branch,
    CorrectionResult,
    Method,
    RelativeGeometry,
    Status,
    TriangulationOutput,
)

SPECTRUM_TIE_TOL = 1e-12

# per-row failure codes of the batch corrections
OK, EPIPOLE, DEGENERATE_PROJ, BOTH_NORMALS = 0, 1, 2, 3
_ERRORS = {
    EPIPOLE: (EpipoleDegenerate, "a ray passes through the other camera center"),
    DEGENERATE_PROJ: (DegenerateProjection, "a ray is normal to the chosen epipolar plane"),
    BOTH_NORMALS: (BothNormalsDegenerate, "both rays are parallel to the baseline"),
}

_BR = {b: i for i, b in enumerate(BRANCHES)}


class BatchCorrection(NamedTuple):
    m0_corr: np.ndarray
    m1_corr: np.ndarray
    theta0: np.ndarray
    theta1: np.ndarray
    normal: np.ndarray
    branch: np.ndarray  # indices into types.BRANCHES
    error: np.ndarray  # OK / EPIPOLE / DEGENERATE_PROJ / BOTH_NORMALS


class BatchTriangulation(NamedTuple):
    point: np.ndarray
    lambda0: np.ndarray
    lambda1: np.ndarray
    correction: BatchCorrection
    status: np.ndarray  # indices into types.STATUSES


def _rows(a) -> np.ndarray:
    return np.atleast_2d(np.asarray(a, dtype=float))


def _safe_unit(v):
    n = _norm(v)
    with np.errstate(invalid="ignore", divide="ignore"):
        return v / np.where(n > 0, n, 1.0)[..., None]


def plane_basis(t):
    """Deterministic orthonormal pair spanning the plane orthogonal to ``t``.

    The first vector is the normalized rejection of the canonical axis along
    which ``t`` is smallest.
    """
    t_hat = _unit(_rows(t))
    axis = np.zeros_like(t_hat)
    axis[np.arange(len(t_hat)), np.argmin(np.abs(t_hat), axis=-1)] = 1.0
    e1 = _unit(_project(axis, t_hat))
    e2 = _cross(t_hat, e1)
    return e1, e2


def _finish(m0, m1, m0c, m1c, normal, branch, error):
    theta0 = _line_angle(m0, m0c)
    theta1 = _line_angle(m1, m1c)
    bad = error != OK
    if bad.any():
        theta0 = np.where(bad, np.nan, theta0)
        theta1 = np.where(bad, np.nan, theta1)
    return BatchCorrection(m0c, m1c, theta0, theta1, normal, branch, error)


def _project_checked(m, n_hat, error):
    out = _project(m, n_hat)
    vanished = _norm(out) < DEGENERACY_TOL * _norm(m)
    error = np.where((error == OK) & vanished, DEGENERATE_PROJ, error)
    return out, error


def correct_l1_batch(m0, m1, t) -> BatchCorrection:
    m0, m1, t = _rows(m0), _rows(m1), _rows(t)
    m0, m1, t = np.broadcast_arrays(m0, m1, t)
    n0 = _cross(m0, t)
    n1 = _cross(m1, t)
    # ||m_hat x t|| for each ray; the smaller one is corrected
    k0 = _norm(n0) / _norm(m0)
    k1 = _norm(n1) / _norm(m1)
    tn = _norm(t)
    error = np.where((k0 < PARALLEL_TOL * tn) | (k1 < PARALLEL_TOL * tn), EPIPOLE, OK)

    fix0 = k0 <= k1
    normal = _safe_unit(np.where(fix0[:, None], n1, n0))
    target = np.where(fix0[:, None], m0, m1)
    moved, error = _project_checked(target, normal, error)

    m0c = np.where(fix0[:, None], moved, m0)
    m1c = np.where(fix0[:, None], m1, moved)
    branch = np.where(fix0, _BR[Branch.CORRECTED_RAY0], _BR[Branch.CORRECTED_RAY1])
    return _finish(m0, m1, m0c, m1c, normal, branch, error)


def _top_singular(a, b):
    """Analytic top right singular vector of the 2x3 matrices with rows ``a``, ``b``.

    Uses the eigen-decomposition of the 2x2 Gram matrix ``M M^T`` and maps the
    top left singular vector ``u1`` to ``v1 = M^T u1 / s1``.  Returns
    ``(v1, s1, s2, tie)`` where ``tie`` flags ``s1 - s2 < SPECTRUM_TIE_TOL``.
    """
    p = _dot(a, a)
    q = _dot(a, b)
    r = _dot(b, b)
    half_gap = np.hypot(0.5 * (p - r), q)
    lam1 = 0.5 * (p + r) + half_gap
    lam2 = np.maximum(0.5 * (p + r) - half_gap, 0.0)
    s1 = np.sqrt(lam1)
    s2 = np.sqrt(lam2)
    with np.errstate(invalid="ignore", divide="ignore"):
        gap = np.where(s1 + s2 > 0, 2.0 * half_gap / (s1 + s2), 0.0)
    tie = gap < SPECTRUM_TIE_TOL

    # two algebraically equivalent eigenvector forms; keep the better-conditioned one
    ua = np.stack([q, lam1 - p], axis=-1)
    ub = np.stack([lam1 - r, q], axis=-1)
    u = np.where((_norm(ua) >= _norm(ub))[..., None], ua, ub)
    u = _safe_unit(u)
    v1 = _safe_unit(u[..., :1] * a + u[..., 1:] * b)
    return v1, s1, s2, tie


def _sign_normalize(v):
    """Flip ``v`` so its first component with magnitude above 1e-12 is positive."""
    significant = np.abs(v) > 1e-12
    first = np.argmax(significant, axis=-1)
    lead = np.take_along_axis(v, first[..., None], axis=-1)
    return np.where(lead < 0, -v, v)


def middle_right_singular_vector(M, null_vector=None) -> np.ndarray:
    """Unit right singular vector of a 2x3 matrix for its second-largest singular value.

    ``null_vector``, when given, must span the kernel of ``M`` (as ``t_hat``
    does for the relaxed-L2 matrix); otherwise the kernel is taken from the
    cross product of the rows.  For rank-deficient ``M`` the second singular
    value is zero and any unit vector orthogonal to the first right singular
    vector (and to ``null_vector``) qualifies; a deterministic one is returned.
    Sign convention: first significant component positive.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (2, 3) or not np.all(np.isfinite(M)):
        raise ValueError("M must be a finite 2x3 matrix")
    a, b = M[0], M[1]
    v1, s1, s2, tie = _top_singular(a, b)
    if tie:
        raise SingularSpectrum(f"top singular values coincide ({float(s1):.17g}, {float(s2):.17g})")
    if null_vector is not None:
        v3 = as_vec3(null_vector, "null_vector")
    else:
        v3 = np.cross(a, b)
        if np.linalg.norm(v3) <= PARALLEL_TOL * np.linalg.norm(a) * np.linalg.norm(b):
            v3 = _project(np.eye(3)[np.argmin(np.abs(v1))], v1)
    v2 = np.cross(v3, v1)
    return _sign_normalize(v2 / np.linalg.norm(v2))


def correct_l2_batch(m0, m1, t) -> BatchCorrection:
    m0, m1, t = _rows(m0), _rows(m1), _rows(t)
    m0, m1, t = np.broadcast_arrays(m0, m1, t)
    t_hat = _unit(t)
    mh0, mh1 = _unit(m0), _unit(m1)
    # rows of [m0_hat m1_hat]^T (I - t_hat t_hat^T)
    a = _project(mh0, t_hat)
    b = _project(mh1, t_hat)
    v1, _, _, tie = _top_singular(a, b)
    # t_hat spans the kernel, so the middle right singular vector is t_hat x v1
    normal = _sign_normalize(_safe_unit(_cross(t_hat, v1)))
    if tie.any():
        e1, e2 = plane_basis(t)
        cost1 = _dot(mh0, e1) ** 2 + _dot(mh1, e1) ** 2
        cost2 = _dot(mh0, e2) ** 2 + _dot(mh1, e2) ** 2
        pick = np.where((cost1 <= cost2)[:, None], e1, e2)
        normal = np.where(tie[:, None], pick, normal)

    error = np.full(len(m0), OK)
    m0c, error = _project_checked(m0, normal, error)
    m1c, error = _project_checked(m1, normal, error)
    branch = np.full(len(m0), _BR[Branch.SVD])
    return _finish(m0, m1, m0c, m1c, normal, branch, error)


def correct_linf_batch(m0, m1, t) -> BatchCorrection:
    m0, m1, t = _rows(m0), _rows(m1), _rows(t)
    m0, m1, t = np.broadcast_arrays(m0, m1, t)
    mh0, mh1 = _unit(m0), _unit(m1)
    na = _cross(mh0 + mh1, t)
    nb = _cross(mh0 - mh1, t)
    na_len, nb_len = _norm(na), _norm(nb)
    use_a = na_len >= nb_len
    error = np.where(np.maximum(na_len, nb_len) < PARALLEL_TOL * _norm(t), BOTH_NORMALS, OK)
    normal = _safe_unit(np.where(use_a[:, None], na, nb))
    m0c, error = _project_checked(m0, normal, error)
    m1c, error = _project_checked(m1, normal, error)
    branch = np.where(use_a, _BR[Branch.PLANE_A], _BR[Branch.PLANE_B])
    return _finish(m0, m1, m0c, m1c, normal, branch, error)


_BATCH = {
    Method.L1: correct_l1_batch,
    Method.L2: correct_l2_batch,
    Method.LINF: correct_linf_batch,
}


def correct_batch(method, m0, m1, t) -> BatchCorrection:
    return _BATCH[Method(method)](m0, m1, t)


def _single(batch_fn, g: RelativeGeometry) -> CorrectionResult:
    res = batch_fn(g.m0, g.m1, g.t)
    code = int(res.error[0])
    if code != OK:
        exc, msg = _ERRORS[code]
        raise exc(msg)
    return CorrectionResult(
        m0_corr=res.m0_corr[0],
        m1_corr=res.m1_corr[0],
        theta0=float(res.theta0[0]),
        theta1=float(res.theta1[0]),
        branch=BRANCHES[int(res.branch[0])],
        plane_normal=res.normal[0],
    )


def correct_l1(g: RelativeGeometry) -> CorrectionResult:
    """Minimize ``theta0 + theta1``: exactly one of the two rays is corrected."""
    return _single(correct_l1_batch, g)


def correct_l2(g: RelativeGeometry) -> CorrectionResult:
    """Minimize ``sin^2 theta0 + sin^2 theta1`` by projecting both rays onto one epipolar plane."""
    return _single(correct_l2_batch, g)


def correct_linf(g: RelativeGeometry) -> CorrectionResult:
    """Minimize ``max(theta0, theta1)``; the optimum has ``theta0 == theta1``."""
    return _single(correct_linf_batch, g)


def correct(g: RelativeGeometry, method) -> CorrectionResult:
    return _single(_BATCH[Method(method)], g)


def method_cost(method, theta0, theta1):
    """The objective each method minimizes, evaluated on a pair of angular errors."""
    method = Method(method)
    if method is Method.L1:
        return theta0 + theta1
    if method is Method.L2:
        return np.sin(theta0) ** 2 + np.sin(theta1) ** 2
    if method is Method.LINF:
        return np.maximum(theta0, theta1)
    raise ValueError(f"{method} has no angular objective")


def epipolar_residual(m0, m1, t) -> float:
    """``|m1_hat . (t_hat x m0_hat)|``; zero iff both rays and the baseline are coplanar."""
    vs = [as_vec3(v) for v in (m0, m1, t)]
    if min(np.linalg.norm(v) for v in vs) < ZERO_TOL:
        raise ZeroVector("epipolar residual undefined for a zero vector")
    m0, m1, t = (v / np.linalg.norm(v) for v in vs)
    return float(abs(m1 @ _cross(t, m0)))


def _intersect(c0, c1, d0, d1):
    """Signed depths and midpoint of the closest pair on c_i + s d_i for unit d_i."""
    s0, s1 = _closest_params(c0, d0, c1, d1)
    point = 0.5 * ((c0 + s0[:, None] * d0) + (c1 + s1[:, None] * d1))
    return point, s0, s1


def _rays_to_point(c0, c1, m0, m1, point, lambda0, lambda1):
    d0 = point - c0
    d1 = point - c1
    # orient the reprojected rays like the measured ones when the point is behind
    d0 = np.where((lambda0 < 0)[:, None], -d0, d0)
    d1 = np.where((lambda1 < 0)[:, None], -d1, d1)
    return d0, d1


def triangulate_batch(method, c0, c1, m0, m1) -> BatchTriangulation:
    """Correct (unless ``midpoint``) and intersect ``N`` correspondences at once."""
    method = Method(method)
    m0, m1 = _rows(m0), _rows(m1)
    c0, c1 = (np.broadcast_to(_rows(c), m0.shape) for c in (c0, c1))
    t = c0 - c1

    if method is Method.MIDPOINT:
        d0, d1 = _unit(m0), _unit(m1)
    else:
        corr = _BATCH[method](m0, m1, t)
        d0, d1 = _safe_unit(corr.m0_corr), _safe_unit(corr.m1_corr)

    sin_parallax = _norm(_cross(d0, d1))
    parallel = sin_parallax < PARALLEL_TOL
    low = sin_parallax < DEGENERACY_TOL
    with np.errstate(invalid="ignore", divide="ignore"):
        point, lambda0, lambda1 = _intersect(c0, c1, d0, d1)

    if method is Method.MIDPOINT:
        r0, r1 = _rays_to_point(c0, c1, m0, m1, point, lambda0, lambda1)
        corr = _finish(
            m0, m1, r0, r1,
            _safe_unit(_cross(r0, r1)),
            np.full(len(m0), _BR[Branch.NONE]),
            np.where(parallel, DEGENERATE_PROJ, OK),
        )

    # points at infinity are reported as a direction
    towards = d0 + np.where(_dot(d0, d1) < 0, -1.0, 1.0)[:, None] * d1
    point = np.where(low[:, None], _safe_unit(towards), point)
    lambda0 = np.where(parallel, np.inf, lambda0)
    lambda1 = np.where(parallel, np.inf, lambda1)

    status = cheirality.status_codes(lambda0, lambda1, parallel, low)
    failed = corr.error != OK
    if method is not Method.MIDPOINT and failed.any():
        status = np.where(failed, STATUSES.index(Status.DEGENERATE), status)
        point = np.where(failed[:, None], np.nan, point)
        lambda0 = np.where(failed, np.nan, lambda0)
        lambda1 = np.where(failed, np.nan, lambda1)
    return BatchTriangulation(point, lambda0, lambda1, corr, status)


def triangulate(g: RelativeGeometry, method=Method.L1) -> TriangulationOutput:
    """Triangulate one correspondence.

    Degenerate corrections raise; parallel or nearly parallel corrected rays
    are reported through ``status`` instead.
    """
    method = Method(method)
    if method is not Method.MIDPOINT:
        # raises the specific degeneracy for this correspondence, if any
        correction = correct(g, method)
    res = triangulate_batch(method, g.c0, g.c1, g.m0, g.m1)
    if method is Method.MIDPOINT:
        c = res.correction
        correction = CorrectionResult(
            c.m0_corr[0], c.m1_corr[0], float(c.theta0[0]), float(c.theta1[0]),
            Branch.NONE, c.normal[0],
        )
    return TriangulationOutput(
        point=res.point[0],
        lambda0=float(res.lambda0[0]),
        lambda1=float(res.lambda1[0]),
        correction=correction,
        method=method,
        status=STATUSES[int(res.status[0])],
    )
