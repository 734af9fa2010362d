"""Brute-force verification of the closed-form corrections.

Any feasible correction puts both rays on one epipolar plane, and for a
fixed plane the closest direction to a ray is its orthogonal projection, at
angle ``asin(|m_hat . n_hat|)``.  Sweeping the plane normal ``n(alpha)``
around the baseline therefore enumerates every candidate optimum with a
single scalar parameter.  The sweep shares no code with the closed-form
solvers beyond basic vector helpers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ChainNotIntersecting, DegenerateBaseline, EpipoleDegenerate
from .geom_core import ZERO_TOL, Line3, _dot, _line_angle, _norm, _project, _unit, as_vec3, unit
from .types import Method, RelativeGeometry

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
DEFAULT_GRID = 4096
DEFAULT_REFINE = 60
# discrete local minima of the grid refined per instance
N_CANDIDATES = 6


class Cost(str, enum.Enum):
    SUM_ANGLES = "sum_angles"
    SUM_SIN_SQ = "sum_sin_sq"
    MAX_ANGLE = "max_angle"


COST_OF_METHOD = {
    Method.L1: Cost.SUM_ANGLES,
    Method.L2: Cost.SUM_SIN_SQ,
    Method.LINF: Cost.MAX_ANGLE,
}


@dataclass(frozen=True)
class SweepResult:
    best_alpha: float
    best_cost: float
    best_normal: np.ndarray
    m0_corr: np.ndarray
    m1_corr: np.ndarray
    grid_n: int


def _basis(t):
    t_hat = _unit(np.atleast_2d(t))
    axis = np.zeros_like(t_hat)
    axis[np.arange(len(t_hat)), np.argmin(np.abs(t_hat), axis=-1)] = 1.0
    e1 = _unit(_project(axis, t_hat))
    return e1, np.cross(t_hat, e1)


def _evaluate(cost: Cost, a0, b0, a1, b1, alpha):
    """Cost at plane angle ``alpha`` given each ray's coordinates in the plane basis."""
    c, s = np.cos(alpha), np.sin(alpha)
    x0 = np.abs(a0 * c + b0 * s)
    x1 = np.abs(a1 * c + b1 * s)
    if cost is Cost.SUM_SIN_SQ:
        return x0 * x0 + x1 * x1
    if cost is Cost.MAX_ANGLE:
        return np.arcsin(np.minimum(np.maximum(x0, x1), 1.0))
    return np.arcsin(np.minimum(x0, 1.0)) + np.arcsin(np.minimum(x1, 1.0))


def _golden(cost, coeffs, lo, hi, iters):
    f = lambda x: _evaluate(cost, *coeffs, x)  # noqa: E731
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        left = f1 < f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        x_new = np.where(left, hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo))
        f_new = f(x_new)
        x1, x2 = np.where(left, x_new, x2), np.where(left, x1, x_new)
        f1, f2 = np.where(left, f_new, f2), np.where(left, f1, f_new)
    mid = 0.5 * (lo + hi)
    xs = np.stack([x1, x2, mid])
    fs = np.stack([f1, f2, f(mid)])
    k = np.argmin(fs, axis=0)
    return np.take_along_axis(xs, k[None], 0)[0], np.take_along_axis(fs, k[None], 0)[0]


def sweep_batch(m0, m1, t, cost, grid_n: int = DEFAULT_GRID, refine_iters: int = DEFAULT_REFINE, chunk: int = 256):
    """Minimize ``cost`` over all epipolar planes for ``N`` correspondences.

    Returns ``(best_alpha, best_cost, best_normal)`` arrays.  Every discrete
    local minimum of the uniform grid (up to ``N_CANDIDATES`` of the lowest)
    is refined by golden-section search over its two neighbouring cells, so
    near-ties between separate basins cannot hide the global minimum.
    """
    cost = Cost(cost)
    if grid_n < 16:
        raise ValueError("grid_n must be at least 16")
    m0, m1, t = np.broadcast_arrays(*(np.atleast_2d(np.asarray(v, dtype=float)) for v in (m0, m1, t)))
    if np.any(_norm(t) < ZERO_TOL):
        raise DegenerateBaseline("baseline has zero length")
    e1, e2 = _basis(t)
    mh0, mh1 = _unit(m0), _unit(m1)
    coeffs_all = (_dot(mh0, e1), _dot(mh0, e2), _dot(mh1, e1), _dot(mh1, e2))

    h = np.pi / grid_n
    alphas = np.arange(grid_n) * h
    n = len(m0)
    best_alpha = np.empty(n)
    best_cost = np.empty(n)
    n_cand = min(N_CANDIDATES, grid_n)
    for start in range(0, n, chunk):
        sl = slice(start, start + chunk)
        co = tuple(c[sl, None] for c in coeffs_all)
        grid = _evaluate(cost, *co, alphas[None, :])
        # the cost is pi-periodic in alpha, so neighbours wrap around
        is_min = (grid <= np.roll(grid, 1, axis=1)) & (grid <= np.roll(grid, -1, axis=1))
        masked = np.where(is_min, grid, np.inf)
        cand = np.argpartition(masked, n_cand - 1, axis=1)[:, :n_cand]
        centre = alphas[cand]
        a_ref, f_ref = _golden(cost, co, centre - h, centre + h, refine_iters)
        k = np.argmin(f_ref, axis=1)
        rows = np.arange(len(k))
        a_best, f_best = a_ref[rows, k], f_ref[rows, k]
        g_idx = np.argmin(grid, axis=1)
        g_best = grid[rows, g_idx]
        use_grid = g_best < f_best
        best_alpha[sl] = np.mod(np.where(use_grid, alphas[g_idx], a_best), np.pi)
        best_cost[sl] = np.where(use_grid, g_best, f_best)
    normal = np.cos(best_alpha)[:, None] * e1 + np.sin(best_alpha)[:, None] * e2
    return best_alpha, best_cost, normal


def sweep_epipolar_planes(g: RelativeGeometry, cost, grid_n: int = DEFAULT_GRID, refine_iters: int = DEFAULT_REFINE) -> SweepResult:
    alpha, value, normal = sweep_batch(g.m0, g.m1, g.t, cost, grid_n, refine_iters)
    n_hat = normal[0]
    return SweepResult(
        best_alpha=float(alpha[0]),
        best_cost=float(value[0]),
        best_normal=n_hat,
        m0_corr=g.m0 - (g.m0 @ n_hat) * n_hat,
        m1_corr=g.m1 - (g.m1 @ n_hat) * n_hat,
        grid_n=grid_n,
    )


def _target_normal(L0: Line3, L1: Line3) -> np.ndarray:
    t = L0.origin - L1.origin
    n1 = np.cross(L1.direction, t)
    if np.linalg.norm(n1) < 1e-12 * np.linalg.norm(L1.direction) * max(np.linalg.norm(t), ZERO_TOL):
        raise EpipoleDegenerate("pivot point lies on the target line")
    return unit(n1)


def multi_pivot_cost(L0: Line3, L1: Line3, intermediates, tol: float = 1e-9) -> float:
    """Total rotation of a chain of pivots about ``L0.origin`` ending on a line that meets ``L1``.

    ``intermediates`` are the successive directions after each pivot; the last
    one must lie in the plane spanned by ``L0.origin`` and ``L1``.
    """
    chain = [L0.direction] + [as_vec3(v, "intermediate") for v in intermediates]
    n1 = _target_normal(L0, L1)
    if abs(n1 @ unit(chain[-1])) > tol:
        raise ChainNotIntersecting("final pivoted line does not meet the target line")
    steps = np.array(chain)
    if len(steps) == 1:
        return 0.0
    return float(np.sum(_line_angle(steps[:-1], steps[1:])))


def sample_intersecting_directions(L0: Line3, L1: Line3, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` random directions whose line through ``L0.origin`` meets ``L1`` (or is parallel to it)."""
    n1 = _target_normal(L0, L1)
    e1, e2 = _basis(n1)
    phi = rng.uniform(0.0, np.pi, size=n)
    return np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2


def random_chain(L0: Line3, L1: Line3, length: int, rng: np.random.Generator) -> list:
    """A random pivot chain of ``length`` steps whose last direction meets ``L1``."""
    free = [unit(v) for v in rng.normal(size=(length - 1, 3))]
    return free + [sample_intersecting_directions(L0, L1, 1, rng)[0]]
