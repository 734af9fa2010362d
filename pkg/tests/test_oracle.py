import math

import numpy as np
import pytest

from angtri import oracle
from angtri.errors import ChainNotIntersecting, DegenerateBaseline, EpipoleDegenerate
from angtri.geom_core import Line3, min_pivot_angle, unit
from angtri.oracle import Cost
from angtri.triangulators import correct, method_cost
from angtri.types import Method, RelativeGeometry

from helpers import random_geometry
from oracles import angle_sweep

SYMMETRIC = RelativeGeometry([0, 0, 0], [1, 0, 0], [0, 0.1, 1], [0, -0.1, 1])
PIVOT_L0 = Line3([0, 0, 0], np.array([1, 0, 1]) / math.sqrt(2))
PIVOT_L1 = Line3([0, 1, 0], np.array([0, 1, 1]) / math.sqrt(2))


@pytest.mark.parametrize("cost", list(Cost))
def test_noiseless_zero_cost(cost):
    g = RelativeGeometry([0, 0, 0], [1, 0, 0], [0.5, 0, 1], [-0.5, 0, 1])
    res = oracle.sweep_epipolar_planes(g, cost)
    assert res.best_cost == pytest.approx(0.0, abs=1e-12)
    assert abs(res.best_normal @ [0, 1, 0]) == pytest.approx(1.0, abs=1e-9)


def test_symmetric_max_angle():
    res = oracle.sweep_epipolar_planes(SYMMETRIC, Cost.MAX_ANGLE)
    assert res.best_cost == pytest.approx(math.atan(0.1), abs=1e-12)
    assert abs(res.best_normal @ [0, 1, 0]) == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(unit(res.m0_corr), [0, 0, 1], atol=1e-9)
    assert res.grid_n == oracle.DEFAULT_GRID


def test_sweep_normal_is_epipolar(rng):
    for _ in range(50):
        g = random_geometry(rng)
        res = oracle.sweep_epipolar_planes(g, Cost.SUM_ANGLES, grid_n=256)
        assert abs(res.best_normal @ unit(g.t)) <= 1e-12
        assert np.linalg.norm(res.best_normal) == pytest.approx(1.0, abs=1e-14)


def test_best_cost_not_above_any_grid_sample(rng):
    for cost, name in [(Cost.SUM_ANGLES, "sum"), (Cost.SUM_SIN_SQ, "sin"), (Cost.MAX_ANGLE, "max")]:
        for _ in range(10):
            g = random_geometry(rng)
            res = oracle.sweep_epipolar_planes(g, cost, grid_n=512)
            assert res.best_cost <= angle_sweep(g.c0, g.c1, g.m0, g.m1, name, n=512) + 1e-15


def test_grid_too_small():
    with pytest.raises(ValueError):
        oracle.sweep_epipolar_planes(SYMMETRIC, Cost.SUM_ANGLES, grid_n=8)


def test_coincident_centres_rejected():
    with pytest.raises(DegenerateBaseline):
        RelativeGeometry([1, 1, 1], [1, 1, 1], [0, 0, 1], [0, 1, 0])


@pytest.mark.parametrize("method", [Method.L1, Method.L2, Method.LINF])
def test_matches_closed_form(method, rng):
    for _ in range(300):
        g = random_geometry(rng, noise=0.05 if rng.random() < 0.5 else None)
        c = correct(g, method)
        res = oracle.sweep_epipolar_planes(g, oracle.COST_OF_METHOD[method])
        assert res.best_cost >= method_cost(method, c.theta0, c.theta1) - 1e-8
        assert res.best_cost <= method_cost(method, c.theta0, c.theta1) + 1e-8


@pytest.mark.parametrize("cost", list(Cost))
def test_grid_doubling_self_consistency(cost, rng):
    gs = [random_geometry(rng) for _ in range(200)]
    m0 = np.array([g.m0 for g in gs])
    m1 = np.array([g.m1 for g in gs])
    t = np.array([g.t for g in gs])
    _, coarse, _ = oracle.sweep_batch(m0, m1, t, cost, grid_n=4096)
    _, fine, _ = oracle.sweep_batch(m0, m1, t, cost, grid_n=8192)
    assert np.max(np.abs(coarse - fine)) < 1e-8


def test_high_resolution_cross_check(rng):
    g = random_geometry(rng)
    a = oracle.sweep_epipolar_planes(g, Cost.SUM_ANGLES, grid_n=10_000).best_cost
    b = oracle.sweep_epipolar_planes(g, Cost.SUM_ANGLES, grid_n=100_000).best_cost
    assert a == pytest.approx(b, abs=1e-10)


def test_batch_matches_single(rng):
    gs = [random_geometry(rng) for _ in range(20)]
    m0 = np.array([g.m0 for g in gs])
    m1 = np.array([g.m1 for g in gs])
    t = np.array([g.t for g in gs])
    alpha, cost, normal = oracle.sweep_batch(m0, m1, t, Cost.SUM_SIN_SQ, chunk=7)
    for i, g in enumerate(gs):
        res = oracle.sweep_epipolar_planes(g, Cost.SUM_SIN_SQ)
        assert cost[i] == res.best_cost
        np.testing.assert_array_equal(normal[i], res.best_normal)


# -- pivot chains ------------------------------------------------------------

def test_single_step_chain_equals_min_pivot():
    theta, m0p = min_pivot_angle(PIVOT_L0, PIVOT_L1)
    assert oracle.multi_pivot_cost(PIVOT_L0, PIVOT_L1, [m0p]) == pytest.approx(theta, abs=1e-15)
    assert oracle.multi_pivot_cost(Line3(PIVOT_L0.origin, m0p), PIVOT_L1, []) == 0.0


def test_two_thirty_degree_legs_beat_forty_five():
    # L0 is 45 deg from the plane x = 0 that holds c0 and L1
    theta, _ = min_pivot_angle(PIVOT_L0, PIVOT_L1)
    assert math.degrees(theta) == pytest.approx(45.0, abs=1e-12)
    mid = np.array([math.sin(math.radians(15)), 0.0, math.cos(math.radians(15))])
    a = math.acos(math.cos(math.radians(30)) / math.cos(math.radians(15)))
    final = np.array([0.0, math.sin(a), math.cos(a)])
    chain = [mid, final]
    total = oracle.multi_pivot_cost(PIVOT_L0, PIVOT_L1, chain)
    assert math.degrees(total) == pytest.approx(60.0, abs=1e-9)
    assert total >= theta


def test_chain_must_end_on_target():
    with pytest.raises(ChainNotIntersecting):
        oracle.multi_pivot_cost(PIVOT_L0, PIVOT_L1, [[1.0, 0.0, 1.0]])


def test_chain_with_pivot_on_target_line():
    with pytest.raises(EpipoleDegenerate):
        oracle.multi_pivot_cost(Line3([0, 0, 0], [1, 0, 0]), Line3([0, 0, 1], [0, 0, 1]), [])


def test_random_chains_satisfy_inequality(rng):
    for _ in range(2000):
        L0 = Line3(rng.normal(size=3), rng.normal(size=3))
        L1 = Line3(rng.normal(size=3), rng.normal(size=3))
        theta, _ = min_pivot_angle(L0, L1)
        chain = oracle.random_chain(L0, L1, int(rng.integers(1, 6)), rng)
        assert oracle.multi_pivot_cost(L0, L1, chain) >= theta - 1e-12


def test_sampled_directions_meet_target(rng):
    L0 = Line3(rng.normal(size=3), rng.normal(size=3))
    L1 = Line3(rng.normal(size=3), rng.normal(size=3))
    dirs = oracle.sample_intersecting_directions(L0, L1, 100, rng)
    for d in dirs:
        assert oracle.multi_pivot_cost(L0, L1, [d]) >= 0.0
