"""Accuracy statistics and per-point timing over synthetic scenes."""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import oracle
from .cheirality import Observation, Thresholds, classify_batch
from .synth import SceneSpec, generate_scene, to_arrays
from .triangulators import triangulate_batch
from .types import Method

ORACLE_ROW = "oracle_sweep"
_OBS = tuple(Observation)


@dataclass
class RunStats:
    method: str
    sigma_deg: float
    n: int
    mean_sum_angles: float
    median_sum_angles: float
    mean_max_angle: float
    mean_sum_sin_sq: float
    median_3d_error: float
    inliers: int
    cheirality_fail: int
    low_parallax: int
    outliers: int
    ns_per_point: float

    TIMING_FIELDS = ("ns_per_point",)

    @classmethod
    def header(cls) -> str:
        return "\t".join(f.name for f in fields(cls))

    def row(self) -> str:
        return "\t".join(repr(v) if isinstance(v, float) else str(v) for v in asdict(self).values())


def time_per_point(fn, n_points: int, repeats: int) -> float:
    """Median wall time of ``fn()`` in nanoseconds per point; a warm-up call is discarded."""
    fn()
    samples = []
    for _ in range(max(1, repeats)):
        start = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - start)
    return statistics.median(samples) / max(1, n_points)


def method_stats(method, c0, c1, m0, m1, gt, sigma_deg, thresholds, repeats) -> RunStats:
    res = triangulate_batch(method, c0, c1, m0, m1)
    th0, th1 = res.correction.theta0, res.correction.theta1
    klass = classify_batch(m0, m1, th0, th1, res.lambda0, res.lambda1, res.status, thresholds)
    counts = np.bincount(klass, minlength=len(_OBS))
    err = np.linalg.norm(res.point - gt, axis=1)
    ns = time_per_point(lambda: triangulate_batch(method, c0, c1, m0, m1), len(m0), repeats)
    with np.errstate(invalid="ignore"):
        return RunStats(
            method=Method(method).value,
            sigma_deg=float(sigma_deg),
            n=len(m0),
            mean_sum_angles=float(np.mean(th0 + th1)),
            median_sum_angles=float(np.median(th0 + th1)),
            mean_max_angle=float(np.mean(np.maximum(th0, th1))),
            mean_sum_sin_sq=float(np.mean(np.sin(th0) ** 2 + np.sin(th1) ** 2)),
            median_3d_error=float(np.median(err)),
            inliers=int(counts[_OBS.index(Observation.INLIER)]),
            cheirality_fail=int(counts[_OBS.index(Observation.CHEIRALITY_FAIL)]),
            low_parallax=int(counts[_OBS.index(Observation.LOW_PARALLAX)]),
            outliers=int(counts[_OBS.index(Observation.OUTLIER)]),
            ns_per_point=ns,
        )


def oracle_stats(c0, c1, m0, m1, sigma_deg, grid_n, repeats) -> RunStats:
    t = c0 - c1
    ns = time_per_point(lambda: oracle.sweep_batch(m0, m1, t, oracle.Cost.SUM_ANGLES, grid_n), len(m0), repeats)
    nan = math.nan
    return RunStats(ORACLE_ROW, float(sigma_deg), len(m0), nan, nan, nan, nan, nan, 0, 0, 0, 0, ns)


def run_bench(
    n: int = 10_000,
    sigmas_deg=(0.0, 0.1, 0.5),
    repeats: int = 5,
    seed: int = 0,
    thresholds: Thresholds | None = None,
    oracle_points: int = 200,
    grid_n: int = oracle.DEFAULT_GRID,
    methods=(Method.L1, Method.L2, Method.LINF, Method.MIDPOINT),
):
    """One :class:`RunStats` per (method, sigma), plus an oracle timing row per sigma."""
    thresholds = thresholds or Thresholds()
    rows = []
    for sigma in sigmas_deg:
        spec = SceneSpec(n_points=n, noise_sigma=math.radians(sigma), rng_seed=seed)
        scene = generate_scene(spec)
        c0, c1, m0, m1 = to_arrays(scene)
        gt = np.array([c.ground_truth_point for c in scene]).reshape(-1, 3)
        for method in methods:
            rows.append(method_stats(method, c0, c1, m0, m1, gt, sigma, thresholds, repeats))
        if oracle_points > 0:
            k = min(oracle_points, n)
            rows.append(oracle_stats(c0[:k], c1[:k], m0[:k], m1[:k], sigma, grid_n, repeats))
    return rows
