"""Synthetic two-view scenes with ground truth and isotropic angular noise.

Camera 1 sits at the origin with identity orientation, so its frame is the
reference frame.  Camera 0 is placed ``baseline_length`` away and turned to
look at the middle of the depth range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleSpec
from .geom_core import unit

MAX_CONSECUTIVE_REJECTIONS = 100_000


@dataclass(frozen=True)
class SceneSpec:
    n_points: int = 100
    baseline_length: float = 1.0
    depth_range: tuple = (2.0, 10.0)
    fov_halfangle: float = math.radians(45.0)
    noise_sigma: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        lo, hi = self.depth_range
        if self.n_points < 0:
            raise InfeasibleSpec("n_points must be non-negative")
        if not 0 < lo <= hi:
            raise InfeasibleSpec("depth range must satisfy 0 < min <= max")
        if self.noise_sigma < 0:
            raise InfeasibleSpec("noise_sigma must be non-negative")
        if not 0 < self.fov_halfangle < math.pi:
            raise InfeasibleSpec("fov_halfangle must lie in (0, pi)")
        if self.baseline_length <= 0:
            raise InfeasibleSpec("baseline_length must be positive")


@dataclass(frozen=True)
class Pose:
    """``R`` rotates camera-0 bearings into the reference (camera-1) frame."""

    R: np.ndarray
    c0: np.ndarray
    c1: np.ndarray


@dataclass(frozen=True)
class LabeledCorrespondence:
    f0: np.ndarray
    f1: np.ndarray
    pose: Pose
    ground_truth_point: np.ndarray
    true_noise_angles: tuple


def rotate_about_axis(v, axis, angle: float) -> np.ndarray:
    """Rodrigues rotation of ``v`` about the unit ``axis``."""
    v = np.asarray(v, dtype=float)
    k = np.asarray(axis, dtype=float)
    c, s = math.cos(angle), math.sin(angle)
    return v * c + np.cross(k, v) * s + k * (k @ v) * (1.0 - c)


def perturb_bearings(F, sigma: float, rng: np.random.Generator):
    """Vectorized :func:`perturb_bearing` over the rows of ``F``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    F = np.atleast_2d(np.asarray(F, dtype=float))
    F = F / np.linalg.norm(F, axis=1, keepdims=True)
    n = len(F)
    eta = np.abs(rng.normal(0.0, sigma, size=n)) if sigma > 0 else np.zeros(n)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=n)
    helper = np.eye(3)[np.argmin(np.abs(F), axis=1)]
    u = helper - np.sum(helper * F, axis=1, keepdims=True) * F
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    v = np.cross(F, u)
    axis = np.cos(phi)[:, None] * u + np.sin(phi)[:, None] * v
    # axis is orthogonal to F, so Rodrigues reduces to a rotation in the (F, axis x F) plane
    out = np.cos(eta)[:, None] * F + np.sin(eta)[:, None] * np.cross(axis, F)
    return out / np.linalg.norm(out, axis=1, keepdims=True), eta


def perturb_bearing(f, sigma: float, rng: np.random.Generator):
    """Rotate ``f`` by ``|N(0, sigma)|`` about a uniformly random axis orthogonal to it.

    Returns the perturbed unit vector and the applied angle.
    """
    out, eta = perturb_bearings(unit(f)[None, :], sigma, rng)
    return out[0], float(eta[0])


def look_at(forward, up_hint=(0.0, 1.0, 0.0)) -> np.ndarray:
    """Rotation whose third column (the optical axis) is ``forward``."""
    z = unit(forward)
    up = np.asarray(up_hint, dtype=float)
    if np.linalg.norm(np.cross(up, z)) < 1e-6:
        up = np.array([1.0, 0.0, 0.0])
    x = unit(np.cross(up, z))
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def _make_pose(spec: SceneSpec, rng: np.random.Generator) -> Pose:
    phi = rng.uniform(0.0, 2.0 * math.pi)
    # mostly sideways baseline with a small forward/backward component
    direction = unit(np.array([math.cos(phi), math.sin(phi), rng.uniform(-0.2, 0.2)]))
    c0 = spec.baseline_length * direction
    target = np.array([0.0, 0.0, 0.5 * sum(spec.depth_range)])
    R = look_at(target - c0)
    roll = rng.uniform(-math.pi, math.pi)
    R = R @ np.array([[math.cos(roll), -math.sin(roll), 0.0], [math.sin(roll), math.cos(roll), 0.0], [0.0, 0.0, 1.0]])
    return Pose(R=R, c0=c0, c1=np.zeros(3))


def _in_view(points, center, axis, half_angle):
    d = points - center
    along = d @ axis
    with np.errstate(invalid="ignore"):
        cos_angle = along / np.linalg.norm(d, axis=1)
    return (along > 0) & (cos_angle > math.cos(half_angle))


def _sample_points(spec: SceneSpec, pose: Pose, rng: np.random.Generator) -> np.ndarray:
    """Rejection-sample ground-truth points visible in front of both cameras.

    Candidates are uniform in depth along uniformly distributed directions of
    camera 1's view cone (capped at a hemisphere).
    """
    axis0 = pose.R[:, 2]
    axis1 = np.array([0.0, 0.0, 1.0])
    cos_half = math.cos(min(spec.fov_halfangle, math.pi / 2 - 1e-6))
    lo, hi = spec.depth_range
    accepted = []
    remaining = spec.n_points
    run = 0  # consecutive rejections carried across blocks
    while remaining > 0:
        block = max(256, 2 * remaining)
        z = rng.uniform(cos_half, 1.0, size=block)
        phi = rng.uniform(0.0, 2.0 * math.pi, size=block)
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        rays = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
        depth = rng.uniform(lo, hi, size=block)
        X = pose.c1 + (depth / z)[:, None] * rays
        ok = _in_view(X, pose.c0, axis0, spec.fov_halfangle) & _in_view(X, pose.c1, axis1, spec.fov_halfangle)
        hits = np.flatnonzero(ok)
        gaps = np.diff(np.concatenate([[-1 - run], hits])) - 1 if len(hits) else np.array([run + block])
        if gaps.max() >= MAX_CONSECUTIVE_REJECTIONS:
            raise InfeasibleSpec("no point visible in both cameras after 1e5 consecutive draws")
        run = block - 1 - hits[-1] if len(hits) else run + block
        take = X[hits[:remaining]]
        accepted.append(take)
        remaining -= len(take)
    return np.concatenate(accepted) if accepted else np.zeros((0, 3))


def generate_scene(spec: SceneSpec):
    """Deterministic list of labeled correspondences for ``spec``."""
    rng = np.random.default_rng(spec.rng_seed)
    pose = _make_pose(spec, rng)
    X = _sample_points(spec, pose, rng)
    d0 = X - pose.c0
    d1 = X - pose.c1
    f0 = (d0 / np.linalg.norm(d0, axis=1, keepdims=True)) @ pose.R
    f1 = d1 / np.linalg.norm(d1, axis=1, keepdims=True)
    f0n, eta0 = perturb_bearings(f0, spec.noise_sigma, rng) if len(X) else (f0, np.zeros(0))
    f1n, eta1 = perturb_bearings(f1, spec.noise_sigma, rng) if len(X) else (f1, np.zeros(0))
    return [
        LabeledCorrespondence(f0n[i], f1n[i], pose, X[i], (float(eta0[i]), float(eta1[i])))
        for i in range(len(X))
    ]


def _preset_pose(baseline: float = 1.0) -> Pose:
    return Pose(R=np.eye(3), c0=np.array([baseline, 0.0, 0.0]), c1=np.zeros(3))


def _label(pose: Pose, X, flip0: bool = False, flip1: bool = False) -> LabeledCorrespondence:
    m0 = unit(X - pose.c0)
    m1 = unit(X - pose.c1)
    f0 = pose.R.T @ (-m0 if flip0 else m0)
    f1 = -m1 if flip1 else m1
    return LabeledCorrespondence(f0, f1, pose, np.asarray(X, dtype=float), (0.0, 0.0))


def behind_camera_preset(kind: str, n: int = 20, seed: int = 0):
    """Noiseless correspondences whose rays meet behind camera 0, camera 1, or both.

    ``kind`` is one of ``"ray0"``, ``"ray1"``, ``"both"``.
    """
    flips = {"ray0": (True, False), "ray1": (False, True), "both": (True, True)}[kind]
    rng = np.random.default_rng(seed)
    pose = _preset_pose()
    out = []
    for _ in range(n):
        X = np.array([rng.uniform(-2, 3), rng.uniform(-2, 2), rng.uniform(3, 10)])
        out.append(_label(pose, X, *flips))
    return out


def low_parallax_preset(n: int = 20, seed: int = 0, parallax_deg: float = 0.01):
    """Forward points so distant that the two rays differ by about ``parallax_deg``."""
    rng = np.random.default_rng(seed)
    pose = _preset_pose()
    depth = 1.0 / math.tan(math.radians(parallax_deg))
    out = []
    for _ in range(n):
        X = np.array([0.5 + rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1), depth])
        out.append(_label(pose, X))
    return out


def to_arrays(correspondences):
    """Stack correspondences into ``(c0, c1, m0, m1)`` reference-frame arrays."""
    m0 = np.array([c.pose.R @ c.f0 for c in correspondences]).reshape(-1, 3)
    m1 = np.array([c.f1 for c in correspondences]).reshape(-1, 3)
    c0 = np.array([c.pose.c0 for c in correspondences]).reshape(-1, 3)
    c1 = np.array([c.pose.c1 for c in correspondences]).reshape(-1, 3)
    return c0, c1, m0, m1
