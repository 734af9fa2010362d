"""Command-line entry point: ``angtri gen | triangulate | verify | bench``.

Exit codes: 0 success, 1 verification failure, 2 parse error, 3 invalid spec.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from . import bench, oracle
from .cheirality import Observation, Thresholds, classify_batch
from .errors import InfeasibleSpec
from .formats import (
    ParseError,
    ResultRecord,
    format_result,
    read_correspondences,
    read_poses,
    read_results,
    write_correspondences,
    write_poses,
)
from .synth import SceneSpec, generate_scene
from .triangulators import correct_batch, method_cost, triangulate_batch
from .types import STATUSES, Method

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_SPEC = 0, 1, 2, 3
VERIFY_TOL = 1e-6

log = logging.getLogger("angtri")

_OBS = tuple(Observation)
ANGULAR_METHODS = (Method.L1, Method.L2, Method.LINF)


def _methods(flag: str):
    if flag == "all":
        return list(Method)
    return [Method(flag)]


def _rescale(F):
    # bearings only matter up to scale; fix rows whose norm under- or overflows
    with np.errstate(over="ignore", under="ignore"):
        norm = np.linalg.norm(F, axis=1)
    bad = ~((norm > 0) & np.isfinite(norm))
    F[bad] /= np.max(np.abs(F[bad]), axis=1, keepdims=True)
    return F


def _load(args):
    skipped = []
    records = read_correspondences(args.input, lenient=args.lenient, skipped=skipped)
    for err in skipped:
        log.warning("skipped %s", err)
    pose = read_poses(args.poses)
    R = np.asarray(pose.R)
    if not np.allclose(R.T @ R, np.eye(3), atol=1e-9) or np.linalg.det(R) < 0:
        raise InfeasibleSpec(f"{args.poses}: R is not a rotation matrix")
    f0 = _rescale(np.array([r.f0 for r in records]).reshape(-1, 3))
    f1 = _rescale(np.array([r.f1 for r in records]).reshape(-1, 3))
    m0 = f0 @ R.T
    return records, pose, m0, f1


def _poses_path(args):
    return args.poses or f"{args.output}.poses"


def cmd_gen(args) -> int:
    spec = SceneSpec(
        n_points=args.n,
        baseline_length=args.baseline,
        depth_range=(args.depth_min, args.depth_max),
        fov_halfangle=math.radians(args.fov_deg),
        noise_sigma=math.radians(args.sigma_deg),
        rng_seed=args.seed,
    )
    scene = generate_scene(spec)
    write_correspondences(args.output, scene)
    if scene:
        write_poses(_poses_path(args), scene[0].pose)
    log.info("wrote %d correspondences to %s", len(scene), args.output)
    return EXIT_OK


def cmd_triangulate(args) -> int:
    records, pose, m0, m1 = _load(args)
    thresholds = Thresholds.from_degrees(args.outlier_deg, args.parallax_deg)
    per_method = {}
    for method in _methods(args.method):
        res = triangulate_batch(method, pose.c0, pose.c1, m0, m1)
        th0, th1 = res.correction.theta0, res.correction.theta1
        obs = classify_batch(m0, m1, th0, th1, res.lambda0, res.lambda1, res.status, thresholds)
        per_method[method] = (res, obs)

    out = open(args.output, "w") if args.output else sys.stdout
    try:
        for i in range(len(records)):
            for method, (res, obs) in per_method.items():
                rec = ResultRecord(
                    index=i,
                    method=method.value,
                    point=res.point[i],
                    lambda0=res.lambda0[i],
                    lambda1=res.lambda1[i],
                    theta0=res.correction.theta0[i],
                    theta1=res.correction.theta1[i],
                    status=STATUSES[res.status[i]].value,
                    observation=_OBS[obs[i]].value,
                )
                out.write(format_result(rec) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_verify(args) -> int:
    _, pose, m0, m1 = _load(args)
    t = np.broadcast_to(pose.c0 - pose.c1, m0.shape)
    claimed = {}
    if args.results:
        for rec in read_results(args.results):
            if rec.method in {m.value for m in ANGULAR_METHODS}:
                claimed.setdefault(Method(rec.method), {})[rec.index] = (rec.theta0, rec.theta1)

    failed = False
    for method in ANGULAR_METHODS:
        if method in claimed:
            idx = np.array(sorted(claimed[method]), dtype=int)
            th = np.array([claimed[method][i] for i in idx]).reshape(-1, 2)
            th0, th1 = th[:, 0], th[:, 1]
        else:
            corr = correct_batch(method, m0, m1, t)
            idx = np.arange(len(m0))
            th0, th1 = corr.theta0, corr.theta1
        if len(idx) == 0:
            print(f"{method.value}\tmax_deviation\t0.0")
            continue
        if idx.max() >= len(m0):
            raise ParseError(args.results, 0, f"record index {idx.max()} out of range")
        _, best, _ = oracle.sweep_batch(m0[idx], m1[idx], t[idx], oracle.COST_OF_METHOD[method], args.grid)
        dev = np.abs(method_cost(method, th0, th1) - best)
        dev = np.where(np.isnan(dev), np.inf, dev)
        worst = float(dev.max())
        print(f"{method.value}\tmax_deviation\t{worst!r}")
        failed |= worst > VERIFY_TOL
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_bench(args) -> int:
    sigmas = [float(s) for s in args.sigma_deg.split(",") if s.strip()]
    rows = bench.run_bench(
        n=args.n,
        sigmas_deg=sigmas,
        repeats=args.repeats,
        seed=args.seed,
        thresholds=Thresholds.from_degrees(args.outlier_deg, args.parallax_deg),
        oracle_points=args.oracle_points,
        grid_n=args.grid,
    )
    lines = [bench.RunStats.header()] + [r.row() for r in rows]
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="angtri", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def thresholds(p):
        p.add_argument("--outlier-deg", type=float, default=2.0, help="total angular error above which a point is an outlier")
        p.add_argument("--parallax-deg", type=float, default=0.5, help="raw ray angle below which parallax is low")

    def inputs(p):
        p.add_argument("input", help="correspondence file")
        p.add_argument("--poses", required=True, help="poses file")
        p.add_argument("--lenient", action="store_true", help="skip malformed records instead of failing")

    p = sub.add_parser("gen", help="generate a synthetic correspondence file")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma-deg", type=float, default=0.0)
    p.add_argument("--baseline", type=float, default=1.0)
    p.add_argument("--depth-min", type=float, default=2.0)
    p.add_argument("--depth-max", type=float, default=10.0)
    p.add_argument("--fov-deg", type=float, default=45.0, help="half-angle of each camera's field of view")
    p.add_argument("--output", required=True)
    p.add_argument("--poses", help="poses output path (default: OUTPUT.poses)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("triangulate", help="triangulate every correspondence")
    inputs(p)
    p.add_argument("--method", choices=[m.value for m in Method] + ["all"], default="l1")
    p.add_argument("--output", help="result file (default: stdout)")
    thresholds(p)
    p.set_defaults(func=cmd_triangulate)

    p = sub.add_parser("verify", help="check closed-form optimality against the plane sweep")
    inputs(p)
    p.add_argument("--grid", type=int, default=oracle.DEFAULT_GRID)
    p.add_argument("--results", help="verify the angular errors recorded in a triangulate result file instead")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="accuracy and timing table over synthetic scenes")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma-deg", default="0,0.1,0.5", help="comma-separated noise levels")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--grid", type=int, default=oracle.DEFAULT_GRID)
    p.add_argument("--oracle-points", type=int, default=200)
    p.add_argument("--output")
    thresholds(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except (InfeasibleSpec, ValueError) as err:
        print(f"invalid spec: {err}", file=sys.stderr)
        return EXIT_SPEC
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
