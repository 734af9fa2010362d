"""Plain-text record formats.

Correspondence file: one record per line, whitespace separated,
``f0x f0y f0z f1x f1y f1z`` optionally followed by a ground-truth point
``X Y Z``.  Poses file: a single record ``R`` (9 values, row-major) ``c0``
(3) ``c1`` (3).  Result file: one line per (record, method) with
``index method px py pz lambda0 lambda1 theta0 theta1 status observation``.

Blank lines and ``#`` comments are ignored everywhere.  Floats are written
with ``repr`` so every value reads back bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .synth import LabeledCorrespondence, Pose


class ParseError(ValueError):
    def __init__(self, path, lineno: int, msg: str):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path = path
        self.lineno = lineno


@dataclass
class Correspondence:
    f0: np.ndarray
    f1: np.ndarray
    ground_truth: Optional[np.ndarray] = None
    lineno: int = 0


@dataclass
class ResultRecord:
    index: int
    method: str
    point: np.ndarray
    lambda0: float
    lambda1: float
    theta0: float
    theta1: float
    status: str
    observation: str


def _fmt(x) -> str:
    return repr(float(x))


def _lines(path):
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line


def _floats(path, lineno, fields):
    try:
        vals = [float(x) for x in fields]
    except ValueError as exc:
        raise ParseError(path, lineno, f"not a number ({exc})") from None
    return vals


def read_correspondences(path, lenient: bool = False, skipped: list | None = None):
    """Read a correspondence file.

    With ``lenient`` malformed lines are skipped (their errors are appended to
    ``skipped`` when given); otherwise the first one raises :class:`ParseError`.
    """
    out = []
    for lineno, line in _lines(path):
        fields = line.split()
        try:
            if len(fields) not in (6, 9):
                raise ParseError(path, lineno, f"expected 6 or 9 values, got {len(fields)}")
            vals = np.array(_floats(path, lineno, fields))
            if not np.all(np.isfinite(vals)):
                raise ParseError(path, lineno, "non-finite value")
            f0, f1 = vals[:3], vals[3:6]
            if not (np.any(f0) and np.any(f1)):
                raise ParseError(path, lineno, "zero bearing vector")
            gt = vals[6:9] if len(vals) == 9 else None
        except ParseError as err:
            if not lenient:
                raise
            if skipped is not None:
                skipped.append(err)
            continue
        out.append(Correspondence(f0, f1, gt, lineno))
    return out


def write_correspondences(path, records: Iterable) -> None:
    """Write ``LabeledCorrespondence`` or :class:`Correspondence` records."""
    with open(path, "w") as fh:
        for rec in records:
            if isinstance(rec, LabeledCorrespondence):
                vals = [*rec.f0, *rec.f1, *rec.ground_truth_point]
            else:
                vals = [*rec.f0, *rec.f1] + ([] if rec.ground_truth is None else [*rec.ground_truth])
            fh.write(" ".join(_fmt(v) for v in vals) + "\n")


def read_poses(path) -> Pose:
    records = list(_lines(path))
    if len(records) != 1:
        raise ParseError(path, records[1][0] if len(records) > 1 else 0, "expected exactly one pose record")
    lineno, line = records[0]
    fields = line.split()
    if len(fields) != 15:
        raise ParseError(path, lineno, f"expected 15 values, got {len(fields)}")
    vals = np.array(_floats(path, lineno, fields))
    if not np.all(np.isfinite(vals)):
        raise ParseError(path, lineno, "non-finite value")
    return Pose(R=vals[:9].reshape(3, 3), c0=vals[9:12], c1=vals[12:15])


def write_poses(path, pose: Pose) -> None:
    vals = [*np.asarray(pose.R).ravel(), *pose.c0, *pose.c1]
    with open(path, "w") as fh:
        fh.write(" ".join(_fmt(v) for v in vals) + "\n")


def format_result(rec: ResultRecord) -> str:
    nums = [*rec.point, rec.lambda0, rec.lambda1, rec.theta0, rec.theta1]
    return " ".join([str(rec.index), rec.method, *(_fmt(v) for v in nums), rec.status, rec.observation])


def read_results(path):
    out = []
    for lineno, line in _lines(path):
        fields = line.split()
        if len(fields) != 11:
            raise ParseError(path, lineno, f"expected 11 fields, got {len(fields)}")
        try:
            index = int(fields[0])
        except ValueError:
            raise ParseError(path, lineno, "record index is not an integer") from None
        v = _floats(path, lineno, fields[2:9])
        out.append(ResultRecord(index, fields[1], np.array(v[:3]), *v[3:], fields[9], fields[10]))
    return out
