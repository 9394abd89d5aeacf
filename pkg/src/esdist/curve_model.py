"""Discretized curves: loading, normalization, common partitions, resampling.

A :class:`Curve` holds ``N`` points in ``R^d`` together with the strictly
increasing parameter values they were sampled at.  After :func:`normalize`
the curve has unit polyline length and its partition spans ``[0, 1]``.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import BinaryIO, Optional, TextIO, Union

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    DuplicateParameter,
    MalformedInput,
    NoCommonPartitionNeeded,
    ZeroLengthCurve,
)

CLOSED_DETECT_TOL = 1e-6
CLOSED_GAP_TOL = 1e-8
UNIFORM_TOL = 1e-12


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Curve:
    """An ordered list of points with a parameter partition.

    Attributes
    ----------
    points : ndarray, shape (N, d)
    partition : ndarray, shape (N,)
        Strictly increasing parameter values.
    closed : bool
    """

    points: np.ndarray
    partition: np.ndarray
    closed: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise MalformedInput("points must be a 2-d array of shape (N, d)")
        t = np.asarray(self.partition, dtype=float)
        if t.ndim != 1 or len(t) != len(pts):
            raise MalformedInput("partition length must equal the number of points")
        if len(pts) < 3:
            raise MalformedInput(f"a curve needs at least 3 points, got {len(pts)}")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(t))):
            raise MalformedInput("non-finite coordinate or parameter value")
        if np.any(np.diff(t) <= 0):
            raise DuplicateParameter("partition must be strictly increasing")
        if self.closed:
            length = polyline_length_of(pts)
            gap = np.linalg.norm(pts[-1] - pts[0])
            if gap > CLOSED_GAP_TOL * length:
                raise MalformedInput(
                    f"closed curve endpoints differ by {gap:g} (length {length:g})"
                )
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "partition", _frozen(t))
        object.__setattr__(self, "closed", bool(self.closed))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class PartitionSpec:
    """A partition of ``[0, 1]`` shared by two curves."""

    values: np.ndarray
    uniform: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or len(v) < 2:
            raise MalformedInput("a partition needs at least two values")
        if v[0] != 0.0 or v[-1] != 1.0:
            raise MalformedInput("partition must start at 0 and end at 1")
        if np.any(np.diff(v) <= 0):
            raise DuplicateParameter("partition must be strictly increasing")
        if self.uniform and not is_uniform(v):
            raise MalformedInput("partition flagged uniform but spacing varies")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def uniform_of_size(cls, n: int) -> "PartitionSpec":
        return cls(np.linspace(0.0, 1.0, n), uniform=True)

    @classmethod
    def from_values(cls, values) -> "PartitionSpec":
        v = np.asarray(values, dtype=float)
        return cls(v, uniform=is_uniform(v))

    def __len__(self) -> int:
        return len(self.values)


def is_uniform(values: np.ndarray) -> bool:
    v = np.asarray(values, dtype=float)
    h = 1.0 / (len(v) - 1)
    return bool(np.max(np.abs(np.diff(v) - h)) <= UNIFORM_TOL)


def trapezoid_weights(t: np.ndarray) -> np.ndarray:
    """Composite trapezoidal weights ``h'_l`` for nodes ``t`` (they sum to t[-1]-t[0])."""
    t = np.asarray(t, dtype=float)
    w = np.empty_like(t)
    w[0] = (t[1] - t[0]) / 2
    w[-1] = (t[-1] - t[-2]) / 2
    w[1:-1] = (t[2:] - t[:-2]) / 2
    return w


def interpolant(x: np.ndarray, y: np.ndarray, periodic: bool) -> CubicSpline:
    """Componentwise cubic spline through ``(x, y)``.

    Periodic end conditions for closed data, not-a-knot otherwise.  For the
    periodic case the last sample is forced to equal the first.
    """
    y = np.array(y, dtype=float, copy=True)
    if periodic:
        y[-1] = y[0]
        return CubicSpline(x, y, axis=0, bc_type="periodic")
    return CubicSpline(x, y, axis=0, bc_type="not-a-knot")


def polyline_length_of(points: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.diff(points, axis=0), axis=1)))


def polyline_length(c: Curve) -> float:
    """Sum of the Euclidean lengths of the segments joining consecutive points."""
    return polyline_length_of(c.points)


def _read_text(source: Union[BinaryIO, TextIO, bytes, str]) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def load_curve(source, closed_hint: Optional[bool] = None) -> Curve:
    """Parse a whitespace-separated numeric curve file.

    One point per line.  Lines starting with ``#`` are comments, except the
    directive ``# t`` which declares that the first column holds the parameter
    value of each point.  Without it the partition is proportional to the row
    index.  ``closed_hint`` overrides closedness auto-detection; a closed curve
    whose last point does not repeat the first gets the first point appended.
    """
    has_t = False
    rows = []
    for lineno, raw in enumerate(_read_text(source).splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line[1:].strip().lower() == "t":
                has_t = True
            continue
        try:
            rows.append([float(tok) for tok in line.split()])
        except ValueError as exc:
            raise MalformedInput(f"line {lineno}: {exc}") from None
    if not rows:
        raise MalformedInput("no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise MalformedInput(f"inconsistent row widths {sorted(widths)}")
    data = np.array(rows, dtype=float)
    if not np.all(np.isfinite(data)):
        raise MalformedInput("non-finite value in input")
    if has_t:
        if data.shape[1] < 2:
            raise MalformedInput("'# t' directive needs at least two columns")
        t, pts = data[:, 0], data[:, 1:]
        if np.any(np.diff(t) <= 0):
            raise DuplicateParameter("supplied partition is not strictly increasing")
    else:
        pts = data
        t = np.linspace(0.0, 1.0, len(pts)) if len(pts) > 1 else np.zeros(1)
    if len(pts) < 3:
        raise MalformedInput(f"a curve needs at least 3 points, got {len(pts)}")

    gap = float(np.linalg.norm(pts[-1] - pts[0]))
    diag = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    touching = gap <= CLOSED_DETECT_TOL * diag
    closed = touching if closed_hint is None else bool(closed_hint)
    if closed:
        if touching:
            pts = pts.copy()
            pts[-1] = pts[0]
        else:
            pts = np.vstack([pts, pts[:1]])
            t = np.append(t, t[-1] + (t[-1] - t[0]) / (len(t) - 1))
    return Curve(pts, t, closed)


def load_curve_file(path, closed_hint: Optional[bool] = None) -> Curve:
    with open(path, "rb") as fh:
        return load_curve(fh, closed_hint)


def format_curve(c: Curve, with_parameter: bool = False) -> str:
    """Inverse of :func:`load_curve`."""
    buf = io.StringIO()
    if with_parameter:
        buf.write("# t\n")
        data = np.column_stack([c.partition, c.points])
    else:
        data = c.points
    np.savetxt(buf, data, fmt="%.17g")
    return buf.getvalue()


def normalize(c: Curve) -> Curve:
    """Scale to unit polyline length and map the partition onto ``[0, 1]``."""
    length = polyline_length(c)
    if not length > 0:
        raise ZeroLengthCurve("curve has zero length")
    t = c.partition
    span = t[-1] - t[0]
    tn = (t - t[0]) / span
    tn[0], tn[-1] = 0.0, 1.0
    pts = c.points / length
    if c.closed:
        pts[-1] = pts[0]
    return Curve(pts, tn, c.closed)


def build_common_partition(c1: Curve, c2: Curve) -> PartitionSpec:
    """Partition of ``[0, 1]`` on which both normalized curves get resampled.

    Uniform of size ``max(N, M)`` if either curve is closed.  For two open
    curves in ``d > 1`` the union of both partitions is used, dropping any
    value closer than ``0.25 / max(N, M)`` to the previously kept one.  Two open
    1-d curves need no common partition and :class:`NoCommonPartitionNeeded`
    is raised.
    """
    n = max(len(c1), len(c2))
    if c1.closed or c2.closed:
        return PartitionSpec.uniform_of_size(n)
    if c1.dim == 1 and c2.dim == 1:
        raise NoCommonPartitionNeeded("open 1-d curves keep their own partitions")
    eps = 0.25 / n
    union = np.union1d(c1.partition, c2.partition)
    kept = [0.0]
    for v in union[1:-1]:
        if v - kept[-1] >= eps:
            kept.append(float(v))
    while len(kept) > 1 and 1.0 - kept[-1] < eps:
        kept.pop()
    kept.append(1.0)
    return PartitionSpec.from_values(kept)


def resample(c: Curve, p: PartitionSpec) -> Curve:
    """Evaluate a cubic spline through the curve's points at ``p.values``."""
    spline = interpolant(c.partition, c.points, periodic=c.closed)
    pts = spline(p.values)
    if c.closed:
        pts[-1] = pts[0]
    return Curve(pts, p.values, c.closed)


def reverse_direction(c: Curve) -> Curve:
    """Traverse the curve backwards; the partition is reflected."""
    t = c.partition
    return Curve(c.points[::-1], (t[0] + t[-1]) - t[::-1], c.closed)
