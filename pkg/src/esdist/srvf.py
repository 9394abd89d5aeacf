"""Square-root velocity functions of discretized curves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve_model import Curve, PartitionSpec, _frozen, trapezoid_weights
from .errors import MalformedInput, NonUniformPartition, NotPeriodic

ZERO_SPEED = 1e-14
PERIODIC_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ShapeFunction:
    """SRVF samples ``q(t_l)`` on a partition of ``[0, 1]``."""

    values: np.ndarray
    partition: PartitionSpec
    periodic: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if len(v) != len(self.partition):
            raise MalformedInput("SRVF values and partition differ in length")
        if self.periodic and np.max(np.abs(v[-1] - v[0])) > PERIODIC_TOL:
            raise NotPeriodic("periodic SRVF must repeat its first sample")
        object.__setattr__(self, "values", _frozen(v))
        object.__setattr__(self, "periodic", bool(self.periodic))

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def t(self) -> np.ndarray:
        return self.partition.values

    def __len__(self) -> int:
        return self.values.shape[0]

    def norm2(self) -> float:
        """Trapezoidal approximation of the integral of ``|q|^2``."""
        w = trapezoid_weights(self.t)
        return float(w @ np.sum(self.values**2, axis=1))

    def with_values(self, values: np.ndarray) -> "ShapeFunction":
        return ShapeFunction(values, self.partition, self.periodic)


def _central_weights(hm, hp):
    """Three-point first-derivative weights on a nonuniform stencil."""
    wm = -hp / (hm * (hm + hp))
    w0 = (hp - hm) / (hm * hp)
    wp = hm / (hp * (hm + hp))
    return wm, w0, wp


def derivative(points: np.ndarray, t: np.ndarray, closed: bool) -> np.ndarray:
    """Second-order finite-difference velocity at every node."""
    p = np.asarray(points, dtype=float)
    n = len(p)
    v = np.empty_like(p)
    if closed:
        # nodes 0..n-2 are distinct, node n-1 repeats node 0
        idx = np.arange(n - 1)
        prev = np.where(idx == 0, n - 2, idx - 1)
        hm = np.where(idx == 0, t[n - 1] - t[n - 2], t[idx] - t[prev])
        hp = t[idx + 1] - t[idx]
        wm, w0, wp = _central_weights(hm, hp)
        v[:-1] = wm[:, None] * p[prev] + w0[:, None] * p[idx] + wp[:, None] * p[idx + 1]
        v[-1] = v[0]
        return v
    hm = t[1:-1] - t[:-2]
    hp = t[2:] - t[1:-1]
    wm, w0, wp = _central_weights(hm, hp)
    v[1:-1] = wm[:, None] * p[:-2] + w0[:, None] * p[1:-1] + wp[:, None] * p[2:]
    # one-sided second-order stencils at the open ends
    h1, h2 = t[1] - t[0], t[2] - t[0]
    v[0] = (-(h1 + h2) / (h1 * h2)) * p[0] + (h2 / (h1 * (h2 - h1))) * p[1] - (h1 / (h2 * (h2 - h1))) * p[2]
    h1, h2 = t[-1] - t[-2], t[-1] - t[-3]
    v[-1] = ((h1 + h2) / (h1 * h2)) * p[-1] - (h2 / (h1 * (h2 - h1))) * p[-2] + (h1 / (h2 * (h2 - h1))) * p[-3]
    return v


def srvf_from_velocity(v: np.ndarray) -> np.ndarray:
    speed = np.linalg.norm(v, axis=1)
    q = np.zeros_like(v)
    moving = speed >= ZERO_SPEED
    q[moving] = v[moving] / np.sqrt(speed[moving])[:, None]
    return q


def compute_srvf(c: Curve) -> ShapeFunction:
    """SRVF ``q = beta' / sqrt(|beta'|)`` of a normalized curve.

    Nodes where the velocity vanishes get the zero vector.
    """
    t = c.partition
    q = srvf_from_velocity(derivative(c.points, t, c.closed))
    if c.closed:
        q[-1] = q[0]
    return ShapeFunction(q, PartitionSpec.from_values(t), periodic=c.closed)


def shifted_indices(n: int, m: int) -> np.ndarray:
    """Node indices of ``t_m + t_l`` on a uniform periodic grid of ``n`` nodes."""
    return (m + np.arange(n)) % (n - 1)


def shift(q: ShapeFunction, m: int) -> ShapeFunction:
    """Restart a periodic SRVF at node ``m`` (0-based; ``m = 0`` is no shift)."""
    if not q.periodic:
        raise NotPeriodic("only periodic SRVFs can be shifted")
    if not q.partition.uniform:
        raise NonUniformPartition("shifting requires a uniform partition")
    n = len(q)
    if not 0 <= m <= n - 2:
        raise ValueError(f"shift index must lie in [0, {n - 2}], got {m}")
    return q.with_values(q.values[shifted_indices(n, m)])
