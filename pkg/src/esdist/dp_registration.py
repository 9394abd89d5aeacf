"""Optimal reparametrization by dynamic programming on an adapting strip.

The discrete diffeomorphism is a monotone path of grid points ``(i, j)``
(node ``i`` of the first partition ``t`` paired with node ``j`` of the second
partition ``z``) from ``(0, 0)`` to ``(N-1, M-1)``.  Each straight piece
``(k, l) -> (i, j)`` costs a trapezoidal sum of
``|q1(t_m) - sqrt(L) q2(alpha(t_m))|^2`` where ``alpha`` is the linear map of
slope ``L`` between the two endpoints.

:func:`adapt_dp` solves coarse-to-fine: at each level the previous path is
covered by Voronoi bins, the bins are widened by ``lstrp`` cells down and to
the left, and :func:`procedure_dp` runs only on grid points of that strip.
Every level costs ``O(N + M)`` so the whole solve is linear.

All grid indices are 0-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numba as nb
import numpy as np
from scipy.interpolate import PPoly

from .curve_model import _frozen, interpolant
from .errors import BrokenPointerChain, EmptyGrid, InputError
from .srvf import ShapeFunction

_jit = nb.njit(cache=True, nogil=True)


@dataclass(frozen=True)
class DpConfig:
    """``layrs``: trailing-neighbourhood width; ``lstrp``: strip half-width in bins."""

    layrs: int = 5
    lstrp: int = 30

    def __post_init__(self):
        if self.layrs < 1 or self.lstrp < 1:
            raise InputError("layrs and lstrp must be positive")


@dataclass(frozen=True, eq=False)
class Diffeomorphism:
    """Samples ``gamma_l = gamma(t_l)`` of a monotone map of ``[0, 1]``.

    ``derivative[l] = (gamma[l+1] - gamma[l]) / (t[l+1] - t[l])`` with the last
    entry repeating the first.  ``energy`` is the DP objective when known.
    """

    gamma: np.ndarray
    t: np.ndarray
    energy: Optional[float] = None
    derivative: np.ndarray = field(init=False)

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        t = np.asarray(self.t, dtype=float)
        if g.shape != t.shape or len(g) < 2:
            raise InputError("gamma and partition must have equal length >= 2")
        if g[0] != 0.0 or g[-1] != 1.0:
            raise InputError("gamma must map 0 to 0 and 1 to 1")
        dg = np.empty_like(g)
        dg[:-1] = np.diff(g) / np.diff(t)
        dg[-1] = dg[0]
        if np.any(dg <= 0):
            raise InputError("gamma must be strictly increasing")
        object.__setattr__(self, "gamma", _frozen(g))
        object.__setattr__(self, "t", _frozen(t))
        object.__setattr__(self, "derivative", _frozen(dg))

    @classmethod
    def identity(cls, t) -> "Diffeomorphism":
        return cls(np.asarray(t, dtype=float), t)

    def __len__(self) -> int:
        return len(self.gamma)


class GridPointSet:
    """A set ``R`` of grid points plus the DP tables ``E`` and ``P``.

    Points are stored sorted row-major in ``rows``/``cols``; ``P[p]`` is the
    position of the predecessor of point ``p`` (``-1`` for the origin).
    Besides the two corners only interior points are allowed.
    """

    def __init__(self, pairs, n: int, m: int):
        pairs = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs, dtype=np.int64)
        if pairs.size == 0:
            raise EmptyGrid("grid point set is empty")
        keys = np.unique(pairs[:, 0] * m + pairs[:, 1])
        self._init_from_keys(keys, n, m)

    @classmethod
    def from_keys(cls, keys: np.ndarray, n: int, m: int) -> "GridPointSet":
        obj = cls.__new__(cls)
        obj._init_from_keys(np.unique(keys), n, m)
        return obj

    @classmethod
    def full(cls, n: int, m: int) -> "GridPointSet":
        ii, jj = np.meshgrid(np.arange(1, n - 1), np.arange(1, m - 1), indexing="ij")
        keys = np.concatenate([[0], (ii * m + jj).ravel(), [n * m - 1]])
        return cls.from_keys(keys, n, m)

    def _init_from_keys(self, keys: np.ndarray, n: int, m: int) -> None:
        self.n, self.m = n, m
        rows, cols = np.divmod(keys.astype(np.int64), m)
        if len(keys) == 0 or keys[0] != 0 or keys[-1] != n * m - 1:
            raise EmptyGrid("grid point set must contain both corners")
        inner_r, inner_c = rows[1:-1], cols[1:-1]
        if np.any((inner_r < 1) | (inner_r > n - 2) | (inner_c < 1) | (inner_c > m - 2)):
            raise InputError("non-corner grid points must be interior")
        self.rows, self.cols = rows, cols
        self.rowset, starts = np.unique(rows, return_index=True)
        self.row_ptr = np.append(starts, len(rows)).astype(np.int64)
        self.colset = np.unique(cols)
        self.E = np.full(len(rows), np.inf)
        self.P = np.full(len(rows), -1, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.rows)

    def __contains__(self, ij) -> bool:
        i, j = ij
        lo, hi = np.searchsorted(self.rows, [i, i + 1])
        pos = lo + np.searchsorted(self.cols[lo:hi], j)
        return bool(pos < hi and self.cols[pos] == j)

    def energy_at(self, i: int, j: int) -> float:
        lo, hi = np.searchsorted(self.rows, [i, i + 1])
        pos = lo + np.searchsorted(self.cols[lo:hi], j)
        return float(self.E[pos])

    def path(self) -> list[tuple[int, int]]:
        """Backtrack the pointer table from the far corner to the origin."""
        p = len(self.rows) - 1
        out = [(int(self.rows[p]), int(self.cols[p]))]
        for _ in range(len(self.rows)):
            if p == 0:
                return out[::-1]
            q = int(self.P[p])
            if q < 0 or not (self.rows[q] < self.rows[p] and self.cols[q] < self.cols[p]):
                raise BrokenPointerChain(f"pointer chain broken at {out[-1]}")
            p = q
            out.append((int(self.rows[p]), int(self.cols[p])))
        raise BrokenPointerChain("pointer chain does not reach the origin")


# ----------------------------------------------------------------------------
# numba kernels


@_jit
def _spline_at(x, c, a, out):
    n = x.shape[0] - 1
    idx = np.searchsorted(x, a, side="right") - 1
    if idx < 0:
        idx = 0
    elif idx > n - 1:
        idx = n - 1
    dx = a - x[idx]
    for k in range(out.shape[0]):
        out[k] = ((c[0, idx, k] * dx + c[1, idx, k]) * dx + c[2, idx, k]) * dx + c[3, idx, k]


@_jit
def _segment(t, z, q1, x, c, rowset, rk, ri, k, l, i, j, buf):
    L = (z[j] - z[l]) / (t[i] - t[k])
    sL = math.sqrt(L)
    d = q1.shape[1]
    total = 0.0
    prevF = 0.0
    prevT = 0.0
    for pos in range(rk, ri + 1):
        mm = rowset[pos]
        tm = t[mm]
        if pos == ri:
            a = z[j]
        else:
            a = z[l] + L * (tm - t[k])
        _spline_at(x, c, a, buf)
        F = 0.0
        for kk in range(d):
            diff = q1[mm, kk] - sL * buf[kk]
            F += diff * diff
        if pos > rk:
            total += (tm - prevT) * (F + prevF)
        prevF = F
        prevT = tm
    return 0.5 * total


@_jit
def _dp_kernel(t, z, q1, x, c, rows, cols, row_ptr, rowset, colset, omega, E, P):
    buf = np.empty(q1.shape[1])
    E[0] = 0.0
    P[0] = -1
    for ri in range(1, rowset.shape[0]):
        i = rowset[ri]
        r_lo = max(ri - omega, 0)
        for p in range(row_ptr[ri], row_ptr[ri + 1]):
            j = cols[p]
            cj = np.searchsorted(colset, j)
            col_lo = colset[max(cj - omega, 0)]
            best = np.inf
            bestq = -1
            for rk in range(r_lo, ri):
                k = rowset[rk]
                s = row_ptr[rk]
                e = row_ptr[rk + 1]
                a = s + np.searchsorted(cols[s:e], col_lo)
                b = s + np.searchsorted(cols[s:e], j)
                for qq in range(a, b):
                    val = E[qq] + _segment(t, z, q1, x, c, rowset, rk, ri, k, cols[qq], i, j, buf)
                    if val < best:
                        best = val
                        bestq = qq
            if bestq < 0:
                # empty neighbourhood: nearest point below and to the left
                for rk in range(ri - 1, -1, -1):
                    s = row_ptr[rk]
                    e = row_ptr[rk + 1]
                    b = s + np.searchsorted(cols[s:e], j)
                    if b > s:
                        bestq = b - 1
                        best = E[bestq] + _segment(
                            t, z, q1, x, c, rowset, rk, ri, rowset[rk], cols[bestq], i, j, buf
                        )
                        break
            E[p] = best
            P[p] = bestq


@_jit
def _mark_bins(px, py, rx, ry):
    """Bins touched by the polyline through ``(px, py)``.

    ``rx`` holds the bin edges in x (bin ``b`` spans ``rx[b-1]..rx[b]`` for
    ``b = 1 .. len(rx)-1``), likewise ``ry``.  Overlap tests are closed so
    a segment through a bin corner marks every bin meeting that corner.
    """
    nbx = rx.shape[0] - 1
    nby = ry.shape[0] - 1
    cap = 16
    outb = np.empty(cap, dtype=np.int64)
    outc = np.empty(cap, dtype=np.int64)
    cnt = 0
    for s in range(px.shape[0] - 1):
        x0, x1 = px[s], px[s + 1]
        y0, y1 = py[s], py[s + 1]
        slope = (y1 - y0) / (x1 - x0)
        b = max(np.searchsorted(rx, x0, side="left"), 1)
        while b <= nbx and rx[b - 1] <= x1:
            xa = max(x0, rx[b - 1])
            xb = min(x1, rx[b])
            if xa <= xb:
                ya = y0 + slope * (xa - x0)
                yb = y0 + slope * (xb - x0)
                if xb == x1:
                    yb = y1
                if xa == x0:
                    ya = y0
                cc = max(np.searchsorted(ry, ya, side="left"), 1)
                while cc <= nby and ry[cc - 1] <= yb:
                    if cnt == cap:
                        cap *= 2
                        nb_ = np.empty(cap, dtype=np.int64)
                        nc_ = np.empty(cap, dtype=np.int64)
                        nb_[:cnt] = outb[:cnt]
                        nc_[:cnt] = outc[:cnt]
                        outb = nb_
                        outc = nc_
                    outb[cnt] = b
                    outc[cnt] = cc
                    cnt += 1
                    cc += 1
            b += 1
    return outb[:cnt], outc[:cnt]


@_jit
def _strip_keys(bins_b, bins_c, I, J, lstrp, m):
    total = 0
    for p in range(bins_b.shape[0]):
        total += min(bins_b[p] - 1, lstrp) + 1 + min(bins_c[p] - 1, lstrp) + 1
    keys = np.empty(total + 2, dtype=np.int64)
    keys[0] = 0
    keys[1] = (I[-1]) * m + J[-1]
    cnt = 2
    for p in range(bins_b.shape[0]):
        b = bins_b[p]
        cc = bins_c[p]
        i0 = max(1, b - lstrp)
        for ip in range(i0, b + 1):
            keys[cnt] = I[ip] * m + J[cc]
            cnt += 1
        j0 = max(1, cc - lstrp)
        for jp in range(j0, cc + 1):
            keys[cnt] = I[b] * m + J[jp]
            cnt += 1
    return keys


# ----------------------------------------------------------------------------
# public operations


def q2_interpolant(q2: ShapeFunction) -> PPoly:
    """Cubic spline of an SRVF, periodic when the SRVF is."""
    return interpolant(q2.t, q2.values, periodic=q2.periodic)


def _spline_arrays(spline: PPoly) -> tuple[np.ndarray, np.ndarray]:
    c = np.ascontiguousarray(spline.c, dtype=float)
    if c.ndim == 2:
        c = c[:, :, None]
    return np.ascontiguousarray(spline.x, dtype=float), c


def segment_energy(
    k: int,
    l: int,
    i: int,
    j: int,
    q1: ShapeFunction,
    q2_spline: PPoly,
    index_set: Optional[Iterable[int]] = None,
) -> float:
    """Trapezoidal energy of the straight piece ``(k, l) -> (i, j)``.

    ``index_set`` lists the first-curve nodes used by the quadrature (all of
    ``k..i`` by default); it must contain ``k`` and ``i``.
    """
    if not (k < i and l < j):
        raise InputError("segment must increase in both indices")
    idx = np.arange(k, i + 1) if index_set is None else np.unique(np.asarray(list(index_set), dtype=np.int64))
    idx = idx[(idx >= k) & (idx <= i)]
    if idx[0] != k or idx[-1] != i:
        raise InputError("index set must contain both segment endpoints")
    x, c = _spline_arrays(q2_spline)
    buf = np.empty(q1.dim)
    return float(_segment(q1.t, x, np.ascontiguousarray(q1.values), x, c, idx, 0, len(idx) - 1, k, l, i, j, buf))


def procedure_dp(R: GridPointSet, q1: ShapeFunction, q2: ShapeFunction, cfg: DpConfig = DpConfig()) -> GridPointSet:
    """Fill ``R.E`` and ``R.P`` by DP over trailing ``layrs x layrs`` neighbourhoods."""
    if len(R) < 2:
        raise EmptyGrid("grid point set must contain both corners")
    if R.n != len(q1) or R.m != len(q2):
        raise InputError("grid size does not match the SRVF lengths")
    x, c = _spline_arrays(q2_interpolant(q2))
    _dp_kernel(
        q1.t, x, np.ascontiguousarray(q1.values), x, c,
        R.rows, R.cols, R.row_ptr, R.rowset, R.colset, int(cfg.layrs), R.E, R.P,
    )
    return R


def gamma_from_path(path, t: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation of a grid path onto the nodes of ``t``."""
    g = np.empty(len(t))
    g[-1] = z[-1]
    for (k, l), (i, j) in zip(path[:-1], path[1:]):
        g[k] = z[l]
        if i - k > 1:
            tm = t[k + 1 : i]
            g[k + 1 : i] = ((t[i] - tm) * z[l] + (tm - t[k]) * z[j]) / (t[i] - t[k])
    return g


def backtrack_opt_diffeom(R: GridPointSet, t: np.ndarray, z: np.ndarray) -> Diffeomorphism:
    """Turn the pointer table of a solved grid into a discrete diffeomorphism."""
    path = R.path()
    return Diffeomorphism(gamma_from_path(path, t, z), t, energy=float(R.E[-1]))


def level_indices(n: int, r: int) -> np.ndarray:
    """Nested, evenly spread node subsets; level ``r`` has about ``2**r + 1`` nodes."""
    frac = np.arange(2**r + 1) * ((n - 1) / 2**r)
    return np.unique(np.floor(frac + 0.5).astype(np.int64))


def _bin_edges(t: np.ndarray, I: np.ndarray) -> np.ndarray:
    edges = 0.5 * (t[I[:-1]] + t[I[1:]])
    edges[0], edges[-1] = 0.0, 1.0
    return edges


def strip_grid(path, t, z, I, J, lstrp: int) -> GridPointSet:
    """Grid points of the adapting strip around ``path`` on the level ``(I, J)``."""
    n, m = len(t), len(z)
    p = np.asarray(path, dtype=np.int64)
    bb, bc = _mark_bins(t[p[:, 0]], z[p[:, 1]], _bin_edges(t, I), _bin_edges(z, J))
    marked = np.unique(bb * len(J) + bc)
    bb, bc = np.divmod(marked, len(J))
    keys = _strip_keys(bb, bc, I, J, int(lstrp), m)
    return GridPointSet.from_keys(keys, n, m)


def adapt_dp(q1: ShapeFunction, q2: ShapeFunction, cfg: DpConfig = DpConfig()) -> Diffeomorphism:
    """Approximately optimal ``gamma`` minimizing ``|q1 - sqrt(gamma') q2(gamma)|^2``.

    ``q1`` lives on partition ``t`` (``N`` nodes), ``q2`` on ``z`` (``M``
    nodes); the result samples ``gamma`` at ``t``.
    """
    t, z = q1.t, q2.t
    n, m = len(t), len(z)
    if n < 3 or m < 3:
        raise InputError("adapt_dp needs at least 3 nodes per curve")
    levels = max(1, math.ceil(math.log2(max(n, m) - 1)))
    x, c = _spline_arrays(q2_interpolant(q2))
    q1v = np.ascontiguousarray(q1.values)
    path = [(0, 0), (n - 1, m - 1)]
    R = None
    for r in range(1, levels + 1):
        I, J = level_indices(n, r), level_indices(m, r)
        R = strip_grid(path, t, z, I, J, cfg.lstrp)
        _dp_kernel(t, x, q1v, x, c, R.rows, R.cols, R.row_ptr, R.rowset, R.colset, int(cfg.layrs), R.E, R.P)
        path = R.path()
    return Diffeomorphism(gamma_from_path(path, t, z), t, energy=float(R.E[-1]))
