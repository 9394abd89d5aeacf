"""Cross-matrices for every circular shift at once, via the DFT.

For periodic SRVFs on a uniform grid of ``N`` nodes (``n = N - 1`` distinct
samples) the matrices

    A_kj(m) = sum_l q1[l, k] * q2[(m + l) % n, j],    m = 0 .. n-1

are circular correlations.  Reversing the first sequence turns them into
circular convolutions, so each ``(k, j)`` sequence costs three FFTs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import ItopTooLarge, NonUniformPartition, NotPeriodic, PartitionMismatch
from .rotation_alignment import ku_rotations
from .srvf import ShapeFunction


@dataclass(frozen=True, eq=False)
class ShiftRotationCandidate:
    m: int
    rotation: np.ndarray
    maxtrace: float


def _check(q1: ShapeFunction, q2: ShapeFunction) -> None:
    if not (q1.periodic and q2.periodic):
        raise NotPeriodic("circular shifts need two periodic SRVFs")
    if not (q1.partition.uniform and q2.partition.uniform):
        raise NonUniformPartition("circular shifts need a uniform partition")
    if len(q1) != len(q2):
        raise PartitionMismatch("SRVFs must share one partition")


def circular_cross_matrices(q1: ShapeFunction, q2: ShapeFunction) -> np.ndarray:
    """Unweighted ``A(m)`` for all ``N - 1`` shifts; shape ``(N-1, d, d)``.

    ``A[m]`` pairs sample ``l`` of ``q1`` with sample ``m + l`` of ``q2``, so
    ``m = 0`` is the unshifted alignment.
    """
    _check(q1, q2)
    n = len(q1) - 1
    d = q1.dim
    a = q1.values
    # rows of a_rev hold a[-l mod n]; convolving with them correlates with a
    a_rev = np.empty((d, n))
    a_rev[:, 0] = a[0]
    a_rev[:, 1:] = a[n - 1 : 0 : -1].T
    fa = np.fft.rfft(a_rev, axis=-1)
    fb = np.fft.rfft(np.ascontiguousarray(q2.values[:n].T), axis=-1)
    out = np.empty((d, d, n))
    buf = np.empty(n // 2 + 1, dtype=complex)
    for k in range(d):
        for j in range(d):
            np.multiply(fa[k], fb[j], out=buf)
            np.fft.irfft(buf, n=n, out=out[k, j])
    return np.moveaxis(out, -1, 0)


def ku2(
    q1: ShapeFunction,
    q2: ShapeFunction,
    K: Optional[Iterable[int]] = None,
    itop: int = 1,
) -> list[ShiftRotationCandidate]:
    """Best ``itop`` (shift, rotation) couples for rotating shifted ``q2`` onto ``q1``.

    ``K`` holds admissible 0-based shift indices (all shifts if omitted).  The
    cross-matrices are scaled by the grid spacing ``1/(N-1)`` so each
    ``maxtrace`` equals the one :func:`~esdist.rotation_alignment.cross_matrix`
    gives for the explicitly shifted pair.  Results are sorted by decreasing
    ``maxtrace``, ties going to the smaller shift.
    """
    A = circular_cross_matrices(q1, q2)
    n = A.shape[0]
    shifts = np.arange(n) if K is None else np.unique(np.asarray(list(K), dtype=int))
    if np.any(shifts < 0) or np.any(shifts >= n):
        raise ValueError(f"shift indices must lie in [0, {n - 1}]")
    if itop < 1 or itop > len(shifts):
        raise ItopTooLarge(f"itop={itop} but only {len(shifts)} admissible shifts")
    R, maxtrace = ku_rotations(A[shifts] / n)
    order = np.lexsort((shifts, -maxtrace))[:itop]
    return [ShiftRotationCandidate(int(shifts[i]), R[i], float(maxtrace[i])) for i in order]
