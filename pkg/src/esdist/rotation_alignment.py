"""Optimal rotations via the Kabsch-Umeyama SVD construction.

Given ``A = U S V^T`` the rotation ``R = U diag(1, ..., 1, s) V^T`` with
``s = sign(det(U V))`` maximizes ``tr(R A^T)`` over ``SO(d)``.  Rotations are
plain ``(d, d)`` arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve_model import trapezoid_weights
from .errors import LengthMismatch, NonPositiveWeights, PartitionMismatch, SvdFailure
from .srvf import ShapeFunction

ROTATION_TOL = 1e-10


def is_rotation(R: np.ndarray, tol: float = ROTATION_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        return False
    d = R.shape[0]
    orth = np.max(np.abs(R.T @ R - np.eye(d))) <= tol
    return bool(orth and abs(np.linalg.det(R) - 1.0) <= tol)


@dataclass(frozen=True, eq=False)
class RigidMotion:
    """``x -> rotation @ x + translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) @ self.rotation.T + self.translation


def weighted_cross_matrix(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``A_kj = sum_l w_l x_lk y_lj``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x.T @ (np.asarray(w, dtype=float)[:, None] * y)


def cross_matrix(q1: ShapeFunction, q2: ShapeFunction) -> np.ndarray:
    """Trapezoid-weighted correlation matrix of two SRVFs on the same partition."""
    if len(q1) != len(q2) or not np.array_equal(q1.t, q2.t):
        raise PartitionMismatch("SRVFs must share one partition")
    return weighted_cross_matrix(q1.values, q2.values, trapezoid_weights(q1.t))


def ku_rotation(A: np.ndarray) -> tuple[np.ndarray, float]:
    """Rotation maximizing ``tr(R A^T)`` and the attained maximum.

    A singular ``A`` with ``det(U V) == 0`` takes the ``+1`` branch.
    """
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    if d == 1:
        R = np.ones((1, 1))
        return R, float(A[0, 0])
    try:
        U, _, Vt = np.linalg.svd(A)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(str(exc)) from exc
    s = np.ones(d)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        s[-1] = -1.0
    R = (U * s) @ Vt
    return R, float(np.sum(R * A))


def ku_rotations(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`ku_rotation` over a stack of shape ``(n, d, d)``."""
    A = np.asarray(A, dtype=float)
    n, d, _ = A.shape
    if d == 1:
        return np.ones((n, 1, 1)), A[:, 0, 0].copy()
    try:
        U, _, Vt = np.linalg.svd(A)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(str(exc)) from exc
    s = np.ones((n, d))
    s[np.linalg.det(U) * np.linalg.det(Vt) < 0, -1] = -1.0
    R = (U * s[:, None, :]) @ Vt
    return R, np.einsum("nij,nij->n", R, A)


def fit_rigid_motion(x, y, weights) -> tuple[RigidMotion, float]:
    """Orientation-preserving rigid motion ``phi`` minimizing ``sum w |x - phi(y)|^2``.

    The optimum maps the weighted centroid of ``y`` onto that of ``x``, so the
    rotation is solved on centered clouds and the translation follows.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    if x.shape != y.shape or len(w) != len(x):
        raise LengthMismatch("point lists and weights must have equal lengths")
    if np.any(w <= 0):
        raise NonPositiveWeights("weights must be positive")
    w = w / w.sum()
    xbar = w @ x
    ybar = w @ y
    R, _ = ku_rotation(weighted_cross_matrix(x - xbar, y - ybar, w))
    motion = RigidMotion(R, xbar - R @ ybar)
    residual = float(w @ np.sum((x - motion(y)) ** 2, axis=1))
    return motion, residual
