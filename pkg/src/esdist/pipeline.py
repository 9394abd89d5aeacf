"""Elastic shape distance: alternate rotations, starting points and reparametrizations.

The energy minimized by :func:`procedure2` and :func:`procedure3` is

    E(t0, R, gamma) = sum_l h'_l |R q1(t0 + t_l) - sqrt(gamma'_l) q2(gamma_l)|^2

(the second curve is reparametrized, the first rotated and, when closed,
restarted at ``t0``).  :func:`procedure1` instead reparametrizes the first
curve.  :func:`compute_esd` runs the preprocessing and picks the procedure.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .curve_model import (
    Curve,
    PartitionSpec,
    build_common_partition,
    interpolant,
    normalize,
    resample,
    reverse_direction,
    trapezoid_weights,
)
from .dp_registration import DpConfig, Diffeomorphism, adapt_dp, q2_interpolant
from .errors import InputError, NoCommonPartitionNeeded, NotClosed, NotPeriodic, WrongCase
from .fft_rotation import ku2
from .rotation_alignment import ku_rotation, weighted_cross_matrix
from .srvf import ShapeFunction, compute_srvf, shifted_indices

log = logging.getLogger(__name__)

NODE_TOL = 1e-9


@dataclass(frozen=True)
class PipelineConfig:
    itop: int = 1
    iten: int = 10
    tol: float = 1e-6
    e_init: float = 1e6
    dp: DpConfig = field(default_factory=DpConfig)
    use_fft: bool = False
    try_both_directions: bool = False
    stride: int = 1
    procedure: int = 2

    def __post_init__(self):
        if self.itop < 1 or self.iten < 1 or self.stride < 1:
            raise InputError("itop, iten and stride must be positive")
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.procedure not in (1, 2):
            raise InputError("procedure must be 1 or 2")


@dataclass(frozen=True, eq=False)
class RegistrationResult:
    """Minimizing triple ``(t0, rotation, gamma)`` and the registered curves.

    ``energy`` is the minimized discrete energy and ``distance`` its square
    root, the L2 distance between the registered SRVFs.  When ``swapped`` is set
    the input curves were exchanged so that the closed one came first, and
    ``registered_curve1`` refers to the second input.
    """

    t0: float
    rotation: np.ndarray
    gamma: Diffeomorphism
    energy: float
    registered_srvf1: np.ndarray
    registered_srvf2: np.ndarray
    partition: np.ndarray
    registered_curve1: Optional[np.ndarray] = None
    registered_curve2: Optional[np.ndarray] = None
    direction_reversed: bool = False
    swapped: bool = False
    iterations: int = 1
    history: tuple = ()

    @property
    def distance(self) -> float:
        return float(np.sqrt(max(self.energy, 0.0)))

    def recomputed_energy(self) -> float:
        w = trapezoid_weights(self.partition)
        diff = self.registered_srvf1 - self.registered_srvf2
        return float(w @ np.sum(diff**2, axis=1))


# ----------------------------------------------------------------------------
# helpers


def starting_point_set(c1: Curve, c2: Curve, p: PartitionSpec, stride: int = 1) -> np.ndarray:
    """Candidate seam parameters on the first curve.

    ``{0}`` for two open curves; otherwise every ``stride``-th node of the
    uniform partition except the final one (which repeats ``0``).
    """
    if not (c1.closed or c2.closed):
        return np.array([0.0])
    if not c1.closed:
        raise InputError("the closed curve must be the first curve")
    if not p.uniform:
        raise InputError("starting points need a uniform partition")
    return p.values[:-1:stride].copy()


def _node_indices(K, t: np.ndarray) -> np.ndarray:
    K = np.atleast_1d(np.asarray(K, dtype=float))
    idx = np.searchsorted(t, K - NODE_TOL)
    idx = np.clip(idx, 0, len(t) - 1)
    if np.any(np.abs(t[idx] - K) > NODE_TOL):
        raise InputError("starting points must be nodes of the partition")
    return idx


def _shift_index_array(q: ShapeFunction, s: int) -> np.ndarray:
    n = len(q)
    if s == 0:
        return np.arange(n)
    if not q.periodic:
        raise NotPeriodic("a nonzero starting point needs a closed first curve")
    return shifted_indices(n, s)


def _shifted_points(points: np.ndarray, s: int) -> np.ndarray:
    if s == 0:
        return points.copy()
    return points[shifted_indices(len(points), s)]


def _reparametrized(q: ShapeFunction, g: Diffeomorphism) -> np.ndarray:
    """``sqrt(gamma'_l) q(gamma_l)`` with ``q`` read off its cubic spline."""
    return np.sqrt(g.derivative)[:, None] * q2_interpolant(q)(g.gamma)


def _energy(a: np.ndarray, b: np.ndarray, w: np.ndarray) -> float:
    return float(w @ np.sum((a - b) ** 2, axis=1))


def evaluate_energy(t0: float, R: np.ndarray, g: Diffeomorphism, q1: ShapeFunction, q2: ShapeFunction) -> float:
    """``sum_l h'_l |R q1(t0 + t_l) - sqrt(gamma'_l) q2(gamma_l)|^2``.

    ``t0`` off the grid is handled through the periodic spline of ``q1``.
    """
    t = q1.t
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if t0 == 0.0:
        first = q1.values
    else:
        if not q1.periodic:
            raise NotPeriodic("a nonzero starting point needs a periodic q1")
        s = np.searchsorted(t, t0 - NODE_TOL)
        if s < len(t) and abs(t[s] - t0) <= NODE_TOL and q1.partition.uniform:
            first = q1.values[shifted_indices(len(t), int(s))]
        else:
            first = interpolant(t, q1.values, periodic=True)(np.mod(t0 + t, 1.0))
    return _energy(first @ R.T, _reparametrized(q2, g), trapezoid_weights(t))


def _check_pair(q1: ShapeFunction, q2: ShapeFunction) -> None:
    if len(q1) != len(q2) or not np.array_equal(q1.t, q2.t):
        raise InputError("both SRVFs must share one partition")
    if q1.dim != q2.dim:
        raise InputError("SRVFs differ in dimension")


def _registered_points(curve: Optional[Curve], s: int, R: np.ndarray) -> Optional[np.ndarray]:
    if curve is None:
        return None
    return _shifted_points(curve.points, s) @ R.T


def _reparametrized_points(curve: Optional[Curve], g: Diffeomorphism) -> Optional[np.ndarray]:
    if curve is None:
        return None
    return interpolant(curve.partition, curve.points, periodic=curve.closed)(g.gamma)


# ----------------------------------------------------------------------------
# procedures


def procedure1(K, q1: ShapeFunction, q2: ShapeFunction, cfg: PipelineConfig = PipelineConfig(), curve1=None, curve2=None) -> RegistrationResult:
    """Per starting point: rotate, reparametrize the first curve, rotate again."""
    _check_pair(q1, q2)
    t = q1.t
    w = trapezoid_weights(t)
    d = q1.dim
    q1_spline = interpolant(t, q1.values, periodic=q1.periodic)
    best = None
    for s in _node_indices(K, t):
        t0 = float(t[s])
        shifted = q1.values[_shift_index_array(q1, int(s))]
        R = np.eye(d) if d == 1 else ku_rotation(weighted_cross_matrix(q2.values, shifted, w))[0]
        rotated = ShapeFunction(shifted @ R.T, q1.partition, q1.periodic)
        g = adapt_dp(q2, rotated, cfg.dp)
        arg = np.mod(t0 + g.gamma, 1.0) if q1.periodic else g.gamma
        qhat = np.sqrt(g.derivative)[:, None] * q1_spline(arg)
        if d != 1:
            R = ku_rotation(weighted_cross_matrix(q2.values, qhat, w))[0]
        qhat = qhat @ R.T
        E = _energy(qhat, q2.values, w)
        if best is None or E < best[0]:
            best = (E, t0, R, g, qhat)
    E, t0, R, g, qhat = best
    reg1 = None
    if curve1 is not None:
        arg = np.mod(t0 + g.gamma, 1.0) if curve1.closed else g.gamma
        reg1 = interpolant(curve1.partition, curve1.points, periodic=curve1.closed)(arg) @ R.T
    return RegistrationResult(
        t0=t0, rotation=R, gamma=g, energy=E,
        registered_srvf1=qhat, registered_srvf2=q2.values.copy(), partition=t.copy(),
        registered_curve1=reg1,
        registered_curve2=None if curve2 is None else curve2.points.copy(),
    )


def procedure1_prime(q1: ShapeFunction, q2: ShapeFunction, cfg: PipelineConfig = PipelineConfig(), curve1=None, curve2=None) -> RegistrationResult:
    """Open scalar curves on their own partitions: a single DP run."""
    if q1.dim != 1 or q2.dim != 1 or q1.periodic or q2.periodic:
        raise WrongCase("only open curves in one dimension skip the common partition")
    g = adapt_dp(q1, q2, cfg.dp)
    qhat2 = _reparametrized(q2, g)
    w = trapezoid_weights(q1.t)
    return RegistrationResult(
        t0=0.0, rotation=np.ones((1, 1)), gamma=g, energy=_energy(q1.values, qhat2, w),
        registered_srvf1=q1.values.copy(), registered_srvf2=qhat2, partition=q1.t.copy(),
        registered_curve1=None if curve1 is None else curve1.points.copy(),
        registered_curve2=_reparametrized_points(curve2, g),
    )


def _alternate(K, q1, q2, cfg, curve1, curve2, rotations_for) -> RegistrationResult:
    """Repeat loop shared by procedures 2 and 3.

    ``rotations_for(qhat2, shifts)`` returns the ``itop`` best couples
    ``(shift, R)`` for rotating the shifted first SRVF onto ``qhat2``.
    """
    _check_pair(q1, q2)
    t = q1.t
    w = trapezoid_weights(t)
    shifts = _node_indices(K, t)
    if cfg.itop > len(shifts):
        raise InputError(f"itop={cfg.itop} exceeds the {len(shifts)} starting points")
    qhat2 = q2.values
    e_curr = cfg.e_init
    best = None
    history = []
    it = 0
    while True:
        it += 1
        e_prev = e_curr
        e_iter = np.inf
        best_iter_q2 = None
        for s, R in rotations_for(qhat2, shifts):
            qhat1 = q1.values[_shift_index_array(q1, s)] @ R.T
            g = adapt_dp(ShapeFunction(qhat1, q1.partition, q1.periodic), q2, cfg.dp)
            cand_q2 = _reparametrized(q2, g)
            E = _energy(qhat1, cand_q2, w)
            if E < e_iter:
                e_iter, best_iter_q2 = E, cand_q2
            if best is None or E < best[0]:
                best = (E, s, R, g, qhat1, cand_q2)
        e_curr = e_iter
        qhat2 = best_iter_q2
        history.append(e_curr)
        log.debug("iteration %d: energy %.10g", it, e_curr)
        if abs(e_curr - e_prev) < cfg.tol or it > cfg.iten:
            break
    E, s, R, g, qhat1, cand_q2 = best
    return RegistrationResult(
        t0=float(t[s]), rotation=R, gamma=g, energy=E,
        registered_srvf1=qhat1, registered_srvf2=cand_q2, partition=t.copy(),
        registered_curve1=_registered_points(curve1, int(s), R),
        registered_curve2=_reparametrized_points(curve2, g),
        iterations=it, history=tuple(history),
    )


def procedure2(K, q1: ShapeFunction, q2: ShapeFunction, cfg: PipelineConfig = PipelineConfig(), curve1=None, curve2=None) -> RegistrationResult:
    """Alternate a per-starting-point rotation sweep with ``itop`` DP runs."""
    t = q1.t
    w = trapezoid_weights(t)

    def rotations_for(qhat2, shifts):
        scores = []
        for s in shifts:
            shifted = q1.values[_shift_index_array(q1, int(s))]
            R, maxtrace = ku_rotation(weighted_cross_matrix(qhat2, shifted, w))
            scores.append((-maxtrace, int(s), R))
        scores.sort(key=lambda e: (e[0], e[1]))
        return [(s, R) for _, s, R in scores[: cfg.itop]]

    return _alternate(K, q1, q2, cfg, curve1, curve2, rotations_for)


def procedure3(K, q1: ShapeFunction, q2: ShapeFunction, cfg: PipelineConfig = PipelineConfig(), curve1=None, curve2=None) -> RegistrationResult:
    """Procedure 2 with the rotation sweep done for all shifts at once by FFT."""
    if not (q1.periodic and q2.periodic):
        raise NotClosed("the FFT rotation sweep needs two closed curves")

    def rotations_for(qhat2, shifts):
        fixed = ShapeFunction(qhat2, q2.partition, periodic=True)
        return [(c.m, c.rotation) for c in ku2(fixed, q1, shifts, cfg.itop)]

    return _alternate(K, q1, q2, cfg, curve1, curve2, rotations_for)


# ----------------------------------------------------------------------------
# driver


def _prepare(c1: Curve, c2: Curve, cfg: PipelineConfig):
    n1, n2 = normalize(c1), normalize(c2)
    if n1.dim != n2.dim:
        raise InputError(f"curves live in different dimensions ({n1.dim} vs {n2.dim})")
    swapped = (n2.closed and not n1.closed) or (n1.closed and n2.closed and len(n2) > len(n1))
    if swapped:
        n1, n2 = n2, n1
    return n1, n2, swapped


def _compute_one(c1: Curve, c2: Curve, cfg: PipelineConfig) -> RegistrationResult:
    n1, n2, swapped = _prepare(c1, c2, cfg)
    try:
        p = build_common_partition(n1, n2)
    except NoCommonPartitionNeeded:
        if cfg.use_fft:
            raise NotClosed("the FFT rotation sweep needs two closed curves")
        return procedure1_prime(compute_srvf(n1), compute_srvf(n2), cfg, n1, n2)
    r1, r2 = resample(n1, p), resample(n2, p)
    q1, q2 = compute_srvf(r1), compute_srvf(r2)
    K = starting_point_set(r1, r2, p, cfg.stride)
    if cfg.use_fft:
        if not (r1.closed and r2.closed):
            raise NotClosed("the FFT rotation sweep needs two closed curves")
        res = procedure3(K, q1, q2, cfg, r1, r2)
    elif cfg.procedure == 1:
        res = procedure1(K, q1, q2, cfg, r1, r2)
    else:
        res = procedure2(K, q1, q2, cfg, r1, r2)
    return replace(res, swapped=swapped)


def compute_esd(c1: Curve, c2: Curve, cfg: PipelineConfig = PipelineConfig()) -> RegistrationResult:
    """Elastic shape distance and registration of two curves.

    With ``cfg.try_both_directions`` the computation is repeated with the
    second curve reversed and the smaller distance wins.
    """
    res = _compute_one(c1, c2, cfg)
    if cfg.try_both_directions:
        other = _compute_one(c1, reverse_direction(c2), cfg)
        if other.distance < res.distance:
            res = replace(other, direction_reversed=True)
    return res
