"""Acceptance criteria 1-11 at their stated tolerances.

Each test records one PASS/FAIL line (shown in the terminal summary) and then
asserts, so a shortfall is reported with the measured numbers.
"""
import time

import numpy as np
import pytest

import test_properties
from conftest import ellipsoid_x, ellipsoid_z, helix_x, helix_z, random_closed_curve, random_rotation
from esdist.curve_model import PartitionSpec, normalize, reverse_direction
from esdist.dp_registration import DpConfig, adapt_dp
from esdist.fft_rotation import circular_cross_matrices, ku2
from esdist.pipeline import PipelineConfig, compute_esd, procedure2, procedure3
from esdist.rotation_alignment import cross_matrix, fit_rigid_motion, ku_rotation
from esdist.srvf import ShapeFunction, compute_srvf, shift
from oracles import full_dp_energy

PERMUTATION = np.array([[0.0, 0, 1], [1, 0, 0], [0, 1, 0]])


def timed(fn, *args, **kw):
    start = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - start


def direct_cross_matrices(q1, q2):
    a, b = q1.values[:-1], q2.values[:-1]
    n = len(a)
    return np.stack([a.T @ np.roll(b, -m, axis=0) for m in range(n)]) / n


def closed_srvfs(rng, n):
    return compute_srvf(normalize(random_closed_curve(rng, n))), compute_srvf(normalize(random_closed_curve(rng, n)))


@pytest.fixture(scope="module")
def helix_runs():
    first = helix_z(3, 451)
    runs = {}
    for loops, n in [(3, 451), (4, 601), (5, 751)]:
        second = helix_x(3, n) if loops == 3 else helix_z(loops, n)
        runs[loops] = timed(compute_esd, first, second)
    return runs


def test_criterion_01_helix_distances(criterion, helix_runs):
    targets = {3: (0.0, 0.01), 4: (0.48221, 0.03), 5: (0.60352, 0.03)}
    parts, ok = [], True
    for loops, (target, tol) in targets.items():
        res, sec = helix_runs[loops]
        good = abs(res.distance - target) <= tol and sec <= 120
        ok &= good
        parts.append(f"3v{loops}: {res.distance:.5f} (target {target}±{tol}, {sec:.1f}s)")
    assert criterion("1 helix distances", ok, "; ".join(parts)), parts


def test_criterion_02_helix_rotation(criterion, helix_runs):
    R = helix_runs[3][0].rotation
    err = float(np.max(np.abs(R - PERMUTATION)))
    assert criterion("2 helix rotation", err <= 0.05, f"max entry error {err:.2e}"), R


@pytest.fixture(scope="module")
def ellipsoid_runs():
    c1, c2 = ellipsoid_z(1001), ellipsoid_x(901)
    return {
        "p2": compute_esd(c1, c2),
        "p3": compute_esd(c1, c2, PipelineConfig(use_fft=True)),
        "rev": compute_esd(reverse_direction(c1), c2, PipelineConfig(use_fft=True)),
        "both": compute_esd(reverse_direction(c1), c2, PipelineConfig(use_fft=True, try_both_directions=True)),
    }


def test_criterion_03_ellipsoids(criterion, ellipsoid_runs):
    p2, p3 = ellipsoid_runs["p2"], ellipsoid_runs["p3"]
    ok = (
        p2.distance <= 0.02
        and p3.distance <= 0.02
        and abs(p2.distance - p3.distance) <= 1e-6
        and p2.iterations <= 3
        and p3.iterations <= 3
    )
    detail = f"p2 {p2.distance:.2e} ({p2.iterations} it), p3 {p3.distance:.2e} ({p3.iterations} it)"
    assert criterion("3 ellipsoids", ok, detail), detail


def test_criterion_04_direction_reversal(criterion, ellipsoid_runs):
    rev, both = ellipsoid_runs["rev"].distance, ellipsoid_runs["both"].distance
    ok = abs(rev - 0.195) <= 0.03 and both <= 0.02 and ellipsoid_runs["both"].direction_reversed
    detail = f"reversed {rev:.4f} (target 0.195±0.03), both directions {both:.2e}"
    assert criterion("4 direction reversal", ok, detail), detail


def test_criterion_05_fft_equivalence(criterion):
    rng = np.random.default_rng(5)
    worst_A, worst_d = 0.0, 0.0
    for n in (65, 257, 1025):
        for _ in range(20):
            q1, q2 = closed_srvfs(rng, n)
            A = circular_cross_matrices(q1, q2)
            worst_A = max(worst_A, float(np.max(np.abs(A / (n - 1) - direct_cross_matrices(q1, q2)))))
            K = q1.t[:-1]
            d2 = procedure2(K, q1, q2).distance
            d3 = procedure3(K, q1, q2).distance
            worst_d = max(worst_d, abs(d2 - d3))
    ok = worst_A <= 1e-9 and worst_d <= 1e-8
    detail = f"max |A_fft - A_direct| {worst_A:.1e}, max |d3 - d2| {worst_d:.1e}"
    assert criterion("5 FFT equivalence", ok, detail), detail


def test_criterion_06_fft_speedup(criterion):
    rng = np.random.default_rng(6)
    n = 16385
    q1, q2 = closed_srvfs(rng, n)

    def loop():
        return [ku_rotation(cross_matrix(q1, shift(q2, m))) for m in range(n - 1)]

    fast = min(timed(ku2, q1, q2)[1] for _ in range(3))
    slow = timed(loop)[1]
    ratio = slow / fast
    assert criterion("6 FFT speedup", ratio >= 10, f"per-shift {slow:.2f}s vs ku2 {fast:.3f}s ({ratio:.0f}x)"), ratio


def test_criterion_07_adapt_dp_linear(criterion):
    def analytic(n):
        t = np.linspace(0, 1, n)
        q1 = np.column_stack([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t), 1 + 0.5 * t])
        s = t + 0.1 * np.sin(2 * np.pi * t) / (2 * np.pi)
        q2 = np.column_stack([np.cos(2 * np.pi * s), np.sin(2 * np.pi * s), 1 + 0.5 * s**2])
        p = PartitionSpec.uniform_of_size(n)
        return ShapeFunction(q1, p), ShapeFunction(q2, p)

    sizes = [1025, 2049, 4097, 8193]
    pairs = {n: analytic(n) for n in sizes}
    adapt_dp(*pairs[sizes[0]])  # compile
    times = {n: min(timed(adapt_dp, *pairs[n])[1] for _ in range(3)) for n in sizes}
    ratios = [times[b] / times[a] for a, b in zip(sizes[:-1], sizes[1:])]
    ok = max(ratios) <= 2.5
    detail = "ratios " + ", ".join(f"{r:.2f}" for r in ratios)
    assert criterion("7 adapt-DP linearity", ok, detail), detail


def test_criterion_08_small_dp_optimal(criterion):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(3, 18))
        d = int(rng.integers(1, 4))
        t = np.linspace(0, 1, n)
        p = PartitionSpec.from_values(t)
        v1, v2 = np.zeros((n, d)), np.zeros((n, d))
        for k in range(1, 4):
            v1 += np.outer(np.sin(np.pi * k * t), rng.normal(size=d)) / k
            v2 += np.outer(np.cos(np.pi * k * t), rng.normal(size=d)) / k
        q1, q2 = ShapeFunction(v1, p), ShapeFunction(v2, p)
        got = adapt_dp(q1, q2, DpConfig(layrs=16, lstrp=16)).energy
        worst = max(worst, abs(got - full_dp_energy(q1, q2)))
    assert criterion("8 small DP optimality", worst <= 1e-10, f"max gap {worst:.1e}"), worst


def _sample_rotations(rng, d, count):
    Q, R = np.linalg.qr(rng.normal(size=(count, d, d)))
    Q = Q * np.sign(np.diagonal(R, axis1=1, axis2=2))[:, None, :]
    flip = np.linalg.det(Q) < 0
    Q[flip, :, 0] *= -1
    return Q


def test_criterion_09_ku_optimal(criterion):
    rng = np.random.default_rng(9)
    samples = {d: _sample_rotations(rng, d, 100_000) for d in (2, 3, 5)}
    worst_gap, worst_sv = -np.inf, 0.0
    for i in range(100):
        d = (2, 3, 5)[i % 3]
        A = rng.normal(size=(d, d))
        _, mt = ku_rotation(A)
        worst_gap = max(worst_gap, float(np.max(np.einsum("nij,ij->n", samples[d], A))) - mt)
        U, s, Vt = np.linalg.svd(A)
        expected = s.sum() if np.linalg.det(U @ Vt) > 0 else s[:-1].sum() - s[-1]
        worst_sv = max(worst_sv, abs(mt - expected))
    ok = worst_gap <= 1e-9 and worst_sv <= 1e-10
    detail = f"max sampled excess {worst_gap:.2e}, singular-value formula error {worst_sv:.1e}"
    assert criterion("9 KU optimality", ok, detail), detail


def test_criterion_10_rigid_motion(criterion):
    rng = np.random.default_rng(10)
    worst_R, worst_res, beaten = 0.0, 0.0, 0
    for _ in range(50):
        n = int(rng.integers(4, 60))
        x = rng.normal(size=(n, 3))
        R0, t0 = random_rotation(rng, 3), rng.normal(size=3) * 5
        w = rng.uniform(0.2, 1, n)
        motion, res = fit_rigid_motion(x @ R0.T + t0, x, w)
        worst_R = max(worst_R, np.max(np.abs(motion.rotation - R0)), np.max(np.abs(motion.translation - t0)))
        worst_res = max(worst_res, res)
        # noisy target: the fit must beat random rigid motions
        y = x @ R0.T + t0 + rng.normal(scale=0.1, size=x.shape)
        _, best = fit_rigid_motion(y, x, w)
        Qs = _sample_rotations(rng, 3, 10_000)
        ts = t0 + rng.normal(scale=0.5, size=(10_000, 3))
        moved = np.einsum("kij,nj->kni", Qs, x) + ts[:, None, :]
        wn = w / w.sum()
        others = np.einsum("n,kn->k", wn, np.sum((y[None] - moved) ** 2, axis=2))
        beaten += int(best <= others.min())
    ok = worst_R <= 1e-9 and worst_res <= 1e-18 and beaten == 50
    detail = f"max parameter error {worst_R:.1e}, max residual {worst_res:.1e}, noisy fits optimal {beaten}/50"
    assert criterion("10 rigid motion", ok, detail), detail


def test_criterion_11_invariant_suite(criterion):
    failures = []
    for prop in test_properties.ALL_PROPERTIES:
        try:
            prop()
        except Exception as exc:  # noqa: BLE001 - report every failing property
            failures.append(f"{prop.__name__}: {type(exc).__name__}")
    detail = f"{len(test_properties.ALL_PROPERTIES) - len(failures)}/{len(test_properties.ALL_PROPERTIES)} properties"
    if failures:
        detail += " failing " + ", ".join(failures)
    assert criterion("11 invariant suite", not failures, detail), failures
