import numpy as np
import pytest

from esdist.curve_model import Curve

_RESULTS = []


def helix_z(loops: int, n: int) -> Curve:
    T = 2 * np.pi * loops
    s = np.linspace(0.0, T, n)
    return Curve(np.column_stack([np.cos(s), np.sin(s), s]), s / T, False)


def helix_x(loops: int, n: int) -> Curve:
    T = 2 * np.pi * loops
    s = np.linspace(0.0, T, n)
    return Curve(np.column_stack([s, np.cos(s), np.sin(s)]), s / T, False)


def ellipsoid_z(n: int, r=2.0, a=1.3, b=1.0, warp=0.03) -> Curve:
    """Spherical ellipse about +z on a nonuniform partition of [0, 2pi]."""
    u = np.linspace(0.0, 1.0, n)
    s = 2 * np.pi * (u + warp * np.sin(2 * np.pi * u))
    x, y = a * np.cos(s), b * np.sin(s)
    pts = np.column_stack([x, y, np.sqrt(r**2 - x**2 - y**2)])
    pts[-1] = pts[0]
    return Curve(pts, s / (2 * np.pi), True)


def ellipsoid_x(n: int, r=2.0, a=1.0, b=1.3) -> Curve:
    """Spherical ellipse about +x on a uniform partition of [0, 2pi]."""
    s = np.linspace(0.0, 2 * np.pi, n)
    y, z = a * np.cos(s), b * np.sin(s)
    pts = np.column_stack([np.sqrt(r**2 - y**2 - z**2), y, z])
    pts[-1] = pts[0]
    return Curve(pts, s / (2 * np.pi), True)


def random_closed_curve(rng, n: int, d: int = 3, modes: int = 3) -> Curve:
    """Smooth random closed curve from a few Fourier modes, uniform partition."""
    t = np.linspace(0.0, 1.0, n)
    pts = np.zeros((n, d))
    for k in range(1, modes + 1):
        a = rng.normal(size=d) / k**1.5
        b = rng.normal(size=d) / k**1.5
        pts += np.outer(np.cos(2 * np.pi * k * t), a) + np.outer(np.sin(2 * np.pi * k * t), b)
    pts[-1] = pts[0]
    return Curve(pts, t, True)


def random_open_curve(rng, n: int, d: int = 3) -> Curve:
    t = np.linspace(0.0, 1.0, n)
    pts = np.outer(t, rng.normal(size=d))
    for k in range(1, 4):
        pts += np.outer(np.sin(np.pi * k * t), rng.normal(size=d)) / k**2
    return Curve(pts, t, False)


def random_rotation(rng, d: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(d, d)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def criterion():
    """Record an acceptance outcome; a summary line per criterion is printed at the end."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        _RESULTS.append((label, bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
