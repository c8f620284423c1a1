"""Shared fixtures and independent raw-numpy oracles."""

from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg

# acceptance criteria report: number -> (passed, detail)
CRITERIA: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- oracles built from numpy alone, without the package's kernels -------------


def wavenumbers(a: float, b: float, n: int) -> np.ndarray:
    return 2 * np.pi * np.fft.fftfreq(n, d=(b - a) / n)


def nodes(a: float, b: float, n: int) -> np.ndarray:
    return a + (b - a) * np.arange(n) / n


def kinetic_flow(u: np.ndarray, kappa: np.ndarray, tau: float) -> np.ndarray:
    """exp(i tau d_xx) u by FFT."""
    return np.fft.ifft(np.exp(-1j * tau * kappa**2) * np.fft.fft(u))


def static_chin_chen(u, V, dV, kappa, h, eps):
    """One step of the classical Chin-Chen splitting for i eps u_t = (-eps^2 d_xx + V) u."""
    V_hat = V - (h**2 / 24) * dV**2
    u = np.exp(-1j * h * V / (6 * eps)) * u
    u = kinetic_flow(u, kappa, 0.5 * h * eps)
    u = np.exp(-1j * 2 * h * V_hat / (3 * eps)) * u
    u = kinetic_flow(u, kappa, 0.5 * h * eps)
    return np.exp(-1j * h * V / (6 * eps)) * u


BM_A = (0.0792036964311957, 0.353172906049774, -0.0420650803577195)
BM_B = (0.209515106613362, -0.143851773179818)


def static_blanes_moan(u, V, kappa, h, eps):
    """One step of the Blanes-Moan order-four splitting, kinetic stages outermost."""
    a1, a2, a3 = BM_A
    a4 = 1 - 2 * (a1 + a2 + a3)
    b1, b2 = BM_B
    b3 = 0.5 - b1 - b2
    a = (a1, a2, a3, a4, a3, a2, a1)
    b = (b1, b2, b3, b3, b2, b1)
    for j in range(6):
        u = kinetic_flow(u, kappa, a[j] * h * eps)
        u = np.exp(-1j * b[j] * h * V / eps) * u
    return kinetic_flow(u, kappa, a[6] * h * eps)


def dense_derivative(kappa: np.ndarray, k: int) -> np.ndarray:
    """Dense spectral k-th derivative matrix with the Nyquist mode of odd orders removed."""
    n = kappa.size
    sym = (1j * kappa) ** k
    if k % 2:
        sym[n // 2] = 0
    F = np.fft.fft(np.eye(n), axis=0)
    return np.fft.ifft(sym[:, None] * F, axis=0)


def dense_sym(f: np.ndarray, K: np.ndarray) -> np.ndarray:
    D = np.diag(f)
    return 0.5 * (D @ K + K @ D)


def static_zassenhaus(u, V, dV, d2V, d4V, kappa, h, eps, keep_fourth=True):
    """Symmetric Zassenhaus step for a time-independent V with a dense inner exponential.

    exp(W0/2) exp(W1/2) exp(W2) exp(W1/2) exp(W0/2) with W0 = i h eps d_xx,
    W1 = -i h V / eps and
    W2 = i h^3/(6 eps) V'^2 + i h^3 eps/6 <V''>_2 [- i h^3 eps/24 V''''].
    """
    K2 = dense_derivative(kappa, 2)
    f0 = h**3 / (6 * eps) * dV**2
    if keep_fourth:
        f0 = f0 - h**3 * eps / 24 * d4V
    W2 = 1j * np.diag(f0) + 1j * (h**3 * eps / 6) * dense_sym(d2V, K2)
    u = kinetic_flow(u, kappa, 0.5 * h * eps)
    u = np.exp(-0.5j * h * V / eps) * u
    u = scipy.linalg.expm(W2) @ u
    u = np.exp(-0.5j * h * V / eps) * u
    return kinetic_flow(u, kappa, 0.5 * h * eps)
