"""Lanczos approximation of exp(iH) v for Hermitian H given as a matvec."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal


class KrylovError(RuntimeError):
    pass


@dataclass(frozen=True)
class KrylovConfig:
    """``fixed_iters`` switches off the a-posteriori stopping rule."""

    max_iters: int = 12
    tol: float = 1e-12
    reorthogonalize: bool = True
    fixed_iters: int | None = None

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.fixed_iters is not None and self.fixed_iters < 1:
            raise ValueError("fixed_iters must be at least 1")


@dataclass
class KrylovResult:
    vector: np.ndarray
    iterations: int
    matvecs: int
    error_estimate: float
    converged: bool
    breakdown: bool = False


def expm_tridiag(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """exp(iT) for the real symmetric tridiagonal T = tridiag(beta, alpha, beta)."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.size == 1:
        return np.exp(1j * alpha).reshape(1, 1)
    # the implicit-QR driver keeps Q orthogonal to a few ulps, which the
    # default (relatively robust representations) does not
    theta, Q = eigh_tridiagonal(alpha, np.asarray(beta, dtype=float), lapack_driver="stev")
    return (Q * np.exp(1j * theta)) @ Q.T


def expm_krylov(matvec: Callable[[np.ndarray], np.ndarray], v: np.ndarray,
                config: KrylovConfig = KrylovConfig()) -> KrylovResult:
    """Approximate exp(iH) v by beta * V_m exp(iT_m) e_1.

    Stops after ``config.fixed_iters`` steps if set; otherwise as soon as the
    estimate |beta * t_{m+1,m} * [exp(iT_m)]_{m,1}| drops below ``tol * |v|``,
    on breakdown (the Krylov space is invariant and the result exact), or at
    ``max_iters``.  The result is not renormalised.
    """
    v = np.asarray(v, dtype=complex)
    beta0 = np.linalg.norm(v)
    if beta0 == 0:
        return KrylovResult(np.zeros_like(v), 0, 0, 0.0, True)
    m_max = config.fixed_iters or config.max_iters
    n = v.size
    basis = np.zeros((m_max + 1, n), dtype=complex)
    alpha = np.zeros(m_max)
    beta = np.zeros(m_max)
    basis[0] = v / beta0
    # relative size below which the next Lanczos vector counts as zero
    breakdown_tol = 1e-14

    m = 0
    estimate = np.inf
    breakdown = False
    scale = 0.0
    for j in range(m_max):
        w = np.asarray(matvec(basis[j]), dtype=complex)
        if not np.all(np.isfinite(w)):
            raise KrylovError(f"non-finite matvec output at Lanczos step {j + 1}")
        alpha[j] = np.vdot(basis[j], w).real
        w = w - alpha[j] * basis[j]
        if j > 0:
            w = w - beta[j - 1] * basis[j - 1]
        if config.reorthogonalize:
            w = w - basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        m = j + 1
        scale = max(scale, abs(alpha[j]), beta[j])
        if beta[j] <= breakdown_tol * max(scale, 1.0):
            breakdown = True
            estimate = 0.0
            break
        basis[j + 1] = w / beta[j]
        if config.fixed_iters is None:
            E = expm_tridiag(alpha[:m], beta[: m - 1])
            estimate = abs(beta0 * beta[j] * E[m - 1, 0])
            if estimate < config.tol * beta0:
                break

    E = expm_tridiag(alpha[:m], beta[: m - 1])
    if config.fixed_iters is not None and not breakdown:
        estimate = abs(beta0 * beta[m - 1] * E[m - 1, 0])
    if m == 1:
        # one-dimensional Krylov space: exp(i alpha) v, without rescaling round-off
        out = E[0, 0] * v
    else:
        out = beta0 * (basis[:m].T @ E[:, 0])
    converged = breakdown or estimate < config.tol * beta0
    return KrylovResult(out, m, m, float(estimate), bool(converged), breakdown)
