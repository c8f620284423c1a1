"""Symmetrised differential operators and their sums.

``<f>_k = (f d^k + d^k f) / 2``.  A :class:`SymOpSum` represents

    sum_t coeff_t * i**(k_t + 1) * <f_t>_{k_t},

which is skew-Hermitian after spectral discretisation whenever every ``f`` and
``coeff`` is real.  Application uses the shared-transform form: all k >= 1
terms share one forward transform of ``v`` and one inverse transform of the
summed spectrum, plus one transform each for their remaining half.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid1D, WaveFunction, make_symbol

DENSE_LIMIT = 256


@dataclass(frozen=True)
class SymTerm:
    k: int
    f: np.ndarray
    coeff: float = 1.0


@dataclass(frozen=True, eq=False)
class SymOpSum:
    grid: Grid1D
    terms: tuple[SymTerm, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for term in self.terms:
            if term.k < 0:
                raise ValueError("operator order must be non-negative")
            if np.shape(term.f) != (self.grid.n_points,):
                raise ValueError("coefficient function must be sampled on the grid")

    @classmethod
    def of(cls, grid: Grid1D, *terms: tuple) -> "SymOpSum":
        """Build from ``(k, f)`` or ``(k, f, coeff)`` tuples."""
        return cls(grid, tuple(SymTerm(*t) for t in terms))

    @property
    def transform_cost(self) -> int:
        n_diff = sum(1 for t in self.terms if t.k >= 1)
        return 2 * n_diff + 2 if n_diff else 0


def apply(op: SymOpSum, u: WaveFunction) -> WaveFunction:
    grid = op.grid
    if not grid.same_geometry(u.grid):
        raise ValueError("operator and state live on different grids")
    v = u.values
    out = np.zeros(grid.n_points, dtype=complex)
    diff_terms = []
    for t in op.terms:
        if t.k == 0:
            out += 1j * t.coeff * t.f * v
        else:
            diff_terms.append(t)
    if diff_terms:
        v_hat = grid.fft(v)
        spectrum = np.zeros(grid.n_points, dtype=complex)
        for t in diff_terms:
            c = grid.symbol(t.k).values
            pref = 0.5 * t.coeff * 1j ** (t.k + 1)
            out += pref * t.f * grid.ifft(c * v_hat)
            spectrum += pref * c * grid.fft(t.f * v)
        out += grid.ifft(spectrum)
    return WaveFunction(out, u.grid)


def differentiation_matrix(grid: Grid1D, k: int) -> np.ndarray:
    """Dense K_k = F^-1 D_{c_k} F, built column by column."""
    _check_dense(grid)
    c = make_symbol(grid, k).values
    eye = np.eye(grid.n_points)
    return np.fft.ifft(c[:, None] * np.fft.fft(eye, axis=0), axis=0)


def sym_dense(grid: Grid1D, f: np.ndarray, k: int) -> np.ndarray:
    """Dense <f>_k without the i**(k+1) prefactor."""
    K = differentiation_matrix(grid, k)
    D = np.diag(np.asarray(f, dtype=complex))
    return 0.5 * (D @ K + K @ D)


def materialize_dense(op: SymOpSum) -> np.ndarray:
    grid = op.grid
    _check_dense(grid)
    A = np.zeros((grid.n_points, grid.n_points), dtype=complex)
    for t in op.terms:
        A += t.coeff * 1j ** (t.k + 1) * sym_dense(grid, t.f, t.k)
    return A


def _check_dense(grid: Grid1D) -> None:
    if grid.n_points > DENSE_LIMIT:
        raise ValueError(f"dense materialisation limited to n_points <= {DENSE_LIMIT}")


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def spectral_derivative(f: np.ndarray, grid: Grid1D, k: int) -> np.ndarray:
    """Real-valued spectral derivative of real samples (no transform counting)."""
    c = make_symbol(grid, k).values
    return np.fft.ifft(c * np.fft.fft(f)).real


def bandwidth(f: np.ndarray, grid: Grid1D, rtol: float = 1e-12) -> int:
    """Largest |mode| carrying a non-negligible share of ``f``."""
    f_hat = np.abs(np.fft.fft(f))
    scale = max(f_hat.max(), np.finfo(float).tiny)
    active = grid.mode_numbers[f_hat > rtol * scale]
    return int(np.abs(active).max()) if active.size else 0


@dataclass
class IdentityReport:
    """Relative errors of the four commutator identities, in printed order."""

    errors: tuple[float, float, float, float]
    band: int

    @property
    def max_error(self) -> float:
        return max(self.errors)


def verify_commutator_identities(mu: np.ndarray, grid: Grid1D,
                                 mu11: np.ndarray | None = None) -> IdentityReport:
    """Check the four nested-commutator simplifications on the grid.

        [<m>_0, <1>_2]                 = -2 <m'>_1
        [[<m>_0, <1>_2], <1>_2]        = 4 <m''>_2 - <m''''>_0
        [<q'>_1, <1>_2]                = -2 <q''>_2 + 1/2 <q''''>_0
        [[<m>_0, <1>_2], <m>_0]        = -2 <(m')^2>_0

    with ``m = mu`` and ``q = mu11`` (defaults to ``mu``).  Products of grid
    functions alias, so both sides are compared on the subspace of modes
    ``|m| <= n/2 - 2B - 1`` where B is the bandwidth of the inputs; on that
    subspace the identities are exact up to round-off.
    """
    mu = np.asarray(mu, dtype=float)
    q = mu if mu11 is None else np.asarray(mu11, dtype=float)
    band = max(bandwidth(mu, grid), bandwidth(q, grid))
    if band > grid.n_points // 4:
        raise ValueError(
            f"inputs carry modes up to {band}; at most n/4 = {grid.n_points // 4} allowed"
        )
    keep = grid.n_points // 2 - 2 * band - 1
    if keep < 1:
        raise ValueError("grid too coarse for the input bandwidth")

    d = lambda f, k: spectral_derivative(f, grid, k)  # noqa: E731
    S = lambda f, k: sym_dense(grid, f, k)  # noqa: E731
    lap = differentiation_matrix(grid, 2)
    M = S(mu, 0)
    dq = d(q, 1)

    c1 = commutator(M, lap)
    Q = S(dq, 1)
    pairs = [
        (c1, -2 * S(d(mu, 1), 1)),
        (commutator(c1, lap), 4 * S(d(mu, 2), 2) - S(d(mu, 4), 0)),
        (commutator(Q, lap), -2 * S(d(q, 2), 2) + 0.5 * S(d(q, 4), 0)),
        (commutator(c1, M), -2 * S(d(mu, 1) ** 2, 0)),
    ]
    # size of the products inside each commutator, used when both sides
    # vanish (e.g. constant mu) so that noise is not divided by noise
    nm, nl, nq = (np.linalg.norm(A, 2) for A in (M, lap, Q))
    factors = (nm * nl, nm * nl**2, nq * nl, nm**2 * nl)

    low = np.abs(grid.mode_numbers) <= keep
    basis = np.fft.ifft(np.eye(grid.n_points)[:, low], axis=0)
    unit = np.linalg.norm(basis)
    errors = []
    for (lhs, rhs), size in zip(pairs, factors):
        L, R = lhs @ basis, rhs @ basis
        natural = size * unit
        scale = max(np.linalg.norm(L), np.linalg.norm(R))
        if scale <= grid.n_points * np.finfo(float).eps * natural:
            # both sides are round-off: compare against the factors instead
            scale = natural
        diff = np.linalg.norm(L - R)
        errors.append(float(diff / scale) if scale > 0 else 0.0)
    return IdentityReport(tuple(errors), band)


def commutator_size_table(epsilons=(1.0, 0.1, 0.02), n_points: int = 256,
                          domain=(-np.pi, np.pi)) -> list[dict]:
    """Spectral norms of nested commutators as epsilon shrinks (diagnostic).

    Uses mu = cos(x), a kinetic part eps * d^2 and a potential part mu / eps,
    restricted to modes |m| <= 1/eps (the wave numbers a semiclassical state
    actually excites).  Reports the norms multiplied by eps so that the
    O(1/eps) bound of the size analysis shows up as a bounded column.
    """
    grid = Grid1D(domain[0], domain[1], n_points)
    x = grid.nodes
    mu = np.cos(x)
    lap = differentiation_matrix(grid, 2)
    rows = []
    for eps in epsilons:
        keep = min(int(np.ceil(1 / eps)), grid.n_points // 2 - 3)
        low = np.abs(grid.mode_numbers) <= keep
        P = np.fft.ifft(np.eye(grid.n_points)[:, low], axis=0)
        kin, pot = eps * lap, np.diag(mu / eps).astype(complex)
        grade2 = commutator(kin, pot)
        grade3 = commutator(grade2, kin)
        grade3b = commutator(grade2, pot)
        gsym = eps * sym_dense(grid, np.sin(x), 2)
        rows.append({
            "epsilon": eps,
            "modes": keep,
            "eps*|[K,V]|": eps * np.linalg.norm(grade2 @ P, 2),
            "eps*|[[K,V],K]|": eps * np.linalg.norm(grade3 @ P, 2),
            "eps*|[[K,V],V]|": eps * np.linalg.norm(grade3b @ P, 2),
            "eps*|eps<f>_2|": eps * np.linalg.norm(gsym @ P, 2),
        })
    return rows
