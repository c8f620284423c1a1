"""Self-checks behind ``laserprop verify``: operator identities and oracles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid1D, WaveFunction, l2_distance
from .harness import coherent_state, gaussian_packet
from .operators import SymOpSum, apply, materialize_dense, verify_commutator_identities
from .potentials import double_well_1, e1, harmonic, zero_potential, zero_pulse
from .schemes import SCHEME_IDS, Problem, Propagator, SchemeSpec


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def random_bandlimited(grid: Grid1D, band: int, rng: np.random.Generator) -> np.ndarray:
    """Real trigonometric polynomial with modes |m| <= band."""
    n = grid.n_points
    spec = np.zeros(n, dtype=complex)
    spec[0] = rng.normal()
    for m in range(1, band + 1):
        c = rng.normal() + 1j * rng.normal()
        spec[m], spec[-m] = c, np.conj(c)
    return np.fft.ifft(spec).real * n


def random_symopsum(grid: Grid1D, rng: np.random.Generator, max_order: int = 2) -> SymOpSum:
    orders = rng.choice(np.arange(max_order + 1), size=rng.integers(1, max_order + 2))
    terms = [(int(k), rng.normal(size=grid.n_points), float(rng.normal())) for k in orders]
    return SymOpSum.of(grid, *terms)


def check_commutators(seed: int = 0, trials: int = 3, tol: float = 1e-9) -> CheckResult:
    rng = np.random.default_rng(seed)
    grid = Grid1D(-np.pi, np.pi, 64)
    worst = 0.0
    for _ in range(trials):
        mu = random_bandlimited(grid, 4, rng)
        q = random_bandlimited(grid, 4, rng)
        worst = max(worst, verify_commutator_identities(mu, grid, q).max_error)
    return CheckResult("commutator identities", worst <= tol, f"max relative error {worst:.2e}")


def check_matvec(seed: int = 0, count: int = 50, tol: float = 1e-11) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst, bad_counts = 0.0, 0
    for j in range(count):
        grid = Grid1D(0.0, 2 * np.pi, (16, 32, 64)[j % 3])
        op = random_symopsum(grid, rng)
        v = rng.normal(size=grid.n_points) + 1j * rng.normal(size=grid.n_points)
        before = grid.counter.count
        fast = apply(op, WaveFunction(v, grid)).values
        bad_counts += grid.counter.count - before != op.transform_cost
        dense = materialize_dense(op) @ v
        worst = max(worst, np.linalg.norm(fast - dense) / max(np.linalg.norm(dense), 1e-300))
    ok = worst <= tol and bad_counts == 0
    return CheckResult("fast matvec vs dense", ok,
                       f"max relative error {worst:.2e}, {bad_counts} transform-count mismatches")


def check_free_evolution(tol: float = 1e-12) -> CheckResult:
    grid = Grid1D(-10.0, 10.0, 128)
    eps, T = 0.5, 0.3
    u0 = gaussian_packet(grid, 0.0, 0.5)
    kap = grid.wavenumbers
    exact = WaveFunction(np.fft.ifft(np.exp(-1j * eps * kap**2 * T) * np.fft.fft(u0.values)), grid)
    problem = Problem.laser(grid, zero_potential(), zero_pulse())
    worst = max(
        l2_distance(Propagator(problem, SchemeSpec(sid, eps)).run(u0, 0.0, T, 0.01), exact)
        for sid in SCHEME_IDS
    )
    return CheckResult("free evolution, all schemes", worst <= tol, f"max L2 error {worst:.2e}")


def check_coherent_state(tol: float = 1e-8) -> CheckResult:
    omega, eps, x0, T = 2.0, 0.2, -1.5, 1.0
    grid = Grid1D(-8.0, 8.0, 256)
    start = coherent_state(grid, 0.0, omega, eps, x0)
    # the same discrete normalisation at both ends keeps the comparison unitary
    scale = start.norm()
    u0 = WaveFunction(start.values / scale, grid)
    exact = WaveFunction(coherent_state(grid, T, omega, eps, x0).values / scale, grid)
    problem = Problem.laser(grid, harmonic(omega), zero_pulse())
    u = Propagator(problem, SchemeSpec("MaCC", eps)).run(u0, 0.0, T, 1 / 800)
    err = l2_distance(u, exact)
    return CheckResult("harmonic coherent state", err <= tol, f"L2 error {err:.2e}")


def check_unitarity(tol: float = 1e-11) -> CheckResult:
    grid = Grid1D(-10.0, 10.0, 96)
    problem = Problem.laser(grid, double_well_1(), e1())
    u0 = gaussian_packet(grid, -2.5, 0.2)
    worst = 0.0
    for sid in SCHEME_IDS:
        u = Propagator(problem, SchemeSpec(sid, 1.0, keep_fourth_order_term=True)).run(
            u0, 0.0, 0.2, 1e-3)
        worst = max(worst, abs(u.norm() - 1.0))
    return CheckResult("norm conservation, all schemes", worst <= tol, f"max drift {worst:.2e}")


CHECKS = (check_commutators, check_matvec, check_free_evolution, check_coherent_state,
          check_unitarity)


def run_checks() -> list[CheckResult]:
    return [check() for check in CHECKS]
