"""One-step propagators for i eps u_t = (-eps^2 d_xx + V) u.

Laser schemes (``V = V0 + e(t) x``) work with the fourth-order Magnus
exponent

    ih eps d_xx - ih/eps V~ - s d_x,      V~ = V0 + r x,

and differ only in how it is split:

* ``MaStBM``   translation half-steps around a Blanes-Moan product,
* ``MaStBMc``  the same with each translation merged into the adjacent
               kinetic factor (one circulant kernel instead of two),
* ``MaStCC``   translation half-steps around a Chin-Chen product,
* ``MaCC``     Chin-Chen applied directly, translation carried by both
               kinetic factors.

``MZ2`` and ``MZ4`` handle a general V(x, t) through grid moments; MZ4's
innermost exponent is neither diagonal nor circulant and goes through
Lanczos.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid1D, WaveFunction, exp_circulant, exp_diagonal
from .lanczos import KrylovConfig, KrylovError, KrylovResult, expm_krylov
from .moments import (
    GridMoments,
    QuadratureRule,
    ScalarMoments,
    gauss_legendre,
    grid_moments,
    sample_separable,
    scalar_moments,
)
from .operators import SymOpSum, SymTerm, apply
from .potentials import LaserPulse, StaticPotential, TimeDependentPotential, laser_potential

SCHEME_IDS = ("MZ2", "MZ4", "MaStBM", "MaStBMc", "MaStCC", "MaCC")
LASER_SCHEMES = ("MaStBM", "MaStBMc", "MaStCC", "MaCC")

# Blanes-Moan order-four splitting, symmetric, seven kinetic stages
BM_A1 = 0.0792036964311957
BM_A2 = 0.353172906049774
BM_A3 = -0.0420650803577195
BM_A4 = 1 - 2 * (BM_A1 + BM_A2 + BM_A3)
BM_B1 = 0.209515106613362
BM_B2 = -0.143851773179818
BM_B3 = 0.5 - BM_B1 - BM_B2

BM_SEQUENCE = (
    ("X", BM_A1), ("Y", BM_B1), ("X", BM_A2), ("Y", BM_B2), ("X", BM_A3), ("Y", BM_B3),
    ("X", BM_A4),
    ("Y", BM_B3), ("X", BM_A3), ("Y", BM_B2), ("X", BM_A2), ("Y", BM_B1), ("X", BM_A1),
)


@dataclass(frozen=True)
class SchemeSpec:
    id: str
    epsilon: float = 1.0
    quad: QuadratureRule = field(default_factory=lambda: gauss_legendre(3))
    krylov: KrylovConfig = field(default_factory=KrylovConfig)
    fuse_boundary: bool = False
    # MZ4: keep -(1/24) i h^2 eps <d^4 mu00>_0, which is O(h^3) when eps ~ 1
    keep_fourth_order_term: bool = False
    closed_form_moments: bool = True
    # cut steps at pulse discontinuities
    align_breakpoints: bool = True

    def __post_init__(self) -> None:
        if self.id not in SCHEME_IDS:
            raise ValueError(f"unknown scheme {self.id!r}; choose from {SCHEME_IDS}")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class Problem:
    """Grid plus potential.  Laser problems also keep V0 and e(t) apart."""

    grid: Grid1D
    potential: TimeDependentPotential
    V0: StaticPotential | None = None
    pulse: LaserPulse | None = None

    @classmethod
    def laser(cls, grid: Grid1D, V0: StaticPotential, pulse: LaserPulse) -> "Problem":
        return cls(grid, laser_potential(V0, pulse), V0, pulse)

    @classmethod
    def general(cls, grid: Grid1D, potential: TimeDependentPotential) -> "Problem":
        return cls(grid, potential)

    @property
    def is_laser(self) -> bool:
        return self.V0 is not None

    def with_grid(self, grid: Grid1D) -> "Problem":
        return Problem(grid, self.potential, self.V0, self.pulse)


@dataclass(eq=False)
class StepContext:
    t0: float
    h: float
    epsilon: float
    grid: Grid1D
    moments: ScalarMoments | GridMoments
    c1: np.ndarray
    c2: np.ndarray
    v0: np.ndarray | None = None
    dv0: np.ndarray | None = None
    krylov: KrylovConfig = field(default_factory=KrylovConfig)
    keep_fourth_order_term: bool = False
    krylov_result: KrylovResult | None = None

    # laser-scheme ingredients -------------------------------------------
    @property
    def v_tilde(self) -> np.ndarray:
        return self.v0 + self.moments.r * self.grid.nodes

    @property
    def v_hat(self) -> np.ndarray:
        grad = self.dv0 + self.moments.r
        return self.v_tilde - (self.h**2 / 24) * grad**2

    def kinetic(self, fraction: float) -> np.ndarray:
        return 1j * fraction * self.h * self.epsilon * self.c2

    def shift(self, s: float | None = None) -> np.ndarray:
        s = self.moments.s if s is None else s
        return -0.5 * s * self.c1


class _Cache:
    """Per-run samples that never change: V0 and its gradient, symbols."""

    def __init__(self, problem: Problem) -> None:
        grid = problem.grid
        self.c1 = grid.symbol(1).values
        self.c2 = grid.symbol(2).values
        if problem.is_laser:
            x = grid.nodes
            self.v0 = np.asarray(problem.V0(x), dtype=float)
            self.dv0 = np.asarray(problem.V0.gradient(x), dtype=float)
        else:
            self.v0 = self.dv0 = None
        sep = problem.potential.separable is not None
        self.spatial = sample_separable(problem.potential, grid) if sep else None


def make_context(problem: Problem, spec: SchemeSpec, t0: float, h: float,
                 cache: _Cache | None = None) -> StepContext:
    if h <= 0:
        raise ValueError("step must be positive")
    cache = cache or _Cache(problem)
    if spec.id in LASER_SCHEMES:
        if not problem.is_laser:
            raise ValueError(f"{spec.id} needs a laser potential V0(x) + e(t) x")
        moments = scalar_moments(problem.pulse, t0, h, spec.quad, spec.closed_form_moments)
    else:
        moments = grid_moments(problem.potential, problem.grid, t0, h, spec.quad,
                               with_fourth=spec.keep_fourth_order_term and spec.id == "MZ4",
                               spatial=cache.spatial)
    return StepContext(
        t0=t0, h=h, epsilon=spec.epsilon, grid=problem.grid, moments=moments,
        c1=cache.c1, c2=cache.c2, v0=cache.v0, dv0=cache.dv0, krylov=spec.krylov,
        keep_fourth_order_term=spec.keep_fourth_order_term,
    )


# -- Magnus-Zassenhaus -------------------------------------------------------


def step_MZ2(u: WaveFunction, ctx: StepContext) -> WaveFunction:
    m = ctx.moments
    u = exp_circulant(ctx.kinetic(0.5), u)
    u = exp_diagonal(-m.mu00 / ctx.epsilon, u)
    return exp_circulant(ctx.kinetic(0.5), u)


def mz4_inner_operator(ctx: StepContext) -> SymOpSum:
    """The small innermost exponent as a sum of symmetrised operators.

        (h / 6eps) i (mu00')^2  -  2 <mu11'>_1  +  (h^2 eps / 6) i <mu00''>_2

    In the ``coeff * i**(k+1) * <f>_k`` convention the first-order term has
    f = 2 mu11' and the second-order term f = -(h^2 eps / 6) mu00''.
    """
    m, h, eps = ctx.moments, ctx.h, ctx.epsilon
    terms = [
        SymTerm(0, (h / (6 * eps)) * m.dx_mu00**2),
        SymTerm(1, 2 * m.dx_mu11),
        SymTerm(2, -(h**2 * eps / 6) * m.dxx_mu00),
    ]
    if ctx.keep_fourth_order_term:
        if m.dxxxx_mu00 is None:
            raise ValueError("fourth spatial derivative of mu00 was not computed")
        terms[0] = SymTerm(0, terms[0].f - (h**2 * eps / 24) * m.dxxxx_mu00)
    return SymOpSum(ctx.grid, tuple(terms))


def step_MZ4(u: WaveFunction, ctx: StepContext) -> WaveFunction:
    m = ctx.moments
    half_pot = -0.5 * m.mu00 / ctx.epsilon
    u = exp_circulant(ctx.kinetic(0.5), u)
    u = exp_diagonal(half_pot, u)

    op = mz4_inner_operator(ctx)
    grid = u.grid

    def hermitian_matvec(v: np.ndarray) -> np.ndarray:
        # H = -i W so that exp(iH) = exp(W)
        return -1j * apply(op, WaveFunction(v, grid)).values

    result = expm_krylov(hermitian_matvec, u.values, ctx.krylov)
    ctx.krylov_result = result
    u = WaveFunction(result.vector, grid)

    u = exp_diagonal(half_pot, u)
    return exp_circulant(ctx.kinetic(0.5), u)


# -- laser schemes -----------------------------------------------------------


def _bm_product(u: WaveFunction, ctx: StepContext, end_shift: float | None) -> WaveFunction:
    """Blanes-Moan product for ihe d_xx - ih/eps V~.

    With ``end_shift`` set, the first and last kinetic factors also carry the
    translation -s/2 d_x.
    """
    pot = -ctx.h * ctx.v_tilde / ctx.epsilon
    last = len(BM_SEQUENCE) - 1
    for i, (kind, coeff) in enumerate(BM_SEQUENCE):
        if kind == "Y":
            u = exp_diagonal(coeff * pot, u)
            continue
        exponent = ctx.kinetic(coeff)
        if end_shift is not None and i in (0, last):
            exponent = exponent + ctx.shift(end_shift)
        u = exp_circulant(exponent, u)
    return u


def _cc_inner(u: WaveFunction, ctx: StepContext, with_shift: bool) -> WaveFunction:
    """Chin-Chen product; ``with_shift`` folds -s/2 d_x into the kinetic halves."""
    eps, h = ctx.epsilon, ctx.h
    outer = -(h / 6) * ctx.v_tilde / eps
    kin = ctx.kinetic(0.5) + (ctx.shift() if with_shift else 0.0)
    u = exp_diagonal(outer, u)
    u = exp_circulant(kin, u)
    u = exp_diagonal(-(2 * h / 3) * ctx.v_hat / eps, u)
    u = exp_circulant(kin, u)
    return exp_diagonal(outer, u)


def step_MaStBM(u: WaveFunction, ctx: StepContext) -> WaveFunction:
    u = exp_circulant(ctx.shift(), u)
    u = _bm_product(u, ctx, None)
    return exp_circulant(ctx.shift(), u)


def step_MaStBMc(u: WaveFunction, ctx: StepContext) -> WaveFunction:
    return _bm_product(u, ctx, ctx.moments.s)


def step_MaStCC(u: WaveFunction, ctx: StepContext) -> WaveFunction:
    u = exp_circulant(ctx.shift(), u)
    u = _cc_inner(u, ctx, with_shift=False)
    return exp_circulant(ctx.shift(), u)


def step_MaCC(u: WaveFunction, ctx: StepContext) -> WaveFunction:
    return _cc_inner(u, ctx, with_shift=True)


STEPS = {
    "MZ2": step_MZ2,
    "MZ4": step_MZ4,
    "MaStBM": step_MaStBM,
    "MaStBMc": step_MaStBMc,
    "MaStCC": step_MaStCC,
    "MaCC": step_MaCC,
}

# inner products whose outer translations may be merged across steps
_SHIFT_WRAPPED = {
    "MaStBM": lambda u, ctx: _bm_product(u, ctx, None),
    "MaStCC": lambda u, ctx: _cc_inner(u, ctx, with_shift=False),
}

# transforms per step; MZ4 adds 6 per Lanczos matvec
TRANSFORM_BUDGET = {
    "MZ2": 4,
    "MZ4": 4,
    "MaStBM": 18,
    "MaStBMc": 14,
    "MaStCC": 8,
    "MaCC": 4,
}
FUSED_TRANSFORM_BUDGET = {"MaStBM": 16, "MaStCC": 6}
MZ4_TRANSFORMS_PER_MATVEC = 6


def transform_budget(scheme_id: str, fused: bool = False, matvecs: int = 0) -> int:
    """Analytic transforms per step (steady state when ``fused``)."""
    if fused and scheme_id in FUSED_TRANSFORM_BUDGET:
        base = FUSED_TRANSFORM_BUDGET[scheme_id]
    else:
        base = TRANSFORM_BUDGET[scheme_id]
    if scheme_id == "MZ4":
        base += MZ4_TRANSFORMS_PER_MATVEC * matvecs
    return base


def step_times(t0: float, T: float, h: float, breakpoints=None) -> list[tuple[float, float]]:
    """(t_start, h_step) pairs covering [t0, t0+T].

    The last step is shortened to land exactly on the end time.  A step that
    straddles one of ``breakpoints(t_start, t_end)`` is cut there into two
    sub-steps, so no step integrates across a discontinuity of the pulse.
    """
    if T < 0:
        raise ValueError("duration must be non-negative")
    if T == 0:
        return []
    # a ratio within round-off of an integer counts as that integer
    ratio = T / h
    n = round(ratio) if math.isclose(ratio, round(ratio), rel_tol=1e-12) else math.ceil(ratio)
    n = max(n, 1)
    out = [(t0 + j * h, h) for j in range(n - 1)]
    last_start = t0 + (n - 1) * h
    out.append((last_start, t0 + T - last_start))
    if breakpoints is None:
        return out
    aligned = []
    for t, dt in out:
        cuts = np.asarray(breakpoints(t, t + dt), dtype=float)
        cuts = np.sort(cuts[(cuts - t > 1e-12 * dt) & (t + dt - cuts > 1e-12 * dt)])
        if not cuts.size:
            # (t + dt) - t is not dt in floating point; the error would act
            # like a perturbed step length and accumulate as a phase drift
            aligned.append((t, dt))
            continue
        edges = [t, *cuts.tolist(), t + dt]
        aligned.extend((a, b - a) for a, b in zip(edges[:-1], edges[1:]))
    return aligned


class Propagator:
    """Drives one scheme over many steps."""

    def __init__(self, problem: Problem, spec: SchemeSpec) -> None:
        if spec.id in LASER_SCHEMES and not problem.is_laser:
            raise ValueError(f"{spec.id} needs a laser potential V0(x) + e(t) x")
        self.problem = problem
        self.spec = spec
        self.cache = _Cache(problem)
        self.steps_taken = 0
        self.matvecs = 0
        self.max_lanczos_iters = 0

    def context(self, t0: float, h: float) -> StepContext:
        return make_context(self.problem, self.spec, t0, h, self.cache)

    def _after(self, ctx: StepContext) -> None:
        self.steps_taken += 1
        res = ctx.krylov_result
        if res is not None:
            self.matvecs += res.matvecs
            self.max_lanczos_iters = max(self.max_lanczos_iters, res.iterations)
            if not res.converged and self.spec.krylov.fixed_iters is None:
                raise KrylovError(
                    f"Lanczos did not converge at t={ctx.t0:.6g}, h={ctx.h:.3g}: "
                    f"estimate {res.error_estimate:.3e} after {res.iterations} iterations"
                )

    def step(self, u: WaveFunction, t0: float, h: float) -> WaveFunction:
        ctx = self.context(t0, h)
        u = STEPS[self.spec.id](u, ctx)
        self._after(ctx)
        return u

    def run(self, u: WaveFunction, t0: float, T: float, h: float, callback=None) -> WaveFunction:
        """Propagate from t0 to t0+T.  ``callback(step_index, t, u)`` sees the
        state after every step (only where the state is defined, so not in the
        middle of a fused translation)."""
        breaks = self.problem.potential.breakpoints if self.spec.align_breakpoints else None
        schedule = step_times(t0, T, h, breaks)
        fuse = self.spec.fuse_boundary and self.spec.id in _SHIFT_WRAPPED
        if not fuse:
            for j, (t, dt) in enumerate(schedule):
                u = self.step(u, t, dt)
                if callback is not None:
                    callback(j, t + dt, u)
            return u

        inner = _SHIFT_WRAPPED[self.spec.id]
        pending = 0.0
        for j, (t, dt) in enumerate(schedule):
            ctx = self.context(t, dt)
            s = ctx.moments.s
            u = exp_circulant(ctx.shift(pending + s), u)
            u = inner(u, ctx)
            pending = s
            self._after(ctx)
        if schedule:
            u = exp_circulant(ctx.shift(pending), u)
            if callback is not None:
                callback(len(schedule) - 1, t0 + T, u)
        return u
