"""Per-step Magnus integrals.

For a laser potential the only time integrals needed are the scalars

    r = (1/h) int_0^h e(t0 + z) dz,     s = 2 int_0^h (z - h/2) e(t0 + z) dz,

and for a general potential the grid functions

    mu00 = int_0^h V(x, t0 + z) dz,     mu11 = int_0^h (z - h/2) V(x, t0 + z) dz.

Quadrature is Gauss-Legendre on the reference interval [0, 1].  If the
integrand has known breakpoints inside a step the rule is applied on each
smooth piece separately.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid1D
from .potentials import LaserPulse, TimeDependentPotential

MAX_KNOTS = 32
DEFAULT_KNOTS = 3
OSCILLATORY_KNOTS = 11


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    n_knots: int
    knots: np.ndarray
    weights: np.ndarray

    def integrate(self, f, a: float = 0.0, b: float = 1.0) -> float:
        """Integral of a vectorised scalar function over [a, b]."""
        return float((b - a) * np.dot(self.weights, f(a + (b - a) * self.knots)))


def gauss_legendre(n: int) -> QuadratureRule:
    """n-point Gauss-Legendre rule mapped to [0, 1]; weights sum to 1."""
    if not 1 <= n <= MAX_KNOTS:
        raise ValueError(f"knot count must lie in [1, {MAX_KNOTS}], got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    knots, weights = (x + 1) / 2, w / 2
    knots.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(n, knots, weights)


@dataclass(frozen=True)
class ScalarMoments:
    r: float
    s: float
    t0: float
    h: float


@dataclass(frozen=True, eq=False)
class GridMoments:
    mu00: np.ndarray
    mu11: np.ndarray
    dx_mu00: np.ndarray
    dxx_mu00: np.ndarray
    dx_mu11: np.ndarray
    t0: float
    h: float
    dxxxx_mu00: np.ndarray | None = None


def _pieces(t0: float, h: float, breakpoints) -> np.ndarray:
    """Step-local offsets 0 = z_0 < ... < z_p = h splitting at breakpoints."""
    inner = np.asarray(breakpoints(t0, t0 + h), dtype=float) - t0
    # a breakpoint within round-off of an end would create a sliver
    inner = inner[(inner > 1e-14 * h) & (inner < h * (1 - 1e-14))]
    return np.concatenate(([0.0], np.sort(inner), [h]))


def _offsets_and_weights(t0: float, h: float, rule: QuadratureRule, breakpoints):
    """Quadrature nodes z in [0, h] and weights, composite over smooth pieces."""
    edges = _pieces(t0, h, breakpoints)
    lo, hi = edges[:-1, None], edges[1:, None]
    z = (lo + (hi - lo) * rule.knots).ravel()
    w = ((hi - lo) * rule.weights).ravel()
    return z, w


def _first_moment(z: np.ndarray, w: np.ndarray, h: float, values: np.ndarray, mean) -> np.ndarray:
    """sum_i w_i (z_i - h/2) values_i over the last axis.

    The weights integrate (z - h/2) to zero only up to round-off, so the step
    mean is subtracted first: a time-independent integrand then gives exactly 0.
    """
    return np.dot(values - np.expand_dims(mean, -1), w * (z - h / 2))


def scalar_moments(pulse: LaserPulse, t0: float, h: float, rule: QuadratureRule | None = None,
                   use_closed_form: bool = True) -> ScalarMoments:
    if h <= 0:
        raise ValueError("step must be positive")
    if use_closed_form and pulse.moments is not None:
        r, s = pulse.moments(t0, h)
        return ScalarMoments(float(r), float(s), t0, h)
    rule = rule or gauss_legendre(DEFAULT_KNOTS)
    z, w = _offsets_and_weights(t0, h, rule, pulse.breakpoints)
    e = np.asarray(pulse(t0 + z), dtype=float)
    r = np.dot(w, e) / h
    s = 2 * _first_moment(z, w, h, e, r)
    return ScalarMoments(float(r), float(s), t0, h)


MOMENT_ORDERS = (0, 1, 2, 4)


def sample_separable(V: TimeDependentPotential, grid: Grid1D) -> list[dict[int, np.ndarray]]:
    """Spatial factors of a separable potential on the nodes, per derivative order."""
    if V.separable is None:
        raise ValueError(f"{V.label} is not declared separable")
    x = grid.nodes
    return [{k: np.asarray(phi(x, k), dtype=float) for k in MOMENT_ORDERS}
            for _, phi in V.separable]


def grid_moments(V: TimeDependentPotential, grid: Grid1D, t0: float, h: float,
                 rule: QuadratureRule | None = None, with_fourth: bool = False,
                 spatial: list[dict[int, np.ndarray]] | None = None) -> GridMoments:
    """Node-wise quadrature of V and its analytic spatial derivatives.

    For a separable potential only the scalar time factors are integrated;
    ``spatial`` (from :func:`sample_separable`) avoids resampling them.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    rule = rule or gauss_legendre(DEFAULT_KNOTS)
    z, w = _offsets_and_weights(t0, h, rule, V.breakpoints)
    orders = (0, 1, 2, 4) if with_fourth else (0, 1, 2)
    if V.separable is not None:
        spatial = spatial if spatial is not None else sample_separable(V, grid)
        mu00 = {k: np.zeros(grid.n_points) for k in orders}
        mu11 = {k: np.zeros(grid.n_points) for k in (0, 1)}
        for (g, _), phi in zip(V.separable, spatial):
            gz = np.asarray(g(t0 + z), dtype=float)
            a = np.dot(w, gz)
            b = _first_moment(z, w, h, gz, a / h)
            for k in orders:
                mu00[k] += a * phi[k]
            for k in (0, 1):
                mu11[k] += b * phi[k]
        return GridMoments(
            mu00=mu00[0], mu11=mu11[0], dx_mu00=mu00[1], dxx_mu00=mu00[2], dx_mu11=mu11[1],
            t0=t0, h=h, dxxxx_mu00=mu00.get(4),
        )
    x = grid.nodes
    mu00, mu11 = {}, {}
    for k in orders:
        # nodes x knots
        vals = np.stack([np.broadcast_to(V.derivative(x, t0 + zi, k), x.shape) for zi in z],
                        axis=-1)
        mu00[k] = vals @ w
        if k in (0, 1):
            mu11[k] = _first_moment(z, w, h, vals, mu00[k] / h)
    return GridMoments(
        mu00=mu00[0], mu11=mu11[0], dx_mu00=mu00[1], dxx_mu00=mu00[2], dx_mu11=mu11[1],
        t0=t0, h=h, dxxxx_mu00=mu00.get(4),
    )
