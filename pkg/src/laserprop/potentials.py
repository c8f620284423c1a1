"""Static potentials, laser pulses and time-dependent potentials.

Sign convention throughout: the laser enters as ``V(x, t) = V0(x) + e(t) x``.
A pulse written for the opposite convention is used by negating it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Grid1D

RealFn = Callable[[np.ndarray], np.ndarray]


def _no_breaks(t_start: float, t_end: float) -> np.ndarray:
    return np.empty(0)


@dataclass(frozen=True)
class StaticPotential:
    """V0(x) with analytic derivatives.

    ``derivatives`` maps a derivative order (2, 4, ...) to its evaluator; the
    gradient is mandatory because the gradient-corrected potential needs it.
    """

    value: RealFn
    gradient: RealFn
    label: str
    derivatives: dict[int, RealFn] = field(default_factory=dict)

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))

    def derivative(self, x, order: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if order == 0:
            return self.value(x)
        if order == 1:
            return self.gradient(x)
        try:
            return self.derivatives[order](x)
        except KeyError:
            raise ValueError(f"{self.label}: derivative of order {order} not available") from None


@dataclass(frozen=True)
class LaserPulse:
    """Scalar pulse profile e(t).

    ``breakpoints(t_start, t_end)`` lists the points in the open interval where
    the profile (or its derivative) is not smooth; quadrature splits there.
    ``moments`` optionally returns closed-form ``(r, s)`` for a step, bypassing
    quadrature.
    """

    value: Callable[[np.ndarray], np.ndarray]
    label: str
    smooth: bool = True
    breakpoints: Callable[[float, float], np.ndarray] = _no_breaks
    moments: Callable[[float, float], tuple[float, float]] | None = None

    def __call__(self, t):
        return self.value(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class TimeDependentPotential:
    """General V(x, t) with analytic spatial derivatives of order 1, 2 and 4.

    ``separable`` optionally lists ``(g, phi)`` pairs with
    V(x, t) = sum_j g_j(t) phi_j(x, 0) and ``phi_j(x, k)`` the k-th spatial
    derivative; moment quadrature then samples the spatial factors once.
    """

    value: Callable[[np.ndarray, float], np.ndarray]
    dx: Callable[[np.ndarray, float], np.ndarray]
    dxx: Callable[[np.ndarray, float], np.ndarray]
    dxxxx: Callable[[np.ndarray, float], np.ndarray] | None = None
    label: str = "V(x,t)"
    breakpoints: Callable[[float, float], np.ndarray] = _no_breaks
    separable: tuple | None = None

    def derivative(self, x, t, order: int) -> np.ndarray:
        fn = {0: self.value, 1: self.dx, 2: self.dxx, 4: self.dxxxx}.get(order)
        if fn is None:
            raise ValueError(f"{self.label}: derivative of order {order} not available")
        return fn(np.asarray(x, dtype=float), t)


# -- static potentials -------------------------------------------------------


def polynomial_potential(coeffs, label: str) -> StaticPotential:
    """V0 from power-series coefficients (lowest order first)."""
    poly = np.polynomial.Polynomial(coeffs)
    derivs = {k: poly.deriv(k) for k in (2, 3, 4)}
    return StaticPotential(
        value=lambda x: poly(x),
        gradient=lambda x, d=poly.deriv(1): d(x),
        label=label,
        derivatives=derivs,
    )


def double_well_1() -> StaticPotential:
    """x^4 - 15 x^2 (atomic-scaling example)."""
    return polynomial_potential([0, 0, -15, 0, 1], "VD1")


def double_well_2() -> StaticPotential:
    """x^4/5 - 2 x^2 (semiclassical example)."""
    return polynomial_potential([0, 0, -2, 0, 0.2], "VD2")


def harmonic(omega: float = 1.0) -> StaticPotential:
    """omega^2 x^2 / 4, the oscillator for H = -d^2/dx^2 + V (mass 1/2)."""
    return polynomial_potential([0, 0, omega**2 / 4], "harmonic")


def zero_potential() -> StaticPotential:
    return polynomial_potential([0.0], "zero")


def tabulated_potential(grid: Grid1D, samples: np.ndarray, label: str = "tabulated") -> StaticPotential:
    """Band-limited trigonometric interpolant of node samples.

    Derivatives are spectral; evaluating off the grid costs O(n) per point.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape != (grid.n_points,):
        raise ValueError("one sample per grid node required")
    coeffs = np.fft.fft(samples) / grid.n_points
    kappa = grid.wavenumbers.copy()
    nyq = grid.n_points // 2

    def interp(order: int) -> RealFn:
        c = coeffs * (1j * kappa) ** order
        if order % 2:
            c[nyq] = 0.0

        def fn(x):
            x = np.asarray(x, dtype=float)
            phases = np.exp(1j * np.multiply.outer(x - grid.a, kappa))
            return (phases @ c).real

        return fn

    return StaticPotential(
        value=interp(0),
        gradient=interp(1),
        label=label,
        derivatives={k: interp(k) for k in (2, 3, 4)},
    )


# -- pulses ------------------------------------------------------------------


def zero_pulse() -> LaserPulse:
    return LaserPulse(lambda t: np.zeros_like(t), "zero", moments=lambda t0, h: (0.0, 0.0))


def constant_pulse(amplitude: float) -> LaserPulse:
    return LaserPulse(
        lambda t: np.full_like(t, amplitude), f"const({amplitude})",
        moments=lambda t0, h: (amplitude, 0.0),
    )


def sine_pulse(amplitude: float = 1.0, omega: float = 2 * np.pi, phase: float = 0.0) -> LaserPulse:
    """Smooth test pulse A sin(omega t + phase), with closed-form moments."""

    def moments(t0: float, h: float) -> tuple[float, float]:
        a, b = omega * t0 + phase, omega * (t0 + h) + phase
        integral = amplitude * (np.cos(a) - np.cos(b)) / omega
        # int_0^h (z - h/2) sin(omega (t0 + z) + phase) dz by parts
        first = amplitude * (
            -(h / 2) * (np.cos(b) + np.cos(a)) / omega + (np.sin(b) - np.sin(a)) / omega**2
        )
        return integral / h, 2 * first

    return LaserPulse(
        lambda t: amplitude * np.sin(omega * t + phase), f"sin({amplitude},{omega})",
        moments=moments,
    )


_E1_PERIOD = 3 / 5
_E1_FAST = 1 / 25
_E1_SLOW = 6 / 25


def _e1_windows(t_start: float, t_end: float) -> np.ndarray:
    n_lo = max(1, int(np.floor(t_start / _E1_PERIOD)) - 1)
    n_hi = int(np.ceil(t_end / _E1_PERIOD)) + 1
    pts = []
    for n in range(n_lo, n_hi + 1):
        base = _E1_PERIOD * n
        pts.extend((base, base + _E1_FAST, base + _E1_SLOW))
    pts = np.array(pts)
    return pts[(pts > t_start) & (pts < t_end)]


def _e1_phase(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lobe index n and offset within the lobe for every t."""
    n = np.floor(t / _E1_PERIOD)
    offset = t - _E1_PERIOD * n
    # the closed left end of the fast lobe may round into the previous period
    near = np.isclose(offset, _E1_PERIOD, rtol=0, atol=1e-13)
    n = np.where(near, n + 1, n)
    offset = np.where(near, 0.0, offset)
    return n, offset


def pulse_e1(t):
    """Asymmetric sine lobes: sin(25 pi t) on [3n/5, 3n/5 + 1/25] and
    sin(5 pi t) on (3n/5 + 1/25, 3n/5 + 6/25] for n >= 1, zero elsewhere."""
    t = np.asarray(t, dtype=float)
    n, off = _e1_phase(t)
    active = n >= 1
    fast = active & (off <= _E1_FAST)
    slow = active & (off > _E1_FAST) & (off <= _E1_SLOW)
    out = np.where(fast, np.sin(25 * np.pi * t), 0.0)
    out = np.where(slow, np.sin(5 * np.pi * t), out)
    return out if out.ndim else float(out)


def pulse_e1_plotted(t):
    """The lobe train as tabulated in the published laser-profile plot.

    Each lobe restarts at zero phase: -50 sin(25 pi (t - 3n/5)) on the fast
    lobe and 10 sin(5 pi (t - 3n/5 - 1/25)) on the slow one.  Continuous, with
    kinks at the lobe ends.
    """
    t = np.asarray(t, dtype=float)
    n, off = _e1_phase(t)
    active = n >= 1
    fast = active & (off <= _E1_FAST)
    slow = active & (off > _E1_FAST) & (off <= _E1_SLOW)
    out = np.where(fast, -50 * np.sin(25 * np.pi * off), 0.0)
    out = np.where(slow, 10 * np.sin(5 * np.pi * (off - _E1_FAST)), out)
    return out if out.ndim else float(out)


def pulse_e2(t):
    """Chirped pulse 10 exp(-10 (t-1)^2) sin(500 (t-1)^4 + 10)."""
    t = np.asarray(t, dtype=float)
    out = 10 * np.exp(-10 * (t - 1) ** 2) * np.sin(500 * (t - 1) ** 4 + 10)
    return out if out.ndim else float(out)


def e1() -> LaserPulse:
    return LaserPulse(pulse_e1, "e1", smooth=False, breakpoints=_e1_windows)


def e1_plotted() -> LaserPulse:
    return LaserPulse(pulse_e1_plotted, "e1_plotted", smooth=False, breakpoints=_e1_windows)


def e2() -> LaserPulse:
    return LaserPulse(pulse_e2, "e2")


def negated(pulse: LaserPulse) -> LaserPulse:
    """Pulse for the ``V0 - e(t) x`` convention."""
    mom = pulse.moments
    return LaserPulse(
        lambda t: -pulse.value(t), f"-{pulse.label}", pulse.smooth, pulse.breakpoints,
        None if mom is None else (lambda t0, h: tuple(-m for m in mom(t0, h))),
    )


POTENTIALS: dict[str, Callable[[], StaticPotential]] = {
    "VD1": double_well_1,
    "VD2": double_well_2,
    "harmonic": harmonic,
    "zero": zero_potential,
}

PULSES: dict[str, Callable[[], LaserPulse]] = {
    "e1": e1,
    "e1_plotted": e1_plotted,
    "e2": e2,
    "zero": zero_pulse,
    "sin": sine_pulse,
}


def get_potential(label: str, **params) -> StaticPotential:
    """Registry lookup; ``params`` go to the factory (e.g. ``omega``)."""
    if label not in POTENTIALS:
        raise ValueError(f"unknown potential {label!r}; choose from {sorted(POTENTIALS)}")
    return POTENTIALS[label](**params)


def get_pulse(label: str, **params) -> LaserPulse:
    """Registry lookup; ``params`` go to the factory (e.g. ``amplitude``)."""
    if label not in PULSES:
        raise ValueError(f"unknown pulse {label!r}; choose from {sorted(PULSES)}")
    return PULSES[label](**params)


# -- derived potentials ------------------------------------------------------


def eval_V_tilde(V0: StaticPotential, r: float, grid: Grid1D) -> np.ndarray:
    """Modified potential V0(x) + r x on the grid nodes."""
    x = grid.nodes
    return V0(x) + r * x


def eval_V_hat(V0: StaticPotential, r: float, h: float, grid: Grid1D) -> np.ndarray:
    """Gradient-corrected potential V~ - (h^2/24) (V0' + r)^2."""
    x = grid.nodes
    return eval_V_tilde(V0, r, grid) - (h**2 / 24) * (V0.gradient(x) + r) ** 2


def laser_potential(V0: StaticPotential, pulse: LaserPulse) -> TimeDependentPotential:
    """V0(x) + e(t) x as a general time-dependent potential."""

    def d4(x, t):
        if 4 in V0.derivatives:
            return V0.derivatives[4](x)
        return np.zeros_like(x)

    def static_part(x, k):
        return d4(x, None) if k == 4 else V0.derivative(x, k) * np.ones_like(x)

    def linear_part(x, k):
        return {0: x, 1: np.ones_like(x)}.get(k, np.zeros_like(x))

    return TimeDependentPotential(
        value=lambda x, t: V0(x) + pulse(t) * x,
        dx=lambda x, t: V0.gradient(x) + pulse(t) * np.ones_like(x),
        dxx=lambda x, t: V0.derivative(x, 2) * np.ones_like(x),
        dxxxx=d4,
        label=f"{V0.label}+{pulse.label}*x",
        breakpoints=pulse.breakpoints,
        separable=((lambda t: np.ones_like(t), static_part), (pulse, linear_part)),
    )
