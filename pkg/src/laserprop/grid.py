"""Periodic spectral grid, Fourier symbols and the two exponential kernels.

Every operator used by the propagators is either diagonal in physical space
(a pointwise multiplication) or diagonal in Fourier space (a circulant
matrix).  This module owns both kinds of kernel and counts every forward or
inverse transform it performs, so that the cost of a scheme can be asserted
exactly rather than timed.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class TransformCounter:
    """Thread-safe tally of FFT/IFFT calls."""

    def __init__(self) -> None:
        self._count = 0
        self._lock = threading.Lock()

    def add(self, n: int = 1) -> None:
        with self._lock:
            self._count += n

    @property
    def count(self) -> int:
        return self._count

    def reset(self) -> None:
        with self._lock:
            self._count = 0


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Uniform periodic grid on ``[a, b)`` with ``n_points`` nodes."""

    a: float
    b: float
    n_points: int
    counter: TransformCounter = field(default_factory=TransformCounter, repr=False)

    def __post_init__(self) -> None:
        if self.n_points < 4 or self.n_points % 2:
            raise ValueError(f"n_points must be even and >= 4, got {self.n_points}")
        if not self.b > self.a:
            raise ValueError(f"empty domain [{self.a}, {self.b})")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @cached_property
    def nodes(self) -> np.ndarray:
        x = self.a + np.arange(self.n_points) * self.dx
        x.flags.writeable = False
        return x

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = 2 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)
        k.flags.writeable = False
        return k

    @cached_property
    def mode_numbers(self) -> np.ndarray:
        """Integer mode index m in FFT order (0, 1, ..., -n/2, ..., -1)."""
        m = np.fft.fftfreq(self.n_points, d=1.0 / self.n_points).round().astype(int)
        m.flags.writeable = False
        return m

    def symbol(self, k: int) -> "Symbol":
        """Cached :func:`make_symbol`."""
        cache = self.__dict__.setdefault("_symbols", {})
        if k not in cache:
            cache[k] = make_symbol(self, k)
        return cache[k]

    def fft(self, values: np.ndarray) -> np.ndarray:
        self.counter.add()
        return np.fft.fft(values)

    def ifft(self, values: np.ndarray) -> np.ndarray:
        self.counter.add()
        return np.fft.ifft(values)

    def with_fresh_counter(self) -> "Grid1D":
        """Same geometry, independent transform counter (one per worker)."""
        return Grid1D(self.a, self.b, self.n_points)

    def same_geometry(self, other: "Grid1D") -> bool:
        return (self.a, self.b, self.n_points) == (other.a, other.b, other.n_points)


@dataclass(frozen=True, eq=False)
class Symbol:
    """Fourier-space diagonal of the k-th spectral differentiation matrix."""

    order: int
    values: np.ndarray


def make_symbol(grid: Grid1D, k: int) -> Symbol:
    """Return (i*kappa)^k in FFT order, with the Nyquist entry zeroed for odd k.

    >>> make_symbol(Grid1D(0.0, 2 * np.pi, 4), 2).values.real
    array([ 0., -1., -4., -1.])
    """
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    values = (1j * grid.wavenumbers) ** k
    if k % 2:
        values[grid.n_points // 2] = 0.0
        values = 1j * values.imag
    else:
        values = values.real.astype(complex)
    values.flags.writeable = False
    return Symbol(k, values)


@dataclass(eq=False)
class WaveFunction:
    """Complex samples of a state on a periodic grid."""

    values: np.ndarray
    grid: Grid1D

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n_points,):
            raise ValueError(
                f"expected {self.grid.n_points} samples, got shape {self.values.shape}"
            )

    def norm(self) -> float:
        return l2_norm(self.values, self.grid)

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.values.copy(), self.grid)

    def normalized(self) -> "WaveFunction":
        return WaveFunction(self.values / self.norm(), self.grid)


def l2_norm(values: np.ndarray, grid: Grid1D) -> float:
    return float(np.sqrt(grid.dx * np.vdot(values, values).real))


def l2_distance(u: WaveFunction, v: WaveFunction) -> float:
    if not u.grid.same_geometry(v.grid):
        raise ValueError("states live on different grids")
    return l2_norm(u.values - v.values, u.grid)


def apply_derivative(u: WaveFunction, k: int) -> WaveFunction:
    """Spectral k-th derivative, F^-1 D_{c_k} F u."""
    grid = u.grid
    c = grid.symbol(k).values
    return WaveFunction(grid.ifft(c * grid.fft(u.values)), grid)


def exp_circulant(exponent: np.ndarray, u: WaveFunction) -> WaveFunction:
    """Apply F^-1 diag(exp(exponent)) F to ``u``.

    ``exponent`` is the per-mode exponent in FFT order, e.g. ``0.5j*h*eps*c2``
    for a half kinetic step or ``1j*h*eps*a1*c2 - 0.5*s*c1`` for the kinetic
    step fused with a translation.
    """
    grid = u.grid
    exponent = np.asarray(exponent)
    if exponent.shape != (grid.n_points,):
        raise ValueError("exponent vector must have one entry per mode")
    return WaveFunction(grid.ifft(np.exp(exponent) * grid.fft(u.values)), grid)


def exp_diagonal(phase: np.ndarray, u: WaveFunction) -> WaveFunction:
    """Pointwise multiplication by exp(i*phase); no transforms."""
    phase = np.asarray(phase, dtype=float)
    if phase.shape != (u.grid.n_points,):
        raise ValueError("phase vector must have one entry per node")
    return WaveFunction(np.exp(1j * phase) * u.values, u.grid)
