"""Experiment driver: configs, references, runs, sweeps and observables.

A run is fully described by an :class:`ExperimentConfig` built from a flat
JSON mapping.  Ground truth is self-generated: a reference scheme at a tiny
step, cross-validated against a second, structurally different scheme at the
same step.  Errors are L2 distances to that reference.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .grid import Grid1D, WaveFunction, l2_distance
from .lanczos import KrylovConfig
from .moments import gauss_legendre
from .potentials import POTENTIALS, PULSES, get_potential, get_pulse
from .schemes import (
    MZ4_TRANSFORMS_PER_MATVEC,
    SCHEME_IDS,
    Problem,
    Propagator,
    SchemeSpec,
    transform_budget,
)

CSV_HEADER = ("scheme", "h", "error", "seconds", "transforms", "norm_drift")


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


class CrossValidationError(RuntimeError):
    """Reference and cross-check disagree (CLI exit code 3)."""


# -- configuration -------------------------------------------------------------

PRESETS: dict[str, dict[str, dict[str, Any]]] = {
    "example1": {
        "desk": {
            "domain": [-10.0, 10.0], "n_points": 96, "epsilon": 1.0, "T": 1.0,
            "potential": "VD1", "pulse": "e1", "x0": -2.5, "delta": 0.2,
            "h_geometric": [1 / 40, 0.5, 5], "quad_knots": 3,
            # at eps = 1 the fourth-derivative term of MZ4 is O(h^3) per step
            "keep_fourth_order_term": True,
            "lanczos_max_iters": 30, "reference_h": 1 / 12800,
        },
        "full": {
            "domain": [-10.0, 10.0], "n_points": 150, "epsilon": 1.0, "T": 4.0,
            "potential": "VD1", "pulse": "e1", "x0": -2.5, "delta": 0.2,
            "h_geometric": [1 / 40, 0.5, 5], "quad_knots": 3,
            "keep_fourth_order_term": True,
            "lanczos_max_iters": 30, "reference_h": 1 / 12800,
        },
    },
    "example2": {
        "desk": {
            "domain": [-5.0, 5.0], "n_points": 1024, "epsilon": 0.01, "T": 0.5,
            "potential": "VD2", "pulse": "e2", "x0": -2.5, "delta": 0.01,
            "schemes": ["MZ4", "MaCC"],
            "h_geometric": [1 / 400, 0.5, 4], "quad_knots": 11,
            # for VD2 the dropped term is a constant: a global phase of O(h^2)
            "keep_fourth_order_term": True,
            "reference_h": 1 / 64000,
        },
        "full": {
            "domain": [-5.0, 5.0], "n_points": 2000, "epsilon": 0.01, "T": 2.5,
            "potential": "VD2", "pulse": "e2", "x0": -2.5, "delta": 0.01,
            "schemes": ["MZ4", "MaCC"],
            "h_geometric": [1 / 400, 0.5, 4], "quad_knots": 11,
            "keep_fourth_order_term": True,
            "reference_h": 1 / 64000,
        },
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "custom"
    domain: tuple[float, float] = (-10.0, 10.0)
    n_points: int = 96
    epsilon: float = 1.0
    T: float = 1.0
    potential: str = "VD1"
    potential_params: dict = field(default_factory=dict)
    pulse: str = "zero"
    pulse_params: dict = field(default_factory=dict)
    x0: float = -2.5
    delta: float = 0.2
    schemes: tuple[str, ...] = SCHEME_IDS
    h: tuple[float, ...] = ()
    h_geometric: tuple | None = None
    quad_knots: int = 3
    lanczos_tol: float = 1e-12
    lanczos_max_iters: int = 12
    lanczos_iters: int | None = None
    keep_fourth_order_term: bool = False
    fuse_boundary: bool = False
    reference_scheme: str = "MaCC"
    reference_h: float | None = None
    crosscheck_scheme: str | None = "MZ4"
    crosscheck_tol: float = 1e-10
    reference_lanczos_tol: float = 1e-15
    reference_lanczos_max_iters: int = 30
    floor_factor: float = 10.0
    workers: int = 1
    norm_every: int = 100
    energy_every: int = 0
    timings: bool = True
    output: str | None = None
    seed: int = 0
    full: bool = False

    # -- construction ----------------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict, full: bool | None = None) -> "ExperimentConfig":
        """Preset values (if ``problem`` names one) overlaid by ``data``."""
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data = dict(data)
        if "scheme" in data:
            if "schemes" in data:
                raise ConfigError("give either 'scheme' or 'schemes', not both")
            data["schemes"] = [data.pop("scheme")]
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        problem = data.get("problem", "custom")
        if full is None:
            full = bool(data.get("full", False))
        merged: dict[str, Any] = {}
        if problem != "custom":
            if problem not in PRESETS:
                raise ConfigError(
                    f"unknown problem {problem!r}; choose from {sorted(PRESETS) + ['custom']}"
                )
            merged.update(PRESETS[problem]["full" if full else "desk"])
        merged.update(data)
        merged["full"] = full
        if "h" in merged and merged["h"] is not None and np.ndim(merged["h"]) == 0:
            merged["h"] = [merged["h"]]
        if merged.get("h") and "h_geometric" not in data:
            # an explicit list replaces the preset's geometric sequence
            merged["h_geometric"] = None
        for key in ("domain", "schemes", "h", "h_geometric"):
            if merged.get(key) is not None:
                merged[key] = tuple(merged[key])
        try:
            cfg = cls(**merged)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path, full: bool | None = None) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        return cls.from_dict(data, full=full)

    def replace(self, **changes) -> "ExperimentConfig":
        cfg = dataclasses.replace(self, **changes)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for key in ("domain", "schemes", "h", "h_geometric"):
            if out[key] is not None:
                out[key] = list(out[key])
        return out

    # -- validation ------------------------------------------------------------
    def validate(self) -> None:
        def fail(msg: str) -> None:
            raise ConfigError(msg)

        if len(self.domain) != 2 or not self.domain[1] > self.domain[0]:
            fail(f"domain must be [a, b] with a < b, got {list(self.domain)}")
        if not isinstance(self.n_points, int) or self.n_points < 4 or self.n_points % 2:
            fail(f"n_points must be an even integer >= 4, got {self.n_points}")
        if not 0 < self.epsilon <= 1:
            fail(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if not (math.isfinite(self.T) and self.T >= 0):
            fail(f"T must be finite and non-negative, got {self.T}")
        if self.potential not in POTENTIALS:
            fail(f"unknown potential {self.potential!r}; choose from {sorted(POTENTIALS)}")
        if self.pulse not in PULSES:
            fail(f"unknown pulse {self.pulse!r}; choose from {sorted(PULSES)}")
        if not self.schemes:
            fail("at least one scheme is required")
        for sid in (*self.schemes, self.reference_scheme,
                    *([self.crosscheck_scheme] if self.crosscheck_scheme else [])):
            if sid not in SCHEME_IDS:
                fail(f"unknown scheme {sid!r}; choose from {list(SCHEME_IDS)}")
        if self.h_geometric is not None:
            if len(self.h_geometric) != 3:
                fail("h_geometric must be [h_first, ratio, count]")
            first, ratio, count = self.h_geometric
            if not (first > 0 and 0 < ratio < 1 and int(count) == count and count >= 1):
                fail("h_geometric needs h_first > 0, 0 < ratio < 1 and a positive count")
        if any(not (h > 0 and math.isfinite(h)) for h in self.h):
            fail("step sizes must be positive and finite")
        hs = self.step_sizes()
        ref_h = self.reference_h
        if ref_h is not None:
            if not ref_h > 0:
                fail("reference_h must be positive")
            if hs and ref_h > min(hs) / 20 * (1 + 1e-12):
                fail(f"reference_h = {ref_h:g} must not exceed min(h)/20 = {min(hs) / 20:g}")
        if not 1 <= self.quad_knots <= 32:
            fail("quad_knots must lie in [1, 32]")
        if self.lanczos_iters is not None and self.lanczos_iters < 1:
            fail("lanczos_iters must be positive")
        if self.lanczos_max_iters < 1 or self.reference_lanczos_max_iters < 1:
            fail("Lanczos iteration limits must be positive")
        if not (self.lanczos_tol > 0 and self.reference_lanczos_tol > 0):
            fail("Lanczos tolerances must be positive")
        if not self.crosscheck_tol > 0:
            fail("crosscheck_tol must be positive")
        if self.workers < 1:
            fail("workers must be at least 1")
        if self.norm_every < 1 or self.energy_every < 0:
            fail("norm_every must be positive and energy_every non-negative")
        if not self.delta > 0:
            fail("delta must be positive")
        try:
            get_potential(self.potential, **self.potential_params)
            get_pulse(self.pulse, **self.pulse_params)
        except TypeError as exc:
            fail(f"bad potential/pulse parameters: {exc}")

    # -- derived quantities -----------------------------------------------------
    def step_sizes(self) -> tuple[float, ...]:
        """Explicit ``h`` list if given, else the geometric sequence."""
        if self.h:
            return tuple(float(h) for h in self.h)
        if self.h_geometric is None:
            return ()
        first, ratio, count = self.h_geometric
        return tuple(float(first * ratio**j) for j in range(int(count)))

    def ref_step(self) -> float:
        if self.reference_h is not None:
            return float(self.reference_h)
        hs = self.step_sizes()
        if not hs:
            raise ConfigError("reference_h is required when no step sizes are configured")
        return min(hs) / 20

    def make_grid(self) -> Grid1D:
        return Grid1D(float(self.domain[0]), float(self.domain[1]), self.n_points)

    def make_problem(self, grid: Grid1D | None = None) -> Problem:
        grid = grid if grid is not None else self.make_grid()
        V0 = get_potential(self.potential, **self.potential_params)
        pulse = get_pulse(self.pulse, **self.pulse_params)
        return Problem.laser(grid, V0, pulse)

    def scheme_spec(self, scheme: str, reference: bool = False) -> SchemeSpec:
        if reference:
            krylov = KrylovConfig(max_iters=self.reference_lanczos_max_iters,
                                  tol=self.reference_lanczos_tol)
        else:
            krylov = KrylovConfig(max_iters=self.lanczos_max_iters, tol=self.lanczos_tol,
                                  fixed_iters=self.lanczos_iters)
        return SchemeSpec(
            scheme, self.epsilon, quad=gauss_legendre(self.quad_knots), krylov=krylov,
            fuse_boundary=self.fuse_boundary and not reference,
            keep_fourth_order_term=self.keep_fourth_order_term,
        )


def load_config(source: str | Path | dict, full: bool | None = None) -> ExperimentConfig:
    if isinstance(source, dict):
        return ExperimentConfig.from_dict(source, full=full)
    return ExperimentConfig.from_file(source, full=full)


# -- states and observables ------------------------------------------------------


def gaussian_packet(grid: Grid1D, x0: float, delta: float) -> WaveFunction:
    """(delta pi)^(-1/4) exp(-(x - x0)^2 / (2 delta)), renormalised on the grid."""
    x = grid.nodes
    values = (delta * np.pi) ** -0.25 * np.exp(-((x - x0) ** 2) / (2 * delta))
    return WaveFunction(values, grid).normalized()


def build_initial_state(config: ExperimentConfig, grid: Grid1D | None = None) -> WaveFunction:
    grid = grid if grid is not None else config.make_grid()
    u = gaussian_packet(grid, config.x0, config.delta)
    edge = max(abs(u.values[0]), abs(u.values[-1]))
    if edge > 1e-12:
        warnings.warn(
            f"initial wavepacket is {edge:.1e} at the domain boundary; "
            "the periodic domain does not cover its support",
            RuntimeWarning, stacklevel=2,
        )
    return u


def observables(u: WaveFunction, potential, t: float, epsilon: float) -> tuple[float, float]:
    """(norm, energy) with energy = (eps^2 |u'|^2 + sum V |u|^2 dx) / |u|^2.

    ``potential`` is a time-dependent potential, a static one, or grid samples.
    Transforms here are diagnostics and are not counted.
    """
    grid = u.grid
    x = grid.nodes
    if hasattr(potential, "dxx"):
        V = potential.value(x, t)
    elif callable(potential):
        V = potential(x)
    else:
        V = np.asarray(potential, dtype=float)
    du = np.fft.ifft(grid.symbol(1).values * np.fft.fft(u.values))
    norm2 = grid.dx * np.vdot(u.values, u.values).real
    kinetic = epsilon**2 * grid.dx * np.vdot(du, du).real
    potential_part = grid.dx * np.sum(V * np.abs(u.values) ** 2)
    return math.sqrt(norm2), float((kinetic + potential_part) / norm2)


def coherent_state(grid: Grid1D, t: float, omega: float, epsilon: float, x0: float) -> WaveFunction:
    """Exact solution for V0 = omega^2 x^2 / 4 from a Gaussian of width 2 eps/omega.

    The centre follows q = x0 cos(omega t), the momentum p = -(omega x0 / 2) sin(omega t).
    """
    x = grid.nodes
    q = x0 * np.cos(omega * t)
    p = -(omega * x0 / 2) * np.sin(omega * t)
    gamma = -epsilon * omega * t / 2 - (omega * x0**2 / 8) * np.sin(2 * omega * t)
    d = x - q
    phase = (1j * omega / 4) * d**2 + p * d + gamma
    values = (omega / (2 * np.pi * epsilon)) ** 0.25 * np.exp(1j * phase / epsilon)
    return WaveFunction(values, grid)


# -- runs ------------------------------------------------------------------------


@dataclass
class RunRecord:
    scheme: str
    h: float
    error: float
    seconds: float
    transforms: int
    norm_drift: float
    steps: int = 0
    matvecs: int = 0
    expected_transforms: int = 0
    energy_trace: list[tuple[float, float]] = field(default_factory=list)

    def csv_row(self) -> list[str]:
        return [self.scheme, repr(self.h), repr(self.error), repr(self.seconds),
                str(self.transforms), repr(self.norm_drift)]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class Reference:
    state: WaveFunction
    scheme: str
    h: float
    crosscheck_scheme: str | None
    discrepancy: float | None
    seconds: float

    def summary(self) -> dict:
        return {"scheme": self.scheme, "h": self.h, "crosscheck_scheme": self.crosscheck_scheme,
                "discrepancy": self.discrepancy, "seconds": self.seconds}


def _expected_transforms(scheme: str, fused: bool, steps: int, matvecs: int) -> int:
    if steps == 0:
        return 0
    if fused:
        # steady-state fused steps plus the one closing translation
        return transform_budget(scheme, fused=True) * steps + 2
    return transform_budget(scheme) * steps + MZ4_TRANSFORMS_PER_MATVEC * matvecs


def propagate(config: ExperimentConfig, scheme: str | None = None, h: float | None = None,
              reference: Reference | WaveFunction | None = None,
              _reference_run: bool = False) -> tuple[WaveFunction, RunRecord]:
    """Run one scheme from the initial state to T.

    Takes ceil(T/h) steps, the last shortened to land on T (steps are also
    cut at pulse discontinuities).  Norm drift is sampled every
    ``norm_every`` steps and at the end.
    """
    scheme = scheme or config.schemes[0]
    if scheme not in SCHEME_IDS:
        raise ConfigError(f"unknown scheme {scheme!r}")
    if h is None:
        hs = config.step_sizes()
        if not hs:
            raise ConfigError("no step size given")
        h = hs[0]
    if not h > 0:
        raise ConfigError("step size must be positive")
    grid = config.make_grid()
    problem = config.make_problem(grid)
    u0 = build_initial_state(config, grid)
    spec = config.scheme_spec(scheme, reference=_reference_run)
    prop = Propagator(problem, spec)

    drift = 0.0
    trace: list[tuple[float, float]] = []
    if config.energy_every:
        trace.append((0.0, observables(u0, problem.potential, 0.0, config.epsilon)[1]))

    def callback(j: int, t: float, u: WaveFunction) -> None:
        nonlocal drift
        n = j + 1
        if n % config.norm_every == 0:
            drift = max(drift, abs(u.norm() - 1.0))
        if config.energy_every and n % config.energy_every == 0:
            trace.append((t, observables(u, problem.potential, t, config.epsilon)[1]))

    start_count = grid.counter.count
    t_start = time.perf_counter()
    u = prop.run(u0, 0.0, config.T, h, callback=callback)
    seconds = time.perf_counter() - t_start if config.timings else 0.0
    drift = max(drift, abs(u.norm() - 1.0))
    transforms = grid.counter.count - start_count

    if isinstance(reference, Reference):
        reference = reference.state
    error = l2_distance(u, reference) if reference is not None else float("nan")
    fused = spec.fuse_boundary and scheme in ("MaStBM", "MaStCC")
    record = RunRecord(
        scheme=scheme, h=float(h), error=float(error), seconds=float(seconds),
        transforms=int(transforms), norm_drift=float(drift), steps=prop.steps_taken,
        matvecs=prop.matvecs,
        expected_transforms=_expected_transforms(scheme, fused, prop.steps_taken, prop.matvecs),
        energy_trace=trace,
    )
    return u, record


def make_reference(config: ExperimentConfig) -> Reference:
    """Reference at ``reference_h``, cross-validated by a second scheme.

    Raises :class:`CrossValidationError` if the two differ by more than
    ``crosscheck_tol`` in L2.
    """
    h_ref = config.ref_step()
    t0 = time.perf_counter()
    if config.T == 0:
        return Reference(build_initial_state(config), config.reference_scheme, h_ref,
                         config.crosscheck_scheme, 0.0, 0.0)
    ref, _ = propagate(config, config.reference_scheme, h_ref, _reference_run=True)
    discrepancy = None
    if config.crosscheck_scheme and config.crosscheck_scheme != config.reference_scheme:
        check, _ = propagate(config, config.crosscheck_scheme, h_ref, _reference_run=True)
        discrepancy = l2_distance(ref, check)
        if not discrepancy <= config.crosscheck_tol:
            raise CrossValidationError(
                f"reference {config.reference_scheme} and cross-check "
                f"{config.crosscheck_scheme} at h={h_ref:g} differ by {discrepancy:.3e} "
                f"> {config.crosscheck_tol:.1e}"
            )
    seconds = time.perf_counter() - t0 if config.timings else 0.0
    return Reference(ref, config.reference_scheme, h_ref, config.crosscheck_scheme,
                     discrepancy, seconds)


# -- sweeps ----------------------------------------------------------------------


def fit_slope(hs, errors, floor: float = 0.0) -> tuple[float, list[float]]:
    """Least-squares slope of log(error) against log(h) on the asymptotic tail.

    The tail is the smallest two thirds of the step sizes whose error lies
    above ``floor``.  Returns ``(nan, [])`` if fewer than two points remain.
    """
    pts = sorted((float(h), float(e)) for h, e in zip(hs, errors)
                 if e > floor and math.isfinite(e) and e > 0)
    if len(pts) < 2:
        return float("nan"), []
    keep = max(2, math.ceil(2 * len(pts) / 3))
    tail = pts[:keep]
    x = np.log([h for h, _ in tail])
    y = np.log([e for _, e in tail])
    slope = float(np.polyfit(x, y, 1)[0])
    return slope, [h for h, _ in tail]


@dataclass
class SweepResult:
    config: ExperimentConfig
    reference: Reference | None
    records: list[RunRecord]
    slopes: dict[str, float]
    floor: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in self.records:
            writer.writerow(rec.csv_row())
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "config": self.config.to_dict(),
            "reference": self.reference.summary() if self.reference else None,
            "floor": self.floor,
            "slopes": self.slopes,
            "rows": [
                {k: v for k, v in rec.to_dict().items() if k != "energy_trace"}
                for rec in self.records
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def write(self, path: str | Path) -> tuple[Path, Path]:
        csv_path = Path(path)
        json_path = csv_path.with_suffix(".json")
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(self.to_csv())
        json_path.write_text(self.to_json())
        return csv_path, json_path


def sweep(config: ExperimentConfig, reference: Reference | None = None) -> SweepResult:
    """One run per (scheme, h), errors against the reference, slopes per scheme.

    Runs go to a thread pool of ``config.workers`` workers; each run owns its
    grid and transform counter, and rows are assembled in configuration order,
    so the table does not depend on the worker count.
    """
    hs = config.step_sizes()
    if len(hs) < 3:
        raise ConfigError(f"a sweep needs at least 3 step sizes, got {len(hs)}")
    reference = reference or make_reference(config)
    jobs = [(sid, h) for sid in config.schemes for h in hs]

    def run(job):
        return propagate(config, job[0], job[1], reference)[1]

    if config.workers == 1:
        records = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(run, jobs))

    floor = config.floor_factor * (reference.discrepancy or 0.0)
    slopes = {}
    for sid in config.schemes:
        rows = [r for r in records if r.scheme == sid]
        slopes[sid] = fit_slope([r.h for r in rows], [r.error for r in rows], floor)[0]
    return SweepResult(config, reference, records, slopes, floor)
