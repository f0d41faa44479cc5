"""Shared domain types: grids, waveguide parameters, complex fields, validation.

Unit conventions, fixed project-wide:
    time        ps
    length      cm
    slowness    ps/cm   (inverse group velocity relative to the pump frame)
    coupling    cm^-1

All types are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TimeGrid",
    "ZGrid",
    "WaveguideParams",
    "ComplexField",
    "ValidationReport",
    "inner_product",
    "field_norm",
    "normalize",
    "validate_config",
    "worker_count",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid spanning [-window_ps/2, window_ps/2).

    Sample j sits at t_j = -window_ps/2 + j * dt_ps.  n_time must be a
    power of two (>= 8) so spectral advection stays a plain FFT.
    """

    n_time: int
    window_ps: float

    def __post_init__(self):
        if not isinstance(self.n_time, (int, np.integer)) or self.n_time < 8:
            raise ValueError(f"n_time must be an integer >= 8, got {self.n_time!r}")
        if not _is_power_of_two(int(self.n_time)):
            raise ValueError(f"n_time must be a power of two, got {self.n_time}")
        if not (self.window_ps > 0):
            raise ValueError(f"window_ps must be positive, got {self.window_ps!r}")

    @property
    def dt_ps(self) -> float:
        return self.window_ps / self.n_time

    def times(self) -> np.ndarray:
        """Sample times t_j in ps."""
        return -0.5 * self.window_ps + self.dt_ps * np.arange(self.n_time)

    def angular_frequencies(self) -> np.ndarray:
        """FFT-ordered angular frequencies omega_k in rad/ps."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_time, self.dt_ps)


@dataclass(frozen=True)
class ZGrid:
    """Propagation grid along the waveguide: n_z equal steps over length_cm."""

    n_z: int

    def __post_init__(self):
        if not isinstance(self.n_z, (int, np.integer)) or self.n_z < 1:
            raise ValueError(f"n_z must be an integer >= 1, got {self.n_z!r}")

    def dz_cm(self, length_cm: float) -> float:
        return length_cm / self.n_z


@dataclass(frozen=True)
class WaveguideParams:
    """Coupled-wave coefficients of the conversion region.

    eta_mag / eta_phase form the complex coupling eta (cm^-1), which absorbs
    pump power and spatial mode overlap.  mu is the signal slowness and nu the
    sum-frequency slowness, both relative to the pump frame (ps/cm).
    """

    eta_mag: float
    mu_ps_per_cm: float
    nu_ps_per_cm: float
    length_cm: float
    eta_phase: float = 0.0

    def __post_init__(self):
        if not (self.length_cm > 0):
            raise ValueError(f"length_cm must be positive, got {self.length_cm!r}")
        if self.eta_mag < 0:
            raise ValueError(f"eta_mag must be >= 0, got {self.eta_mag!r}")

    @property
    def eta(self) -> complex:
        return self.eta_mag * complex(math.cos(self.eta_phase), math.sin(self.eta_phase))


@dataclass(frozen=True)
class ComplexField:
    """Complex field samples on a TimeGrid (one slowly-varying envelope)."""

    grid: TimeGrid
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.shape != (self.grid.n_time,):
            raise ValueError(
                f"samples shape {samples.shape} does not match n_time={self.grid.n_time}"
            )
        samples = samples.copy()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)


def _same_grid(a: TimeGrid, b: TimeGrid) -> bool:
    return a.n_time == b.n_time and a.window_ps == b.window_ps


def inner_product(u: ComplexField, v: ComplexField) -> complex:
    """dt-weighted inner product sum_j conj(u_j) v_j * dt.

    Conjugate-linear in the first argument; the weight makes mode
    normalization match the continuous convention integral |psi|^2 dt = 1.
    """
    if not _same_grid(u.grid, v.grid):
        raise ValueError("inner_product requires fields on the same grid")
    return complex(np.vdot(u.samples, v.samples) * u.grid.dt_ps)


def field_norm(u: ComplexField) -> float:
    """sqrt of the dt-weighted energy of the field."""
    return math.sqrt(max(inner_product(u, u).real, 0.0))


def normalize(u: ComplexField) -> ComplexField:
    """Rescale to unit dt-weighted norm."""
    n = field_norm(u)
    if n == 0.0:
        raise ValueError("cannot normalize an all-zero field")
    return ComplexField(u.grid, u.samples / n)


@dataclass
class ValidationReport:
    """Outcome of validate_config: hard errors plus advisory warnings."""

    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def raise_on_error(self):
        if self.errors:
            raise ValueError("invalid configuration: " + "; ".join(self.errors))


def validate_config(wg, tg, zg, pump) -> ValidationReport:
    """Check a run configuration for hard errors and soft numerical hazards.

    Hard errors re-check the type invariants (useful for configs built by
    hand rather than through the constructors).  Warnings:
      (a) pump energy outside the central 80% of the window above 1e-6 of
          the total (wrap-around contamination of the pump itself),
      (b) walk-off max(|mu|,|nu|)*L above 25% of the window (periodic
          boundary wrap of the propagating fields),
      (c) advection phase per half-step above pi at the Nyquist frequency
          (phase ramp aliasing within a single split step).
    """
    report = ValidationReport()

    n_time = getattr(tg, "n_time", 0)
    window = getattr(tg, "window_ps", 0.0)
    n_z = getattr(zg, "n_z", 0)
    length = getattr(wg, "length_cm", 0.0)
    if not (isinstance(n_time, (int, np.integer)) and n_time >= 8 and _is_power_of_two(int(n_time))):
        report.errors.append(f"n_time must be a power of two >= 8, got {n_time!r}")
    if not (window > 0):
        report.errors.append(f"window_ps must be positive, got {window!r}")
    if not (isinstance(n_z, (int, np.integer)) and n_z >= 1):
        report.errors.append(f"n_z must be an integer >= 1, got {n_z!r}")
    if not (length > 0):
        report.errors.append(f"length_cm must be positive, got {length!r}")
    if getattr(wg, "eta_mag", 0.0) < 0:
        report.errors.append(f"eta_mag must be >= 0, got {wg.eta_mag!r}")
    if not report.ok:
        return report

    f = pump.evaluate(tg).samples
    energy = np.abs(f) ** 2
    total = float(energy.sum())
    if total > 0.0:
        t = tg.times()
        outside = float(energy[np.abs(t) > 0.4 * window].sum())
        if outside > 1e-6 * total:
            report.warnings.append(
                f"pump energy outside the central 80% of the window is "
                f"{outside / total:.3g} of the total (> 1e-6); expect wrap-around"
            )

    walkoff = max(abs(wg.mu_ps_per_cm), abs(wg.nu_ps_per_cm)) * length
    if walkoff > 0.25 * window:
        report.warnings.append(
            f"walk-off {walkoff:.3g} ps exceeds 25% of the {window:.3g} ps window; "
            f"fields may wrap around the periodic boundary"
        )

    dz = zg.dz_cm(length)
    omega_nyq = np.pi / tg.dt_ps
    phase = max(abs(wg.mu_ps_per_cm), abs(wg.nu_ps_per_cm)) * omega_nyq * dz / 2.0
    if phase > np.pi:
        report.warnings.append(
            f"advection phase per half-step at Nyquist is {phase:.3g} rad (> pi); "
            f"increase n_z or reduce the bandwidth"
        )

    return report


def worker_count(requested: int | None = None) -> int:
    """Number of parallel workers, capped by the QFC_THREADS environment variable."""
    base = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get("QFC_THREADS")
    if cap is not None:
        try:
            base = min(base, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, base)
