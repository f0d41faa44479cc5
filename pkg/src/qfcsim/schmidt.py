"""Schmidt (normal-mode) analysis of the conversion kernel.

The conversion block BA factors as BA = sum_n lambda_n phi_n psi_n^H dt with
both mode families dt-orthonormal.  Each input mode psi_n converts to its
partner phi_n independently with probability lambda_n^2, so the process acts
as a bank of beamsplitters, one per temporal mode.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import ComplexField, TimeGrid, WaveguideParams, inner_product
from .propagator import ScatteringKernel

__all__ = [
    "SchmidtDecomposition",
    "decompose",
    "conversion_efficiencies",
    "convert_probability",
    "fundamental_overlap",
    "single_mode_figure",
]

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Ordered singular triples (lambda_n, psi_n, phi_n) of the conversion kernel.

    lambdas descend; input_modes (psi) and output_modes (phi) are
    dt-orthonormal ComplexFields.  degenerate[n] flags modes living in a
    degenerate block (neighboring lambda within 1e-10), where individual
    vectors are basis-arbitrary and only subspaces are well-defined.
    """

    grid: TimeGrid
    lambdas: np.ndarray
    input_modes: list
    output_modes: list
    truncation_count: int
    degenerate: list

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float).copy()
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)


def decompose(kernel: ScatteringKernel, truncation: int | None = None) -> SchmidtDecomposition:
    """SVD of the conversion block with a reproducible phase convention.

    BA already carries the dt quadrature weight, so its singular values are
    the dimensionless conversion amplitudes lambda_n directly; the singular
    vectors are rescaled by 1/sqrt(dt) to restore dt-orthonormality.  Phases
    are fixed by making the largest-magnitude sample of each psi_n real
    positive, rotating phi_n oppositely so BA = sum lambda phi psi^H dt is
    preserved.
    """
    n = kernel.grid.n_time
    if truncation is None:
        truncation = n
    if truncation < 1:
        raise ValueError(f"truncation must be >= 1, got {truncation}")
    if truncation > n:
        warnings.warn(f"truncation {truncation} exceeds n_time {n}; clamping", stacklevel=2)
        truncation = n

    left, lam, right_h = np.linalg.svd(kernel.BA)
    scale = 1.0 / math.sqrt(kernel.grid.dt_ps)

    degenerate = []
    for i in range(truncation):
        near_prev = i > 0 and abs(lam[i - 1] - lam[i]) <= DEGENERACY_TOL
        near_next = i + 1 < n and abs(lam[i] - lam[i + 1]) <= DEGENERACY_TOL
        degenerate.append(bool(near_prev or near_next))

    input_modes = []
    output_modes = []
    for i in range(truncation):
        psi = right_h[i].conj() * scale
        phi = left[:, i] * scale
        j = int(np.argmax(np.abs(psi)))
        rot = psi[j]
        if abs(rot) > 0:
            rot = rot / abs(rot)
            psi = psi * rot.conjugate()
            phi = phi * rot.conjugate()
        input_modes.append(ComplexField(kernel.grid, psi))
        output_modes.append(ComplexField(kernel.grid, phi))

    return SchmidtDecomposition(
        grid=kernel.grid,
        lambdas=lam[:truncation],
        input_modes=input_modes,
        output_modes=output_modes,
        truncation_count=truncation,
        degenerate=degenerate,
    )


def conversion_efficiencies(dec: SchmidtDecomposition) -> np.ndarray:
    """Per-mode conversion probabilities lambda_n^2, in descending order."""
    return dec.lambdas**2


def _check_normalized(u: ComplexField):
    nrm = inner_product(u, u).real
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"input field must be normalized; <u,u> = {nrm!r}")


def convert_probability(dec_or_kernel, u: ComplexField) -> float:
    """Probability that a photon in normalized input mode u is converted.

    Given a kernel this is the dt-weighted ||BA u||^2; given a decomposition
    it is the equivalent Schmidt sum sum_n lambda_n^2 |<psi_n, u>|^2 (equal
    within 1e-10 when the decomposition is untruncated).
    """
    _check_normalized(u)
    if isinstance(dec_or_kernel, ScatteringKernel):
        kernel = dec_or_kernel
        if kernel.grid != u.grid:
            raise ValueError("kernel and field grids differ")
        out = kernel.BA @ u.samples
        return float(np.sum(np.abs(out) ** 2) * kernel.grid.dt_ps)
    dec = dec_or_kernel
    if dec.grid != u.grid:
        raise ValueError("decomposition and field grids differ")
    total = 0.0
    for lam, psi in zip(dec.lambdas, dec.input_modes):
        total += float(lam**2) * abs(inner_product(psi, u)) ** 2
    return total


def fundamental_overlap(dec_a: SchmidtDecomposition, dec_b: SchmidtDecomposition) -> float:
    """Squared modulus |<psi_0 of a, psi_0 of b>|^2 of the fundamental modes.

    The modulus makes the value independent of the phase convention.
    """
    if dec_a.grid != dec_b.grid:
        raise ValueError("decompositions live on different grids")
    return abs(inner_product(dec_a.input_modes[0], dec_b.input_modes[0])) ** 2


def _intensity_fwhm(t: np.ndarray, intensity: np.ndarray) -> float:
    # width between the outermost half-max crossings, linearly interpolated
    peak = intensity.max()
    if peak <= 0:
        raise ValueError("pump has no energy; FWHM undefined")
    half = 0.5 * peak
    above = np.nonzero(intensity >= half)[0]
    first, last = int(above[0]), int(above[-1])

    def cross(i_lo, i_hi):
        y0, y1 = intensity[i_lo], intensity[i_hi]
        if y1 == y0:
            return t[i_hi]
        frac = (half - y0) / (y1 - y0)
        return t[i_lo] + frac * (t[i_hi] - t[i_lo])

    t_left = t[first] if first == 0 else cross(first - 1, first)
    t_right = t[last] if last == len(t) - 1 else cross(last + 1, last)
    return float(abs(t_right - t_left))


def single_mode_figure(wg: WaveguideParams, pump) -> float:
    """Advisory B*T figure of merit for single-mode operation.

    B = 1/(|mu - nu| L) in THz is the heuristic conversion bandwidth; T is
    the intensity FWHM of |f|^2 in ps.  B*T < 1 suggests the pump addresses
    essentially one temporal mode.  Advisory only; never used in computation
    paths.
    """
    gap = abs(wg.mu_ps_per_cm - wg.nu_ps_per_cm)
    if gap == 0:
        raise ValueError("single_mode_figure undefined for mu == nu (unbounded bandwidth)")
    bandwidth = 1.0 / (gap * wg.length_cm)

    grid = getattr(pump, "grid", None)
    if grid is None:
        sigma = getattr(pump, "sigma_p_ps")
        window = max(32.0 * sigma, 8.0)
        grid = TimeGrid(4096, window)
    field = pump.evaluate(grid)
    duration = _intensity_fwhm(grid.times(), np.abs(field.samples) ** 2)
    return bandwidth * duration
