"""Split-step solver for the coupled signal / sum-frequency field equations.

The model, in the pump's co-moving frame (t in ps, z in cm):

    (d/dz + mu d/dt) a(z,t) = i eta f(t) b(z,t)
    (d/dz + nu d/dt) b(z,t) = i conj(eta) conj(f(t)) a(z,t)

a is the signal envelope, b the sum-frequency envelope, f the classical pump
envelope (z-independent in this frame), eta the complex coupling in cm^-1,
mu/nu the slownesses relative to the pump in ps/cm.  The equations are linear
in (a, b), so the quantum dynamics are fully captured by the classical
scattering matrix S with (a_out; b_out) = S (a_in; b_in).

Discretization: Strang splitting per z-step.  Advection is applied as an
exact spectral phase ramp exp(-i omega mu dz/2) over half a step (periodic
boundary), and the pointwise coupling is applied as the exact 2x2 rotation

    a' = cos(theta) a + i e^{+i phi} sin(theta) b
    b' = i e^{-i phi} sin(theta) a + cos(theta) b

with theta_j = |eta f(t_j)| dz and phi_j = arg(eta f(t_j)).  Every sub-step
is unitary, so unitarity defects only measure splitting commutator error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .core import (
    ComplexField,
    TimeGrid,
    WaveguideParams,
    ZGrid,
    validate_config,
    worker_count,
)

__all__ = [
    "ScatteringKernel",
    "propagate_pair",
    "build_kernel",
    "oracle_fine_ode",
    "write_kernel_csv",
]


@dataclass(frozen=True)
class ScatteringKernel:
    """Discretized 2N x 2N lossless transfer matrix over the time grid.

    Blocks satisfy (a_out; b_out) = [[AA, AB], [BA, BB]] (a_in; b_in) on raw
    samples.  BA is the discretized conversion Green's function G(t_i, t_j)
    times dt (signal -> sum frequency); AA is the residual signal -> signal
    map times dt in the same convention.
    """

    grid: TimeGrid
    AA: np.ndarray
    AB: np.ndarray
    BA: np.ndarray
    BB: np.ndarray

    def __post_init__(self):
        n = self.grid.n_time
        for name in ("AA", "AB", "BA", "BB"):
            block = np.asarray(getattr(self, name), dtype=np.complex128)
            if block.shape != (n, n):
                raise ValueError(f"block {name} has shape {block.shape}, expected {(n, n)}")
            block = block.copy()
            block.setflags(write=False)
            object.__setattr__(self, name, block)

    @property
    def matrix(self) -> np.ndarray:
        """The assembled 2N x 2N scattering matrix."""
        return np.block([[self.AA, self.AB], [self.BA, self.BB]])

    def unitarity_defect(self) -> float:
        """max |S^H S - I|, the headline losslessness check."""
        s = self.matrix
        return float(np.abs(s.conj().T @ s - np.eye(s.shape[0])).max())


def _step_factors(wg: WaveguideParams, tg: TimeGrid, zg: ZGrid, pump_samples: np.ndarray):
    """Per-step multipliers: half-step advection phases and coupling rotation."""
    dz = zg.dz_cm(wg.length_cm)
    omega = tg.angular_frequencies()
    adv_a = np.exp(-1j * omega * wg.mu_ps_per_cm * dz / 2.0)
    adv_b = np.exp(-1j * omega * wg.nu_ps_per_cm * dz / 2.0)
    g = wg.eta * pump_samples
    theta = np.abs(g) * dz
    phi = np.angle(g)
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    rot_ab = 1j * np.exp(1j * phi) * sin_t
    rot_ba = 1j * np.exp(-1j * phi) * sin_t
    return adv_a, adv_b, cos_t, rot_ab, rot_ba


def _advect(x: np.ndarray, phase: np.ndarray, workers: int) -> np.ndarray:
    # x may be a single field (N,) or a stack of columns (N, m); axis 0 is time
    spec = scipy.fft.fft(x, axis=0, workers=workers)
    if x.ndim == 2:
        spec *= phase[:, None]
    else:
        spec *= phase
    return scipy.fft.ifft(spec, axis=0, workers=workers)


def _strang_step(a, b, factors, workers):
    adv_a, adv_b, cos_t, rot_ab, rot_ba = factors
    col = (slice(None), None) if a.ndim == 2 else slice(None)
    a = _advect(a, adv_a, workers)
    b = _advect(b, adv_b, workers)
    a, b = cos_t[col] * a + rot_ab[col] * b, rot_ba[col] * a + cos_t[col] * b
    a = _advect(a, adv_a, workers)
    b = _advect(b, adv_b, workers)
    return a, b


def propagate_pair(
    a: ComplexField,
    b: ComplexField,
    wg: WaveguideParams,
    pump,
    tg: TimeGrid,
    zg: ZGrid,
) -> tuple[ComplexField, ComplexField]:
    """Advance the signal/sum-frequency pair from z=0 to z=L.

    Each z-step applies half advection, the exact pointwise coupling
    rotation, then half advection.  Conserves sum(|a|^2 + |b|^2) dt to 1e-10.
    """
    validate_config(wg, tg, zg, pump).raise_on_error()
    workers = worker_count()
    factors = _step_factors(wg, tg, zg, pump.evaluate(tg).samples)
    xa = a.samples.astype(np.complex128)
    xb = b.samples.astype(np.complex128)
    for _ in range(zg.n_z):
        xa, xb = _strang_step(xa, xb, factors, workers)
    return ComplexField(tg, xa), ComplexField(tg, xb)


def build_kernel(wg: WaveguideParams, pump, tg: TimeGrid, zg: ZGrid) -> ScatteringKernel:
    """Assemble the full scattering matrix for one waveguide pass.

    The single Strang step is a fixed linear map (the pump does not depend on
    z in the co-moving frame), so S is that step applied to the identity and
    raised to the n_z-th power.  This equals propagating each canonical basis
    field through propagate_pair, column by column, up to roundoff, and is
    how the equality is tested.
    """
    validate_config(wg, tg, zg, pump).raise_on_error()
    n = tg.n_time
    workers = worker_count()
    factors = _step_factors(wg, tg, zg, pump.evaluate(tg).samples)
    eye = np.eye(2 * n, dtype=np.complex128)
    a, b = _strang_step(eye[:n], eye[n:], factors, workers)
    step = np.vstack([a, b])
    s = np.linalg.matrix_power(step, zg.n_z)
    return ScatteringKernel(tg, AA=s[:n, :n], AB=s[:n, n:], BA=s[n:, :n], BB=s[n:, n:])


def oracle_fine_ode(wg: WaveguideParams, pump, tg: TimeGrid, zg_fine: ZGrid) -> ScatteringKernel:
    """Reference kernel from 4th-order Runge-Kutta on the stiff ODE system.

    Spectral differentiation turns the pair of PDEs into a 2N-dimensional
    linear ODE system dY/dz = G Y with a z-independent generator

        G = [[-mu D, i eta diag(f)], [i conj(eta) diag(conj(f)), -nu D]],

    D being the exact spectral d/dt.  Classic RK4 on a constant linear system
    is exactly the 4th-degree Taylor stepper R(h G), so the oracle forms R
    once and powers it, which is arithmetically the same integration.
    Intended for small n_time (<= 128) and fine steps (dz_fine <= dz/8);
    used only as an independent check of build_kernel.
    """
    validate_config(wg, tg, zg_fine, pump).raise_on_error()
    n = tg.n_time
    omega = tg.angular_frequencies()
    fmat = scipy.fft.fft(np.eye(n), axis=0)
    diff = scipy.fft.ifft(1j * omega[:, None] * fmat, axis=0)
    f = pump.evaluate(tg).samples
    gen = np.zeros((2 * n, 2 * n), dtype=np.complex128)
    gen[:n, :n] = -wg.mu_ps_per_cm * diff
    gen[n:, n:] = -wg.nu_ps_per_cm * diff
    gen[:n, n:] = 1j * wg.eta * np.diag(f)
    gen[n:, :n] = 1j * np.conj(wg.eta) * np.diag(np.conj(f))

    h = zg_fine.dz_cm(wg.length_cm)
    hg = h * gen
    stepper = np.eye(2 * n, dtype=np.complex128)
    term = np.eye(2 * n, dtype=np.complex128)
    for k in (1, 2, 3, 4):
        term = term @ hg / k
        stepper += term
    s = np.linalg.matrix_power(stepper, zg_fine.n_z)
    return ScatteringKernel(tg, AA=s[:n, :n], AB=s[:n, n:], BA=s[n:, :n], BB=s[n:, n:])


def write_kernel_csv(kernel: ScatteringKernel, prefix: str) -> list:
    """Debug dump: one CSV per block with interleaved re/im columns.

    Not a stability-guaranteed format; intended for eyeballing kernels.
    """
    paths = []
    for name in ("AA", "AB", "BA", "BB"):
        block = getattr(kernel, name)
        inter = np.empty((block.shape[0], 2 * block.shape[1]))
        inter[:, 0::2] = block.real
        inter[:, 1::2] = block.imag
        path = f"{prefix}_{name}.csv"
        np.savetxt(path, inter, fmt="%.12g", delimiter=",")
        paths.append(path)
    return paths
