"""Shared fixtures: reference kernels built once per session, and the
acceptance summary printer (one PASS/FAIL line per criterion, emitted from
the terminal-summary hook so pytest's capture cannot swallow it)."""

import time

import numpy as np
import pytest

from qfcsim import (
    GaussianPump,
    TimeGrid,
    WaveguideParams,
    ZGrid,
    build_kernel,
    harmonic_pump_pair,
)

ETA = 0.5 * np.pi

ACCEPTANCE_RESULTS = []


def record_acceptance(name: str, passed: bool, detail: str):
    ACCEPTANCE_RESULTS.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status}  {name}: {detail}")


@pytest.fixture(scope="session")
def ref_grid():
    return TimeGrid(512, 20.0)


@pytest.fixture(scope="session")
def ref_zgrid():
    return ZGrid(400)


@pytest.fixture(scope="session")
def ref_waveguide():
    return WaveguideParams(eta_mag=ETA, mu_ps_per_cm=1.0, nu_ps_per_cm=-1.0, length_cm=1.0)


@pytest.fixture(scope="session")
def ref_kernel_timed(ref_waveguide, ref_grid, ref_zgrid):
    """Reference-point kernel (counter-propagating walk-off, 0.8 ps pump)."""
    start = time.perf_counter()
    kernel = build_kernel(ref_waveguide, GaussianPump(sigma_p_ps=0.8), ref_grid, ref_zgrid)
    elapsed = time.perf_counter() - start
    return kernel, elapsed


@pytest.fixture(scope="session")
def ref_kernel(ref_kernel_timed):
    return ref_kernel_timed[0]


@pytest.fixture(scope="session")
def delayed_kernel(ref_waveguide, ref_grid, ref_zgrid):
    """Same configuration with the pump delayed by 3 ps."""
    return build_kernel(ref_waveguide, GaussianPump(sigma_p_ps=0.8, delay_ps=3.0), ref_grid, ref_zgrid)


@pytest.fixture(scope="session")
def second_config_kernel(ref_grid, ref_zgrid):
    """Co-propagating walk-off configuration (mu=3, nu=1, 1.6 ps pump)."""
    wg = WaveguideParams(eta_mag=ETA, mu_ps_per_cm=3.0, nu_ps_per_cm=1.0, length_cm=1.0)
    return build_kernel(wg, GaussianPump(sigma_p_ps=1.6), ref_grid, ref_zgrid)


@pytest.fixture(scope="session")
def harmonic_waveguide():
    return WaveguideParams(eta_mag=ETA, mu_ps_per_cm=0.0, nu_ps_per_cm=3.0, length_cm=1.0)


@pytest.fixture(scope="session")
def harmonic_kernels(harmonic_waveguide, ref_grid, ref_zgrid):
    """Cos/sin modulated pump pair on the zero-signal-walk-off configuration."""
    cos_pump, sin_pump = harmonic_pump_pair()
    return (
        build_kernel(harmonic_waveguide, cos_pump, ref_grid, ref_zgrid),
        build_kernel(harmonic_waveguide, sin_pump, ref_grid, ref_zgrid),
    )


@pytest.fixture(scope="session")
def small_grid():
    return TimeGrid(64, 20.0)


@pytest.fixture(scope="session")
def small_kernel(small_grid):
    wg = WaveguideParams(eta_mag=ETA, mu_ps_per_cm=1.0, nu_ps_per_cm=-1.0, length_cm=1.0)
    return build_kernel(wg, GaussianPump(sigma_p_ps=0.8), small_grid, ZGrid(200))
