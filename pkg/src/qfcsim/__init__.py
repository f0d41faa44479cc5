"""qfcsim: temporal-mode quantum frequency conversion toolkit.

Solves the coupled signal / sum-frequency equations of a pumped chi(2)
waveguide, extracts the Schmidt (normal) mode structure of the conversion
kernel, simulates cascaded mode-resolved photon counting with detector
models, and searches pump shapes for single-mode selectivity.
"""

from .cascade import (
    CascadeAmplitudes,
    CoherentStatistics,
    CountRecord,
    DetectorModel,
    ExactCountDistribution,
    FockStatistics,
    InputState,
    Stage,
    exact_count_distribution,
    prepare_stages,
    run_cascade_amplitudes,
    sample_counts,
    sample_counts_array,
)
from .config import CascadeSpec, OptimizeSpec, RunConfig, load_run_config, run_config_from_dict
from .core import (
    ComplexField,
    TimeGrid,
    ValidationReport,
    WaveguideParams,
    ZGrid,
    field_norm,
    inner_product,
    normalize,
    validate_config,
    worker_count,
)
from .optimizer import (
    Objective,
    OptimizationProblem,
    OptimizationResult,
    PumpFamily,
    evaluate_objective,
    gaussian_family,
    hermite_family,
    optimize,
)
from .propagator import (
    ScatteringKernel,
    build_kernel,
    oracle_fine_ode,
    propagate_pair,
    write_kernel_csv,
)
from .pumps import GaussianPump, HarmonicGaussianPump, TabulatedPump, harmonic_pump_pair
from .schmidt import (
    SchmidtDecomposition,
    conversion_efficiencies,
    convert_probability,
    decompose,
    fundamental_overlap,
    single_mode_figure,
)

__version__ = "0.1.0"

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
    "GaussianPump",
    "HarmonicGaussianPump",
    "TabulatedPump",
    "harmonic_pump_pair",
    "ScatteringKernel",
    "propagate_pair",
    "build_kernel",
    "oracle_fine_ode",
    "write_kernel_csv",
    "SchmidtDecomposition",
    "decompose",
    "conversion_efficiencies",
    "convert_probability",
    "fundamental_overlap",
    "single_mode_figure",
    "DetectorModel",
    "Stage",
    "FockStatistics",
    "CoherentStatistics",
    "InputState",
    "CountRecord",
    "CascadeAmplitudes",
    "ExactCountDistribution",
    "prepare_stages",
    "run_cascade_amplitudes",
    "exact_count_distribution",
    "sample_counts",
    "sample_counts_array",
    "Objective",
    "PumpFamily",
    "gaussian_family",
    "hermite_family",
    "OptimizationProblem",
    "OptimizationResult",
    "evaluate_objective",
    "optimize",
    "RunConfig",
    "CascadeSpec",
    "OptimizeSpec",
    "load_run_config",
    "run_config_from_dict",
    "__version__",
]
