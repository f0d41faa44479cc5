"""Derivative-free pump-shape optimization.

Searches a parametric pump family for the shape that maximizes a Schmidt
objective, by default the selectivity lambda_0^2 - lambda_1^2.  The
objective passes through an SVD and is not smooth at degeneracies, so a
bounded Nelder-Mead simplex with seeded random restarts is used rather than
anything gradient-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import TimeGrid, WaveguideParams, ZGrid
from .propagator import build_kernel
from .pumps import GaussianPump, TabulatedPump

__all__ = [
    "Objective",
    "PumpFamily",
    "gaussian_family",
    "hermite_family",
    "OptimizationProblem",
    "OptimizationResult",
    "evaluate_objective",
    "optimize",
]

_GAUSSIAN_PARAM_ORDER = ("sigma_p_ps", "amplitude", "chirp_per_ps2")
EFFICIENCY_FLOOR_PENALTY = 10.0


@dataclass(frozen=True)
class Objective:
    """Selectivity maximizes lambda_0^2 - lambda_1^2; efficiency_floor
    maximizes lambda_0^2 with a soft penalty when lambda_1^2 exceeds epsilon."""

    kind: str = "selectivity"
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in ("selectivity", "efficiency_floor"):
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.kind == "efficiency_floor" and self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon!r}")

    def value(self, lam0_sq: float, lam1_sq: float) -> float:
        if self.kind == "selectivity":
            return lam0_sq - lam1_sq
        return lam0_sq - EFFICIENCY_FLOOR_PENALTY * max(0.0, lam1_sq - self.epsilon)


@dataclass(frozen=True)
class PumpFamily:
    """Map from a bounded parameter vector to a PumpShape."""

    names: tuple
    bounds: np.ndarray  # (d, 2) finite lo/hi per parameter
    make: object  # callable params -> PumpShape

    def __post_init__(self):
        bounds = np.asarray(self.bounds, dtype=float)
        if bounds.shape != (len(self.names), 2):
            raise ValueError(f"bounds shape {bounds.shape} does not match {len(self.names)} names")
        if not np.all(np.isfinite(bounds)):
            raise ValueError("bounds must be finite")
        if not np.all(bounds[:, 1] >= bounds[:, 0]):
            raise ValueError("each bound must satisfy lo <= hi")
        bounds = bounds.copy()
        bounds.setflags(write=False)
        object.__setattr__(self, "bounds", bounds)


def gaussian_family(base: GaussianPump, bounds: dict) -> PumpFamily:
    """Gaussian pumps with a chosen subset of (width, amplitude, chirp) free.

    bounds maps parameter names to (lo, hi); parameters not listed stay at
    the base pump's values.
    """
    names = tuple(n for n in _GAUSSIAN_PARAM_ORDER if n in bounds)
    if not names:
        raise ValueError(f"no free parameters; choose from {_GAUSSIAN_PARAM_ORDER}")
    unknown = set(bounds) - set(_GAUSSIAN_PARAM_ORDER)
    if unknown:
        raise ValueError(f"unknown gaussian parameters {sorted(unknown)}")
    arr = np.array([bounds[n] for n in names], dtype=float)

    def make(params):
        kwargs = dict(
            sigma_p_ps=base.sigma_p_ps,
            delay_ps=base.delay_ps,
            amplitude=base.amplitude,
            chirp_per_ps2=base.chirp_per_ps2,
        )
        for name, value in zip(names, params):
            kwargs[name] = float(value)
        return GaussianPump(**kwargs)

    return PumpFamily(names=names, bounds=arr, make=make)


def hermite_family(sigma_p_ps: float, order: int, coefficient_bounds, grid: TimeGrid) -> PumpFamily:
    """Hermite expansion on a Gaussian carrier, tabulated on the given grid.

    f(t) = sum_m c_m H_m(t / sigma) exp(-t^2 / 2 sigma^2), m = 0..order,
    with order capped at 6.  Enough freedom to beat plain Gaussians while
    keeping the simplex small.
    """
    if not (1 <= order <= 6):
        raise ValueError(f"order must be in 1..6, got {order}")
    if not (sigma_p_ps > 0):
        raise ValueError(f"sigma_p_ps must be positive, got {sigma_p_ps!r}")
    lo, hi = float(coefficient_bounds[0]), float(coefficient_bounds[1])
    names = tuple(f"c_{m}" for m in range(order + 1))
    arr = np.array([[lo, hi]] * (order + 1))
    x = grid.times() / sigma_p_ps
    carrier = np.exp(-(x**2) / 2.0)

    def make(params):
        poly = np.polynomial.hermite.hermval(x, np.asarray(params, dtype=float))
        return TabulatedPump(grid, poly * carrier)

    return PumpFamily(names=names, bounds=arr, make=make)


@dataclass(frozen=True)
class OptimizationProblem:
    wg: WaveguideParams
    tg: TimeGrid
    zg: ZGrid
    family: PumpFamily
    objective: Objective = Objective()
    budget: int = 200

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError(f"budget must be >= 1, got {self.budget}")


@dataclass
class OptimizationResult:
    best_params: np.ndarray
    best_pump: object
    best_objective: float
    trace: list = field(default_factory=list)  # (params tuple, objective) per evaluation
    evaluations_used: int = 0
    budget_exhausted_early: bool = False


def evaluate_objective(problem: OptimizationProblem, params) -> float:
    """Build the kernel for one parameter vector and score it."""
    params = np.asarray(params, dtype=float)
    lo, hi = problem.family.bounds[:, 0], problem.family.bounds[:, 1]
    if np.any(params < lo - 1e-12) or np.any(params > hi + 1e-12):
        raise ValueError(f"params {params} outside bounds")
    pump = problem.family.make(params)
    kernel = build_kernel(problem.wg, pump, problem.tg, problem.zg)
    lam = np.linalg.svd(kernel.BA, compute_uv=False)
    lam1_sq = float(lam[1] ** 2) if len(lam) > 1 else 0.0
    return problem.objective.value(float(lam[0] ** 2), lam1_sq)


class _Budget:
    def __init__(self, problem: OptimizationProblem):
        self.problem = problem
        self.used = 0
        self.trace = []
        self.best_value = -np.inf
        self.best_params = None

    @property
    def exhausted(self) -> bool:
        return self.used >= self.problem.budget

    def evaluate(self, params: np.ndarray) -> float:
        self.used += 1
        value = evaluate_objective(self.problem, params)
        self.trace.append((tuple(float(p) for p in params), float(value)))
        if value > self.best_value:
            self.best_value = value
            self.best_params = params.copy()
        return value


def _nelder_mead(budget: _Budget, x0: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> bool:
    """One bounded Nelder-Mead restart in [0,1]^d normalized coordinates.

    Returns True if the simplex converged (diameter < 1e-4) before the
    global budget ran out.  Standard reflection/expansion/contraction/shrink
    coefficients; candidate points are clipped back into the box.
    """
    d = len(x0)
    span = hi - lo

    def phys(x):
        return lo + x * span

    def take(x):
        x = np.clip(x, 0.0, 1.0)
        return x, -budget.evaluate(phys(x))  # minimize the negative

    simplex = [x0]
    for i in range(d):
        step = 0.1 if x0[i] + 0.1 <= 1.0 else -0.1
        vertex = x0.copy()
        vertex[i] += step
        simplex.append(vertex)

    values = []
    verts = []
    for v in simplex:
        if budget.exhausted:
            return False
        v, f = take(v)
        verts.append(v)
        values.append(f)

    while True:
        order = np.argsort(values)
        verts = [verts[i] for i in order]
        values = [values[i] for i in order]
        diameter = max(float(np.linalg.norm(v - verts[0])) for v in verts[1:]) if d > 0 else 0.0
        if diameter < 1e-4:
            return True
        if budget.exhausted:
            return False

        centroid = np.mean(verts[:-1], axis=0)
        reflected = centroid + (centroid - verts[-1])
        xr, fr = take(reflected)
        if fr < values[0]:
            if budget.exhausted:
                verts[-1], values[-1] = xr, fr
                continue
            expanded = centroid + 2.0 * (centroid - verts[-1])
            xe, fe = take(expanded)
            if fe < fr:
                verts[-1], values[-1] = xe, fe
            else:
                verts[-1], values[-1] = xr, fr
        elif fr < values[-2]:
            verts[-1], values[-1] = xr, fr
        else:
            if budget.exhausted:
                continue
            contracted = centroid + 0.5 * (verts[-1] - centroid)
            xc, fc = take(contracted)
            if fc < values[-1]:
                verts[-1], values[-1] = xc, fc
            else:
                # shrink toward the best vertex
                for i in range(1, len(verts)):
                    if budget.exhausted:
                        return False
                    shrunk = verts[0] + 0.5 * (verts[i] - verts[0])
                    verts[i], values[i] = take(shrunk)


def optimize(problem: OptimizationProblem, seed: int = 0, restarts: int = 5) -> OptimizationResult:
    """Nelder-Mead with seeded random restarts inside the bounds.

    Deterministic for a fixed seed.  The evaluation budget is global across
    restarts; if it runs out before the first restart converges, the result
    carries budget_exhausted_early=True.  Restarts merge by best objective,
    ties broken by the earliest restart.
    """
    rng = np.random.default_rng(seed)
    budget = _Budget(problem)
    d = len(problem.family.names)
    lo, hi = problem.family.bounds[:, 0], problem.family.bounds[:, 1]
    first_converged = False

    for restart in range(restarts):
        if budget.exhausted:
            break
        x0 = rng.uniform(0.0, 1.0, size=d)
        converged = _nelder_mead(budget, x0, lo, hi)
        if restart == 0:
            first_converged = converged

    params = budget.best_params if budget.best_params is not None else lo.copy()
    return OptimizationResult(
        best_params=params,
        best_pump=problem.family.make(params),
        best_objective=budget.best_value,
        trace=budget.trace,
        evaluations_used=budget.used,
        budget_exhausted_early=not first_converged,
    )
