"""Cascaded mode-resolved photon counting.

A cascade passes one input signal through a sequence of conversion stages;
each stage converts part of the field to the sum-frequency band (where its
detector counts) and passes the residual on.  Serial and optical-loop
arrangements are the same stage sequence mathematically, so one model covers
both.  The quantum noise entering through unconverted vacuum is normal-order
silent for photon counting, so the only excess-count channel is the
phenomenological Poisson dark count of each detector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import ComplexField, TimeGrid, WaveguideParams, ZGrid, inner_product
from .propagator import ScatteringKernel, build_kernel

__all__ = [
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
]

EXACT_FOCK_LIMIT = 30
_BRANCH_PRUNE = 1e-13
_POISSON_TAIL = 1e-13
_CHUNK = 8192


@dataclass(frozen=True)
class DetectorModel:
    """Detector at a stage's sum-frequency port.

    kind 'pnr' resolves photon number (binomial efficiency thinning plus an
    independent Poisson dark count); kind 'apd' reports a single click with
    probability 1 - (1-efficiency)^k * exp(-dark_count_mean) given k photons.
    """

    kind: str
    efficiency: float = 1.0
    dark_count_mean: float = 0.0

    def __post_init__(self):
        if self.kind not in ("apd", "pnr"):
            raise ValueError(f"detector kind must be 'apd' or 'pnr', got {self.kind!r}")
        if not (0.0 <= self.efficiency <= 1.0):
            raise ValueError(f"efficiency must be in [0, 1], got {self.efficiency!r}")
        if self.dark_count_mean < 0:
            raise ValueError(f"dark_count_mean must be >= 0, got {self.dark_count_mean!r}")


@dataclass
class Stage:
    """One conversion stage: its pump, its detector, and a lazily built kernel."""

    pump: object
    detector: DetectorModel
    kernel: ScatteringKernel | None = None

    def ensure_kernel(self, wg: WaveguideParams, tg: TimeGrid, zg: ZGrid) -> ScatteringKernel:
        if self.kernel is None:
            self.kernel = build_kernel(wg, self.pump, tg, zg)
        return self.kernel


@dataclass(frozen=True)
class FockStatistics:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 0:
            raise ValueError(f"Fock photon number must be an integer >= 0, got {self.n!r}")


@dataclass(frozen=True)
class CoherentStatistics:
    alpha: complex

    @property
    def mean_photons(self) -> float:
        return abs(self.alpha) ** 2


@dataclass(frozen=True)
class InputState:
    """Normalized input mode plus its photon statistics (Fock or coherent)."""

    mode: ComplexField
    statistics: object

    def __post_init__(self):
        nrm = inner_product(self.mode, self.mode).real
        if abs(nrm - 1.0) > 1e-8:
            raise ValueError(f"input mode must be normalized; <u,u> = {nrm!r}")


@dataclass(frozen=True)
class CountRecord:
    """Observed counts per stage for one shot (or one outcome)."""

    per_stage_counts: tuple
    residual_prob: float

    def __post_init__(self):
        counts = tuple(int(c) for c in self.per_stage_counts)
        if any(c < 0 for c in counts):
            raise ValueError("counts must be nonnegative")
        if not (0.0 <= self.residual_prob <= 1.0 + 1e-9):
            raise ValueError(f"residual_prob must be in [0, 1], got {self.residual_prob!r}")
        object.__setattr__(self, "per_stage_counts", counts)


@dataclass(frozen=True)
class CascadeAmplitudes:
    """Per-stage converted amplitudes c_k and the final unconverted residual r.

    Losslessness of every stage gives sum_k ||c_k||^2 + ||r||^2 = 1 for a
    normalized input.
    """

    stage_amplitudes: list
    residual: ComplexField

    @property
    def probabilities(self) -> np.ndarray:
        dt = self.residual.grid.dt_ps
        return np.array([float(np.sum(np.abs(c.samples) ** 2) * dt) for c in self.stage_amplitudes])

    @property
    def residual_prob(self) -> float:
        r = self.residual
        return float(np.sum(np.abs(r.samples) ** 2) * r.grid.dt_ps)


def prepare_stages(stages, wg: WaveguideParams, tg: TimeGrid, zg: ZGrid):
    """Build all missing stage kernels in place and return the stages."""
    for stage in stages:
        stage.ensure_kernel(wg, tg, zg)
    return stages


def _require_kernels(stages):
    kernels = []
    grid = None
    for i, stage in enumerate(stages):
        if stage.kernel is None:
            raise ValueError(f"stage {i} has no kernel; call prepare_stages first")
        if grid is None:
            grid = stage.kernel.grid
        elif stage.kernel.grid != grid:
            raise ValueError(f"stage {i} kernel grid differs from stage 0")
        kernels.append(stage.kernel)
    if not kernels:
        raise ValueError("cascade needs at least one stage")
    return kernels, grid


def run_cascade_amplitudes(stages, u: ComplexField) -> CascadeAmplitudes:
    """Propagate a normalized mode through the cascade's conversion blocks.

    Stage k takes the surviving signal, emits a converted sum-frequency
    amplitude c_k = BA_k u_k, and forwards the residual u_{k+1} = AA_k u_k.
    """
    kernels, grid = _require_kernels(stages)
    if grid != u.grid:
        raise ValueError("input mode grid differs from the stage kernels' grid")
    nrm = inner_product(u, u).real
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"input mode must be normalized; <u,u> = {nrm!r}")
    current = u.samples
    converted = []
    for kernel in kernels:
        converted.append(ComplexField(grid, kernel.BA @ current))
        current = kernel.AA @ current
    return CascadeAmplitudes(stage_amplitudes=converted, residual=ComplexField(grid, current))


@dataclass(frozen=True)
class ExactCountDistribution:
    """Exact joint law of observed per-stage counts.

    probabilities maps count tuples (one entry per stage) to probability;
    truncated_mass is the enumeration mass dropped below the pruning
    threshold (kept under 1e-9).
    """

    probabilities: dict
    residual_prob: float
    truncated_mass: float

    def total(self) -> float:
        return float(sum(self.probabilities.values()))

    def records(self):
        return [
            (CountRecord(counts, self.residual_prob), p)
            for counts, p in sorted(self.probabilities.items())
        ]

    def mean_counts(self) -> np.ndarray:
        k = len(next(iter(self.probabilities)))
        mean = np.zeros(k)
        for counts, p in self.probabilities.items():
            mean += p * np.asarray(counts)
        return mean


def _poisson_support(mean: float) -> np.ndarray:
    if mean == 0.0:
        return np.array([1.0])
    kmax = int(stats.poisson.ppf(1.0 - _POISSON_TAIL, mean)) + 2
    return stats.poisson.pmf(np.arange(kmax + 1), mean)


def _pnr_observed_dist(k_pre: int, det: DetectorModel) -> np.ndarray:
    """Law of the PNR reading given k_pre photons at the detector."""
    thinned = stats.binom.pmf(np.arange(k_pre + 1), k_pre, det.efficiency)
    dark = _poisson_support(det.dark_count_mean)
    return np.convolve(thinned, dark)


def _apd_click_prob(k_pre: int, det: DetectorModel) -> float:
    return 1.0 - (1.0 - det.efficiency) ** k_pre * math.exp(-det.dark_count_mean)


def _multinomial_branches(n: int, probs: np.ndarray):
    """Enumerate multinomial outcomes (k_1..k_m) with branch pruning.

    Factorizes the multinomial into sequential binomials; branches whose
    total probability falls below the pruning threshold are dropped and
    their mass reported so callers can account for it.
    """
    m = len(probs)
    tails = np.concatenate([np.cumsum(probs[::-1])[::-1], [0.0]])
    results = []
    truncated = 0.0
    stack = [((), 0, n, 1.0)]
    while stack:
        prefix, i, remaining, prob = stack.pop()
        if prob <= _BRANCH_PRUNE:
            truncated += prob
            continue
        if i == m - 1:
            results.append((prefix + (remaining,), prob))
            continue
        tail = tails[i]
        cond = probs[i] / tail if tail > 0 else 0.0
        cond = min(max(cond, 0.0), 1.0)
        pmf = stats.binom.pmf(np.arange(remaining + 1), remaining, cond)
        for k in range(remaining + 1):
            stack.append((prefix + (k,), i + 1, remaining - k, prob * float(pmf[k])))
    return results, truncated


def _fold_detectors_fock(pre_joint, detectors):
    """Apply per-stage detector laws to the pre-detector joint distribution."""
    observed = {}
    truncated = 0.0
    for pre_counts, prob in pre_joint:
        partial = {(): prob}
        for k_pre, det in zip(pre_counts, detectors):
            nxt = {}
            if det.kind == "pnr":
                dist = _pnr_observed_dist(k_pre, det)
                for counts, p in partial.items():
                    for obs, q in enumerate(dist):
                        w = p * float(q)
                        if w <= _BRANCH_PRUNE:
                            truncated += w
                            continue
                        key = counts + (obs,)
                        nxt[key] = nxt.get(key, 0.0) + w
            else:
                click = _apd_click_prob(k_pre, det)
                for counts, p in partial.items():
                    for obs, q in ((1, click), (0, 1.0 - click)):
                        w = p * q
                        if w <= 0.0:
                            continue
                        key = counts + (obs,)
                        nxt[key] = nxt.get(key, 0.0) + w
            partial = nxt
        for counts, p in partial.items():
            observed[counts] = observed.get(counts, 0.0) + p
    return observed, truncated


def exact_count_distribution(stages, input_state: InputState) -> ExactCountDistribution:
    """Exact joint distribution of observed counts across the cascade.

    Fock inputs allocate their n photons multinomially over the K conversion
    channels plus the residual; coherent inputs produce independent Poisson
    counts per stage.  Detector models are folded in exactly.  Refuses Fock
    n > 30 (combinatorial blowup): use sample_counts for those.
    """
    kernels, _ = _require_kernels(stages)
    detectors = [stage.detector for stage in stages]
    amps = run_cascade_amplitudes(stages, input_state.mode)
    p_stage = amps.probabilities
    p_res = amps.residual_prob
    stats_ = input_state.statistics

    if isinstance(stats_, FockStatistics):
        n = stats_.n
        if n > EXACT_FOCK_LIMIT:
            raise ValueError(
                f"exact enumeration refuses Fock n={n} > {EXACT_FOCK_LIMIT}; "
                f"use sample_counts (Monte Carlo) instead"
            )
        pvec = np.append(p_stage, max(p_res, 0.0))
        pvec = np.clip(pvec, 0.0, None)
        pvec = pvec / pvec.sum()
        branches, trunc_pre = _multinomial_branches(n, pvec)
        pre_joint = [(counts[:-1], prob) for counts, prob in branches]
        observed, trunc_det = _fold_detectors_fock(pre_joint, detectors)
        truncated = trunc_pre + trunc_det
    elif isinstance(stats_, CoherentStatistics):
        mean = stats_.mean_photons
        per_stage = []
        truncated = 0.0
        for p_k, det in zip(p_stage, detectors):
            if det.kind == "pnr":
                # Poisson thinned by the efficiency plus Poisson dark is
                # again Poisson with the summed mean
                dist = _poisson_support(mean * p_k * det.efficiency + det.dark_count_mean)
                per_stage.append([(k, float(q)) for k, q in enumerate(dist)])
                truncated += max(0.0, 1.0 - float(dist.sum()))
            else:
                click = 1.0 - math.exp(-det.dark_count_mean) * math.exp(-mean * p_k * det.efficiency)
                per_stage.append([(0, 1.0 - click), (1, click)])
        observed = {(): 1.0}
        for options in per_stage:
            nxt = {}
            for counts, p in observed.items():
                for obs, q in options:
                    w = p * q
                    if w <= _BRANCH_PRUNE:
                        truncated += w
                        continue
                    nxt[counts + (obs,)] = nxt.get(counts + (obs,), 0.0) + w
            observed = nxt
    else:
        raise TypeError(f"unsupported statistics {type(stats_).__name__}")

    return ExactCountDistribution(
        probabilities=observed, residual_prob=p_res, truncated_mass=truncated
    )


def sample_counts_array(stages, input_state: InputState, shots: int, seed: int) -> np.ndarray:
    """Monte Carlo counts as a (shots, n_stages) integer array.

    Samples the same law as exact_count_distribution generatively, so it also
    covers Fock n > 30.  Shots are drawn in fixed-size chunks with
    SeedSequence-spawned substreams: byte-identical for a given seed
    regardless of worker count.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    kernels, _ = _require_kernels(stages)
    detectors = [stage.detector for stage in stages]
    amps = run_cascade_amplitudes(stages, input_state.mode)
    p_stage = amps.probabilities
    p_res = amps.residual_prob
    n_stages = len(p_stage)
    stats_ = input_state.statistics

    pvec = np.append(np.clip(p_stage, 0.0, None), max(p_res, 0.0))
    pvec = pvec / pvec.sum()

    seed_seq = np.random.SeedSequence(seed)
    n_chunks = (shots + _CHUNK - 1) // _CHUNK
    children = seed_seq.spawn(n_chunks)

    out = np.empty((shots, n_stages), dtype=np.int64)
    for idx in range(n_chunks):
        rng = np.random.default_rng(children[idx])
        lo = idx * _CHUNK
        hi = min(shots, lo + _CHUNK)
        m = hi - lo
        if isinstance(stats_, FockStatistics):
            pre = rng.multinomial(stats_.n, pvec, size=m)[:, :n_stages]
        elif isinstance(stats_, CoherentStatistics):
            mean = stats_.mean_photons
            pre = rng.poisson(mean * p_stage[None, :], size=(m, n_stages))
        else:
            raise TypeError(f"unsupported statistics {type(stats_).__name__}")
        obs = np.empty((m, n_stages), dtype=np.int64)
        for k, det in enumerate(detectors):
            if det.kind == "pnr":
                detected = rng.binomial(pre[:, k], det.efficiency)
                dark = rng.poisson(det.dark_count_mean, size=m)
                obs[:, k] = detected + dark
            else:
                q = 1.0 - (1.0 - det.efficiency) ** pre[:, k] * math.exp(-det.dark_count_mean)
                obs[:, k] = (rng.random(m) < q).astype(np.int64)
        out[lo:hi] = obs
    return out


def sample_counts(stages, input_state: InputState, shots: int, seed: int) -> list:
    """Monte Carlo sampling returning one CountRecord per shot."""
    counts = sample_counts_array(stages, input_state, shots, seed)
    amps = run_cascade_amplitudes(stages, input_state.mode)
    p_res = amps.residual_prob
    return [CountRecord(tuple(row), p_res) for row in counts]
