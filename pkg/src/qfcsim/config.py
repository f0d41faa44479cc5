"""JSON config ingestion: strict schemas for runs, cascade plans, optimization.

Every dict level rejects unknown keys: a silently ignored typo in a physics
parameter is the costliest failure mode this tool has.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .cascade import CoherentStatistics, DetectorModel, FockStatistics, Stage
from .core import ComplexField, TimeGrid, WaveguideParams, ZGrid, normalize
from .optimizer import Objective
from .pumps import GaussianPump, HarmonicGaussianPump, TabulatedPump

__all__ = ["RunConfig", "CascadeSpec", "OptimizeSpec", "load_run_config", "run_config_from_dict"]


class ConfigError(ValueError):
    pass


def _check_keys(d: dict, required: set, optional: set, path: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected an object, got {type(d).__name__}")
    keys = set(d)
    unknown = keys - required - optional
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}; allowed: {sorted(required | optional)}")
    missing = required - keys
    if missing:
        raise ConfigError(f"{path}: missing required keys {sorted(missing)}")


def _real(d: dict, key: str, path: str, default=None):
    if key not in d:
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {v!r}")
    return float(v)


def _integer(d: dict, key: str, path: str, default=None):
    if key not in d:
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {v!r}")
    return v


def _parse_waveguide(d: dict, path: str) -> WaveguideParams:
    _check_keys(d, {"eta_mag", "mu_ps_per_cm", "nu_ps_per_cm", "length_cm"}, {"eta_phase"}, path)
    try:
        return WaveguideParams(
            eta_mag=_real(d, "eta_mag", path),
            eta_phase=_real(d, "eta_phase", path, 0.0),
            mu_ps_per_cm=_real(d, "mu_ps_per_cm", path),
            nu_ps_per_cm=_real(d, "nu_ps_per_cm", path),
            length_cm=_real(d, "length_cm", path),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_grid(d: dict, path: str) -> tuple:
    _check_keys(d, {"n_time", "window_ps", "n_z"}, set(), path)
    try:
        tg = TimeGrid(n_time=_integer(d, "n_time", path), window_ps=_real(d, "window_ps", path))
        zg = ZGrid(n_z=_integer(d, "n_z", path))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return tg, zg


def _parse_pump(d: dict, path: str):
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError(f"{path}: pump needs a 'kind' field")
    kind = d["kind"]
    try:
        if kind == "gaussian":
            _check_keys(d, {"kind", "sigma_p_ps"}, {"delay_ps", "amplitude", "chirp_per_ps2"}, path)
            return GaussianPump(
                sigma_p_ps=_real(d, "sigma_p_ps", path),
                delay_ps=_real(d, "delay_ps", path, 0.0),
                amplitude=_real(d, "amplitude", path, 1.0),
                chirp_per_ps2=_real(d, "chirp_per_ps2", path, 0.0),
            )
        if kind == "harmonic_gaussian":
            _check_keys(d, {"kind", "sigma_p_ps", "harmonic", "rate_k"}, {"amplitude"}, path)
            if d["harmonic"] not in ("cos", "sin"):
                raise ConfigError(f"{path}.harmonic: must be 'cos' or 'sin', got {d['harmonic']!r}")
            return HarmonicGaussianPump(
                sigma_p_ps=_real(d, "sigma_p_ps", path),
                rate_k=_real(d, "rate_k", path),
                harmonic=d["harmonic"],
                amplitude=_real(d, "amplitude", path, 1.0),
            )
        if kind == "tabulated":
            _check_keys(d, {"kind", "n_time", "window_ps", "re"}, {"im"}, path)
            grid = TimeGrid(n_time=_integer(d, "n_time", path), window_ps=_real(d, "window_ps", path))
            re = np.asarray(d["re"], dtype=float)
            im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
            if re.shape != im.shape:
                raise ConfigError(f"{path}: re and im lengths differ")
            return TabulatedPump(grid, re + 1j * im)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"{path}.kind: unknown pump kind {kind!r}")


def _parse_detector(d: dict, path: str) -> DetectorModel:
    _check_keys(d, {"kind"}, {"efficiency", "dark_count_mean"}, path)
    if d["kind"] not in ("apd", "pnr"):
        raise ConfigError(f"{path}.kind: must be 'apd' or 'pnr', got {d['kind']!r}")
    try:
        return DetectorModel(
            kind=d["kind"],
            efficiency=_real(d, "efficiency", path, 1.0),
            dark_count_mean=_real(d, "dark_count_mean", path, 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class CascadeSpec:
    """Stage list plus the input state description (mode + statistics).

    input_mode is either the marker ('stage_fundamental', index) resolved
    against the built kernels, or a pump-like shape normalized on the grid.
    """

    stages: list
    input_mode: object
    statistics: object


def _parse_input(d: dict, path: str):
    _check_keys(d, {"mode", "statistics"}, set(), path)
    mode = d["mode"]
    if not isinstance(mode, dict) or "kind" not in mode:
        raise ConfigError(f"{path}.mode: needs a 'kind' field")
    if mode["kind"] == "stage_fundamental":
        _check_keys(mode, {"kind", "stage"}, set(), f"{path}.mode")
        idx = _integer(mode, "stage", f"{path}.mode")
        if idx < 0:
            raise ConfigError(f"{path}.mode.stage: must be >= 0, got {idx}")
        mode_spec = ("stage_fundamental", idx)
    else:
        mode_spec = _parse_pump(mode, f"{path}.mode")

    sd = d["statistics"]
    if not isinstance(sd, dict) or "kind" not in sd:
        raise ConfigError(f"{path}.statistics: needs a 'kind' field")
    if sd["kind"] == "fock":
        _check_keys(sd, {"kind", "n"}, set(), f"{path}.statistics")
        stats = FockStatistics(n=_integer(sd, "n", f"{path}.statistics"))
    elif sd["kind"] == "coherent":
        _check_keys(sd, {"kind", "alpha_re"}, {"alpha_im"}, f"{path}.statistics")
        stats = CoherentStatistics(
            alpha=complex(
                _real(sd, "alpha_re", f"{path}.statistics"),
                _real(sd, "alpha_im", f"{path}.statistics", 0.0),
            )
        )
    else:
        raise ConfigError(f"{path}.statistics.kind: must be 'fock' or 'coherent', got {sd['kind']!r}")
    return mode_spec, stats


def _parse_cascade(d: dict, path: str) -> CascadeSpec:
    _check_keys(d, {"stages", "input"}, set(), path)
    if not isinstance(d["stages"], list) or not d["stages"]:
        raise ConfigError(f"{path}.stages: expected a nonempty list")
    stages = []
    for i, sd in enumerate(d["stages"]):
        spath = f"{path}.stages[{i}]"
        _check_keys(sd, {"pump", "detector"}, set(), spath)
        stages.append(
            Stage(pump=_parse_pump(sd["pump"], f"{spath}.pump"), detector=_parse_detector(sd["detector"], f"{spath}.detector"))
        )
    mode_spec, stats = _parse_input(d["input"], f"{path}.input")
    return CascadeSpec(stages=stages, input_mode=mode_spec, statistics=stats)


@dataclass(frozen=True)
class OptimizeSpec:
    family: str
    objective: Objective
    budget: int
    seed: int
    restarts: int
    gaussian_bounds: dict | None = None
    hermite_order: int | None = None
    hermite_coefficient_bounds: tuple | None = None
    hermite_sigma_p_ps: float | None = None


def _parse_objective(v, path: str) -> Objective:
    if v == "selectivity":
        return Objective(kind="selectivity")
    if isinstance(v, dict):
        _check_keys(v, {"kind"}, {"epsilon"}, path)
        if v["kind"] == "selectivity":
            return Objective(kind="selectivity")
        if v["kind"] == "efficiency_floor":
            return Objective(kind="efficiency_floor", epsilon=_real(v, "epsilon", path, 0.0))
    raise ConfigError(f"{path}: objective must be 'selectivity' or an efficiency_floor object")


def _parse_optimize(d: dict, path: str) -> OptimizeSpec:
    _check_keys(
        d,
        {"family"},
        {"objective", "budget", "seed", "restarts", "bounds", "order", "coefficient_bounds", "sigma_p_ps"},
        path,
    )
    family = d["family"]
    objective = _parse_objective(d.get("objective", "selectivity"), f"{path}.objective")
    budget = _integer(d, "budget", path, 200)
    seed = _integer(d, "seed", path, 0)
    restarts = _integer(d, "restarts", path, 5)
    if budget < 1:
        raise ConfigError(f"{path}.budget: must be >= 1, got {budget}")
    if restarts < 1:
        raise ConfigError(f"{path}.restarts: must be >= 1, got {restarts}")

    if family == "gaussian":
        bounds = d.get("bounds")
        if not isinstance(bounds, dict) or not bounds:
            raise ConfigError(f"{path}.bounds: gaussian family needs a non-empty bounds object")
        parsed = {}
        for name, pair in bounds.items():
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ConfigError(f"{path}.bounds.{name}: expected [lo, hi]")
            parsed[name] = (float(pair[0]), float(pair[1]))
        return OptimizeSpec(
            family="gaussian", objective=objective, budget=budget, seed=seed,
            restarts=restarts, gaussian_bounds=parsed,
        )
    if family == "hermite":
        order = _integer(d, "order", path)
        pair = d.get("coefficient_bounds")
        if order is None or pair is None:
            raise ConfigError(f"{path}: hermite family needs 'order' and 'coefficient_bounds'")
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ConfigError(f"{path}.coefficient_bounds: expected [lo, hi]")
        return OptimizeSpec(
            family="hermite", objective=objective, budget=budget, seed=seed,
            restarts=restarts, hermite_order=order,
            hermite_coefficient_bounds=(float(pair[0]), float(pair[1])),
            hermite_sigma_p_ps=_real(d, "sigma_p_ps", path),
        )
    raise ConfigError(f"{path}.family: must be 'gaussian' or 'hermite', got {family!r}")


@dataclass(frozen=True)
class RunConfig:
    """One fully parsed configuration file."""

    wg: WaveguideParams
    tg: TimeGrid
    zg: ZGrid
    pump: object
    detector: DetectorModel | None = None
    cascade: CascadeSpec | None = None
    optimize: OptimizeSpec | None = None

    def resolve_input_mode(self, stages) -> ComplexField:
        """Turn the cascade input-mode spec into a normalized field."""
        spec = self.cascade.input_mode
        if isinstance(spec, tuple) and spec[0] == "stage_fundamental":
            idx = spec[1]
            if idx >= len(stages):
                raise ConfigError(f"input stage_fundamental index {idx} out of range")
            from .schmidt import decompose

            kernel = stages[idx].ensure_kernel(self.wg, self.tg, self.zg)
            return decompose(kernel, truncation=1).input_modes[0]
        return normalize(spec.evaluate(self.tg))


def run_config_from_dict(d: dict) -> RunConfig:
    _check_keys(d, {"waveguide", "grid", "pump"}, {"detector", "cascade", "optimize"}, "config")
    wg = _parse_waveguide(d["waveguide"], "config.waveguide")
    tg, zg = _parse_grid(d["grid"], "config.grid")
    pump = _parse_pump(d["pump"], "config.pump")
    detector = _parse_detector(d["detector"], "config.detector") if "detector" in d else None
    cascade = _parse_cascade(d["cascade"], "config.cascade") if "cascade" in d else None
    optimize = _parse_optimize(d["optimize"], "config.optimize") if "optimize" in d else None
    return RunConfig(wg=wg, tg=tg, zg=zg, pump=pump, detector=detector, cascade=cascade, optimize=optimize)


def load_run_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return run_config_from_dict(data)
