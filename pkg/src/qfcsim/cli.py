"""qfc command line: modes, sweep, overlap, cascade, optimize.

Data outputs are CSV (12 significant digits) and JSON, both deterministic:
re-running a command with the same inputs reproduces the files byte for
byte.  Validation warnings go to stderr, never into data files.  Optional
--plot renders PNG figures alongside the delimited output.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import sys

import numpy as np

from .cascade import FockStatistics, InputState, exact_count_distribution, prepare_stages, sample_counts_array
from .config import ConfigError, RunConfig, load_run_config
from .core import validate_config, worker_count
from .optimizer import OptimizationProblem, gaussian_family, hermite_family, optimize
from .propagator import build_kernel
from .pumps import GaussianPump, HarmonicGaussianPump
from .schmidt import conversion_efficiencies, decompose, fundamental_overlap

SWEEP_MODES = 6
_FMT = "%.12g"


def _fmt(x: float) -> str:
    return _FMT % (x,)


def _warn(report):
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)


def _write_rows(path: str, header: list, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path: str, payload: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _validated(cfg: RunConfig):
    report = validate_config(cfg.wg, cfg.tg, cfg.zg, cfg.pump)
    report.raise_on_error()
    _warn(report)


def cmd_modes(args) -> int:
    cfg = load_run_config(args.config)
    _validated(cfg)
    kernel = build_kernel(cfg.wg, cfg.pump, cfg.tg, cfg.zg)
    dec = decompose(kernel, truncation=args.truncate)
    effs = conversion_efficiencies(dec)

    spectrum_rows = [(n, float(dec.lambdas[n]), float(effs[n])) for n in range(dec.truncation_count)]
    _write_rows(f"{args.out}_spectrum.csv", ["n", "lambda", "lambda_sq"], spectrum_rows)

    t = cfg.tg.times()
    header = ["t_ps"]
    for n in range(dec.truncation_count):
        header += [f"re_psi_{n}", f"im_psi_{n}", f"re_phi_{n}", f"im_phi_{n}"]
    rows = []
    for j in range(cfg.tg.n_time):
        row = [float(t[j])]
        for n in range(dec.truncation_count):
            psi = dec.input_modes[n].samples[j]
            phi = dec.output_modes[n].samples[j]
            row += [float(psi.real), float(psi.imag), float(phi.real), float(phi.imag)]
        rows.append(row)
    _write_rows(f"{args.out}_modes.csv", header, rows)

    if args.plot:
        from . import report

        report.plot_spectrum(effs, f"{args.out}_spectrum.png")
        report.plot_modes(t, dec, f"{args.out}_modes.png")
    return 0


def _with_param(cfg: RunConfig, name: str, value: float) -> RunConfig:
    if name == "sigma_p_ps":
        if not isinstance(cfg.pump, (GaussianPump, HarmonicGaussianPump)):
            raise ConfigError(f"pump kind {type(cfg.pump).__name__} has no sigma_p_ps")
        return dataclasses.replace(cfg, pump=dataclasses.replace(cfg.pump, sigma_p_ps=float(value)))
    if name == "eta_mag":
        return dataclasses.replace(cfg, wg=dataclasses.replace(cfg.wg, eta_mag=float(value)))
    if name == "length_cm":
        return dataclasses.replace(cfg, wg=dataclasses.replace(cfg.wg, length_cm=float(value)))
    if name == "n_z":
        return dataclasses.replace(cfg, zg=dataclasses.replace(cfg.zg, n_z=max(1, int(round(value)))))
    raise ConfigError(f"unknown sweep parameter {name!r}; valid: sigma_p_ps, eta_mag, length_cm, n_z")


def _sweep_point(cfg: RunConfig) -> np.ndarray:
    kernel = build_kernel(cfg.wg, cfg.pump, cfg.tg, cfg.zg)
    lam = np.linalg.svd(kernel.BA, compute_uv=False)
    effs = np.zeros(SWEEP_MODES)
    k = min(SWEEP_MODES, len(lam))
    effs[:k] = lam[:k] ** 2
    return effs


def cmd_sweep(args) -> int:
    cfg = load_run_config(args.config)
    _validated(cfg)
    if args.steps < 2:
        raise ConfigError(f"steps must be >= 2, got {args.steps}")
    values = np.linspace(args.from_value, args.to_value, args.steps)
    configs = [_with_param(cfg, args.param, v) for v in values]

    workers = worker_count()
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            effs = list(pool.map(_sweep_point, configs))
    else:
        effs = [_sweep_point(c) for c in configs]
    effs = np.array(effs)

    header = ["param_value"] + [f"lambda_sq_{n}" for n in range(SWEEP_MODES)]
    rows = [[float(values[i])] + [float(e) for e in effs[i]] for i in range(len(values))]
    _write_rows(args.out, header, rows)

    if args.plot:
        from . import report

        report.plot_sweep(args.param, values, effs, args.out + ".png")
    return 0


def cmd_overlap(args) -> int:
    cfg_a = load_run_config(args.config_a)
    cfg_b = load_run_config(args.config_b)
    if cfg_a.tg != cfg_b.tg or cfg_a.zg != cfg_b.zg:
        raise ConfigError("overlap requires identical grid sections")
    if cfg_a.wg != cfg_b.wg:
        raise ConfigError("overlap requires identical waveguide sections")
    _validated(cfg_a)
    _validated(cfg_b)
    dec_a = decompose(build_kernel(cfg_a.wg, cfg_a.pump, cfg_a.tg, cfg_a.zg), truncation=1)
    dec_b = decompose(build_kernel(cfg_b.wg, cfg_b.pump, cfg_b.tg, cfg_b.zg), truncation=1)
    payload = {
        "overlap_fundamental": fundamental_overlap(dec_a, dec_b),
        "lambda_sq_0_a": float(dec_a.lambdas[0] ** 2),
        "lambda_sq_0_b": float(dec_b.lambdas[0] ** 2),
    }
    _write_json(args.out, payload)

    if args.plot:
        from . import report

        report.plot_overlap(
            cfg_a.tg.times(),
            dec_a.input_modes[0].samples,
            dec_b.input_modes[0].samples,
            payload["overlap_fundamental"],
            args.out + ".png",
        )
    return 0


def cmd_cascade(args) -> int:
    cfg = load_run_config(args.plan)
    if cfg.cascade is None:
        raise ConfigError("plan file has no cascade section")
    _validated(cfg)
    stages = prepare_stages(cfg.cascade.stages, cfg.wg, cfg.tg, cfg.zg)
    u = cfg.resolve_input_mode(stages)
    state = InputState(mode=u, statistics=cfg.cascade.statistics)

    if args.shots is None:
        if isinstance(state.statistics, FockStatistics) and state.statistics.n > 30:
            raise ConfigError(
                "exact distribution intractable for Fock n > 30; rerun with --shots for Monte Carlo"
            )
        dist = exact_count_distribution(stages, state)
        payload = {
            "outcomes": [
                {"counts": list(counts), "probability": p}
                for counts, p in sorted(dist.probabilities.items())
            ],
            "residual_prob": dist.residual_prob,
            "truncated_mass": dist.truncated_mass,
        }
        _write_json(args.out, payload)
        if args.plot:
            from . import report

            # render the exact law as a pseudo-sample bar chart
            counts = np.array(sorted(dist.probabilities))
            report.plot_counts(counts, args.out + ".png", exact=dist.probabilities)
        return 0

    counts = sample_counts_array(stages, state, shots=args.shots, seed=args.seed)
    header = ["shot"] + [f"stage_{k + 1}" for k in range(counts.shape[1])]
    rows = [[i] + [int(c) for c in counts[i]] for i in range(counts.shape[0])]
    _write_rows(args.out, header, rows)
    if args.plot:
        from . import report

        report.plot_counts(counts, args.out + ".png")
    return 0


def cmd_optimize(args) -> int:
    cfg = load_run_config(args.config)
    if cfg.optimize is None:
        raise ConfigError("config has no optimize section")
    _validated(cfg)
    spec = cfg.optimize
    if spec.family == "gaussian":
        if not isinstance(cfg.pump, GaussianPump):
            raise ConfigError("gaussian family optimization needs a gaussian base pump")
        family = gaussian_family(cfg.pump, spec.gaussian_bounds)
    else:
        sigma = spec.hermite_sigma_p_ps
        if sigma is None:
            sigma = getattr(cfg.pump, "sigma_p_ps", None)
            if sigma is None:
                raise ConfigError("hermite family needs sigma_p_ps (in the section or the base pump)")
        family = hermite_family(sigma, spec.hermite_order, spec.hermite_coefficient_bounds, cfg.tg)

    problem = OptimizationProblem(
        wg=cfg.wg, tg=cfg.tg, zg=cfg.zg, family=family,
        objective=spec.objective, budget=spec.budget,
    )
    result = optimize(problem, seed=spec.seed, restarts=spec.restarts)
    payload = {
        "best_params": {name: float(v) for name, v in zip(family.names, result.best_params)},
        "best_objective": result.best_objective,
        "evaluations_used": result.evaluations_used,
        "budget_exhausted_early": result.budget_exhausted_early,
        "trace": [
            {"params": {name: p for name, p in zip(family.names, params)}, "objective": value}
            for params, value in result.trace
        ],
    }
    _write_json(args.out, payload)
    if args.plot:
        from . import report

        report.plot_trace(result.trace, args.out + ".png")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfc",
        description="Temporal-mode quantum frequency conversion: kernels, Schmidt modes, "
        "cascaded photon counting, pump optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modes", help="mode spectrum and profiles for one configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output prefix for _spectrum.csv and _modes.csv")
    p.add_argument("--truncate", type=int, default=6, metavar="N")
    p.add_argument("--plot", action="store_true", help="also render PNG figures")
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("sweep", help="sweep one parameter, reporting the top efficiencies")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--from", dest="from_value", type=float, required=True)
    p.add_argument("--to", dest="to_value", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("overlap", help="fundamental-mode overlap of two pump configurations")
    p.add_argument("--config-a", dest="config_a", required=True)
    p.add_argument("--config-b", dest="config_b", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("cascade", help="exact or sampled counts for a cascade plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_cascade)

    p = sub.add_parser("optimize", help="pump-shape search per the config's optimize section")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_optimize)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
