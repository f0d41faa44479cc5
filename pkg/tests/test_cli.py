import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from qfcsim.cli import main

ETA = 0.5 * math.pi


def _write(path, payload):
    path.write_text(json.dumps(payload, indent=1))
    return str(path)


@pytest.fixture(scope="module")
def cfgdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli_configs")
    base = {
        "waveguide": {"eta_mag": ETA, "mu_ps_per_cm": 1.0, "nu_ps_per_cm": -1.0, "length_cm": 1.0},
        "grid": {"n_time": 64, "window_ps": 20.0, "n_z": 40},
        "pump": {"kind": "gaussian", "sigma_p_ps": 0.8},
    }
    files = {"base": _write(d / "base.json", base)}

    wide = json.loads(json.dumps(base))
    wide["pump"]["sigma_p_ps"] = 1.4
    files["wide"] = _write(d / "wide.json", wide)

    other_grid = json.loads(json.dumps(base))
    other_grid["grid"]["n_time"] = 128
    files["other_grid"] = _write(d / "other_grid.json", other_grid)

    plan = {
        "waveguide": {"eta_mag": math.pi / 4, "mu_ps_per_cm": 0.0, "nu_ps_per_cm": 0.0, "length_cm": 1.0},
        "grid": {"n_time": 32, "window_ps": 8.0, "n_z": 10},
        "pump": {"kind": "gaussian", "sigma_p_ps": 0.8},
        "cascade": {
            "stages": [
                {"pump": {"kind": "gaussian", "sigma_p_ps": 0.8}, "detector": {"kind": "pnr"}},
                {"pump": {"kind": "gaussian", "sigma_p_ps": 1.2}, "detector": {"kind": "apd", "efficiency": 0.9}},
            ],
            "input": {"mode": {"kind": "stage_fundamental", "stage": 0}, "statistics": {"kind": "fock", "n": 1}},
        },
    }
    files["plan"] = _write(d / "plan.json", plan)

    big_fock = json.loads(json.dumps(plan))
    big_fock["cascade"]["input"]["statistics"]["n"] = 31
    files["big_fock"] = _write(d / "big_fock.json", big_fock)

    opt = json.loads(json.dumps(base))
    opt["optimize"] = {
        "family": "gaussian",
        "bounds": {"sigma_p_ps": [0.2, 3.0]},
        "budget": 25,
        "seed": 1,
        "restarts": 2,
    }
    files["opt"] = _write(d / "opt.json", opt)

    hermite = json.loads(json.dumps(base))
    hermite["optimize"] = {"family": "hermite", "order": 2, "coefficient_bounds": [-1.0, 1.0], "budget": 15, "restarts": 1}
    files["hermite"] = _write(d / "hermite.json", hermite)

    tab = json.loads(json.dumps(base))
    tab["pump"] = {"kind": "tabulated", "n_time": 64, "window_ps": 20.0, "re": list(np.exp(-np.linspace(-10, 10, 64) ** 2))}
    files["tabulated"] = _write(d / "tabulated.json", tab)
    return files


def test_modes_outputs(cfgdir, tmp_path):
    out = tmp_path / "ref"
    assert main(["modes", "--config", cfgdir["base"], "--out", str(out), "--truncate", "4"]) == 0
    spectrum = (tmp_path / "ref_spectrum.csv").read_text().splitlines()
    assert spectrum[0] == "n,lambda,lambda_sq"
    assert len(spectrum) == 1 + 4
    lams = [float(line.split(",")[2]) for line in spectrum[1:]]
    assert all(a >= b for a, b in zip(lams, lams[1:]))
    modes = (tmp_path / "ref_modes.csv").read_text().splitlines()
    assert modes[0].split(",")[0] == "t_ps"
    assert len(modes[0].split(",")) == 1 + 4 * 4
    assert len(modes) == 1 + 64


def test_modes_byte_deterministic(cfgdir, tmp_path):
    main(["modes", "--config", cfgdir["base"], "--out", str(tmp_path / "a")])
    main(["modes", "--config", cfgdir["base"], "--out", str(tmp_path / "b")])
    assert (tmp_path / "a_spectrum.csv").read_bytes() == (tmp_path / "b_spectrum.csv").read_bytes()
    assert (tmp_path / "a_modes.csv").read_bytes() == (tmp_path / "b_modes.csv").read_bytes()


def test_modes_missing_config(tmp_path, capsys):
    assert main(["modes", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "x")]) == 1
    assert "error:" in capsys.readouterr().err


def test_sweep_csv(cfgdir, tmp_path):
    out = tmp_path / "sweep.csv"
    rc = main([
        "sweep", "--config", cfgdir["base"], "--param", "sigma_p_ps",
        "--from", "0.5", "--to", "1.5", "--steps", "3", "--out", str(out),
    ])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "param_value," + ",".join(f"lambda_sq_{n}" for n in range(6))
    assert len(lines) == 4
    values = [float(line.split(",")[0]) for line in lines[1:]]
    assert values == pytest.approx([0.5, 1.0, 1.5])
    first = [float(x) for x in lines[1].split(",")[1:]]
    assert all(0.0 <= v <= 1.0 + 1e-9 for v in first)


def test_sweep_n_z_param(cfgdir, tmp_path):
    out = tmp_path / "zsweep.csv"
    rc = main([
        "sweep", "--config", cfgdir["base"], "--param", "n_z",
        "--from", "20", "--to", "40", "--steps", "2", "--out", str(out),
    ])
    assert rc == 0
    assert len(out.read_text().splitlines()) == 3


def test_sweep_rejects_bad_param(cfgdir, tmp_path, capsys):
    rc = main([
        "sweep", "--config", cfgdir["base"], "--param", "window_ps",
        "--from", "10", "--to", "20", "--steps", "2", "--out", str(tmp_path / "x.csv"),
    ])
    assert rc == 1
    assert "unknown sweep parameter" in capsys.readouterr().err


def test_sweep_rejects_single_step(cfgdir, tmp_path, capsys):
    rc = main([
        "sweep", "--config", cfgdir["base"], "--param", "sigma_p_ps",
        "--from", "0.5", "--to", "1.5", "--steps", "1", "--out", str(tmp_path / "x.csv"),
    ])
    assert rc == 1
    assert "steps" in capsys.readouterr().err


def test_sweep_sigma_requires_parametric_pump(cfgdir, tmp_path, capsys):
    rc = main([
        "sweep", "--config", cfgdir["tabulated"], "--param", "sigma_p_ps",
        "--from", "0.5", "--to", "1.5", "--steps", "2", "--out", str(tmp_path / "x.csv"),
    ])
    assert rc == 1
    assert "sigma_p_ps" in capsys.readouterr().err


def test_overlap_self_is_unity(cfgdir, tmp_path):
    out = tmp_path / "overlap.json"
    rc = main(["overlap", "--config-a", cfgdir["base"], "--config-b", cfgdir["base"], "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert set(payload) == {"overlap_fundamental", "lambda_sq_0_a", "lambda_sq_0_b"}
    assert payload["overlap_fundamental"] == pytest.approx(1.0, abs=1e-10)
    assert payload["lambda_sq_0_a"] == pytest.approx(payload["lambda_sq_0_b"], abs=1e-12)


def test_overlap_two_pumps(cfgdir, tmp_path):
    out = tmp_path / "overlap2.json"
    rc = main(["overlap", "--config-a", cfgdir["base"], "--config-b", cfgdir["wide"], "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert 0.0 <= payload["overlap_fundamental"] <= 1.0


def test_overlap_rejects_grid_mismatch(cfgdir, tmp_path, capsys):
    rc = main(["overlap", "--config-a", cfgdir["base"], "--config-b", cfgdir["other_grid"], "--out", str(tmp_path / "x.json")])
    assert rc == 1
    assert "identical grid" in capsys.readouterr().err


def test_cascade_exact_json(cfgdir, tmp_path):
    out = tmp_path / "counts.json"
    rc = main(["cascade", "--plan", cfgdir["plan"], "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    probs = [o["probability"] for o in payload["outcomes"]]
    assert sum(probs) == pytest.approx(1.0, abs=1e-9)
    assert all(len(o["counts"]) == 2 for o in payload["outcomes"])
    assert 0.0 <= payload["residual_prob"] <= 1.0
    assert payload["truncated_mass"] < 1e-9


def test_cascade_shots_csv_deterministic(cfgdir, tmp_path):
    out_a = tmp_path / "shots_a.csv"
    out_b = tmp_path / "shots_b.csv"
    for out in (out_a, out_b):
        rc = main(["cascade", "--plan", cfgdir["plan"], "--shots", "50", "--seed", "3", "--out", str(out)])
        assert rc == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    lines = out_a.read_text().splitlines()
    assert lines[0] == "shot,stage_1,stage_2"
    assert len(lines) == 51
    assert lines[1].split(",")[0] == "0"


def test_cascade_large_fock_requires_shots(cfgdir, tmp_path, capsys):
    rc = main(["cascade", "--plan", cfgdir["big_fock"], "--out", str(tmp_path / "x.json")])
    assert rc == 1
    assert "Monte Carlo" in capsys.readouterr().err
    rc = main(["cascade", "--plan", cfgdir["big_fock"], "--shots", "20", "--out", str(tmp_path / "big.csv")])
    assert rc == 0


def test_cascade_requires_section(cfgdir, tmp_path, capsys):
    rc = main(["cascade", "--plan", cfgdir["base"], "--out", str(tmp_path / "x.json")])
    assert rc == 1
    assert "no cascade section" in capsys.readouterr().err


def test_optimize_json(cfgdir, tmp_path):
    out = tmp_path / "opt.json"
    rc = main(["optimize", "--config", cfgdir["opt"], "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert 0.2 <= payload["best_params"]["sigma_p_ps"] <= 3.0
    assert payload["evaluations_used"] <= 25
    assert len(payload["trace"]) == payload["evaluations_used"]
    assert isinstance(payload["budget_exhausted_early"], bool)
    best = max(step["objective"] for step in payload["trace"])
    assert payload["best_objective"] == pytest.approx(best, abs=0)


def test_optimize_byte_deterministic(cfgdir, tmp_path):
    out_a = tmp_path / "opt_a.json"
    out_b = tmp_path / "opt_b.json"
    for out in (out_a, out_b):
        assert main(["optimize", "--config", cfgdir["opt"], "--out", str(out)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_optimize_hermite_runs(cfgdir, tmp_path):
    out = tmp_path / "hermite.json"
    assert main(["optimize", "--config", cfgdir["hermite"], "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert set(payload["best_params"]) == {"c_0", "c_1", "c_2"}


def test_optimize_requires_section(cfgdir, tmp_path, capsys):
    rc = main(["optimize", "--config", cfgdir["base"], "--out", str(tmp_path / "x.json")])
    assert rc == 1
    assert "no optimize section" in capsys.readouterr().err


def test_plot_outputs(cfgdir, tmp_path):
    out = tmp_path / "fig"
    assert main(["modes", "--config", cfgdir["base"], "--out", str(out), "--plot"]) == 0
    assert (tmp_path / "fig_spectrum.png").stat().st_size > 0
    assert (tmp_path / "fig_modes.png").stat().st_size > 0
    sweep_out = tmp_path / "fig_sweep.csv"
    assert main([
        "sweep", "--config", cfgdir["base"], "--param", "sigma_p_ps",
        "--from", "0.5", "--to", "1.5", "--steps", "2", "--out", str(sweep_out), "--plot",
    ]) == 0
    assert (tmp_path / "fig_sweep.csv.png").stat().st_size > 0
    counts_out = tmp_path / "fig_counts.json"
    assert main(["cascade", "--plan", cfgdir["plan"], "--out", str(counts_out), "--plot"]) == 0
    assert (tmp_path / "fig_counts.json.png").stat().st_size > 0


def test_console_script_entry_point(cfgdir, tmp_path):
    exe = shutil.which("qfc")
    assert exe, "qfc console script not on PATH"
    out = tmp_path / "cli"
    proc = subprocess.run(
        [exe, "modes", "--config", cfgdir["base"], "--out", str(out)],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "cli_spectrum.csv").exists()
