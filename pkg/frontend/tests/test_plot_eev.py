"""plot_eev.py: schema validation, figure output, and the end-to-end sweep path."""

import os
import subprocess
import sys

import pytest

SCRIPT = os.path.join(os.path.dirname(__file__), "..", "plot_eev.py")


def run_script(*args):
    return subprocess.run([sys.executable, SCRIPT, *args],
                          capture_output=True, text=True)


def write_sweep_csv(path, rows, schema="# eev-csv sweep v1"):
    header = "Re,eps_norm,bound_coeff,margin,I,tau_over_Tstar,status"
    body = "\n".join(",".join(map(str, r)) for r in rows)
    path.write_text(f"{schema}\n{header}\n{body}\n" if rows
                    else f"{schema}\n{header}\n")


GOOD_ROWS = [
    (100.0, 0.02, 2.05, 0.99, 0.03, 0.09, "ok"),
    (1000.0, 0.011, 2.01, 0.995, 0.03, 0.09, "ok"),
    (10000.0, 0.006, 2.002, 0.997, 0.03, 0.09, "ok"),
]


def test_dissipation_figure(tmp_path):
    csv_path = tmp_path / "sweep.csv"
    out_path = tmp_path / "fig.png"
    write_sweep_csv(csv_path, GOOD_ROWS)
    proc = run_script("--kind", "dissipation_vs_re",
                      "--in", str(csv_path), "--out", str(out_path))
    assert proc.returncode == 0, proc.stderr
    assert out_path.exists()
    assert "points below bound: 3/3" in proc.stdout


def test_single_row_sweep(tmp_path):
    csv_path = tmp_path / "sweep.csv"
    out_path = tmp_path / "fig.png"
    write_sweep_csv(csv_path, GOOD_ROWS[:1])
    proc = run_script("--kind", "dissipation_vs_re",
                      "--in", str(csv_path), "--out", str(out_path))
    assert proc.returncode == 0
    assert out_path.exists()


def test_axis_scale_options(tmp_path):
    csv_path = tmp_path / "sweep.csv"
    out_path = tmp_path / "fig.png"
    write_sweep_csv(csv_path, GOOD_ROWS)
    proc = run_script("--kind", "dissipation_vs_re", "--in", str(csv_path),
                      "--out", str(out_path), "--yscale", "linear",
                      "--xscale", "log")
    assert proc.returncode == 0, proc.stderr
    assert out_path.exists()


def test_schema_mismatch_rejected(tmp_path):
    csv_path = tmp_path / "sweep.csv"
    out_path = tmp_path / "fig.png"
    write_sweep_csv(csv_path, GOOD_ROWS, schema="# eev-csv sweep v2")
    proc = run_script("--kind", "dissipation_vs_re",
                      "--in", str(csv_path), "--out", str(out_path))
    assert proc.returncode != 0
    assert "schema" in proc.stderr
    assert not out_path.exists()


def test_wrong_kind_rejected(tmp_path):
    csv_path = tmp_path / "sweep.csv"
    write_sweep_csv(csv_path, GOOD_ROWS)
    proc = run_script("--kind", "budget_timeseries",
                      "--in", str(csv_path), "--out", str(tmp_path / "f.png"))
    assert proc.returncode != 0
    assert not (tmp_path / "f.png").exists()


def test_empty_sweep_rejected(tmp_path):
    csv_path = tmp_path / "sweep.csv"
    out_path = tmp_path / "fig.png"
    write_sweep_csv(csv_path, [])
    proc = run_script("--kind", "dissipation_vs_re",
                      "--in", str(csv_path), "--out", str(out_path))
    assert proc.returncode != 0
    assert not out_path.exists()


def test_budget_and_ledger_figures(tmp_path):
    budget = tmp_path / "budget.csv"
    budget.write_text(
        "# eev-csv budget v1\n"
        "t,ke_ens,eps_viscous,eps_turb,eps_turb_mean_part,eps_turb_fluct_part,avg_eps_T\n"
        "0.0,0.5,0.01,0.002,0.001,0.001,0.0\n"
        "0.5,0.45,0.011,0.0021,0.001,0.0011,0.012\n"
        "1.0,0.44,0.012,0.0022,0.0011,0.0011,0.0125\n")
    proc = run_script("--kind", "budget_timeseries",
                      "--in", str(budget), "--out", str(tmp_path / "b.png"))
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "b.png").exists()

    ledger = tmp_path / "ledger.csv"
    ledger.write_text(
        "# eev-csv ledger v1\n"
        "T,energy_slack,work_slack,term2_slack,term3_slack,term4_slack,verdict\n"
        "1.0,-1e-9,0.1,0.5,0.01,0.002,true\n"
        "2.0,-2e-9,0.12,0.55,0.011,0.0021,true\n")
    proc = run_script("--kind", "ledger_slacks",
                      "--in", str(ledger), "--out", str(tmp_path / "l.png"))
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "l.png").exists()


@pytest.mark.slow
def test_end_to_end_sweep_figure(tmp_path):
    # consume the primary only through its CLI and file formats
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("""
[grid]
n = 32

[model]
nu = 0.005
ensemble_size = 2
tau = 0.05

[perturbation]
seed = 7
delta = 0.3
k_max = 2
base_amplitude = 0.5

[stepper]
dt = 0.02
adapt = false

[run]
t_end = 0.5

[output]
dir = "%s"
""" % (tmp_path / "sweep_out"))
    proc = subprocess.run(
        [sys.executable, "-m", "eev", "sweep", "-c", str(cfg), "--re", "50,100"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    sweep_csv = tmp_path / "sweep_out" / "sweep.csv"
    assert sweep_csv.exists()

    out_path = tmp_path / "dissipation.png"
    plot = run_script("--kind", "dissipation_vs_re",
                      "--in", str(sweep_csv), "--out", str(out_path))
    assert plot.returncode == 0, plot.stderr
    assert out_path.exists()
    assert "points below bound: 2/2" in plot.stdout
