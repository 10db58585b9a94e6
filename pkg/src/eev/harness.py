"""Experiment orchestration: single runs, Reynolds sweeps, and their outputs.

A run generates the seeded ensemble data, resolves turnover-unit durations
(via a calibration pre-run when needed), advances the system while recording
diagnostics, evaluates the bound ledger, and serializes everything into the
output directory.  A sweep reuses one forcing realization and controls the
Reynolds number through nu = L * U_target / Re with U_target measured on a
calibration pre-run.
"""

import dataclasses
import os
import time

import numpy as np

from .config import RunConfig, dump_config
from .diagnostics import (
    RunRecorder,
    flow_scales,
    proof_ledger,
    tail_velocity_scale,
    uniform_bounds_report,
)
from .dynamics import advance_to
from .ensemble import ModelParams, make_state
from .errors import BlowUpError, ConfigurationError
from .problems import forcing_scales, make_ensemble_fields
from .runio import (
    write_budget_csv,
    write_checkpoint,
    write_ledger_csv,
    write_summary,
    write_sweep_csv,
)


@dataclasses.dataclass
class RunSummary:
    out_dir: str
    status: str                  # "ok" or "blowup"
    scales: dict
    final_budget: dict
    verdict: bool | None
    margin: float | None
    ledger_rows: list
    manifest: list
    warnings: list
    resolved: dict
    uniform_bounds: dict


def _with_seed(config: RunConfig, seed) -> RunConfig:
    if seed is None:
        return config
    pert = dataclasses.replace(config.perturbation, seed=int(seed))
    return dataclasses.replace(config, perturbation=pert)


def _generate_data(config: RunConfig):
    J = config.model.ensemble_size
    forces = make_ensemble_fields(config.perturbation, config.grid, J, "force")
    ics = make_ensemble_fields(config.perturbation, config.grid, J, "ic")
    return ics, forces


def _resolve_time_units(config: RunConfig, ics, forces, fscales):
    """Absolute tau and t_end; runs the calibration pre-run when required."""
    needs_cal = (config.run.t_end_turnovers is not None
                 or config.tau_turnovers is not None)
    if not needs_cal:
        return config.model, config.run.t_end, None
    if fscales.unforced:
        raise ConfigurationError("turnover-based durations need a forced run")

    L, F = fscales.L, fscales.F
    U_est = np.sqrt(F * L)  # input-balance bootstrap for the pre-run length
    tau_cal = (config.tau_turnovers * L / U_est
               if config.tau_turnovers is not None else config.model.tau)
    params_cal = dataclasses.replace(config.model, tau=tau_cal)
    t_cal = config.run.calibration_turnovers * L / U_est

    rec = RunRecorder(params_cal, diag_every=1)
    state = make_state(0.0, ics, forces, params_cal)
    advance_to(state, t_cal, params_cal, config.stepper, sinks=rec)
    U_target = tail_velocity_scale(rec)
    if U_target <= 0:
        raise ConfigurationError("calibration run produced U_target = 0")
    Tstar = L / U_target

    tau = (config.tau_turnovers * Tstar
           if config.tau_turnovers is not None else config.model.tau)
    t_end = (config.run.t_end_turnovers * Tstar
             if config.run.t_end_turnovers is not None else config.run.t_end)
    params = dataclasses.replace(config.model, tau=tau)
    calibration = {"U_est": float(U_est), "U_target": float(U_target),
                   "Tstar": float(Tstar), "t_cal": float(t_cal)}
    return params, t_end, calibration


def _row_dict(row):
    out = {}
    for k, v in dataclasses.asdict(row).items():
        if isinstance(v, tuple):
            v = list(v)
        if isinstance(v, float) and not np.isfinite(v):
            v = None
        out[k] = v
    return out


def execute_run(config: RunConfig, out_dir: str, params: ModelParams, t_end: float,
                ics, forces, calibration=None) -> RunSummary:
    """Advance, diagnose, and serialize one run into out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    fscales = forcing_scales(forces)
    recorder = RunRecorder(params, diag_every=config.run.diag_every)
    state = make_state(0.0, ics, forces, params)

    wall0 = time.perf_counter()
    try:
        state = advance_to(state, t_end, params, config.stepper, sinks=recorder)
    except BlowUpError as err:
        write_summary(os.path.join(out_dir, "blowup.json"),
                      {"t": err.t, "member": err.member, "max_value": err.max_value})
        raise
    wall = time.perf_counter() - wall0
    recorder.finalize()

    scales = flow_scales(recorder.rows, fscales, params)
    ledger_rows = []
    if not fscales.unforced and recorder.boundary_count() >= 2:
        ledger_rows = proof_ledger(recorder, fscales, params,
                                   alpha=config.ledger.alpha,
                                   beta=config.ledger.resolved_beta,
                                   eval_fractions=config.ledger.eval_fractions)
    bounds_report = uniform_bounds_report(recorder)

    manifest = []

    def _track(path):
        manifest.append(os.path.basename(path))
        return path

    write_budget_csv(_track(os.path.join(out_dir, "budget.csv")), recorder)
    if ledger_rows:
        write_ledger_csv(_track(os.path.join(out_dir, "ledger.csv")), ledger_rows)
    if config.run.snapshot_final:
        for p in write_checkpoint(os.path.join(out_dir, "state"), state):
            manifest.append(os.path.basename(p))
    with open(_track(os.path.join(out_dir, "config.toml")), "w") as fh:
        fh.write(dump_config(config))
    with open(_track(os.path.join(out_dir, "run.log")), "w") as fh:
        fh.write(f"wall_seconds = {wall:.3f}\n")
        fh.write(f"steps = {recorder.boundary_count() - 1}\n")
        for w in recorder.warnings:
            fh.write(f"warning: {w}\n")

    final_row = _row_dict(recorder.rows[-1])
    last_ledger = ledger_rows[-1] if ledger_rows else None
    summary = {
        "status": "ok",
        "scales": _row_dict(scales),
        "final_budget": final_row,
        "ledger_final": _row_dict(last_ledger) if last_ledger else None,
        "verdict": bool(last_ledger.verdict) if last_ledger else None,
        "margin": last_ledger.theorem_margin if last_ledger else None,
        "uniform_bounds": bounds_report,
        "stationarity": recorder.stationarity(),
        "warnings": list(recorder.warnings),
        "resolved": {"tau": params.tau, "t_end": t_end, "nu": params.nu},
        "calibration": calibration,
        "manifest": sorted(manifest + ["summary.json"]),
    }
    write_summary(os.path.join(out_dir, "summary.json"), summary)

    return RunSummary(
        out_dir=out_dir, status="ok", scales=summary["scales"],
        final_budget=final_row, verdict=summary["verdict"],
        margin=summary["margin"], ledger_rows=ledger_rows,
        manifest=summary["manifest"], warnings=summary["warnings"],
        resolved=summary["resolved"], uniform_bounds=bounds_report,
    )


def run(config: RunConfig, seed=None) -> RunSummary:
    """Full single-run pipeline into the config's output directory."""
    config = _with_seed(config, seed)
    out_dir = config.resolve_output_dir()
    ics, forces = _generate_data(config)
    fscales = forcing_scales(forces)
    params, t_end, calibration = _resolve_time_units(config, ics, forces, fscales)
    return execute_run(config, out_dir, params, t_end, ics, forces, calibration)


def sweep(config: RunConfig, re_values, seed=None):
    """One run per Reynolds number at fixed forcing; returns (rows, summaries).

    nu is set per run to L * U_target / Re with L measured from the generated
    forcing and U_target from a calibration pre-run of the base config.
    """
    config = _with_seed(config, seed)
    out_root = config.resolve_output_dir()
    os.makedirs(out_root, exist_ok=True)
    ics, forces = _generate_data(config)
    fscales = forcing_scales(forces)
    if fscales.unforced:
        raise ConfigurationError("a sweep needs a forced configuration")

    base_params, t_end, calibration = _resolve_time_units(config, ics, forces, fscales)
    if calibration is None:
        # sweep always calibrates: Re control needs U_target
        rec = RunRecorder(base_params, diag_every=1)
        U_est = np.sqrt(fscales.F * fscales.L)
        t_cal = config.run.calibration_turnovers * fscales.L / U_est
        state = make_state(0.0, ics, forces, base_params)
        advance_to(state, t_cal, base_params, config.stepper, sinks=rec)
        U_target = tail_velocity_scale(rec)
        calibration = {"U_est": float(U_est), "U_target": float(U_target),
                       "Tstar": float(fscales.L / U_target), "t_cal": float(t_cal)}
    U_target = calibration["U_target"]

    rows, summaries = [], []
    for re_val in re_values:
        if re_val <= 0:
            raise ConfigurationError("Reynolds numbers must be positive")
        nu_i = fscales.L * U_target / re_val
        params_i = dataclasses.replace(base_params, nu=nu_i)
        sub_dir = os.path.join(out_root, f"re_{re_val:g}")
        try:
            summary = execute_run(config, sub_dir, params_i, t_end, ics, forces,
                                  calibration)
        except BlowUpError:
            rows.append({"Re": re_val, "eps_norm": float("nan"),
                         "bound_coeff": float("nan"), "margin": float("nan"),
                         "I": float("nan"), "tau_over_Tstar": float("nan"),
                         "status": "failed"})
            summaries.append(None)
            continue
        last = summary.ledger_rows[-1]
        rows.append({
            "Re": re_val,
            "eps_norm": last.eps_norm,
            "bound_coeff": last.bound_coeff,
            "margin": last.theorem_margin,
            "I": last.intensity,
            "tau_over_Tstar": base_params.tau / last.Tstar_T,
            "status": "ok" if summary.verdict else "verdict_false",
        })
        summaries.append(summary)

    write_sweep_csv(os.path.join(out_root, "sweep.csv"), rows)
    write_summary(os.path.join(out_root, "sweep_summary.json"), {
        "calibration": calibration,
        "resolved": {"tau": base_params.tau, "t_end": t_end},
        "rows": rows,
    })
    return rows, summaries
