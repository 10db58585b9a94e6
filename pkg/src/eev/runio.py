"""Serialization: versioned CSVs, summary JSON, and raw coefficient checkpoints.

CSV files open with a schema line ``# eev-csv <kind> v1`` followed by the
header row; floats are written with repr so a read-back reproduces the
in-memory values exactly.  Checkpoints store the member and force coefficient
arrays as raw little-endian complex128 with a JSON sidecar describing layout.
"""

import csv
import dataclasses
import json

import numpy as np

from .diagnostics import LedgerRow, RunRecorder
from .ensemble import EnsembleState, ModelParams, make_state
from .errors import SchemaError
from .spectral import GridSpec, SpectralField

SCHEMA_PREFIX = "# eev-csv"
SCHEMA_VERSION = "v1"

BUDGET_COLUMNS = ("t", "ke_ens", "eps_viscous", "eps_turb",
                  "eps_turb_mean_part", "eps_turb_fluct_part", "avg_eps_T")
SWEEP_COLUMNS = ("Re", "eps_norm", "bound_coeff", "margin", "I",
                 "tau_over_Tstar", "status")
LEDGER_COLUMNS = tuple(f.name for f in dataclasses.fields(LedgerRow))


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(float(v))  # plain repr even for numpy scalars
    return str(v)


def _parse(s):
    if s == "true":
        return True
    if s == "false":
        return False
    try:
        return float(s)
    except ValueError:
        return s


def schema_line(kind: str) -> str:
    return f"{SCHEMA_PREFIX} {kind} {SCHEMA_VERSION}"


def write_csv(path: str, kind: str, columns, rows):
    with open(path, "w", newline="") as fh:
        fh.write(schema_line(kind) + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path: str, kind: str):
    """Validated read; returns (columns, list of value dicts)."""
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != schema_line(kind):
            raise SchemaError(
                f"{path}: expected schema {schema_line(kind)!r}, found {first!r}")
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [dict(zip(columns, map(_parse, row))) for row in reader if row]
    return columns, rows


def write_budget_csv(path: str, recorder: RunRecorder):
    eps_running = recorder.running_eps_avg()
    idx = {t: i for i, t in enumerate(recorder.series["t"])}
    rows = []
    for r in recorder.rows:
        avg_eps = eps_running[idx[r.t]]
        rows.append((r.t, r.ke_ens, r.eps_viscous, r.eps_turb,
                     r.eps_turb_mean_part, r.eps_turb_fluct_part,
                     float(avg_eps) if np.isfinite(avg_eps) else 0.0))
    write_csv(path, "budget", BUDGET_COLUMNS, rows)


def write_ledger_csv(path: str, ledger_rows):
    rows = [tuple(getattr(r, c) for c in LEDGER_COLUMNS) for r in ledger_rows]
    write_csv(path, "ledger", LEDGER_COLUMNS, rows)


def write_sweep_csv(path: str, sweep_rows):
    write_csv(path, "sweep", SWEEP_COLUMNS,
              [tuple(r[c] for c in SWEEP_COLUMNS) for r in sweep_rows])


def write_summary(path: str, summary: dict):
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_summary(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


# -------------------------------------------------------------- checkpoints


def write_checkpoint(prefix: str, state: EnsembleState):
    """Raw little-endian coefficients plus a JSON sidecar header."""
    grid = state.grid
    members = np.stack([m.coeffs for m in state.members]).astype("<c16")
    forces = np.stack([f.coeffs for f in state.forces]).astype("<c16")
    blob = np.concatenate([members.ravel(), forces.ravel()])
    bin_path = prefix + ".bin"
    blob.tofile(bin_path)
    header = {
        "format": "eev-checkpoint-v1",
        "t": state.t,
        "ensemble_size": state.ensemble_size,
        "grid": {"dim": grid.dim, "n": grid.n, "box_len": grid.box_len,
                 "dealias_fraction": grid.dealias_fraction},
        "array_shape": list(members.shape),
        "dtype": "<c16",
        "order": "C",
        "layout": "numpy-rfftn, coefficients normalized by n^dim",
        "contents": ["members", "forces"],
    }
    json_path = prefix + ".json"
    with open(json_path, "w") as fh:
        json.dump(header, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [bin_path, json_path]


def load_checkpoint(prefix: str, params: ModelParams) -> EnsembleState:
    with open(prefix + ".json") as fh:
        header = json.load(fh)
    if header.get("format") != "eev-checkpoint-v1":
        raise SchemaError(f"{prefix}.json: not an eev checkpoint header")
    grid = GridSpec(**header["grid"])
    shape = tuple(header["array_shape"])
    blob = np.fromfile(prefix + ".bin", dtype="<c16")
    count = int(np.prod(shape))
    members_raw = blob[:count].reshape(shape).astype(complex)
    forces_raw = blob[count:2 * count].reshape(shape).astype(complex)
    members = [SpectralField(grid, c, is_divergence_free=True, is_dealiased=True)
               for c in members_raw]
    forces = [SpectralField(grid, c, is_divergence_free=True, is_dealiased=True)
              for c in forces_raw]
    return make_state(header["t"], members, forces, params)
