#!/usr/bin/env python3
"""Publication figures from eev CSV output.

Stateless: reads the versioned CSVs the solver writes, never recomputes
anything, and renders one figure per invocation.

  plot_eev.py --kind dissipation_vs_re --in sweep.csv  --out fig.png
  plot_eev.py --kind budget_timeseries --in budget.csv --out fig.png
  plot_eev.py --kind ledger_slacks     --in ledger.csv --out fig.png

Exits nonzero on schema mismatch or empty data; no file is written then.
"""

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

SCHEMA_PREFIX = "# eev-csv"
SCHEMA_VERSION = "v1"

KIND_TO_CSV = {
    "dissipation_vs_re": "sweep",
    "budget_timeseries": "budget",
    "ledger_slacks": "ledger",
}

FIGSIZE = (6.4, 4.2)
DPI = 150


class SchemaMismatch(Exception):
    pass


def parse_value(s):
    if s == "true":
        return True
    if s == "false":
        return False
    try:
        return float(s)
    except ValueError:
        return s


def read_eev_csv(path, kind):
    """Validated read of one eev CSV; returns a list of row dicts."""
    expected = f"{SCHEMA_PREFIX} {kind} {SCHEMA_VERSION}"
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        if first != expected:
            raise SchemaMismatch(
                f"{path}: schema line {first!r} does not match {expected!r}")
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaMismatch(f"{path}: missing header row")
        rows = [dict(zip(header, map(parse_value, r))) for r in reader if r]
    if not rows:
        raise SchemaMismatch(f"{path}: no data rows")
    return rows


def plot_dissipation_vs_re(rows, out_path, xscale="log", yscale="log"):
    rows = [r for r in rows if r.get("status") != "failed"]
    if not rows:
        raise SchemaMismatch("sweep contains only failed rows")
    rows.sort(key=lambda r: r["Re"])
    re_vals = [r["Re"] for r in rows]
    eps = [r["eps_norm"] for r in rows]
    bound = [r["bound_coeff"] for r in rows]

    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(re_vals, bound, "k-", lw=1.5,
            label=r"bound  $2 + Re^{-1} + \mu\,(\tau/T^*)\,I$")
    ax.plot(re_vals, eps, "o", ms=7, color="tab:blue",
            label=r"measured  $\langle\varepsilon\rangle_T\, L / U_T^3$")
    ax.set_xscale(xscale)
    ax.set_yscale(yscale)
    ax.set_xlabel(r"Reynolds number $Re$")
    ax.set_ylabel("normalized dissipation")
    ax.set_title("energy dissipation vs the uniform bound")
    ax.legend(frameon=False, loc="best")
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI, metadata={"Software": "plot_eev"})
    plt.close(fig)

    below = sum(e <= b for e, b in zip(eps, bound))
    print(f"points below bound: {below}/{len(rows)}")


def plot_budget_timeseries(rows, out_path, xscale="linear", yscale="linear"):
    t = [r["t"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True,
                                   figsize=(FIGSIZE[0], 1.5 * FIGSIZE[1]))
    ax1.plot(t, [r["ke_ens"] for r in rows], color="tab:blue")
    ax1.set_ylabel("kinetic energy")
    ax2.plot(t, [r["eps_viscous"] for r in rows], label="viscous")
    ax2.plot(t, [r["eps_turb"] for r in rows], label="eddy")
    ax2.plot(t, [r["avg_eps_T"] for r in rows], "k--", label="running average")
    ax1.set_xscale(xscale)
    ax1.set_yscale(yscale)
    ax2.set_yscale(yscale)
    ax2.set_xlabel("t")
    ax2.set_ylabel("dissipation rate")
    ax2.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI, metadata={"Software": "plot_eev"})
    plt.close(fig)
    print(f"budget rows plotted: {len(rows)}")


def plot_ledger_slacks(rows, out_path, xscale="linear", yscale="linear"):
    del xscale  # categorical axis
    row = rows[-1]  # final evaluation time
    names = ["energy_slack", "work_slack", "term2_slack", "term3_slack",
             "term4_slack"]
    missing = [n for n in names if n not in row]
    if missing:
        raise SchemaMismatch(f"ledger is missing columns: {missing}")
    vals = [row[n] for n in names]
    fig, ax = plt.subplots(figsize=FIGSIZE)
    colors = ["tab:green" if v >= 0 else "tab:red" for v in vals]
    ax.bar(range(len(names)), vals, color=colors)
    if yscale != "linear":
        ax.set_yscale("symlog", linthresh=1e-12)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels([n.replace("_slack", "") for n in names], rotation=20)
    ax.set_ylabel("slack (bound minus value)")
    ax.set_title(f"inequality slacks at T = {row['T']:.4g}  "
                 f"(verdict {row['verdict']})")
    fig.tight_layout()
    fig.savefig(out_path, dpi=DPI, metadata={"Software": "plot_eev"})
    plt.close(fig)
    print(f"slacks plotted; verdict {row['verdict']}")


PLOTTERS = {
    "dissipation_vs_re": plot_dissipation_vs_re,
    "budget_timeseries": plot_budget_timeseries,
    "ledger_slacks": plot_ledger_slacks,
}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kind", required=True, choices=sorted(PLOTTERS))
    parser.add_argument("--in", dest="in_path", required=True, metavar="CSV")
    parser.add_argument("--out", dest="out_path", required=True, metavar="IMG")
    parser.add_argument("--xscale", default=None, choices=("linear", "log"))
    parser.add_argument("--yscale", default=None, choices=("linear", "log"))
    args = parser.parse_args(argv)

    kwargs = {}
    if args.xscale:
        kwargs["xscale"] = args.xscale
    if args.yscale:
        kwargs["yscale"] = args.yscale
    try:
        rows = read_eev_csv(args.in_path, KIND_TO_CSV[args.kind])
        PLOTTERS[args.kind](rows, args.out_path, **kwargs)
    except SchemaMismatch as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(args.out_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
