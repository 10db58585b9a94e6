"""Figure rendering for ``eev report``: matplotlib files next to the CSVs.

Reads a run or sweep directory, copies the delimited outputs into a report
subdirectory, and renders the standard figures.  Values are plotted as read;
nothing is recomputed from solver state.
"""

import os
import shutil

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .errors import ConfigurationError
from .runio import read_csv

_FIGSIZE = (6.4, 4.0)
_DPI = 150


def _save(fig, path):
    fig.savefig(path, dpi=_DPI, metadata={"Software": "eev"})
    plt.close(fig)
    return path


def render_budget_figure(budget_csv: str, out_path: str) -> str:
    _, rows = read_csv(budget_csv, "budget")
    if not rows:
        raise ConfigurationError(f"{budget_csv}: no data rows")
    t = [r["t"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True,
                                   figsize=(_FIGSIZE[0], 1.4 * _FIGSIZE[1]))
    ax1.plot(t, [r["ke_ens"] for r in rows], label="kinetic energy")
    ax1.set_ylabel("energy")
    ax1.legend(frameon=False)
    ax2.plot(t, [r["eps_viscous"] for r in rows], label="viscous")
    ax2.plot(t, [r["eps_turb"] for r in rows], label="eddy")
    ax2.plot(t, [r["avg_eps_T"] for r in rows], "k--", label="running avg")
    ax2.set_xlabel("t")
    ax2.set_ylabel("dissipation rate")
    ax2.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, out_path)


def render_ledger_figure(ledger_csv: str, out_path: str) -> str:
    _, rows = read_csv(ledger_csv, "ledger")
    if not rows:
        raise ConfigurationError(f"{ledger_csv}: no data rows")
    row = rows[-1]
    names = ["energy_slack", "work_slack", "term2_slack", "term3_slack", "term4_slack"]
    vals = [row[n] for n in names]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.bar(range(len(names)), vals, color=["tab:green" if v >= 0 else "tab:red"
                                           for v in vals])
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels([n.replace("_slack", "") for n in names])
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_ylabel("slack (bound - value)")
    ax.set_title(f"inequality slacks at T = {row['T']:.3g} "
                 f"(verdict: {row['verdict']})")
    fig.tight_layout()
    return _save(fig, out_path)


def render_sweep_figure(sweep_csv: str, out_path: str) -> str:
    _, rows = read_csv(sweep_csv, "sweep")
    rows = [r for r in rows if r["status"] != "failed"]
    if not rows:
        raise ConfigurationError(f"{sweep_csv}: no successful rows")
    re_vals = [r["Re"] for r in rows]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(re_vals, [r["eps_norm"] for r in rows], "o", label=r"measured")
    ax.plot(re_vals, [r["bound_coeff"] for r in rows], "k-", label="bound coefficient")
    ax.set_xscale("log")
    ax.set_xlabel("Re")
    ax.set_ylabel(r"dissipation * L / U^3")
    ax.legend(frameon=False)
    ax.set_title("normalized dissipation vs the bound")
    fig.tight_layout()
    return _save(fig, out_path)


def report(in_dir: str, out_dir: str = None):
    """Copy the CSVs and render every figure the directory supports."""
    if not os.path.isdir(in_dir):
        raise ConfigurationError(f"{in_dir} is not a directory")
    out_dir = out_dir or os.path.join(in_dir, "report")
    os.makedirs(out_dir, exist_ok=True)
    produced = []
    for name, kind, renderer in (
        ("budget.csv", "budget", render_budget_figure),
        ("ledger.csv", "ledger", render_ledger_figure),
        ("sweep.csv", "sweep", render_sweep_figure),
    ):
        src = os.path.join(in_dir, name)
        if not os.path.exists(src):
            continue
        dst = os.path.join(out_dir, name)
        if os.path.abspath(src) != os.path.abspath(dst):
            shutil.copyfile(src, dst)
        produced.append(dst)
        fig_path = os.path.join(out_dir, name.replace(".csv", ".png"))
        produced.append(renderer(src, fig_path))
    if not produced:
        raise ConfigurationError(f"{in_dir}: no eev CSV outputs found")
    return produced
