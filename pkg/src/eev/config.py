"""Run configuration: TOML loading, defaults, and dumping.

One config file reproduces a whole experiment.  Durations and the model time
scale can be given either absolutely or in units of the large-eddy turnover
time T* = L/U; turnover units are resolved by the harness from the measured
forcing scales plus a calibration estimate of U.
"""

import os
import sys
from dataclasses import asdict, dataclass

from .dynamics import StepperConfig
from .ensemble import ModelParams
from .errors import ConfigurationError
from .problems import PerturbationSpec
from .spectral import GridSpec, TWO_THIRDS

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

OUTPUT_ROOT_ENV = "EEV_OUTPUT_ROOT"


@dataclass(frozen=True)
class RunSection:
    """Duration and cadence options."""

    t_end: float | None = None            # absolute end time
    t_end_turnovers: float | None = None  # alternative: units of T*
    diag_every: int = 1                   # budget-row cadence in steps
    snapshot_final: bool = True           # write final-state checkpoint
    calibration_turnovers: float = 5.0    # pre-run length for U_target

    def __post_init__(self):
        if (self.t_end is None) == (self.t_end_turnovers is None):
            raise ConfigurationError("set exactly one of t_end / t_end_turnovers")
        for v in (self.t_end, self.t_end_turnovers):
            if v is not None and v <= 0:
                raise ConfigurationError("run duration must be positive")
        if self.diag_every < 1:
            raise ConfigurationError("diag_every must be >= 1")


@dataclass(frozen=True)
class LedgerSection:
    alpha: float = 0.5
    beta: float | None = None             # defaults to 2*alpha
    eval_fractions: tuple = (0.25, 0.5, 0.75, 1.0)

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError("alpha must lie in (0, 1)")
        if self.beta is not None and not 0.0 < self.beta < 2.0:
            raise ConfigurationError("beta must lie in (0, 2)")

    @property
    def resolved_beta(self):
        return self.beta if self.beta is not None else 2.0 * self.alpha


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; maps 1:1 onto the TOML sections."""

    grid: GridSpec
    model: ModelParams
    perturbation: PerturbationSpec
    stepper: StepperConfig
    run: RunSection
    ledger: LedgerSection
    output_dir: str = "out"
    tau_turnovers: float | None = None    # overrides model.tau as tau = x * T*

    def resolve_output_dir(self):
        root = os.environ.get(OUTPUT_ROOT_ENV, "")
        return os.path.join(root, self.output_dir) if root else self.output_dir


_DEFAULTS = {
    "grid": {"dim": 2, "n": 64, "box_len": 6.283185307179586,
             "dealias_fraction": TWO_THIRDS},
    "model": {"nu": 1e-2, "mu": 0.55, "tau": 0.05, "ensemble_size": 2,
              "cap_mode": "uncapped"},
    "perturbation": {"seed": 1234, "delta": 0.2, "k_min": 1, "k_max": 3,
                     "base_amplitude": 1.0},
    "stepper": {"dt": 0.01, "cfl": 0.4, "eddy_stability_factor": 0.25,
                "adapt": True, "scheme": "rk3_ssp"},
    "run": {"t_end": 5.0, "diag_every": 1, "snapshot_final": True,
            "calibration_turnovers": 5.0},
    "ledger": {"alpha": 0.5, "eval_fractions": [0.25, 0.5, 0.75, 1.0]},
    "output": {"dir": "out"},
}


def _merge(defaults: dict, overrides: dict, path="") -> dict:
    out = dict(defaults)
    for key, val in overrides.items():
        if key not in defaults and path in ("grid", "model", "perturbation",
                                            "stepper", "run", "ledger", "output"):
            known = {"model": {"cap_length", "tau_turnovers"},
                     "run": {"t_end_turnovers"}, "ledger": {"beta"}}.get(path, set())
            if key not in known:
                raise ConfigurationError(f"unknown key [{path}] {key}")
        out[key] = val
    return out


def config_from_dict(raw: dict) -> RunConfig:
    sections = {}
    for name in ("grid", "model", "perturbation", "stepper", "run", "ledger", "output"):
        sections[name] = _merge(_DEFAULTS[name], raw.get(name, {}), name)

    model_raw = dict(sections["model"])
    tau_turnovers = model_raw.pop("tau_turnovers", None)
    run_raw = dict(sections["run"])
    user_run = raw.get("run", {})
    if "t_end_turnovers" in run_raw and "t_end" not in user_run:
        run_raw.pop("t_end", None)  # drop only the default, not a user value
    ledger_raw = dict(sections["ledger"])
    ledger_raw["eval_fractions"] = tuple(ledger_raw["eval_fractions"])

    return RunConfig(
        grid=GridSpec(**sections["grid"]),
        model=ModelParams(**model_raw),
        perturbation=PerturbationSpec(**sections["perturbation"]),
        stepper=StepperConfig(**sections["stepper"]),
        run=RunSection(**run_raw),
        ledger=LedgerSection(**ledger_raw),
        output_dir=sections["output"]["dir"],
        tau_turnovers=tau_turnovers,
    )


def load_config(path: str) -> RunConfig:
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    return config_from_dict(raw)


def default_config() -> RunConfig:
    return config_from_dict({})


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigurationError(f"cannot serialize {v!r} to TOML")


def dump_config(cfg: RunConfig) -> str:
    """Render a config back to TOML (flat sections of scalars)."""
    sections = {
        "grid": {k: getattr(cfg.grid, k)
                 for k in ("dim", "n", "box_len", "dealias_fraction")},
        "model": {k: getattr(cfg.model, k)
                  for k in ("nu", "mu", "tau", "ensemble_size", "cap_mode")},
        "perturbation": asdict(cfg.perturbation),
        "stepper": asdict(cfg.stepper),
        "run": {k: v for k, v in asdict(cfg.run).items() if v is not None},
        "ledger": {"alpha": cfg.ledger.alpha,
                   "eval_fractions": list(cfg.ledger.eval_fractions)},
        "output": {"dir": cfg.output_dir},
    }
    if cfg.model.cap_length is not None:
        sections["model"]["cap_length"] = cfg.model.cap_length
    if cfg.tau_turnovers is not None:
        sections["model"]["tau_turnovers"] = cfg.tau_turnovers
    if cfg.ledger.beta is not None:
        sections["ledger"]["beta"] = cfg.ledger.beta

    lines = []
    for name, body in sections.items():
        lines.append(f"[{name}]")
        for key, val in body.items():
            lines.append(f"{key} = {_toml_value(val)}")
        lines.append("")
    return "\n".join(lines)
