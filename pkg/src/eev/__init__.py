"""Ensemble eddy-viscosity turbulence solver for periodic boxes."""

from .diagnostics import (
    FlowScales,
    RunRecorder,
    flow_scales,
    instantaneous_budget,
    proof_ledger,
    theorem_bound,
)
from .dynamics import StepperConfig, advance_to, stable_dt, step
from .ensemble import (
    EnsembleState,
    FluctuationStats,
    ModelParams,
    compute_stats,
    eddy_diffusion,
    make_state,
    viscosity_map,
)
from .problems import (
    ForcingScales,
    PerturbationSpec,
    forcing_scales,
    make_body_force,
    make_ensemble_fields,
    make_initial_condition,
)
from .spectral import (
    GridSpec,
    PhysicalScalar,
    PhysicalVector,
    SpectralField,
    dealias,
    gradient,
    inner,
    l2_norm_sq,
    leray_project,
    linf_norm,
    nonlinear_term,
    to_physical,
    to_spectral,
)

__version__ = "0.1.0"
