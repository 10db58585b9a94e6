"""Time integration of the J-member system.

The molecular-viscosity term is integrated exactly with the factor
exp(-nu |k|^2 dt); advection, eddy diffusion and forcing are advanced
explicitly by a multi-stage scheme.  The shared eddy viscosity is frozen at
its start-of-step value for every stage and every member, so one closure
evaluation serves the whole ensemble step.  Stage values are Leray-projected
and dealiased, keeping members divergence-free and mean-zero throughout.

Schemes (integrating-factor form):
  rk2_heun - Heun's second-order method; uses decay factors only.
  rk3_ssp  - Shu-Osher SSP-RK3.  Its decreasing abscissa (1 -> 1/2) makes the
             second stage map the t+dt force evaluation back half a step,
             which costs one exp(+nu |k|^2 dt/2) factor; keep nu*k_max^2*dt
             moderate (any advective-CFL-limited dt qualifies) or use rk2_heun.
"""

from dataclasses import dataclass

import numpy as np

from .ensemble import EnsembleState, ModelParams, compute_stats, eddy_diffusion
from .errors import BlowUpError, ConfigurationError
from .spectral import SpectralField, dealias, leray_project, linf_norm, nonlinear_term

RK2_HEUN = "rk2_heun"
RK3_SSP = "rk3_ssp"


@dataclass(frozen=True)
class StepperConfig:
    """Step-size control and scheme selection."""

    dt: float
    cfl: float = 0.4
    eddy_stability_factor: float = 0.25
    adapt: bool = True
    scheme: str = RK3_SSP

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError("dt must be positive")
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigurationError("cfl must lie in (0, 1]")
        if self.eddy_stability_factor <= 0:
            raise ConfigurationError("eddy_stability_factor must be positive")
        if self.scheme not in (RK2_HEUN, RK3_SSP):
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")


def stable_dt(state: EnsembleState, cfg: StepperConfig, params: ModelParams) -> float:
    """min(cfl*dx/max|u|, c_e*dx^2/max nu_turb, cfg.dt); cfg.dt if both idle."""
    dx = state.grid.dx
    umax = max(linf_norm(m) for m in state.members)
    ntmax = float(state.shared_stats.nu_turb.values.max())
    dt = cfg.dt
    if umax > 0.0:
        dt = min(dt, cfg.cfl * dx / umax)
    if ntmax > 0.0:
        dt = min(dt, cfg.eddy_stability_factor * dx**2 / ntmax)
    return dt


def _rhs(u: SpectralField, force: SpectralField, nu_turb) -> SpectralField:
    """Projected explicit forcing: P[-N(u) + div(nu_turb grad u) + f]."""
    nl = nonlinear_term(u)
    eddy = eddy_diffusion(u, nu_turb)
    combined = eddy.coeffs - nl.coeffs + force.coeffs
    return leray_project(
        SpectralField(u.grid, combined, is_divergence_free=False, is_dealiased=True)
    )


def _finalize(coeffs, grid):
    f = SpectralField(grid, coeffs, is_divergence_free=False, is_dealiased=False)
    return leray_project(dealias(f))


def _advance_member(u, force, nu_turb, nu, dt, scheme):
    grid = u.grid
    E1 = np.exp(-nu * grid.k_sq * dt)
    Eh = np.exp(-nu * grid.k_sq * (dt / 2.0))

    R0 = _rhs(u, force, nu_turb)
    u1 = _finalize(E1 * (u.coeffs + dt * R0.coeffs), grid)
    R1 = _rhs(u1, force, nu_turb)

    if scheme == RK2_HEUN:
        out = E1 * u.coeffs + (dt / 2.0) * (E1 * R0.coeffs + R1.coeffs)
        return _finalize(out, grid)

    # rk3_ssp: second stage sits at t + dt/2, assembled from the t + dt stage
    Einv_h = np.exp(nu * grid.k_sq * (dt / 2.0))
    u2 = _finalize(
        0.75 * Eh * u.coeffs
        + 0.25 * Eh * (u.coeffs + dt * R0.coeffs)
        + 0.25 * dt * Einv_h * R1.coeffs,
        grid,
    )
    R2 = _rhs(u2, force, nu_turb)
    out = (E1 * u.coeffs + 2.0 * Eh * (u2.coeffs + dt * R2.coeffs)) / 3.0
    return _finalize(out, grid)


def step(state: EnsembleState, dt: float, params: ModelParams,
         cfg: StepperConfig) -> EnsembleState:
    """Advance every member by dt with the start-of-step shared nu_turb.

    Members advance independently against the read-only frozen coefficient
    (an embarrassingly parallel map); the closing compute_stats is the one
    synchronization point between steps.
    """
    nu_turb = state.shared_stats.nu_turb  # frozen for all stages and members
    members = tuple(
        _advance_member(u, f, nu_turb, params.nu, dt, cfg.scheme)
        for u, f in zip(state.members, state.forces)
    )
    return EnsembleState(
        t=state.t + dt,
        members=members,
        forces=state.forces,
        shared_stats=compute_stats(members, params),
    )


def _check_finite(state: EnsembleState):
    for j, m in enumerate(state.members):
        if not np.all(np.isfinite(m.coeffs)):
            finite = np.abs(m.coeffs[np.isfinite(m.coeffs)])
            peak = float(finite.max()) if finite.size else float("inf")
            raise BlowUpError(state.t, j, peak)


def advance_to(state: EnsembleState, t_end: float, params: ModelParams,
               cfg: StepperConfig, sinks=None) -> EnsembleState:
    """Repeated stepping to t_end; the last step is clipped to land exactly.

    ``sinks`` (optional) receives ``start(state)`` once, then
    ``after_step(prev_state, new_state, dt)`` per step and ``warn(msg)`` for
    stability warnings.
    """
    if t_end < state.t:
        raise ConfigurationError(f"t_end={t_end} is before state.t={state.t}")
    if sinks is not None:
        sinks.start(state)
    if t_end == state.t:
        return state

    while state.t < t_end - 1e-12 * max(1.0, abs(t_end)):
        bound = stable_dt(state, cfg, params)
        if cfg.adapt:
            dt = bound
        else:
            dt = cfg.dt
            if dt > bound * (1 + 1e-12) and sinks is not None:
                sinks.warn(
                    f"t={state.t:.6g}: fixed dt={dt:.3e} exceeds stability bound {bound:.3e}"
                )
        dt = min(dt, t_end - state.t)
        new_state = step(state, dt, params, cfg)
        _check_finite(new_state)
        if sinks is not None:
            sinks.after_step(state, new_state, dt)
        state = new_state
    if state.t != t_end:  # snap the clipped landing to t_end exactly
        state = state.copy(t=t_end)
    return state
