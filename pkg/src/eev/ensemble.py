"""Ensemble statistics, the turbulence length scale, and the eddy-diffusion term.

The closure is computed once per time level from the J realizations and shared
by every member: the fluctuation magnitude |u'|_e^2(x) = (1/J) sum_j |u_j - <u>_e|^2
feeds a length scale l = |u'|_e * tau (optionally hard-capped at the box size)
and the eddy viscosity nu_turb = mu * |u'|_e * l.  Uncapped this reduces to
nu_turb = mu * tau * |u'|_e^2.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, ContractViolationError
from .spectral import (
    GridSpec,
    PhysicalScalar,
    SpectralField,
    dealias,
    gradient,
    grid_to_scalar,
    scalar_to_grid,
    zero_mean,
)

UNCAPPED = "uncapped"
HARD_CAP = "hard_cap"


@dataclass(frozen=True)
class ModelParams:
    """Closure constants: molecular viscosity, calibration constant, time scale."""

    nu: float
    mu: float = 0.55
    tau: float = 0.01
    ensemble_size: int = 1
    cap_mode: str = UNCAPPED
    cap_length: float | None = None  # defaults to the box size when capping

    def __post_init__(self):
        if self.nu <= 0:
            raise ConfigurationError("nu must be positive")
        if self.mu < 0:
            raise ConfigurationError("mu must be nonnegative")
        if self.tau <= 0:
            raise ConfigurationError("tau must be positive")
        if self.ensemble_size < 1:
            raise ConfigurationError("ensemble_size must be >= 1")
        if self.cap_mode not in (UNCAPPED, HARD_CAP):
            raise ConfigurationError(f"unknown cap_mode {self.cap_mode!r}")
        if self.cap_length is not None and self.cap_length <= 0:
            raise ConfigurationError("cap_length must be positive")

    def resolved_cap(self, grid: GridSpec) -> float:
        return self.cap_length if self.cap_length is not None else grid.box_len


@dataclass(frozen=True)
class FluctuationStats:
    """Shared per-time-level ensemble statistics and the eddy-viscosity grid."""

    mean: SpectralField
    fluct_mag_sq: PhysicalScalar  # |u'|_e^2
    tke: PhysicalScalar           # k' = |u'|_e^2 / 2
    length_scale: PhysicalScalar  # l
    nu_turb: PhysicalScalar


@dataclass(frozen=True)
class EnsembleState:
    """Time level of the J-member system plus its shared statistics."""

    t: float
    members: tuple          # J divergence-free SpectralFields
    forces: tuple           # J time-independent SpectralFields
    shared_stats: FluctuationStats

    def __post_init__(self):
        if len(self.members) == 0:
            raise ConfigurationError("ensemble needs at least one member")
        if len(self.forces) != len(self.members):
            raise ConfigurationError("one force per member required")
        grid = self.members[0].grid
        for f in (*self.members, *self.forces):
            if f.grid != grid:
                raise ConfigurationError("all members/forces must share one grid")

    @property
    def grid(self) -> GridSpec:
        return self.members[0].grid

    @property
    def ensemble_size(self) -> int:
        return len(self.members)

    def copy(self, **changes):
        return replace(self, **changes)


def compute_stats(members, params: ModelParams) -> FluctuationStats:
    """Ensemble mean, fluctuation magnitude, TKE, length scale and nu_turb.

    The fluctuation magnitude is evaluated pointwise on the collocation grid
    (it feeds a pointwise product), the mean stays spectral.
    """
    J = len(members)
    if J == 0:
        raise ConfigurationError("compute_stats requires at least one member")
    grid = members[0].grid

    mean_coeffs = sum(m.coeffs for m in members) / J
    mean = SpectralField(
        grid,
        mean_coeffs,
        is_divergence_free=all(m.is_divergence_free for m in members),
        is_dealiased=all(m.is_dealiased for m in members),
    )

    fluct_sq = np.zeros(grid.phys_shape)
    if J > 1:
        for m in members:
            du = scalar_to_grid(m.coeffs - mean_coeffs, grid)
            fluct_sq += (du**2).sum(axis=0)
        fluct_sq /= J

    fluct_mag = np.sqrt(fluct_sq)
    if params.cap_mode == HARD_CAP:
        length = np.minimum(fluct_mag * params.tau, params.resolved_cap(grid))
    else:
        length = fluct_mag * params.tau
    nu_turb = params.mu * fluct_mag * length

    return FluctuationStats(
        mean=mean,
        fluct_mag_sq=PhysicalScalar(grid, fluct_sq),
        tke=PhysicalScalar(grid, 0.5 * fluct_sq),
        length_scale=PhysicalScalar(grid, length),
        nu_turb=PhysicalScalar(grid, nu_turb),
    )


def make_state(t, members, forces, params: ModelParams) -> EnsembleState:
    """Bundle members with freshly computed shared statistics."""
    return EnsembleState(
        t=t,
        members=tuple(members),
        forces=tuple(forces),
        shared_stats=compute_stats(members, params),
    )


def eddy_diffusion(u_j: SpectralField, nu_turb: PhysicalScalar) -> SpectralField:
    """div(nu_turb * grad u_j): derivatives spectral, the product pointwise.

    Discretely dissipative: inner(eddy_diffusion(u, nt), u) equals minus the
    grid quadrature of nu_turb |grad u|^2 by Parseval, hence <= 0.
    """
    if np.any(nu_turb.values < 0):
        raise ContractViolationError("nu_turb must be pointwise nonnegative")
    grid = u_j.grid
    d = grid.dim
    ud = u_j if u_j.is_dealiased else dealias(u_j)

    grad_grids = scalar_to_grid(gradient(ud), grid)          # (d, d, *phys)
    flux_hat = grid_to_scalar(nu_turb.values * grad_grids, grid)

    out = np.empty((d,) + grid.spectral_shape, dtype=complex)
    for i in range(d):
        out[i] = sum(1j * grid.k[j] * flux_hat[i, j] for j in range(d))
    out *= grid.dealias_mask
    zero_mean(out, grid)
    return SpectralField(grid, out, is_divergence_free=False, is_dealiased=True)


def viscosity_map(s, params: ModelParams):
    """Scalar closure map A(s) = nu + s*min(s, 1) on s >= 0 (Lipschitz <= 2)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ContractViolationError("viscosity_map requires s >= 0")
    out = params.nu + s * np.minimum(s, 1.0)
    return float(out) if out.ndim == 0 else out
