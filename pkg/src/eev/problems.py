"""Seeded generation of ensemble data and the body-force scales.

Each member's initial condition and time-independent body force is a smooth,
periodic, mean-zero, divergence-free field supported on a shell of integer
modes k_min <= |m| <= k_max.  Members share a base pattern; member j jitters
every retained mode by a multiplicative amplitude factor (1 + delta*a) and a
phase rotation exp(i*delta*theta) drawn from the stream (seed, j), so delta = 0
reproduces the base pattern exactly and delta tunes the turbulence intensity.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .spectral import (
    GridSpec,
    SpectralField,
    gradient,
    l2_norm_sq,
    leray_project,
    scalar_to_grid,
    zero_mean,
)

_TAG_FORCE = 0x66
_TAG_IC = 0x69


@dataclass(frozen=True)
class PerturbationSpec:
    """Seed and jitter parameters for the ensemble data."""

    seed: int
    delta: float = 0.0
    k_min: int = 1
    k_max: int = 3
    base_amplitude: float = 1.0

    def __post_init__(self):
        if self.delta < 0:
            raise ConfigurationError("delta must be nonnegative")
        if not 1 <= self.k_min <= self.k_max:
            raise ConfigurationError("need 1 <= k_min <= k_max")
        if self.base_amplitude <= 0:
            raise ConfigurationError("base_amplitude must be positive")


@dataclass(frozen=True)
class ForcingScales:
    """Body-force scale F, gradient scales, and the large length scale L."""

    F: float
    grad_f_inf: float
    grad_f_l2: float
    L: float
    box_len: float
    unforced: bool = False


def _conj_reverse(arr, axes):
    """x(m) -> x(-m mod n) along the given axes."""
    out = arr
    for ax in axes:
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def _band_mask(grid: GridSpec, k_min: int, k_max: int) -> np.ndarray:
    m_sq = sum(m**2 for m in grid.modes)
    return (m_sq >= k_min**2) & (m_sq <= k_max**2)


def _validate_band(spec: PerturbationSpec, grid: GridSpec):
    cutoff = grid.dealias_fraction * (grid.n / 2)
    if spec.k_max > cutoff:
        raise ConfigurationError(
            f"k_max={spec.k_max} exceeds the dealias cutoff {cutoff:.1f}"
        )
    if not _band_mask(grid, spec.k_min, spec.k_max).any():
        raise ConfigurationError("mode band is empty on this grid")


def _hermitian_plane_fix(coeffs, grid, symmetrize):
    """Restore uhat(-m) = conj(uhat(m)) on the self-conjugate rfft planes."""
    axes = tuple(range(1, grid.dim))  # spatial axes of one plane, comp axis 0
    for idx in (0, grid.spectral_shape[-1] - 1):
        plane = coeffs[..., idx]
        coeffs[..., idx] = symmetrize(plane, axes)
    return coeffs


def _sym_field(plane, axes):
    return 0.5 * (plane + np.conj(_conj_reverse(plane, axes)))


def _random_coeffs(grid: GridSpec, rng) -> np.ndarray:
    shape = (grid.dim,) + grid.spectral_shape
    c = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return _hermitian_plane_fix(c, grid, _sym_field)


def _jitter_factor(grid: GridSpec, rng, delta: float) -> np.ndarray:
    """Per-mode factor (1 + delta*a) * exp(i*delta*theta), Hermitian-compatible."""
    a = rng.uniform(-1.0, 1.0, grid.spectral_shape)
    theta = rng.uniform(-np.pi, np.pi, grid.spectral_shape)
    axes = tuple(range(grid.dim - 1))
    for idx in (0, grid.spectral_shape[-1] - 1):
        a[..., idx] = 0.5 * (a[..., idx] + _conj_reverse(a[..., idx], axes))
        theta[..., idx] = 0.5 * (theta[..., idx] - _conj_reverse(theta[..., idx], axes))
    return (1.0 + delta * a) * np.exp(1j * delta * theta)


def _member_field(spec: PerturbationSpec, j: int, grid: GridSpec, tag: int) -> SpectralField:
    _validate_band(spec, grid)
    base_rng = np.random.default_rng(np.random.SeedSequence([spec.seed, tag]))
    coeffs = _random_coeffs(grid, base_rng)
    coeffs *= _band_mask(grid, spec.k_min, spec.k_max)
    if spec.delta > 0:
        member_rng = np.random.default_rng(np.random.SeedSequence([spec.seed, tag, j]))
        coeffs = coeffs * _jitter_factor(grid, member_rng, spec.delta)
    zero_mean(coeffs, grid)
    f = leray_project(SpectralField(grid, coeffs, is_dealiased=True))
    return f.copy(is_dealiased=True)


def normalize_ensemble(fields, target_rms: float):
    """Scale all members by one factor so <(1/|Omega|)||f||^2>_e = target_rms^2."""
    msq = np.mean([l2_norm_sq(f, volume_normalized=True) for f in fields])
    if msq == 0.0:
        raise ConfigurationError("cannot normalize an all-zero ensemble")
    s = target_rms / np.sqrt(msq)
    return tuple(f.copy(coeffs=f.coeffs * s) for f in fields)


def make_ensemble_fields(spec: PerturbationSpec, grid: GridSpec, ensemble_size: int,
                         kind: str):
    """All J members of the body force ('force') or initial condition ('ic')."""
    tag = {"force": _TAG_FORCE, "ic": _TAG_IC}[kind]
    fields = [_member_field(spec, j, grid, tag) for j in range(ensemble_size)]
    return normalize_ensemble(fields, spec.base_amplitude)


def make_body_force(spec: PerturbationSpec, j: int, grid: GridSpec,
                    ensemble_size: int = 1) -> SpectralField:
    """Member j of the time-independent body-force ensemble."""
    return make_ensemble_fields(spec, grid, ensemble_size, "force")[j]


def make_initial_condition(spec: PerturbationSpec, j: int, grid: GridSpec,
                           ensemble_size: int = 1) -> SpectralField:
    """Member j of the initial-condition ensemble."""
    return make_ensemble_fields(spec, grid, ensemble_size, "ic")[j]


def forcing_scales(forces) -> ForcingScales:
    """F, gradient scales, and L = min(box, F/||grad f||_inf, F/||grad f||_L2).

    ||grad f||_inf is the collocation-grid max of the pointwise Frobenius norm,
    maximized over members (forces are band-limited, so the grid max is sharp).
    """
    grid = forces[0].grid
    F_sq = np.mean([l2_norm_sq(f, volume_normalized=True) for f in forces])
    F = float(np.sqrt(F_sq))
    if F == 0.0:
        return ForcingScales(F=0.0, grad_f_inf=0.0, grad_f_l2=0.0,
                             L=grid.box_len, box_len=grid.box_len, unforced=True)

    grad_inf = 0.0
    grad_l2_sq = 0.0
    for f in forces:
        g = scalar_to_grid(gradient(f), grid)
        grad_inf = max(grad_inf, float(np.sqrt((g**2).sum(axis=(0, 1))).max()))
        grad_l2_sq += float((g**2).sum() / grid.n_points)
    grad_l2 = float(np.sqrt(grad_l2_sq / len(forces)))

    L = min(grid.box_len, F / grad_inf, F / grad_l2)
    return ForcingScales(F=F, grad_f_inf=grad_inf, grad_f_l2=grad_l2,
                         L=float(L), box_len=grid.box_len)
