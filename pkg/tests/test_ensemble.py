"""Ensemble statistics, eddy diffusion, and the scalar closure map."""

import numpy as np
import pytest

from eev.ensemble import (
    HARD_CAP,
    ModelParams,
    compute_stats,
    eddy_diffusion,
    viscosity_map,
)
from eev.errors import ConfigurationError, ContractViolationError
from eev.spectral import (
    GridSpec,
    PhysicalScalar,
    PhysicalVector,
    SpectralField,
    gradient_grids,
    inner,
    to_physical,
    to_spectral,
)

from conftest import random_field


def params(**kw):
    defaults = dict(nu=1e-2, mu=0.55, tau=0.01, ensemble_size=2)
    defaults.update(kw)
    return ModelParams(**defaults)


# ------------------------------------------------------------------- stats
def test_symmetric_pair(grid2d):
    v = random_field(grid2d, seed=1, rms=0.8)
    stats = compute_stats([v, v.copy(coeffs=-v.coeffs)], params())
    assert np.abs(stats.mean.coeffs).max() <= 1e-14
    vmag_sq = (to_physical(v).values ** 2).sum(axis=0)
    np.testing.assert_allclose(stats.fluct_mag_sq.values, vmag_sq, atol=1e-13)
    np.testing.assert_allclose(stats.tke.values, 0.5 * vmag_sq, atol=1e-13)


def test_single_member_reduces_to_nse(grid2d):
    v = random_field(grid2d, seed=2)
    stats = compute_stats([v], params(ensemble_size=1))
    np.testing.assert_array_equal(stats.mean.coeffs, v.coeffs)
    assert np.all(stats.fluct_mag_sq.values == 0.0)
    assert np.all(stats.nu_turb.values == 0.0)


def test_uncapped_nu_turb_value(grid2d):
    # |u'|_e^2 = 1 at x = 0 gives nu_turb = mu*tau = 0.0055 there
    x, y = grid2d.coords()
    values = np.array([np.cos(x) + 0.0 * y, 0.0 * x + 0.0 * y])
    v = to_spectral(PhysicalVector(grid2d, values))
    stats = compute_stats([v, v.copy(coeffs=-v.coeffs)], params(mu=0.55, tau=0.01))
    assert abs(stats.fluct_mag_sq.values[0, 0] - 1.0) <= 1e-13
    assert abs(stats.nu_turb.values[0, 0] - 0.0055) <= 1e-15


def test_hard_cap(grid2d):
    # |u'|_e = 10 everywhere, tau = 1: l capped at the box size 2*pi
    x, y = grid2d.coords()
    values = 10.0 * np.array([np.cos(y) + 0.0 * x, np.sin(y) + 0.0 * x])
    v = to_spectral(PhysicalVector(grid2d, values))
    p = params(tau=1.0, cap_mode=HARD_CAP)
    stats = compute_stats([v, v.copy(coeffs=-v.coeffs)], p)
    cap = grid2d.box_len
    assert np.all(stats.length_scale.values <= cap)
    np.testing.assert_allclose(stats.length_scale.values, cap, rtol=1e-12)
    np.testing.assert_allclose(stats.nu_turb.values, 0.55 * 10.0 * cap, rtol=1e-11)


def test_capped_equals_uncapped_below_cap(grid2d):
    members = [random_field(grid2d, seed=s, rms=0.5) for s in (3, 4, 5)]
    p_unc = params(tau=0.01, ensemble_size=3)
    p_cap = params(tau=0.01, ensemble_size=3, cap_mode=HARD_CAP)
    s_unc = compute_stats(members, p_unc)
    s_cap = compute_stats(members, p_cap)
    below = s_unc.length_scale.values <= p_cap.resolved_cap(grid2d)
    assert below.all()  # tiny tau: the cap never binds
    np.testing.assert_array_equal(s_cap.nu_turb.values, s_unc.nu_turb.values)


def test_fluctuation_mean_is_zero(grid2d):
    members = [random_field(grid2d, seed=s) for s in (7, 8, 9, 10)]
    stats = compute_stats(members, params(ensemble_size=4))
    resid = sum(m.coeffs - stats.mean.coeffs for m in members) / len(members)
    assert np.abs(resid).max() <= 1e-13


def test_gradient_decomposition_identity(grid2d):
    members = [random_field(grid2d, seed=s, rms=1.2) for s in (11, 12, 13)]
    stats = compute_stats(members, params(ensemble_size=3))
    J = len(members)

    lhs = sum((gradient_grids(m) ** 2).sum(axis=(0, 1)) for m in members) / J
    mean_sq = (gradient_grids(stats.mean) ** 2).sum(axis=(0, 1))
    fluct_sq = sum(
        (gradient_grids(m.copy(coeffs=m.coeffs - stats.mean.coeffs)) ** 2).sum(axis=(0, 1))
        for m in members
    ) / J
    np.testing.assert_allclose(lhs, mean_sq + fluct_sq, rtol=1e-12)


def test_empty_ensemble_rejected():
    with pytest.raises(ConfigurationError):
        compute_stats([], params())


# --------------------------------------------------------------- diffusion
def test_constant_coefficient_is_laplacian(grid2d):
    u = random_field(grid2d, seed=20)
    c = 0.37
    nt = PhysicalScalar(grid2d, np.full(grid2d.phys_shape, c))
    got = eddy_diffusion(u, nt)
    expected = -c * grid2d.k_sq * u.coeffs * grid2d.dealias_mask
    np.testing.assert_allclose(got.coeffs, expected, atol=1e-13 * np.abs(expected).max())


def test_zero_velocity(grid2d):
    u = SpectralField(grid2d, np.zeros((2,) + grid2d.spectral_shape, dtype=complex),
                      is_divergence_free=True, is_dealiased=True)
    nt = PhysicalScalar(grid2d, np.ones(grid2d.phys_shape))
    assert np.all(eddy_diffusion(u, nt).coeffs == 0.0)


def smooth_positive_scalar(grid, seed, max_mode=1):
    r = random_field(grid, seed=seed, max_mode=max_mode, solenoidal=False)
    s = to_physical(r).values[0]
    return PhysicalScalar(grid, 1.0 + 0.5 * s / np.abs(s).max())


def fd_eddy_diffusion(u_grid, nu_grid, dx):
    """Second-order central-difference oracle for div(nu grad u)."""
    d = u_grid.shape[0]
    out = np.zeros_like(u_grid)
    for i in range(d):
        for j in range(d):
            dudj = (np.roll(u_grid[i], -1, axis=j) - np.roll(u_grid[i], 1, axis=j)) / (2 * dx)
            flux = nu_grid * dudj
            out[i] += (np.roll(flux, -1, axis=j) - np.roll(flux, 1, axis=j)) / (2 * dx)
    return out


@pytest.mark.parametrize("n,tol", [(64, 1e-2), (128, 3e-3)])
def test_eddy_diffusion_vs_finite_differences(n, tol):
    grid = GridSpec(dim=2, n=n, box_len=2.0 * np.pi)
    u = random_field(grid, seed=21, max_mode=1)
    nt = smooth_positive_scalar(grid, seed=22)
    spec = to_physical(eddy_diffusion(u, nt)).values
    fd = fd_eddy_diffusion(to_physical(u).values, nt.values, grid.dx)
    rel = np.linalg.norm(spec - fd) / np.linalg.norm(spec)
    assert rel <= tol


def test_eddy_diffusion_dissipative(grid2d):
    u = random_field(grid2d, seed=23, rms=1.4)
    nt = smooth_positive_scalar(grid2d, seed=24)
    D = eddy_diffusion(u, nt)
    grad = gradient_grids(u)
    quad = (nt.values * (grad**2).sum(axis=(0, 1))).mean() * grid2d.volume
    got = inner(D, u)
    assert got <= 1e-10 * quad
    # Parseval makes the pairing the exact negative of the grid quadrature
    assert abs(got + quad) <= 1e-12 * quad


def test_negative_nu_turb_rejected(grid2d):
    u = random_field(grid2d, seed=25)
    nt = PhysicalScalar(grid2d, -np.ones(grid2d.phys_shape))
    with pytest.raises(ContractViolationError):
        eddy_diffusion(u, nt)


# -------------------------------------------------------------- closure map
def test_viscosity_map_values():
    p = params(nu=0.3)
    assert viscosity_map(0.0, p) == pytest.approx(0.3)
    assert viscosity_map(2.0, p) == pytest.approx(0.3 + 2.0)  # min{2,1} = 1
    assert viscosity_map(0.5, p) == pytest.approx(0.3 + 0.25)


def test_viscosity_map_rejects_negative():
    with pytest.raises(ContractViolationError):
        viscosity_map(-1.0, params())


def test_viscosity_map_lipschitz_brute_force():
    # sup |A(a)-A(b)|/|a-b| over 10^6 sampled pairs stays under 2
    rng = np.random.default_rng(99)
    p = params(nu=1e-3)
    a = np.abs(rng.standard_normal(10**6)) * rng.choice([0.1, 1.0, 10.0], 10**6)
    b = np.abs(rng.standard_normal(10**6)) * rng.choice([0.1, 1.0, 10.0], 10**6)
    keep = a != b
    ratio = np.abs(viscosity_map(a[keep], p) - viscosity_map(b[keep], p)) / np.abs(
        a[keep] - b[keep]
    )
    assert ratio.max() <= 2.0 + 1e-12


def test_nemytskii_continuity(grid2d):
    # ||A(s_n) - A(s)|| <= 2 ||s_n - s|| along convergent grid sequences
    rng = np.random.default_rng(101)
    p = params(nu=0.05)
    s = np.abs(rng.standard_normal(grid2d.phys_shape))
    for k in range(1, 8):
        s_n = np.abs(s + 2.0**-k * rng.standard_normal(grid2d.phys_shape))
        lhs = np.linalg.norm(viscosity_map(s_n, p) - viscosity_map(s, p))
        assert lhs <= 2.0 * np.linalg.norm(s_n - s) + 1e-12
