"""Time-stepping: integrating-factor exactness, stability control, determinism."""

import numpy as np
import pytest

import eev.dynamics as dynamics
from eev.dynamics import RK2_HEUN, RK3_SSP, StepperConfig, advance_to, stable_dt, step
from eev.ensemble import EnsembleState, ModelParams, compute_stats, make_state
from eev.errors import BlowUpError, ConfigurationError
from eev.spectral import (
    GridSpec,
    PhysicalVector,
    SpectralField,
    dealias,
    l2_norm_sq,
    leray_project,
    max_divergence,
    single_mode_field,
    to_spectral,
)

from conftest import random_field


def zero_force(grid):
    return SpectralField(grid, np.zeros((grid.dim,) + grid.spectral_shape, dtype=complex),
                         is_divergence_free=True, is_dealiased=True)


def decay_state(grid, members, params):
    return make_state(0.0, members, [zero_force(grid)] * len(members), params)


# ---------------------------------------------------------------- stable_dt
def test_stable_dt_zero_state(grid2d):
    p = ModelParams(nu=1e-2)
    u = zero_force(grid2d)
    state = decay_state(grid2d, [u], p)
    cfg = StepperConfig(dt=0.05)
    assert stable_dt(state, cfg, p) == 0.05


def test_stable_dt_advective(grid2d):
    # max|u| = 1, dx = 2*pi/n, cfl = 0.4, no eddy term
    p = ModelParams(nu=1e-2)
    u = single_mode_field(grid2d, component=0, mode=(0, 1))  # |u|_inf = 1
    state = decay_state(grid2d, [leray_project(dealias(u))], p)
    cfg = StepperConfig(dt=10.0, cfl=0.4)
    assert stable_dt(state, cfg, p) == pytest.approx(0.4 * grid2d.dx, rel=1e-12)


def test_stable_dt_eddy_halves_when_nu_turb_doubles(grid2d):
    p = ModelParams(nu=1e-2, mu=0.55, tau=50.0, ensemble_size=2)
    v = random_field(grid2d, seed=1, rms=1.0)
    state = make_state(0.0, [v, v.copy(coeffs=-v.coeffs)],
                       [zero_force(grid2d)] * 2, p)
    cfg = StepperConfig(dt=100.0, cfl=1.0)
    dt1 = stable_dt(state, cfg, p)
    p2 = ModelParams(nu=1e-2, mu=2 * 0.55, tau=50.0, ensemble_size=2)
    state2 = make_state(0.0, state.members, state.forces, p2)
    dt2 = stable_dt(state2, cfg, p2)
    assert dt2 == pytest.approx(dt1 / 2, rel=1e-12)
    assert dt1 == pytest.approx(
        cfg.eddy_stability_factor * grid2d.dx**2 / state.shared_stats.nu_turb.values.max(),
        rel=1e-12,
    )


# --------------------------------------------------------------------- step
@pytest.mark.parametrize("scheme", [RK2_HEUN, RK3_SSP])
def test_single_mode_decays_exactly(grid2d, scheme):
    # one divergence-free mode: advection vanishes identically, the
    # integrating factor makes the viscous decay exact per step
    p = ModelParams(nu=0.05)
    u0 = leray_project(dealias(single_mode_field(grid2d, component=0, mode=(0, 2))))
    state = decay_state(grid2d, [u0], p)
    dt = 0.02
    new = step(state, dt, p, StepperConfig(dt=dt, scheme=scheme))
    k_sq = (2 * np.pi / grid2d.box_len) ** 2 * 4.0
    expected = u0.coeffs * np.exp(-p.nu * k_sq * dt)
    np.testing.assert_allclose(new.members[0].coeffs, expected, atol=1e-15)


def test_taylor_green_short_run():
    # projected advection vanishes for the vortex, so the trajectory is the
    # exact viscous decay of the (1,1) modes
    grid = GridSpec(dim=2, n=64, box_len=2.0 * np.pi)
    nu = 1e-2
    p = ModelParams(nu=nu)
    x, y = grid.coords()
    values = np.array([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)])
    u0 = leray_project(dealias(to_spectral(PhysicalVector(grid, values))))
    state = decay_state(grid, [u0], p)
    cfg = StepperConfig(dt=1e-3, adapt=False)
    t_end = 0.1
    final = advance_to(state, t_end, p, cfg)
    exact = u0.coeffs * np.exp(-2.0 * nu * t_end)
    err = np.sqrt(l2_norm_sq(final.members[0].copy(coeffs=final.members[0].coeffs - exact),
                             volume_normalized=True))
    assert err <= 1e-12


def test_degenerate_pair_matches_single_run(grid2d):
    p1 = ModelParams(nu=5e-3, mu=0.55, tau=0.05, ensemble_size=1)
    p2 = ModelParams(nu=5e-3, mu=0.55, tau=0.05, ensemble_size=2)
    u0 = random_field(grid2d, seed=6, rms=0.7)
    f = random_field(grid2d, seed=7, rms=0.3)
    cfg = StepperConfig(dt=5e-3, adapt=False)
    single = advance_to(make_state(0.0, [u0], [f], p1), 0.05, p1, cfg)
    pair = advance_to(make_state(0.0, [u0, u0], [f, f], p2), 0.05, p2, cfg)
    np.testing.assert_array_equal(pair.members[0].coeffs, single.members[0].coeffs)
    np.testing.assert_array_equal(pair.members[1].coeffs, single.members[0].coeffs)


def test_members_stay_divergence_free_and_mean_zero(grid2d):
    p = ModelParams(nu=2e-3, mu=0.55, tau=0.1, ensemble_size=2)
    members = [random_field(grid2d, seed=s, rms=1.0) for s in (8, 9)]
    forces = [random_field(grid2d, seed=s, rms=0.5) for s in (10, 11)]
    state = advance_to(make_state(0.0, members, forces, p), 0.2, p,
                       StepperConfig(dt=0.05))
    for m in state.members:
        scale = np.abs(m.coeffs).max() * np.sqrt(grid2d.k_sq.max())
        assert max_divergence(m) <= 1e-12 * scale
        assert np.abs(m.coeffs[(Ellipsis,) + (0,) * grid2d.dim]).max() == 0.0


def test_energy_decays_without_forcing(grid2d):
    # mu = 0, f = 0: kinetic energy strictly non-increasing step over step
    p = ModelParams(nu=2e-2, mu=0.0, tau=0.1, ensemble_size=1)
    u0 = random_field(grid2d, seed=12, rms=1.0, max_mode=6)
    state = decay_state(grid2d, [u0], p)
    cfg = StepperConfig(dt=0.01, adapt=False)
    ke = [l2_norm_sq(state.members[0])]
    for _ in range(20):
        state = step(state, cfg.dt, p, cfg)
        ke.append(l2_norm_sq(state.members[0]))
    diffs = np.diff(ke)
    assert np.all(diffs < 0.0)


def test_shared_nu_turb_identical_across_members(grid2d, monkeypatch):
    seen = []
    real = dynamics.eddy_diffusion

    def spy(u, nu_turb):
        seen.append(nu_turb.values)
        return real(u, nu_turb)

    monkeypatch.setattr(dynamics, "eddy_diffusion", spy)
    p = ModelParams(nu=5e-3, mu=0.55, tau=0.05, ensemble_size=3)
    members = [random_field(grid2d, seed=s) for s in (13, 14, 15)]
    forces = [random_field(grid2d, seed=s, rms=0.2) for s in (16, 17, 18)]
    step(make_state(0.0, members, forces, p), 1e-3, p, StepperConfig(dt=1e-3))
    assert len(seen) >= 3
    assert all(arr is seen[0] for arr in seen[1:])


def test_three_dimensional_short_run(grid3d):
    p = ModelParams(nu=5e-3, mu=0.55, tau=0.05, ensemble_size=2)
    members = [random_field(grid3d, seed=s, max_mode=3, rms=0.8) for s in (26, 27)]
    forces = [random_field(grid3d, seed=s, max_mode=2, rms=0.3) for s in (28, 29)]
    state = advance_to(make_state(0.0, members, forces, p), 0.1, p,
                       StepperConfig(dt=0.02, adapt=False))
    assert state.t == 0.1
    for m in state.members:
        scale = np.abs(m.coeffs).max() * np.sqrt(grid3d.k_sq.max())
        assert max_divergence(m) <= 1e-12 * scale
        assert np.all(np.isfinite(m.coeffs))


# --------------------------------------------------------------- advance_to
def test_advance_noop(grid2d):
    p = ModelParams(nu=1e-2)
    state = decay_state(grid2d, [random_field(grid2d, seed=19)], p)
    out = advance_to(state, state.t, p, StepperConfig(dt=0.01))
    assert out is state


def test_advance_rejects_past_target(grid2d):
    p = ModelParams(nu=1e-2)
    state = decay_state(grid2d, [random_field(grid2d, seed=19)], p)
    with pytest.raises(ConfigurationError):
        advance_to(state, state.t - 1.0, p, StepperConfig(dt=0.01))


def test_two_half_runs_equal_one_full_run(grid2d):
    p = ModelParams(nu=5e-3, mu=0.55, tau=0.05, ensemble_size=2)
    members = [random_field(grid2d, seed=s) for s in (20, 21)]
    forces = [random_field(grid2d, seed=s, rms=0.4) for s in (22, 23)]
    cfg = StepperConfig(dt=2.0**-7, adapt=False)  # dyadic: identical sequences
    s0 = make_state(0.0, members, forces, p)
    full = advance_to(s0, 0.5, p, cfg)
    half = advance_to(advance_to(s0, 0.25, p, cfg), 0.5, p, cfg)
    assert half.t == full.t == 0.5
    for a, b in zip(half.members, full.members):
        np.testing.assert_array_equal(a.coeffs, b.coeffs)


def test_final_time_lands_exactly(grid2d):
    p = ModelParams(nu=1e-2)
    state = decay_state(grid2d, [random_field(grid2d, seed=24)], p)
    out = advance_to(state, 0.0333, p, StepperConfig(dt=0.01, adapt=False))
    assert out.t == 0.0333


@pytest.mark.filterwarnings("ignore::RuntimeWarning")  # inf propagation expected
def test_blow_up_detected(grid2d):
    p = ModelParams(nu=1e-2)
    u = random_field(grid2d, seed=25)
    bad = u.copy(coeffs=u.coeffs * np.inf)
    state = EnsembleState(0.0, (bad,), (zero_force(grid2d),),
                          compute_stats([u], p))
    with pytest.raises(BlowUpError) as exc:
        advance_to(state, 1.0, p, StepperConfig(dt=0.01))
    assert exc.value.member in (0,)


class WarnSink:
    def __init__(self):
        self.warnings = []

    def start(self, state):
        pass

    def after_step(self, prev, new, dt):
        pass

    def warn(self, msg):
        self.warnings.append(msg)


def test_unstable_fixed_dt_warns(grid2d):
    p = ModelParams(nu=1e-2)
    u = single_mode_field(grid2d, component=0, mode=(0, 1), amplitude=5.0)
    state = decay_state(grid2d, [leray_project(dealias(u))], p)
    sink = WarnSink()
    advance_to(state, 0.2, p, StepperConfig(dt=0.1, adapt=False, cfl=0.4), sinks=sink)
    assert sink.warnings
