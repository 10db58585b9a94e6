"""Self-check suites behind ``eev verify``.

Each check runs on fields/ensembles built from the active configuration and
returns ("name", "PASS"|"FAIL"|"SKIP", detail).  The CLI prints one line per
check and exits nonzero if anything fails.
"""

import dataclasses

import numpy as np

from .config import RunConfig
from .diagnostics import RunRecorder, proof_ledger
from .dynamics import advance_to
from .ensemble import compute_stats, eddy_diffusion, viscosity_map
from .problems import PerturbationSpec, forcing_scales, make_ensemble_fields
from .spectral import (
    GridSpec,
    PhysicalScalar,
    PhysicalVector,
    dealias,
    gradient_grids,
    inner,
    l2_norm_sq,
    leray_project,
    linf_norm,
    max_divergence,
    nonlinear_term,
    to_physical,
    to_spectral,
)

PASS, FAIL, SKIP = "PASS", "FAIL", "SKIP"


def _random_solenoidal(grid, seed, max_mode=None, rms=1.0):
    rng = np.random.default_rng(seed)
    f = to_spectral(PhysicalVector(grid, rng.standard_normal((grid.dim,) + grid.phys_shape)))
    if max_mode is not None:
        keep = np.ones(grid.spectral_shape, dtype=bool)
        for m in grid.modes:
            keep &= np.abs(m) <= max_mode
        f = f.copy(coeffs=f.coeffs * keep)
    f = leray_project(dealias(f))
    scale = np.sqrt(l2_norm_sq(f, volume_normalized=True))
    return f.copy(coeffs=f.coeffs * (rms / scale)) if scale > 0 else f


def check_transform_round_trip(config):
    grid = config.grid
    f = _random_solenoidal(grid, 101)
    back = to_spectral(to_physical(f))
    err = np.abs(back.coeffs - f.coeffs).max() / max(np.abs(f.coeffs).max(), 1e-300)
    status = PASS if err <= 1e-12 else FAIL
    return "transform-round-trip", status, f"relative error {err:.2e}"


def check_parseval(config):
    grid = config.grid
    f = _random_solenoidal(grid, 102)
    u = to_physical(f).values
    quad = (u**2).sum() / grid.n_points * grid.volume
    spec = l2_norm_sq(f)
    err = abs(spec - quad) / quad
    return "parseval", PASS if err <= 1e-12 else FAIL, f"relative error {err:.2e}"


def check_leray(config):
    grid = config.grid
    f = to_spectral(PhysicalVector(
        grid, np.random.default_rng(103).standard_normal((grid.dim,) + grid.phys_shape)))
    once = leray_project(f)
    twice = leray_project(once)
    idem = np.abs(twice.coeffs - once.coeffs).max()
    div = max_divergence(once)
    scale = np.abs(once.coeffs).max()
    ok = idem <= 1e-14 * scale and div <= 1e-12 * scale * np.sqrt(grid.k_sq.max())
    return "leray-projection", PASS if ok else FAIL, \
        f"idempotence {idem:.2e}, max divergence {div:.2e}"


def check_nonlinear_neutrality(config):
    grid = config.grid
    u = _random_solenoidal(grid, 104, rms=1.3)
    nl = nonlinear_term(u)
    val = abs(inner(nl, u))
    bound = 1e-12 * l2_norm_sq(u) * linf_norm(u)
    return "advection-energy-neutral", PASS if val <= bound else FAIL, \
        f"|<N(u),u>| = {val:.2e} (bound {bound:.2e})"


def check_taylor_green(config):
    if config.grid.dim != 2:
        return "taylor-green-oracle", SKIP, "2D oracle"
    grid = GridSpec(dim=2, n=max(config.grid.n, 32), box_len=2 * np.pi)
    x, y = grid.coords()
    values = np.array([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)])
    u = leray_project(dealias(to_spectral(PhysicalVector(grid, values))))
    resid = np.abs(leray_project(nonlinear_term(u)).coeffs).max()
    return "taylor-green-oracle", PASS if resid <= 1e-13 else FAIL, \
        f"projected advection {resid:.2e}"


def check_eddy_dissipativity(config):
    if config.model.mu == 0.0:
        return "eddy-dissipative", SKIP, "mu = 0"
    grid = config.grid
    u = _random_solenoidal(grid, 105, rms=1.2)
    raw = to_physical(_random_solenoidal(grid, 107, max_mode=2)).values[0]
    nu_t = PhysicalScalar(grid, 1.0 + 0.5 * raw / max(np.abs(raw).max(), 1e-300))
    D = eddy_diffusion(u, nu_t)
    got = inner(D, u)
    quad = (nu_t.values * (gradient_grids(u) ** 2).sum(axis=(0, 1))).mean() * grid.volume
    ok = got <= 1e-10 * quad and abs(got + quad) <= 1e-11 * quad
    # constant-coefficient reduction to the spectral Laplacian
    c = 0.4
    const = eddy_diffusion(u, PhysicalScalar(grid, np.full(grid.phys_shape, c)))
    lap = -c * grid.k_sq * u.coeffs * grid.dealias_mask
    red = np.abs(const.coeffs - lap).max() / max(np.abs(lap).max(), 1e-300)
    ok = ok and red <= 1e-12
    return "eddy-dissipative", PASS if ok else FAIL, \
        f"<D u, u> = {got:.3e} vs -{quad:.3e}, laplacian reduction {red:.2e}"


def check_stats_identities(config):
    grid = config.grid
    params = config.model
    members = [_random_solenoidal(grid, 110 + j, rms=1.0) for j in range(max(params.ensemble_size, 2))]
    stats = compute_stats(members, params)
    resid = np.abs(sum(m.coeffs - stats.mean.coeffs for m in members)).max() / len(members)
    J = len(members)
    lhs = sum((gradient_grids(m) ** 2).sum(axis=(0, 1)) for m in members) / J
    mean_sq = (gradient_grids(stats.mean) ** 2).sum(axis=(0, 1))
    fluct_sq = sum((gradient_grids(m.copy(coeffs=m.coeffs - stats.mean.coeffs)) ** 2
                    ).sum(axis=(0, 1)) for m in members) / J
    decomp = np.abs(lhs - mean_sq - fluct_sq).max() / max(lhs.max(), 1e-300)
    cap_ok = True
    if params.cap_mode == "hard_cap":
        cap_ok = bool((stats.length_scale.values <= params.resolved_cap(grid)).all())
    ok = resid <= 1e-13 and decomp <= 1e-12 and cap_ok
    return "ensemble-identities", PASS if ok else FAIL, \
        f"<u'>_e = {resid:.2e}, gradient split {decomp:.2e}, cap ok {cap_ok}"


def check_closure_map(config):
    params = config.model
    rng = np.random.default_rng(120)
    a = np.abs(rng.standard_normal(10**5)) * rng.choice([0.1, 1.0, 10.0], 10**5)
    b = np.abs(rng.standard_normal(10**5)) * rng.choice([0.1, 1.0, 10.0], 10**5)
    keep = a != b
    ratio = np.abs(viscosity_map(a[keep], params) - viscosity_map(b[keep], params)) \
        / np.abs(a[keep] - b[keep])
    ok = ratio.max() <= 2.0 + 1e-12 and viscosity_map(0.0, params) == params.nu
    return "closure-map", PASS if ok else FAIL, f"max Lipschitz ratio {ratio.max():.12f}"


def _forced_setup(config, seed_shift=0, n=None):
    grid = config.grid if n is None else dataclasses.replace(config.grid, n=n)
    params = dataclasses.replace(config.model,
                                 ensemble_size=max(config.model.ensemble_size, 2))
    pspec = PerturbationSpec(seed=config.perturbation.seed + seed_shift,
                             delta=max(config.perturbation.delta, 0.2),
                             k_min=config.perturbation.k_min,
                             k_max=min(config.perturbation.k_max, 2),
                             base_amplitude=config.perturbation.base_amplitude)
    forces = make_ensemble_fields(pspec, grid, params.ensemble_size, "force")
    ics = make_ensemble_fields(pspec, grid, params.ensemble_size, "ic")
    return grid, params, ics, forces


def energy_balance_orders(config, dts=(4e-2, 2e-2, 1e-2), t_end=0.5):
    """Observed convergence orders of the per-member energy residual."""
    from .ensemble import make_state

    resids = []
    grid, params, ics, forces = _forced_setup(config)
    for dt in dts:
        rec = RunRecorder(params, diag_every=1)
        state = make_state(0.0, ics, forces, params)
        advance_to(state, t_end, params,
                   dataclasses.replace(config.stepper, dt=dt, adapt=False), sinks=rec)
        resids.append(float(rec.member_energy_residuals().max()))
    orders = np.log2(np.array(resids[:-1]) / np.array(resids[1:]))
    return resids, orders


def check_energy_balance_order(config):
    resids, orders = energy_balance_orders(config)
    ok = bool(np.all(orders >= 1.9))
    return "energy-balance-order", PASS if ok else FAIL, \
        f"residuals {['%.2e' % r for r in resids]}, orders {np.round(orders, 2).tolist()}"


def check_ledger_slacks(config):
    from .ensemble import make_state

    grid, params, ics, forces = _forced_setup(config)
    rec = RunRecorder(params, diag_every=1)
    state = make_state(0.0, ics, forces, params)
    advance_to(state, 1.0, params,
               dataclasses.replace(config.stepper, dt=2e-2, adapt=False), sinks=rec)
    rows = proof_ledger(rec, forcing_scales(forces), params,
                        alpha=config.ledger.alpha, beta=config.ledger.resolved_beta)
    bad = [name for row in rows
           for name, flag in (("energy", row.energy_ok), ("work", row.work_ok),
                              ("term2", row.term2_ok), ("term3", row.term3_ok),
                              ("term4", row.term4_ok), ("verdict", row.verdict))
           if not flag]
    return "ledger-slacks", PASS if not bad else FAIL, \
        ("all slacks nonnegative, verdict true" if not bad else f"failed: {bad}")


ALL_CHECKS = (
    check_transform_round_trip,
    check_parseval,
    check_leray,
    check_nonlinear_neutrality,
    check_taylor_green,
    check_eddy_dissipativity,
    check_stats_identities,
    check_closure_map,
    check_energy_balance_order,
    check_ledger_slacks,
)


def verify(config: RunConfig):
    """Run every check; returns a list of (name, status, detail)."""
    report = []
    for check in ALL_CHECKS:
        try:
            report.append(check(config))
        except Exception as err:  # a crashed check is a failed check
            report.append((check.__name__, FAIL, f"exception: {err!r}"))
    return report
