import numpy as np
import pytest

from layerflow import (
    SpectralField,
    forward_transform,
    inverse_transform,
    mr_estimate_report,
    project,
    semigroup_step,
    solve_linear_decomposed,
    solve_linear_ibvp,
    solve_time_shifted,
    stress_tensor,
)
from layerflow.calculus import divergence
from layerflow.fields import random_smooth_field, random_solenoidal_field
from layerflow.norms import discrete_lq_norm
from layerflow.solver import decay_fit, semigroup_decay_rate, trajectory_xnorm

MU = 1.0


def make_data(grid, rng, n_samples, tau):
    """Random forcing triple in the vanishing-at-zero class."""
    ramp = [min(n * tau, 1.0) for n in range(n_samples)]
    f = [random_smooth_field(grid, rng, (grid.dim,)) for _ in range(n_samples)]
    g = [random_smooth_field(grid, rng, ()) * ramp[n] for n in range(n_samples)]
    h = [random_smooth_field(grid, rng, (grid.dim,)) * ramp[n]
         for n in range(n_samples)]
    return f, g, h


def test_zero_data_zero_trajectory(grid2d):
    a = SpectralField.zeros(grid2d, (2,))
    traj = solve_linear_ibvp(None, None, None, a, 1.0, 0.05, MU)
    assert all(discrete_lq_norm(u, 2.0) == 0.0 for u in traj.velocities)
    assert all(discrete_lq_norm(p, 2.0) == 0.0 for p in traj.pressures)


def test_matches_semigroup_path(grid2d, rng):
    a = project(random_solenoidal_field(grid2d, rng)).p_part
    tau, T = 0.05, 0.5
    traj = solve_linear_ibvp(None, None, None, a, T, tau, MU)
    u = a
    for n in range(1, len(traj)):
        u = semigroup_step(u, tau, MU)
        gap = discrete_lq_norm(traj.velocities[n] - u, 2.0)
        assert gap < 1e-10 * max(discrete_lq_norm(u, 2.0), 1e-300)


def manufactured_error(grid, tau, omega=0.3, horizon=1.0):
    """Max relative velocity error against u* = sin(omega t) V(xi)."""
    rng = np.random.default_rng(42)
    vr = random_smooth_field(grid, rng, (grid.dim,))
    z = grid.meshgrid()[-1]
    vphys = inverse_transform(vr) * (z / grid.depth)[..., None] ** 2
    v = forward_transform(grid, vphys)
    qstar = random_smooth_field(grid, rng, ())

    div_t = matrix_div_stress(v, qstar)
    n_steps = int(round(horizon / tau))

    def psi(t):
        return np.sin(omega * t)

    f = [SpectralField(grid, omega * np.cos(omega * n * tau) * v.data
                       - psi(n * tau) * div_t.data) for n in range(n_steps + 1)]
    g = [psi(n * tau) * divergence(v) for n in range(n_steps + 1)]
    stress = stress_tensor(v, qstar, MU)
    h_field = SpectralField(grid, stress.data[..., :, grid.dim - 1])
    h = [psi(n * tau) * h_field for n in range(n_steps + 1)]
    a = SpectralField.zeros(grid, (grid.dim,))

    traj = solve_linear_ibvp(f, g, h, a, horizon, tau, MU)
    scale = max(discrete_lq_norm(psi(n * tau) * v, 2.0) for n in range(n_steps + 1))
    err = max(discrete_lq_norm(traj.velocities[n] - psi(n * tau) * v, 2.0)
              for n in range(n_steps + 1))
    return err / scale


def matrix_div_stress(v, q):
    from layerflow.calculus import matrix_divergence

    return matrix_divergence(stress_tensor(v, q, MU))


def test_manufactured_space_time(grid2d_fine):
    err = manufactured_error(grid2d_fine, 1e-2)
    assert err < 1e-3
    err2 = manufactured_error(grid2d_fine, 5e-3)
    assert 1.6 < err / err2 < 2.4  # first order in tau


def test_linearity(grid2d, rng):
    tau, T = 0.05, 0.5
    n = int(round(T / tau)) + 1
    f1, g1, h1 = make_data(grid2d, rng, n, tau)
    f2, g2, h2 = make_data(grid2d, rng, n, tau)
    a1 = project(random_solenoidal_field(grid2d, rng)).p_part
    a2 = project(random_solenoidal_field(grid2d, rng)).p_part
    t1 = solve_linear_ibvp(f1, g1, h1, a1, T, tau, MU)
    t2 = solve_linear_ibvp(f2, g2, h2, a2, T, tau, MU)
    fs = [x + y for x, y in zip(f1, f2)]
    gs = [x + y for x, y in zip(g1, g2)]
    hs = [x + y for x, y in zip(h1, h2)]
    ts = solve_linear_ibvp(fs, gs, hs, a1 + a2, T, tau, MU)
    gap = trajectory_xnorm(ts - (t1 + t2)) / trajectory_xnorm(ts)
    assert gap < 1e-10


def test_divergence_constraint(grid2d, rng):
    tau, T = 0.05, 0.5
    n = int(round(T / tau)) + 1
    f, g, h = make_data(grid2d, rng, n, tau)
    a = project(random_solenoidal_field(grid2d, rng)).p_part
    traj = solve_linear_ibvp(f, g, h, a, T, tau, MU)
    scale = trajectory_xnorm(traj)
    for k in range(n):
        gap = discrete_lq_norm(divergence(traj.velocities[k]) - g[k], 2.0)
        assert gap < 1e-6 * scale


# -- time-shifted variant ----------------------------------------------------


def test_shifted_zero_data(grid2d):
    traj = solve_time_shifted(0.5, None, None, None, grid2d, 1.0, 0.05, MU)
    assert all(discrete_lq_norm(u, 2.0) == 0.0 for u in traj.velocities)


def test_shifted_decays_faster(grid2d_fine):
    grid = grid2d_fine
    tau, T, delta = 0.02, 1.0, 0.5
    n = int(round(T / tau)) + 1
    impulse = project(random_solenoidal_field(grid, np.random.default_rng(5))).p_part
    f = [SpectralField.zeros(grid, (2,)) for _ in range(n)]
    f[1] = impulse
    plain = solve_linear_ibvp(f, None, None, SpectralField.zeros(grid, (2,)),
                              T, tau, MU)
    shifted = solve_time_shifted(delta, f, None, None, grid, T, tau, MU)
    np_ = np.array([discrete_lq_norm(u, 2.0) for u in plain.velocities[1:]])
    ns_ = np.array([discrete_lq_norm(u, 2.0) for u in shifted.velocities[1:]])
    rp, _ = decay_fit(np_, times=plain.times[1:])
    rs, _ = decay_fit(ns_, times=shifted.times[1:])
    assert abs((rs - rp) - 2 * delta) < 0.2 * 2 * delta


def test_shifted_divergence_tracks_data(grid2d, rng):
    grid = grid2d
    tau, T = 0.05, 0.5
    n = int(round(T / tau)) + 1
    x, z = grid.meshgrid()
    gmode = forward_transform(grid, np.sin(2 * np.pi * x / grid.period) * z)
    g = [min(k * tau, 1.0) * gmode for k in range(n)]
    traj = solve_time_shifted(0.5, None, g, None, grid, T, tau, MU)
    scale = max(discrete_lq_norm(u, 2.0) for u in traj.velocities)
    for k in range(1, n):
        gap = discrete_lq_norm(divergence(traj.velocities[k]) - g[k], 2.0)
        assert gap < 1e-6 * max(scale, 1.0)


# -- decomposition -----------------------------------------------------------


def test_decomposition_initial_data_only(grid2d, rng):
    a = project(random_solenoidal_field(grid2d, rng)).p_part
    deco = solve_linear_decomposed(None, None, None, a, 1.0, 0.5, 0.05, MU)
    mono = solve_linear_ibvp(None, None, None, a, 0.5, 0.05, MU)
    assert trajectory_xnorm(deco.parts["u2"]) == 0.0
    assert trajectory_xnorm(deco.parts["u3"]) < 1e-12
    assert trajectory_xnorm(deco.parts["u4"]) < 1e-12
    gap = trajectory_xnorm(deco.total - mono) / trajectory_xnorm(mono)
    assert gap < 1e-12


def test_decomposition_boundary_data_only(grid2d, rng):
    tau, T = 0.05, 0.5
    n = int(round(T / tau)) + 1
    _, g, h = make_data(grid2d, rng, n, tau)
    a = SpectralField.zeros(grid2d, (2,))
    sigma0, _, _ = _sigma(grid2d)
    mono = solve_linear_ibvp(None, g, h, a, T, tau, MU)
    deco = solve_linear_decomposed(None, g, h, a, sigma0, T, tau, MU)
    assert trajectory_xnorm(deco.parts["u1"]) == 0.0
    gap = trajectory_xnorm(deco.total - mono) / trajectory_xnorm(mono)
    assert gap < 1e-4


def _sigma(grid):
    return semigroup_decay_rate(grid, MU, 0.05, 2.0, np.random.default_rng(0))


def test_decomposition_full_data_three_sets(grid2d):
    tau, T = 0.05, 0.5
    n = int(round(T / tau)) + 1
    sigma_hat, _, _ = _sigma(grid2d)
    for seed in (1, 2, 3):
        rng = np.random.default_rng(seed)
        f, g, h = make_data(grid2d, rng, n, tau)
        a = project(random_solenoidal_field(grid2d, rng)).p_part
        mono = solve_linear_ibvp(f, g, h, a, T, tau, MU)
        deco = solve_linear_decomposed(f, g, h, a, 0.5 * sigma_hat, T, tau, MU)
        gap = trajectory_xnorm(deco.total - mono) / trajectory_xnorm(mono)
        assert gap < 1e-4
        for part in deco.parts.values():
            assert np.isfinite(trajectory_xnorm(part))


def test_decomposition_3d(grid3d, rng):
    tau, T = 0.05, 0.3
    n = int(round(T / tau)) + 1
    ramp = [min(k * tau, 1.0) for k in range(n)]
    f = [random_smooth_field(grid3d, rng, (3,)) for _ in range(n)]
    g = [random_smooth_field(grid3d, rng, ()) * ramp[k] for k in range(n)]
    h = [random_smooth_field(grid3d, rng, (3,)) * ramp[k] for k in range(n)]
    a = project(random_solenoidal_field(grid3d, rng)).p_part
    mono = solve_linear_ibvp(f, g, h, a, T, tau, MU)
    deco = solve_linear_decomposed(f, g, h, a, 1.0, T, tau, MU)
    gap = trajectory_xnorm(mono - deco.total) / trajectory_xnorm(mono)
    assert gap < 1e-4


def test_decomposition_parts_decay(grid2d, rng):
    tau, T = 0.05, 2.0
    n = int(round(T / tau)) + 1
    f, g, h = make_data(grid2d, rng, n, tau)
    # freeze the data after t=1 so the tail is autonomous decay
    for series in (f, g, h):
        for k in range(n):
            if k * tau > 1.0:
                series[k] = series[int(1.0 / tau)]
    a = project(random_solenoidal_field(grid2d, rng)).p_part
    sigma_hat, _, _ = _sigma(grid2d)
    deco = solve_linear_decomposed(f, g, h, a, 0.5 * sigma_hat, T, tau, MU)
    u1 = deco.parts["u1"]
    series1 = np.array([discrete_lq_norm(u, 2.0) for u in u1.velocities])
    rate, _ = decay_fit(series1, times=u1.times)
    assert rate > 0


# -- maximal-regularity report ------------------------------------------------


def test_mr_report_zero_data(grid2d):
    a = SpectralField.zeros(grid2d, (2,))
    traj = solve_linear_ibvp(None, None, None, a, 0.5, 0.05, MU)
    rep = mr_estimate_report(traj, a=a)
    assert rep.ratio is None


def test_mr_report_stable_under_tau_halving(grid2d):
    # fixed data functions of t so both step sizes sample the same problem
    rng = np.random.default_rng(9)
    f0 = random_smooth_field(grid2d, rng, (2,))
    g0 = random_smooth_field(grid2d, rng, ())
    h0 = random_smooth_field(grid2d, rng, (2,))
    a = project(random_solenoidal_field(grid2d, rng)).p_part
    f = lambda t: float(np.cos(0.7 * t)) * f0
    g = lambda t: float(np.sin(0.9 * t)) * g0
    h = lambda t: float(np.sin(1.3 * t)) * h0
    ratios = []
    for tau in (0.05, 0.025):
        traj = solve_linear_ibvp(f, g, h, a, 0.5, tau, MU)
        rep = mr_estimate_report(traj, f=f, g=g, h=h, a=a)
        ratios.append(rep.ratio)
    assert abs(ratios[1] / ratios[0] - 1.0) < 0.20


def test_mr_report_initial_data_only(grid2d, rng):
    a = project(random_solenoidal_field(grid2d, rng)).p_part
    traj = solve_linear_ibvp(None, None, None, a, 1.0, 0.05, MU)
    rep = mr_estimate_report(traj, a=a)
    assert rep.ratio is not None and np.isfinite(rep.ratio)
    assert rep.components["a_w2q"] > 0


def test_mr_report_negative_norm_via_potential_vs_gvec(grid2d, rng):
    # the two negative-norm surrogates (supplied vector potential vs the
    # lifted divergence potential) must agree in order of magnitude
    tau, T = 0.05, 0.5
    n = int(round(T / tau)) + 1
    x, z = grid2d.meshgrid()
    phi = forward_transform(grid2d, np.sin(2 * np.pi * x / grid2d.period)
                            * np.cos(np.pi * z / (2 * grid2d.depth)))
    from layerflow.calculus import gradient

    gvec0 = gradient(phi)
    g0 = divergence(gvec0)
    ramp = [min(k * tau, 1.0) for k in range(n)]
    g = [r * g0 for r in ramp]
    gvec = [r * gvec0 for r in ramp]
    a = SpectralField.zeros(grid2d, (2,))
    traj = solve_linear_ibvp(None, g, None, a, T, tau, MU)
    rep_pot = mr_estimate_report(traj, g=g)
    rep_gv = mr_estimate_report(traj, g=g, gvec=gvec)
    assert rep_pot.components["g_negnorm"] > 0
    assert rep_gv.components["g_negnorm"] > 0
    assert 0.2 < rep_pot.components["g_negnorm"] / rep_gv.components["g_negnorm"] < 5.0


def test_compatibility_warning(grid2d, rng):
    a = random_smooth_field(grid2d, rng, (2,))  # violates no-slip
    with pytest.warns(UserWarning, match="no-slip"):
        solve_linear_ibvp(None, None, None, a, 0.2, 0.05, MU)
