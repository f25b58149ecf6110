"""Fixed-point solver for the full nonlinear problem and its diagnostics.

Each Picard sweep freezes the previous velocity trajectory, rebuilds the
deformation state and the nonlinear corrections along it, and solves the
linear problem with those data.  The smallness gate converts measured
constants (linear-solve ratio c0 and nonlinear-term scaling M4) into the
admissible ball radius and initial-data size; all numeric gates are measured
surrogates of existence-level constants, labelled as such in reports.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .calculus import vector_gradient, vector_hessian
from .fields import initial_data, random_solenoidal_field
from .grid import SpectralField, inverse_transform
from .helmholtz import project
from .lagrangian import (
    accumulate_deformation,
    initial_deformation,
    nonlinear_F,
    nonlinear_G,
    nonlinear_Gvec,
    nonlinear_H,
)
from .linear_mr import _mixed_surrogate, mr_estimate_report, solve_linear_ibvp
from .norms import (
    discrete_lq_norm,
    sobolev_norm,
    weighted_time_lp,
    weighted_trajectory_norm,
)
from .stokes import semigroup_step
from .trajectory import Trajectory

__all__ = [
    "smallness_gate",
    "decay_fit",
    "picard_solve",
    "ContractionReport",
    "PicardDivergenceError",
    "assemble_nonlinear_data",
    "estimate_m4",
    "semigroup_decay_rate",
    "trajectory_xnorm",
    "run_global_solve",
]


class PicardDivergenceError(RuntimeError):
    """Iterates left the admissible ball (norm blow-up)."""


def smallness_gate(measured_c0: float, measured_m4: float) -> tuple[float, float]:
    """Ball radius and initial-data size from the measured constants.

    Returns the extremal pair satisfying 4 c0 M4 delta0^2 = delta0 / 4 and
    c0 eps0 = delta0 / 2, i.e. delta0 = 1/(16 c0 M4), eps0 = delta0/(2 c0).
    """
    if measured_c0 <= 0 or measured_m4 <= 0:
        raise ValueError("measured constants must be positive")
    delta0 = 1.0 / (16.0 * measured_c0 * measured_m4)
    eps0 = delta0 / (2.0 * measured_c0)
    return delta0, eps0


def decay_fit(series: np.ndarray, burn_in: float = 0.3,
              times: np.ndarray | None = None) -> tuple[float, float]:
    """Least-squares exponential rate of a norm time series.

    Fits log(series) on the tail after the burn-in fraction; returns
    (rate, r_squared) with rate > 0 meaning decay.  Non-positive values mean
    the series hit the round-off floor and must be truncated by the caller.
    """
    s = np.asarray(series, dtype=float)
    if times is None:
        times = np.arange(s.size, dtype=float)
    start = int(np.floor(burn_in * s.size))
    s_t, t_t = s[start:], times[start:]
    if s_t.size < 10:
        raise ValueError("need at least 10 samples after burn-in")
    if np.any(s_t <= 0.0):
        raise ValueError("non-positive values in the series tail")
    logs = np.log(s_t)
    slope, intercept = np.polyfit(t_t, logs, 1)
    fit = slope * t_t + intercept
    ss_res = float(np.sum((logs - fit) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 1e-30 else 1.0
    return float(-slope), r2


def trajectory_xnorm(traj: Trajectory, p: float = 2.0, q: float = 2.0,
                     gamma: float = 0.0) -> float:
    """Ball norm: weighted parabolic velocity norm + weighted W^1_q pressure norm."""
    total = weighted_trajectory_norm(traj, p, q, gamma)
    if traj.pressures:
        s = np.array([sobolev_norm(pr, q, 1) for pr in traj.pressures])
        total += weighted_time_lp(s, traj.step, p, gamma, traj.times)
    return total


def assemble_nonlinear_data(traj: Trajectory, mu: float):
    """Nonlinear corrections along a trajectory: (F, G, Gvec, H e_N) series.

    The deformation state is accumulated with the trapezoid rule; the time
    derivative entering F is the backward difference, matching the stepper.
    All series start with exact zeros (B vanishes at t = 0).
    """
    grid = traj.grid
    tau = traj.step
    state = initial_deformation(grid)
    f_s, g_s, gv_s, h_s = [], [], [], []
    prev_phys = None
    for n, u_field in enumerate(traj.velocities):
        u = inverse_transform(u_field)
        grad_u = inverse_transform(vector_gradient(u_field))
        hess_u = inverse_transform(vector_hessian(u_field))
        if n == 0:
            state.grad_prev = grad_u
            du_dt = np.zeros_like(u)
        else:
            state = accumulate_deformation(state, grad_u, tau)
            du_dt = (u - prev_phys) / tau
        f_s.append(nonlinear_F(state, du_dt, grad_u, hess_u, mu))
        g_s.append(nonlinear_G(state, grad_u))
        gv_s.append(nonlinear_Gvec(state, u))
        h_s.append(nonlinear_H(state, grad_u, mu)[1])
        prev_phys = u
    return f_s, g_s, gv_s, h_s


@dataclass
class ContractionReport:
    iterates: int
    x_norms: list = field(default_factory=list)
    gaps: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    converged: bool = False
    final_gap: float = np.inf


def picard_solve(a: SpectralField, config) -> tuple[Trajectory, ContractionReport]:
    """Iterate the frozen-coefficient linear solve to the nonlinear fixed point.

    ``a`` should be Helmholtz-projected with zero bottom trace; sizes above
    the gate are warned about, not refused.  Stops when the ball-norm gap
    between sweeps drops below ``config.tolerance`` or after
    ``config.max_iter`` sweeps; iterates whose norm exceeds 10x the first
    sweep raise :class:`PicardDivergenceError`.
    """
    grid = a.grid
    mu, tau, horizon = config.mu, config.tau, config.horizon
    gamma = config.gamma0 or 0.0
    tol, max_iter = config.tolerance, config.max_iter

    if getattr(config, "epsilon0", None):
        size = sobolev_norm(a, 2.0, 2)
        if size > config.epsilon0 * (1.0 + 1e-9):
            warnings.warn(f"initial data W^2 norm {size:.3e} exceeds the gate "
                          f"{config.epsilon0:.3e}", stacklevel=2)

    current = solve_linear_ibvp(None, None, None, a, horizon, tau, mu)
    warm_norm = trajectory_xnorm(current, gamma=gamma)
    report = ContractionReport(iterates=0)
    prev_gap = warm_norm

    for _ in range(max_iter):
        f_s, g_s, _, h_s = assemble_nonlinear_data(current, mu)
        new = solve_linear_ibvp(f_s, g_s, h_s, a, horizon, tau, mu)
        gap = trajectory_xnorm(new - current, gamma=gamma)
        xn = trajectory_xnorm(new, gamma=gamma)
        report.iterates += 1
        report.x_norms.append(xn)
        report.gaps.append(gap)
        if report.iterates >= 2 and prev_gap > 0:
            report.ratios.append(gap / prev_gap)
        if warm_norm > 0 and xn > 10.0 * warm_norm:
            raise PicardDivergenceError(
                f"sweep {report.iterates}: norm {xn:.3e} exceeds 10x warm start")
        current = new
        prev_gap = gap
        if gap <= tol:
            report.converged = True
            break
    report.final_gap = report.gaps[-1] if report.gaps else np.inf
    return current, report


def estimate_c0(grid, mu: float, tau: float, horizon: float, gamma0: float,
                rng: np.random.Generator) -> dict:
    """Linear-solve constant surrogate: max regularity ratio over the three
    data channels (initial data, interior forcing, divergence/boundary
    data), each probed with decaying data so the weighted norms are fair."""
    from .fields import random_smooth_field, single_mode_field

    a = project(single_mode_field(grid, 1.0)).p_part
    traj_a = solve_linear_ibvp(None, None, None, a, horizon, tau, mu)
    ratios = {"a": mr_estimate_report(traj_a, a=a, gamma=gamma0).ratio}

    zero = SpectralField.zeros(grid, (grid.dim,))
    f0 = project(random_smooth_field(grid, rng, (grid.dim,))).p_part
    f = lambda t: float(np.exp(-gamma0 * t)) * f0
    traj_f = solve_linear_ibvp(f, None, None, zero, horizon, tau, mu)
    ratios["f"] = mr_estimate_report(traj_f, f=f, gamma=gamma0).ratio

    g0 = random_smooth_field(grid, rng, ())
    h0 = random_smooth_field(grid, rng, (grid.dim,))
    g = lambda t: float(min(t, 1.0) * np.exp(-gamma0 * t)) * g0
    h = lambda t: float(min(t, 1.0) * np.exp(-gamma0 * t)) * h0
    traj_gh = solve_linear_ibvp(None, g, h, zero, horizon, tau, mu)
    ratios["gh"] = mr_estimate_report(traj_gh, g=g, h=h, gamma=gamma0).ratio

    ratios = {k: (v if v is not None else 0.0) for k, v in ratios.items()}
    ratios["c0"] = max(ratios.values())
    ratios["warm_trajectory"] = traj_a
    return ratios


def estimate_m4(traj: Trajectory, mu: float, p: float = 2.0, q: float = 2.0,
                gamma: float = 0.0) -> float:
    """Quadratic-scaling constant of the nonlinear corrections on one probe.

    Measures (|F| + mixed(H e_N) + mixed(G) + negative-norm(G)) / (4 |v|^2)
    in the weighted trajectory norms; the 4 matches the gate inequality.
    """
    f_s, g_s, gv_s, h_s = assemble_nonlinear_data(traj, mu)
    tau, times = traj.step, traj.times
    fn = np.array([discrete_lq_norm(x, q) for x in f_s])
    total = weighted_time_lp(fn, tau, p, gamma, times)
    total += _mixed_surrogate(h_s, tau, p, q, gamma, times)
    total += _mixed_surrogate(g_s, tau, p, q, gamma, times)
    eta = np.array([discrete_lq_norm(x, q) for x in gv_s])
    zeta = np.zeros(len(gv_s))
    for n in range(1, len(gv_s)):
        zeta[n] = discrete_lq_norm((gv_s[n] - gv_s[n - 1]) * (1.0 / tau), q)
    total += weighted_time_lp(eta, tau, p, gamma, times) \
        + weighted_time_lp(zeta, tau, p, gamma, times)
    y = weighted_trajectory_norm(traj, p, q, gamma)
    if y == 0:
        raise ValueError("probe trajectory is zero")
    return total / (4.0 * y**2)


def semigroup_decay_rate(grid, mu: float, tau: float, horizon: float,
                         rng: np.random.Generator, q: float = 2.0,
                         burn_in: float = 0.3) -> tuple[float, float, np.ndarray]:
    """Fitted decay rate of the homogeneous evolution from random solenoidal data."""
    a = project(random_solenoidal_field(grid, rng)).p_part
    u = a
    n_steps = int(round(horizon / tau))
    norms = [discrete_lq_norm(u, q)]
    for _ in range(n_steps):
        u = semigroup_step(u, tau, mu)
        norms.append(discrete_lq_norm(u, q))
    norms = np.array(norms)
    times = tau * np.arange(n_steps + 1)
    rate, r2 = decay_fit(norms, burn_in=burn_in, times=times)
    return rate, r2, norms


def run_global_solve(config, probe_scale: float = 1e-2) -> dict:
    """Full small-data pipeline: measure constants, gate, iterate, diagnose.

    Measures the semigroup decay rate, the linear-solve constant c0 (from the
    data-only run), and the nonlinear scaling M4 (from scaled probes of the
    same run); feeds them to the smallness gate; sizes the initial data to
    the gate unless ``config.amplitude`` overrides it; then runs the Picard
    iteration and the flow-map / push-forward diagnostics.
    """
    import dataclasses

    from .grid import make_grid
    from .lagrangian import (
        eulerian_lq_norm,
        flow_map,
        jacobian_diagnostics,
        push_forward,
    )
    from .calculus import divergence

    config.validate()
    grid = make_grid(config.dim, config.depth, config.period,
                     config.n_horizontal, config.n_vertical)
    rng = np.random.default_rng(config.seed)
    mu, tau, horizon = config.mu, config.tau, config.horizon
    out: dict = {"grid": grid}

    probe_T = min(horizon, 5.0)
    sigma_hat, sig_r2, _ = semigroup_decay_rate(grid, mu, tau, probe_T, rng)
    sigma0 = config.sigma0 if config.sigma0 else 0.5 * sigma_hat
    gamma0 = config.gamma0 if config.gamma0 else 0.5 * sigma_hat
    out.update(sigma_hat=sigma_hat, sigma_fit_r2=sig_r2,
               sigma0=sigma0, gamma0=gamma0)

    c0_report = estimate_c0(grid, mu, tau, horizon, gamma0, rng)
    warm = c0_report.pop("warm_trajectory")
    c0 = c0_report["c0"] if c0_report["c0"] > 0 else 1.0
    out["c0"] = c0
    out["c0_channels"] = c0_report

    y_warm = weighted_trajectory_norm(warm, gamma=gamma0)
    m4 = 0.0
    for s in (probe_scale / y_warm, 0.5 * probe_scale / y_warm):
        probe = warm.map(lambda fld, s=s: fld * s)
        m4 = max(m4, estimate_m4(probe, mu, gamma=gamma0))
    out["m4"] = m4

    delta0, eps0 = smallness_gate(c0, m4)
    out.update(delta0=delta0, eps0=eps0)

    base = initial_data(config.initial_data, grid, rng, amplitude=1.0)
    a = project(base).p_part
    w2 = sobolev_norm(a, 2.0, 2)
    if config.amplitude:
        a = a * (config.amplitude / max(np.max(np.abs(inverse_transform(a))), 1e-300))
    elif w2 > 0:
        a = a * (eps0 / w2)
    out["a_w2_norm"] = sobolev_norm(a, 2.0, 2)

    run_cfg = dataclasses.replace(config, gamma0=gamma0, sigma0=sigma0)
    run_cfg.epsilon0 = eps0
    trajectory, contraction = picard_solve(a, run_cfg)
    out.update(trajectory=trajectory, contraction=contraction)

    if contraction.converged and len(trajectory) >= 2:
        series = np.array([discrete_lq_norm(u, 2.0) for u in trajectory.velocities])
        keep = series > 1e-300
        if np.all(series == 0.0):
            out.update(decay_rate=0.0, decay_r2=1.0, norm_series=series)
        else:
            rate, r2 = decay_fit(series[keep], times=trajectory.times[keep])
            out.update(decay_rate=rate, decay_r2=r2, norm_series=series)

        fmap = flow_map(trajectory)
        jac = jacobian_diagnostics(fmap)
        out.update(flow_map=fmap, jacobian=jac)

        _, g_s, _, _ = assemble_nonlinear_data(trajectory, mu)
        div_res = 0.0
        scale = max(out["a_w2_norm"], 1e-300)
        for n, u in enumerate(trajectory.velocities):
            div_res = max(div_res, discrete_lq_norm(
                divergence(u) - g_s[n], 2.0) / scale)
        out["div_constraint_residual"] = div_res

        n_samp = len(trajectory)
        idx = np.unique(np.linspace(1, n_samp - 1, 5).astype(int))
        push_gaps = []
        for n in idx:
            t = trajectory.times[n]
            samples = push_forward(trajectory.velocities[n],
                                   trajectory.pressures[n], fmap, t)
            lag = discrete_lq_norm(trajectory.velocities[n], 2.0)
            eul = eulerian_lq_norm(samples, grid, 2.0)
            push_gaps.append(abs(eul - lag) / max(lag, 1e-300))
        out["push_forward_gaps"] = np.array(push_gaps)
    return out
