"""Acceptance suite: one test per release criterion, at the stated tolerances.

Each test prints a single ``ACCEPTANCE <criterion>: PASS|FAIL`` line (visible
with ``pytest -s`` or in captured output) and enforces its runtime budget.
"""

import time

import numpy as np
import pytest

from layerflow import (
    ResolventData,
    SpectralField,
    forward_transform,
    inverse_transform,
    make_grid,
    nonlinear_F,
    nonlinear_G,
    nonlinear_Gvec,
    nonlinear_H,
    pressure_operator_K,
    project,
    residue_kernel_pair,
    semigroup_step,
    solve_resolvent,
    solve_weak_dn,
    solve_weak_dn_kernel_path,
    symbol_bound_check,
)
from layerflow.calculus import divergence, gradient, laplacian, vector_gradient
from layerflow.config import SolverConfig
from layerflow.fields import random_smooth_field, random_solenoidal_field
from layerflow.helmholtz import idempotency_check
from layerflow.lagrangian import _rebuild
from layerflow.linear_mr import solve_linear_decomposed, solve_linear_ibvp
from layerflow.norms import discrete_lq_norm, sobolev_norm
from layerflow.solver import decay_fit, run_global_solve, semigroup_decay_rate, trajectory_xnorm
from layerflow.stokes import boundary_stress_top, relative_divergence
from layerflow.testing import weak_divergence_residual

MU = 1.0


class Budget:
    def __init__(self, name, seconds):
        self.name = name
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, *_):
        self.elapsed = time.perf_counter() - self.t0
        status = "PASS" if exc_type is None and self.elapsed < self.seconds else "FAIL"
        print(f"ACCEPTANCE {self.name}: {status} ({self.elapsed:.2f}s "
              f"of {self.seconds:.0f}s budget)")
        assert self.elapsed < self.seconds, f"{self.name} exceeded runtime budget"
        return False


@pytest.fixture(scope="module")
def grid():
    return make_grid(2, 1.0, 2 * np.pi, 32, 33)


@pytest.fixture(scope="module")
def global_run():
    cfg = SolverConfig(dim=2, n_horizontal=16, n_vertical=17, tau=0.05,
                       horizon=5.0, tolerance=1e-10, max_iter=12, seed=1234,
                       initial_data="single_mode")
    t0 = time.perf_counter()
    out = run_global_solve(cfg)
    out["elapsed"] = time.perf_counter() - t0
    return out


def test_criterion_01_residue_kernel_identities():
    from tests.test_kernels import quadrature_oracle

    with Budget("criterion-01 residue kernels", 5.0):
        worst = 0.0
        for a in (0.25, 0.5, 1.0, 2.0, 4.0):
            for b in (0.25, 0.5, 1.0, 2.0, 4.0):
                k1, k2 = residue_kernel_pair(a, b)
                q1, q2 = quadrature_oracle(a, b)
                worst = max(worst, abs(q1 - k1) / abs(k1), abs(q2 - k2) / abs(k2))
        assert worst < 1e-4


def test_criterion_02_symbol_bounds():
    with Budget("criterion-02 symbol bounds", 5.0):
        symbols = [
            lambda xi: 1j * xi[0] / np.linalg.norm(xi),
            lambda xi: 1j * xi[-1] / np.linalg.norm(xi),
            lambda xi: np.exp(-0.0 * np.linalg.norm(xi)),
            lambda xi: np.exp(-1.0 * np.linalg.norm(xi)),
            lambda xi: 1.0 / (1.0 + np.exp(-2.0 * np.linalg.norm(xi))),
        ]
        for sym in symbols:
            rep = symbol_bound_check(sym, max_order=3, seed=7)
            assert rep.passed
            assert all(np.isfinite(v) for v in rep.worst_ratio.values())


def test_criterion_03_weak_dirichlet_neumann(grid):
    with Budget("criterion-03 weak Dirichlet-Neumann", 10.0):
        x, z = grid.meshgrid()
        u0 = np.sin(2 * np.pi * x / grid.period) * np.cos(np.pi * z / (2 * grid.depth))
        u = solve_weak_dn(gradient(forward_transform(grid, u0)))
        err = np.max(np.abs(inverse_transform(u) - u0)) / np.max(np.abs(u0))
        assert err < 1e-8

        zb = z * (grid.depth - z)
        bump = (zb / np.max(zb)) ** 2
        f = np.zeros(grid.physical_shape((2,)))
        f[..., 0] = np.cos(2 * np.pi * x / grid.period) * bump
        f[..., 1] = np.sin(2 * np.pi * x / grid.period) * bump
        field = forward_transform(grid, f)
        u_bvp = solve_weak_dn(field)
        u_ker = solve_weak_dn_kernel_path(field)
        gap = discrete_lq_norm(u_ker - u_bvp, 2.0) / discrete_lq_norm(u_bvp, 2.0)
        assert gap < 1e-6


def test_criterion_04_helmholtz(grid):
    with Budget("criterion-04 Helmholtz decomposition", 10.0):
        rng = np.random.default_rng(4)
        for _ in range(10):
            f = random_smooth_field(grid, rng, (2,))
            parts = project(f)
            nf = discrete_lq_norm(f, 2.0)
            recon = discrete_lq_norm(
                f - parts.p_part - gradient(parts.potential), 2.0) / nf
            assert recon < 1e-10
            assert idempotency_check(f).residual < 1e-10
            assert weak_divergence_residual(parts.p_part, rng) < 1e-8


def test_criterion_05_resolvent(grid):
    with Budget("criterion-05 resolvent", 30.0):
        rng = np.random.default_rng(5)
        vr = random_smooth_field(grid, rng, (2,))
        z = grid.meshgrid()[-1]
        vstar = forward_transform(
            grid, inverse_transform(vr) * (z / grid.depth)[..., None] ** 2)
        qstar = random_smooth_field(grid, rng, ())
        lam = 20.0
        divt = MU * (laplacian(vstar).data + gradient(divergence(vstar)).data) \
            - gradient(qstar).data
        f = SpectralField(grid, lam * vstar.data - divt)
        g = divergence(vstar)
        hdata = np.zeros(grid.physical_shape((2,)), complex)
        hdata[...] = boundary_stress_top(vstar, qstar, MU)[:, None, :]
        h = SpectralField(grid, hdata)
        v, q = solve_resolvent(ResolventData(lam=lam, f=f, g=g, h=h), MU)
        assert discrete_lq_norm(v - vstar, 2.0) < 1e-8 * discrete_lq_norm(vstar, 2.0)

        fr = random_smooth_field(grid, rng, (2,))
        nf = discrete_lq_norm(fr, 2.0)
        ratios = []
        lams = [m * np.exp(1j * s * 3 * np.pi / 4)
                for m in (1e-2, 1e-1, 1.0, 1e1, 1e2) for s in (1, -1)]
        lams += [1e-2, 5e-2]
        for lam in lams:
            v, q = solve_resolvent(ResolventData(lam=lam, f=fr), MU)
            ratios.append((abs(lam) * discrete_lq_norm(v, 2.0)
                           + abs(lam) ** 0.5 * discrete_lq_norm(vector_gradient(v), 2.0)
                           + sobolev_norm(v, 2.0, 2) + sobolev_norm(q, 2.0, 1)) / nf)
        assert max(ratios) / min(ratios) < 50.0


def test_criterion_06_reduced_problem_equivalence(grid):
    with Budget("criterion-06 reduced-problem equivalence", 30.0):
        rng = np.random.default_rng(6)
        for _ in range(3):
            f = project(random_smooth_field(grid, rng, (2,))).p_part
            v, q = solve_resolvent(ResolventData(lam=5.0, f=f), MU)
            k = pressure_operator_K(v, MU)
            assert discrete_lq_norm(q - k, 2.0) < 1e-6 * discrete_lq_norm(q, 2.0)


def test_criterion_07_semigroup_decay(grid):
    with Budget("criterion-07 semigroup decay", 120.0):
        rng = np.random.default_rng(7)
        tau, horizon = 0.05, 10.0
        n_steps = int(round(horizon / tau))
        for _ in range(5):
            u = project(random_solenoidal_field(grid, rng)).p_part
            norms = [discrete_lq_norm(u, 2.0)]
            for _ in range(n_steps):
                u = semigroup_step(u, tau, MU)
                assert relative_divergence(u) < 1e-6
                norms.append(discrete_lq_norm(u, 2.0))
            rate, r2 = decay_fit(np.array(norms), times=tau * np.arange(n_steps + 1))
            assert rate > 0.0
            assert r2 > 0.99


def test_criterion_08_four_way_decomposition():
    with Budget("criterion-08 four-way decomposition", 180.0):
        g16 = make_grid(2, 1.0, 2 * np.pi, 16, 17)
        tau, horizon = 0.02, 1.0
        n = int(round(horizon / tau)) + 1
        sigma_hat, _, _ = semigroup_decay_rate(g16, MU, 0.05, 2.0,
                                               np.random.default_rng(0))
        for seed in (81, 82, 83):
            rng = np.random.default_rng(seed)
            ramp = [min(k * tau, 1.0) for k in range(n)]
            f = [random_smooth_field(g16, rng, (2,)) for _ in range(n)]
            gd = [random_smooth_field(g16, rng, ()) * ramp[k] for k in range(n)]
            hd = [random_smooth_field(g16, rng, (2,)) * ramp[k] for k in range(n)]
            a = project(random_solenoidal_field(g16, rng)).p_part
            mono = solve_linear_ibvp(f, gd, hd, a, horizon, tau, MU)
            deco = solve_linear_decomposed(f, gd, hd, a, 0.5 * sigma_hat,
                                           horizon, tau, MU)
            gap = trajectory_xnorm(mono - deco.total) / trajectory_xnorm(mono)
            assert gap < 1e-4


def test_criterion_09_nonlinear_term_exactness():
    with Budget("criterion-09 nonlinear-term exactness", 60.0):
        from layerflow.calculus import vector_hessian
        from layerflow.lagrangian import initial_deformation
        from tests.test_lagrangian import composed_shear_state

        g16 = make_grid(2, 1.0, 2 * np.pi, 16, 17)
        rng = np.random.default_rng(9)
        u = random_smooth_field(g16, rng, (2,))
        up = inverse_transform(u)
        gu = inverse_transform(vector_gradient(u))
        hu = inverse_transform(vector_hessian(u))
        dudt = inverse_transform(random_smooth_field(g16, rng, (2,)))

        st0 = initial_deformation(g16)
        assert np.all(nonlinear_F(st0, dudt, gu, hu, MU).data == 0.0)
        assert np.all(nonlinear_G(st0, gu).data == 0.0)
        assert np.all(nonlinear_Gvec(st0, up).data == 0.0)
        hm0, hen0 = nonlinear_H(st0, gu, MU)
        assert np.all(hm0.data == 0.0) and np.all(hen0.data == 0.0)

        te = 0.25
        s = te / (1 + te)
        b = np.broadcast_to(te * np.eye(2), g16.physical_shape((2, 2))).copy()
        st = _rebuild(g16, 1.0, b, np.zeros_like(b))
        divu = inverse_transform(divergence(u))
        g_got = inverse_transform(nonlinear_G(st, gu))
        assert np.max(np.abs(g_got - s * divu)) < 1e-12 * max(np.max(np.abs(divu)), 1.0)
        lap_u = np.einsum("...mjj->...m", hu)
        grad_div = inverse_transform(gradient(forward_transform(g16, -s * divu)))
        f_expect = (-te * dudt + MU * te * lap_u + MU * grad_div
                    + MU * (1 + te) * ((1 + te) ** -2 - 1) * lap_u)
        f_got = inverse_transform(nonlinear_F(st, dudt, gu, hu, MU))
        assert np.max(np.abs(f_got - f_expect)) < 1e-12 * np.max(np.abs(f_expect))
        h_got = inverse_transform(nonlinear_H(st, gu, MU)[0])
        d_u = gu + np.swapaxes(gu, -1, -2)
        assert np.max(np.abs(h_got - MU * s * d_u)) < 1e-12 * np.max(np.abs(d_u))

        errs = []
        ns = (12, 16, 20)
        for n in ns:
            gn = make_grid(2, 1.0, 2 * np.pi, n, n + 1)
            stn = composed_shear_state(gn, 0.4)
            un = random_smooth_field(gn, np.random.default_rng(4), (2,), n_terms=2)
            gvn = nonlinear_Gvec(stn, inverse_transform(un))
            ggn = nonlinear_G(stn, inverse_transform(vector_gradient(un)))
            errs.append(discrete_lq_norm(divergence(gvn) - ggn, 2.0)
                        / discrete_lq_norm(ggn, 2.0))
        order = -np.polyfit(np.log(ns), np.log(errs), 1)[0]
        assert order >= 2.0


def test_criterion_10_global_small_data_solve(global_run):
    out = global_run
    with Budget("criterion-10 global small-data solve", 600.0):
        contraction = out["contraction"]
        assert contraction.converged
        assert all(r <= 0.6 for r in contraction.ratios)
        assert out["decay_rate"] > 0.0
        jac = out["jacobian"]
        assert jac.max_det_deviation < 1e-4
        assert jac.integrated_gradient <= 0.25
        assert jac.min_singular_value >= 0.75
        assert out["elapsed"] < 600.0


def test_criterion_11_push_forward_norm_identity(global_run):
    with Budget("criterion-11 push-forward norm identity", 60.0):
        gaps = global_run["push_forward_gaps"]
        assert len(gaps) == 5
        assert np.max(gaps) < 1e-6
