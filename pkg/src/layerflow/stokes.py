"""Layer Stokes solver: resolvent, pressure operator, semigroup stepping.

The velocity satisfies a no-slip condition on the bottom and a stress
condition on the top.  Per horizontal mode the (generalized) resolvent system

    lam v - mu (d_zz - |xi'|^2) v' + i xi' q = f'     (tangential components)
    lam v_N - mu (d_zz - |xi'|^2) v_N + d_z q = f_N
    i xi' . v' + d_z v_N = g
    v = 0                      at z = 0
    mu (d_z v' + i xi' v_N) = h'    at z = d
    2 mu d_z v_N - q = h_N          at z = d

is a dense collocation solve; the factorization for fixed (lam, mu) is cached
on the grid, which makes implicit-Euler time stepping (one resolvent solve at
lam = 1/tau per step) cheap.  The k' = 0 mode decouples: the tangential
components satisfy scalar Robin problems, while the vertical/pressure pair is
fixed by integrating the divergence constraint and the normal stress
condition (the monolithic collocation matrix is structurally singular there).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .calculus import (
    bottom_trace,
    divergence,
    gradient,
    laplacian,
    matrix_divergence,
    symmetric_gradient,
    top_trace,
    vector_gradient,
)
from .grid import LayerGrid, SpectralField
from .norms import discrete_lq_norm
from .trajectory import Trajectory
from .weak_dn import SingularModeError, solve_vertical_bvp

__all__ = [
    "ResolventData",
    "stress_tensor",
    "solve_resolvent",
    "resolvent_residual",
    "pressure_operator_K",
    "apply_reduced_stokes",
    "apply_reduced_stokes_direct",
    "domain_violations",
    "semigroup_step",
    "duhamel_convolve",
    "boundary_stress_top",
    "relative_divergence",
]


@dataclass
class ResolventData:
    """Right-hand sides of the generalized resolvent problem on one grid.

    ``g`` (divergence data) and ``h`` (top boundary stress, only its z = d
    values are used) generalize the homogeneous problem; pass ``None`` for
    zero data.
    """

    lam: complex
    f: SpectralField
    g: SpectralField | None = None
    h: SpectralField | None = None

    def __post_init__(self):
        grid = self.f.grid
        if self.f.rank != "vector":
            raise ValueError("f must be a vector field")
        for other, rank in ((self.g, "scalar"), (self.h, "vector")):
            if other is not None and (other.rank != rank or other.grid is not grid):
                raise ValueError("resolvent data fields must share one grid")


def stress_tensor(v: SpectralField, q: SpectralField, mu: float) -> SpectralField:
    """T(v, q) = mu (grad v + grad v^T) - q I."""
    grid = v.grid
    if q.grid is not grid:
        raise ValueError("velocity and pressure live on different grids")
    d = symmetric_gradient(v).data * mu
    eye = np.eye(grid.dim)
    return SpectralField(grid, d - q.data[..., None, None] * eye)


def _integration_matrix(grid: LayerGrid) -> np.ndarray:
    """Matrix mapping nodal values g to the antiderivative int_0^z g."""
    q = grid._cache.get("integral")
    if q is None:
        nz = grid.n_vertical
        a = grid.diff1.copy()
        a[0, :] = 0.0
        a[0, 0] = 1.0
        p = np.eye(nz)
        p[0, 0] = 0.0
        q = np.linalg.solve(a, p)
        grid._cache["integral"] = q
    return q


def _assemble_mode_matrix(grid: LayerGrid, lam: complex, mu: float,
                          m: int) -> np.ndarray:
    """Dense collocation matrix of one nonzero mode, (N+1)(nz) square."""
    nz = grid.n_vertical
    N = grid.dim
    eye = np.eye(nz)
    d1, d2 = grid.diff1, grid.diff2
    xi = grid.xi_flat[m]
    b2 = grid.xi2_flat[m]
    size = (N + 1) * nz
    mat = np.zeros((size, size), dtype=complex)
    qs = N * nz
    for j in range(N):
        rows = slice(j * nz, (j + 1) * nz)
        mat[rows, rows] = (lam + mu * b2) * eye - mu * d2
        if j < N - 1:
            mat[rows, qs:] = 1j * xi[j] * eye
        else:
            mat[rows, qs:] = d1
        r0 = j * nz
        rtop = j * nz + nz - 1
        mat[r0, :] = 0.0
        mat[r0, r0] = 1.0
        mat[rtop, :] = 0.0
        mat[rtop, rows] = mu * d1[-1, :] * (1.0 if j < N - 1 else 2.0)
        if j < N - 1:
            mat[rtop, (N - 1) * nz + nz - 1] = mu * 1j * xi[j]
        else:
            mat[rtop, qs + nz - 1] = -1.0
    for j in range(N - 1):
        mat[qs:, j * nz:(j + 1) * nz] = 1j * xi[j] * eye
    mat[qs:, (N - 1) * nz:N * nz] = d1
    return mat


def _zero_mode_tangential_matrix(grid: LayerGrid, lam: complex, mu: float) -> np.ndarray:
    nz = grid.n_vertical
    mat0 = lam * np.eye(nz) - mu * grid.diff2
    mat0 = mat0.astype(complex)
    mat0[0, :] = 0.0
    mat0[0, 0] = 1.0
    mat0[-1, :] = mu * grid.diff1[-1, :]
    return mat0


def _resolvent_factors(grid: LayerGrid, lam: complex, mu: float):
    key = ("resolvent", complex(lam), float(mu))
    cached = grid._cache.get(key)
    if cached is not None:
        return cached
    factors: list = [None] * grid.mode_count
    for m in range(grid.mode_count):
        if grid.xi2_flat[m] == 0.0:
            continue
        try:
            factors[m] = lu_factor(_assemble_mode_matrix(grid, lam, mu, m))
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularModeError(m, f"lam={lam}") from exc
    # k' = 0 tangential Robin operator, shared by all tangential components
    try:
        tangential0 = lu_factor(_zero_mode_tangential_matrix(grid, lam, mu))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularModeError(0, f"lam={lam}") from exc
    cached = (factors, tangential0)
    grid._cache[key] = cached
    return cached


def resolvent_condition_report(grid: LayerGrid, lam: complex, mu: float) -> dict:
    """Worst per-mode condition number at this spectral parameter.

    Probes how the collocation matrices degrade as |lam| shrinks toward the
    unquantified small-parameter limit; reported by the resolvent sweep.
    """
    worst, arg = 0.0, 0
    for m in range(grid.mode_count):
        if grid.xi2_flat[m] == 0.0:
            cond = float(np.linalg.cond(_zero_mode_tangential_matrix(grid, lam, mu)))
        else:
            cond = float(np.linalg.cond(_assemble_mode_matrix(grid, lam, mu, m)))
        if cond > worst:
            worst, arg = cond, m
    return {"worst_condition": worst, "mode_index": arg}


def solve_resolvent(data: ResolventData, mu: float) -> tuple[SpectralField, SpectralField]:
    """Solve the generalized resolvent problem; returns (velocity, pressure).

    The momentum operator is the full stress divergence
    mu (Lap v + grad div v) - grad q.  Because the divergence rows enforce
    div v = g exactly, this is realized by passing f + mu grad g through the
    per-mode Laplacian-form system, which keeps the returned pressure the
    physical one (the normal-stress condition reads 2 mu d_z v_N - q = h_N).
    """
    grid = data.f.grid
    nz = grid.n_vertical
    N = grid.dim
    factors, tangential0 = _resolvent_factors(grid, data.lam, mu)
    lam = complex(data.lam)

    f_eff = data.f.data
    if data.g is not None:
        f_eff = f_eff + mu * gradient(data.g).data
    fm = f_eff.reshape(grid.mode_count, nz, N)
    gm = (data.g.data.reshape(grid.mode_count, nz)
          if data.g is not None else np.zeros((grid.mode_count, nz), dtype=complex))
    if data.h is not None:
        hm = top_trace(data.h).reshape(grid.mode_count, N)
    else:
        hm = np.zeros((grid.mode_count, N), dtype=complex)

    v = np.zeros((grid.mode_count, nz, N), dtype=complex)
    q = np.zeros((grid.mode_count, nz), dtype=complex)
    qint = _integration_matrix(grid)
    d1 = grid.diff1

    for m in range(grid.mode_count):
        if factors[m] is None:
            # zero mode: tangential Robin solves, then divergence + stress BC
            for j in range(N - 1):
                rhs = fm[m, :, j].copy()
                rhs[0] = 0.0
                rhs[-1] = hm[m, j]
                v[m, :, j] = lu_solve(tangential0, rhs)
            vn = qint @ gm[m]
            v[m, :, N - 1] = vn
            w = fm[m, :, N - 1] - lam * vn + mu * (d1 @ gm[m])
            iw = qint @ w
            q_top = 2.0 * mu * (d1 @ vn)[-1] - hm[m, N - 1]
            q[m] = q_top - (iw[-1] - iw)
        else:
            rhs = np.empty((N + 1) * nz, dtype=complex)
            for j in range(N):
                rhs[j * nz:(j + 1) * nz] = fm[m, :, j]
                rhs[j * nz] = 0.0
                rhs[j * nz + nz - 1] = hm[m, j]
            rhs[N * nz:] = gm[m]
            sol = lu_solve(factors[m], rhs)
            v[m] = sol[: N * nz].reshape(N, nz).T
            q[m] = sol[N * nz:]

    shape = grid.horizontal_shape + (nz,)
    return (SpectralField(grid, v.reshape(shape + (N,))),
            SpectralField(grid, q.reshape(shape)))


def resolvent_residual(data: ResolventData, v: SpectralField, q: SpectralField,
                       mu: float) -> dict:
    """Relative residuals of all resolvent equations after back-substitution.

    The momentum residual uses the full stress divergence, so it measures the
    physical system lam v - Div T(v, q) = f.
    """
    grid = v.grid
    mom = (data.lam * v.data
           - mu * (laplacian(v).data + gradient(divergence(v)).data)
           + gradient(q).data - data.f.data)
    # drop rows replaced by boundary conditions
    interior = (slice(None),) * grid.n_axes + (slice(1, -1),)
    div = divergence(v)
    gg = data.g.data if data.g is not None else 0.0
    stress = boundary_stress_top(v, q, mu)
    hh = top_trace(data.h) if data.h is not None else np.zeros_like(stress)
    scale = max(discrete_lq_norm(data.f, 2.0), discrete_lq_norm(v, 2.0), 1e-300)
    return {
        "momentum": float(np.max(np.abs(mom[interior]))) / scale,
        "divergence": float(np.max(np.abs(div.data - gg))) / scale,
        "bottom": float(np.max(np.abs(grid.boundary_slice(v.data, top=False)))) / scale,
        "top_stress": float(np.max(np.abs(stress - hh))) / scale,
    }


def boundary_stress_top(v: SpectralField, q: SpectralField, mu: float) -> np.ndarray:
    """Spectral values of T(v, q) e_N on the top boundary, shape (modes..., N)."""
    grid = v.grid
    N = grid.dim
    dzv = grid.apply_vertical(grid.diff1, v.data)
    out = np.empty(grid.horizontal_shape + (N,), dtype=complex)
    top_dzv = grid.boundary_slice(dzv, top=True)
    top_vn = grid.boundary_slice(v.data[..., N - 1], top=True)
    for j in range(N - 1):
        xi = grid.xi_axes[j] * np.ones(grid.horizontal_shape)
        out[..., j] = mu * (top_dzv[..., j] + 1j * xi * top_vn)
    out[..., N - 1] = 2.0 * mu * top_dzv[..., N - 1] - grid.boundary_slice(q.data, top=True)
    return out


def pressure_operator_K(v: SpectralField, mu: float) -> SpectralField:
    """Pressure determined by v alone, through the variational problem

    (grad K, grad phi) = (Div(mu D(v)) - grad div v, grad phi)   (phi = 0 on top)

    with Dirichlet value 2 mu d_z v_N - div v on the top boundary and the
    natural condition on the bottom.
    """
    grid = v.grid
    if v.rank != "vector":
        raise ValueError("pressure operator expects a vector field")
    dv = SpectralField(grid, symmetric_gradient(v).data * mu)
    divv = divergence(v)
    force = matrix_divergence(dv) - gradient(divv)
    rhs = divergence(force).data
    dzvn = grid.apply_vertical(grid.diff1, v.data[..., grid.dim - 1])
    trace = 2.0 * mu * grid.boundary_slice(dzvn, top=True) - top_trace(divv)
    fn_bottom = bottom_trace(SpectralField(grid, force.data[..., grid.dim - 1]))
    return solve_vertical_bvp(grid, rhs, trace, fn_bottom)


def apply_reduced_stokes(v: SpectralField, mu: float) -> SpectralField:
    """Reduced Stokes operator A v = Div T(v, K(v))."""
    k = pressure_operator_K(v, mu)
    return matrix_divergence(stress_tensor(v, k, mu))


def apply_reduced_stokes_direct(v: SpectralField, mu: float) -> SpectralField:
    """Independent assembly mu (Lap v + grad div v) - grad K(v)."""
    k = pressure_operator_K(v, mu)
    return SpectralField(
        v.grid,
        mu * (laplacian(v).data + gradient(divergence(v)).data) - gradient(k).data,
    )


def relative_divergence(v: SpectralField) -> float:
    """Interior || div v ||_2 relative to || grad v ||_2 (zero field gives 0).

    The boundary collocation rows carry boundary conditions instead of the
    divergence equation, so weak solenoidality corresponds to the interior
    nodes; their residual is what this measures.
    """
    grid = v.grid
    div = divergence(v)
    trimmed = div.data.copy()
    idx0 = (slice(None),) * grid.n_axes + (0,)
    idx1 = (slice(None),) * grid.n_axes + (-1,)
    trimmed[idx0] = 0.0
    trimmed[idx1] = 0.0
    num = discrete_lq_norm(SpectralField(grid, trimmed), 2.0)
    den = discrete_lq_norm(vector_gradient(v), 2.0)
    return num / den if den > 0 else 0.0


def domain_violations(v: SpectralField, mu: float) -> dict:
    """Measured distance of v from the Stokes-operator domain (diagnostic)."""
    grid = v.grid
    scale = max(discrete_lq_norm(v, 2.0), 1e-300)
    dzv = grid.apply_vertical(grid.diff1, v.data)
    top_dzv = grid.boundary_slice(dzv, top=True)
    top_vn = grid.boundary_slice(v.data[..., grid.dim - 1], top=True)
    tang = [
        np.max(np.abs(mu * (top_dzv[..., j]
                            + 1j * grid.xi_axes[j] * np.ones(grid.horizontal_shape) * top_vn)))
        for j in range(grid.dim - 1)
    ]
    return {
        "bottom_trace": float(np.max(np.abs(grid.boundary_slice(v.data, top=False)))) / scale,
        "tangential_stress_top": float(max(tang)) / scale,
        "weak_divergence": relative_divergence(v),
    }


def semigroup_step(u: SpectralField, tau: float, mu: float) -> SpectralField:
    """One implicit-Euler step of the Stokes evolution: (I - tau A)^{-1} u."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    v, _ = solve_resolvent(ResolventData(lam=1.0 / tau, f=u * (1.0 / tau)), mu)
    return v


def duhamel_convolve(forcing: list, tau: float, mu: float,
                     div_tol: float = 1e-6) -> Trajectory:
    """Discrete variation-of-constants solution driven by solenoidal forcing.

    ``forcing[n]`` is the forcing field at t_n = n tau; the recurrence
    u^{n+1} = (I - tau A)^{-1} (u^n + tau F^{n+1}) starts from u^0 = 0 and is
    evaluated as a single resolvent solve per step.  Forcing samples whose
    relative divergence exceeds ``div_tol`` are rejected.
    """
    if not forcing:
        raise ValueError("empty forcing series")
    grid = forcing[0].grid
    for n, fld in enumerate(forcing):
        rd = relative_divergence(fld)
        if rd > div_tol:
            raise ValueError(f"forcing sample {n} is not solenoidal (rel. div {rd:.2e})")
    lam = 1.0 / tau
    u = SpectralField.zeros(grid, (grid.dim,))
    velocities = [u]
    pressures = [SpectralField.zeros(grid)]
    for n in range(1, len(forcing)):
        f_step = u * lam + forcing[n]
        u, q = solve_resolvent(ResolventData(lam=lam, f=f_step), mu)
        velocities.append(u)
        pressures.append(q)
    return Trajectory(grid=grid, step=tau, times=tau * np.arange(len(forcing)),
                      velocities=velocities, pressures=pressures)
