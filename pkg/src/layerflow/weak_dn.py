"""Weak Dirichlet-Neumann problem on the layer.

Solves (grad u, grad phi) = (f, grad phi) for all test functions phi vanishing
on the top boundary.  Per horizontal mode this is the two-point boundary-value
problem

    (d_zz - |xi'|^2) u_hat = (div f)_hat,   u_hat(d) = 0,
    d_z u_hat(0) = f_hat_N(xi', 0),

with the natural bottom condition coming out of the weak form; for the k' = 0
mode the problem degenerates to d_zz u = d_z f_N and is solved directly.  A
second, independent construction (:func:`solve_weak_dn_kernel_path`) builds
the same solution from explicit layer kernels: an interior potential obtained
by quadrature against the residue kernels plus a harmonic correction that
restores the top boundary value.  The two paths cross-validate each other.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .calculus import bottom_trace, divergence
from .grid import LayerGrid, SpectralField, _clenshaw_curtis_weights, inverse_transform
from .kernels import layer_harmonic_kernel

__all__ = [
    "solve_weak_dn",
    "solve_weak_dn_kernel_path",
    "solve_vertical_bvp",
    "divergence_potential",
    "SingularModeError",
]


class SingularModeError(RuntimeError):
    """A per-mode collocation matrix is singular (vertical resolution too low)."""

    def __init__(self, mode, detail=""):
        super().__init__(f"singular collocation matrix at mode {mode} {detail}")
        self.mode = mode


def _poisson_factors(grid: LayerGrid):
    """Cached LU factors of the vertical operator per unique |xi'|^2.

    Row 0 imposes the Neumann (bottom) condition, the last row the Dirichlet
    (top) condition; interior rows are D2 - |xi'|^2.
    """
    cached = grid._cache.get("weak_dn")
    if cached is not None:
        return cached
    values, inverse = grid.unique_xi2()
    nz = grid.n_vertical
    factors = []
    for xi2 in values:
        mat = grid.diff2 - xi2 * np.eye(nz)
        mat[0, :] = grid.diff1[0, :]
        mat[-1, :] = 0.0
        mat[-1, -1] = 1.0
        try:
            factors.append(lu_factor(mat))
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SingularModeError(xi2, str(exc)) from exc
    grid._cache["weak_dn"] = (values, inverse, factors)
    return grid._cache["weak_dn"]


def solve_vertical_bvp(grid: LayerGrid, rhs_hat: np.ndarray,
                       dirichlet_top: np.ndarray,
                       neumann_bottom: np.ndarray) -> SpectralField:
    """Solve (d_zz - |xi'|^2) u = rhs per mode with the given boundary data.

    ``rhs_hat`` has shape (modes..., nz); the boundary arrays have the
    horizontal mode shape.  Shared machinery for the weak solver, the
    pressure operator, and the negative-norm potential.
    """
    values, inverse, factors = _poisson_factors(grid)
    nz = grid.n_vertical
    rhs = rhs_hat.reshape(grid.mode_count, nz).astype(complex).copy()
    rhs[:, 0] = np.asarray(neumann_bottom).reshape(grid.mode_count)
    rhs[:, -1] = np.asarray(dirichlet_top).reshape(grid.mode_count)
    out = np.empty_like(rhs)
    for g in range(len(values)):
        sel = inverse == g
        out[sel] = lu_solve(factors[g], rhs[sel].T).T
    return SpectralField(grid, out.reshape(grid.horizontal_shape + (nz,)))


def solve_weak_dn(f: SpectralField) -> SpectralField:
    """Solution operator of the weak Dirichlet-Neumann problem.

    The potential vanishes at z = d and satisfies the natural bottom
    condition d_z u(0) = f_N(0); this reduces to the homogeneous Neumann
    condition exactly when f_N vanishes on the bottom.
    """
    grid = f.grid
    if f.rank != "vector":
        raise ValueError("solve_weak_dn expects a vector field")
    rhs = divergence(f).data
    zeros = np.zeros(grid.horizontal_shape, dtype=complex)
    fn_bottom = bottom_trace(SpectralField(grid, f.data[..., grid.dim - 1]))
    return solve_vertical_bvp(grid, rhs, zeros, fn_bottom)


def divergence_potential(g: SpectralField) -> SpectralField:
    """Potential psi with Laplacian psi = g, psi(d) = 0, d_z psi(0) = 0.

    grad(psi) has weak divergence g and zero normal trace on the bottom; its
    L_q size serves as the discrete negative-norm surrogate for g.
    """
    grid = g.grid
    if g.rank != "scalar":
        raise ValueError("divergence_potential expects a scalar field")
    zeros = np.zeros(grid.horizontal_shape, dtype=complex)
    return solve_vertical_bvp(grid, g.data, zeros, zeros)


# -- explicit kernel path ---------------------------------------------------


def _kernel_panels(grid: LayerGrid):
    """Per-target split quadrature rules for the kinked layer kernels.

    For each vertical node x the integral over [0, d] is split at y = x; each
    panel gets mapped Gauss-Lobatto nodes, Clenshaw-Curtis weights, and a
    barycentric interpolation matrix from the grid nodes.
    """
    cached = grid._cache.get("kernel_panels")
    if cached is not None:
        return cached
    M = grid.n_vertical - 1
    xref = np.cos(np.pi * np.arange(M + 1) / M)
    wref = _clenshaw_curtis_weights(M)
    panels = []
    for x in grid.vertical_nodes:
        per_target = []
        for lo, hi, below in ((0.0, x, True), (x, grid.depth, False)):
            if hi - lo <= 1e-14 * grid.depth:
                continue
            ym = 0.5 * (hi + lo) - 0.5 * (hi - lo) * xref  # ascending in y
            wy = 0.5 * (hi - lo) * wref
            per_target.append((ym, wy, grid.interpolation_matrix(ym), below))
        panels.append(per_target)
    grid._cache["kernel_panels"] = panels
    return panels


def _check_interior_support(f: SpectralField):
    phys = inverse_transform(f)
    grid = f.grid
    scale = np.max(np.abs(phys))
    if scale == 0.0:
        return
    worst = max(
        np.max(np.abs(grid.boundary_slice(phys, top=False))),
        np.max(np.abs(grid.boundary_slice(phys, top=True))),
    )
    if worst > 1e-10 * scale:
        raise ValueError(
            f"kernel path requires interior-supported data; boundary values "
            f"reach {worst / scale:.2e} of the field maximum")


def _kernel_potentials(f: SpectralField) -> tuple[np.ndarray, np.ndarray]:
    """Interior potential v and harmonic correction w, per flattened mode."""
    grid = f.grid
    panels = _kernel_panels(grid)
    nz = grid.n_vertical
    N = grid.dim
    fm = f.data.reshape(grid.mode_count, nz, N)
    # horizontal part enters only through i xi'. f'
    fdiv_h = np.einsum("mk,mzk->mz", 1j * grid.xi_flat, fm[..., : N - 1])
    fn = fm[..., N - 1]
    v = np.zeros((grid.mode_count, nz), dtype=complex)
    b = np.sqrt(grid.xi2_flat)[:, None]  # (modes, 1)
    zero = grid.xi2_flat == 0.0
    b_safe = np.where(zero[:, None], 1.0, b)

    for it in range(nz):
        x = grid.vertical_nodes[it]
        for ym, wy, interp, below in panels[it]:
            fh = fdiv_h @ interp.T  # (modes, ny)
            fv = fn @ interp.T
            sym = np.exp(-np.abs(x - ym)[None, :] * b)
            img = np.exp(-(x + ym)[None, :] * b)
            sgn = 1.0 if below else -1.0
            integrand = (-(0.5 / b_safe) * (sym + img) * fh
                         + 0.5 * (sgn * sym - img) * fv)
            # k' = 0 limit: the horizontal terms vanish and only the
            # one-sided part of the vertical term survives
            integrand[zero] = 0.0 if below else -fv[zero]
            v[:, it] += integrand @ wy

    # harmonic correction w with w(d) = -v(d), d_z w(0) = 0
    w = np.zeros_like(v)
    for m in range(grid.mode_count):
        b = np.sqrt(grid.xi2_flat[m])
        kern = np.array([
            layer_harmonic_kernel(1, x, grid.depth, b, grid.depth)
            + layer_harmonic_kernel(2, x, grid.depth, b, grid.depth)
            for x in grid.vertical_nodes
        ])
        w[m] = -kern * v[m, -1]
    return v, w


def solve_weak_dn_kernel_path(f: SpectralField) -> SpectralField:
    """Layer-kernel construction of the weak Dirichlet-Neumann solution.

    Per mode with b = |xi'| > 0 the interior potential is

        v(x) = int_0^d [ -(1/2b) (sym + img) * i xi'.f'(y)
                         + (1/2) (sgn * sym - img) * f_N(y) ] dy,

    sym = e^{-|x-y| b}, img = e^{-(x+y) b}, sgn = sign(x - y); the quadrature
    is split at the kink y = x.  The k' = 0 mode reduces to
    v(x) = -int_x^d f_N(y) dy.  The harmonic correction through
    :func:`layer_harmonic_kernel` then cancels v on the top boundary.
    Requires f to vanish on both boundaries.
    """
    grid = f.grid
    if f.rank != "vector":
        raise ValueError("kernel path expects a vector field")
    _check_interior_support(f)
    v, w = _kernel_potentials(f)
    out = (v + w).reshape(grid.horizontal_shape + (grid.n_vertical,))
    return SpectralField(grid, out)
