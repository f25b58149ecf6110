"""Vector calculus on spectral fields: gradients, divergence, traces.

Horizontal derivatives act as i*xi multipliers, the vertical one through the
collocation matrix.  Component axes follow the conventions in :mod:`.grid`:
``(grad u)[..., i, j] = d u_i / d x_j`` and derivative axes are appended last.
"""

from __future__ import annotations

import numpy as np

from .grid import SpectralField, horizontal_derivative, vertical_derivative

__all__ = [
    "derivative",
    "gradient",
    "vector_gradient",
    "divergence",
    "laplacian",
    "vector_hessian",
    "matrix_divergence",
    "symmetric_gradient",
    "top_trace",
    "bottom_trace",
]


def derivative(field: SpectralField, axis: int) -> SpectralField:
    """d/d x_axis where axis = dim-1 is the vertical direction."""
    grid = field.grid
    if axis == grid.dim - 1:
        return vertical_derivative(field, 1)
    return horizontal_derivative(field, axis)


def gradient(scalar: SpectralField) -> SpectralField:
    """Gradient of a scalar field, returned as a vector field (..., N)."""
    grid = scalar.grid
    parts = [derivative(scalar, a).data for a in range(grid.dim)]
    return SpectralField(grid, np.stack(parts, axis=-1))


def vector_gradient(vec: SpectralField) -> SpectralField:
    """Matrix field (..., i, j) = d u_i / d x_j of a vector field."""
    grid = vec.grid
    parts = [derivative(vec, a).data for a in range(grid.dim)]
    return SpectralField(grid, np.stack(parts, axis=-1))


def divergence(vec: SpectralField) -> SpectralField:
    grid = vec.grid
    out = np.zeros(grid.physical_shape(), dtype=complex)
    for a in range(grid.dim):
        comp = SpectralField(grid, vec.data[..., a])
        out += derivative(comp, a).data
    return SpectralField(grid, out)


def laplacian(field: SpectralField) -> SpectralField:
    """Componentwise Laplacian: -|xi|^2 horizontally plus d^2/dz^2."""
    grid = field.grid
    xi2 = grid.xi2.reshape(grid.horizontal_shape + (1,) * (field.data.ndim - grid.n_axes))
    out = -xi2 * field.data + grid.apply_vertical(grid.diff2, field.data)
    return SpectralField(grid, out)


def vector_hessian(vec: SpectralField) -> SpectralField:
    """All second derivatives of a vector field: (..., m, j, k) = d_j d_k u_m."""
    grid = vec.grid
    N = grid.dim
    grad = vector_gradient(vec)  # (..., m, j)
    cols = []
    for k in range(N):
        dk = derivative(SpectralField(grid, grad.data), k)  # d_k of every (m, j)
        cols.append(dk.data)
    hess = np.stack(cols, axis=-1)  # (..., m, j, k)
    return SpectralField(grid, hess)


def matrix_divergence(mat: SpectralField) -> SpectralField:
    """Row-wise divergence of a matrix field: out_i = sum_j d_j M_ij."""
    grid = mat.grid
    N = grid.dim
    out = np.zeros(grid.physical_shape((N,)), dtype=complex)
    for i in range(N):
        for j in range(N):
            comp = SpectralField(grid, mat.data[..., i, j])
            out[..., i] += derivative(comp, j).data
    return SpectralField(grid, out)


def symmetric_gradient(vec: SpectralField) -> SpectralField:
    """Doubled strain tensor grad(u) + grad(u)^T."""
    g = vector_gradient(vec)
    return SpectralField(vec.grid, g.data + np.swapaxes(g.data, -1, -2))


def top_trace(field: SpectralField) -> np.ndarray:
    """Spectral values on the free top boundary z = d."""
    return field.grid.boundary_slice(field.data, top=True)


def bottom_trace(field: SpectralField) -> np.ndarray:
    """Spectral values on the rigid bottom boundary z = 0."""
    return field.grid.boundary_slice(field.data, top=False)
