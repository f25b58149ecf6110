"""Weak-form residual probes shared by the test suite and the scenario driver."""

from __future__ import annotations

import numpy as np

from .calculus import gradient
from .fields import random_smooth_field
from .grid import LayerGrid, SpectralField, forward_transform, inverse_transform
from .norms import _pointwise_sq, _quadrature, discrete_lq_norm

__all__ = [
    "inner_product",
    "random_test_function",
    "weak_divergence_residual",
    "weak_identity_residual",
]


def inner_product(a, b, grid: LayerGrid) -> float:
    """Quadrature inner product of two real physical arrays (all components)."""
    prod = (np.asarray(a) * np.asarray(b))
    while prod.ndim > grid.dim:
        prod = prod.sum(axis=-1)
    return _quadrature(grid, prod)


def random_test_function(grid: LayerGrid, rng: np.random.Generator) -> SpectralField:
    """Random smooth scalar test function vanishing on the top boundary."""
    phi = random_smooth_field(grid, rng, ())
    phys = inverse_transform(phi)
    z = grid.meshgrid()[-1]
    return forward_transform(grid, phys * (grid.depth - z) / grid.depth)


def weak_divergence_residual(v: SpectralField, rng: np.random.Generator,
                             n_tests: int = 20) -> float:
    """sup over test functions of |(v, grad phi)| / (||v|| ||grad phi||)."""
    grid = v.grid
    v_phys = inverse_transform(v)
    nv = discrete_lq_norm(v, 2.0)
    if nv == 0.0:
        return 0.0
    worst = 0.0
    for _ in range(n_tests):
        gphi = inverse_transform(gradient(random_test_function(grid, rng)))
        denom = nv * np.sqrt(_quadrature(grid, _pointwise_sq(gphi, grid)))
        worst = max(worst, abs(inner_product(v_phys, gphi, grid)) / denom)
    return worst


def weak_identity_residual(u: SpectralField, f: SpectralField,
                           rng: np.random.Generator, n_tests: int = 20) -> float:
    """Residual of (grad u, grad phi) = (f, grad phi) over random test functions."""
    grid = u.grid
    gu = inverse_transform(gradient(u))
    f_phys = inverse_transform(f)
    nf = discrete_lq_norm(f, 2.0)
    if nf == 0.0:
        nf = max(discrete_lq_norm(u, 2.0), 1e-300)
    worst = 0.0
    for _ in range(n_tests):
        gphi = inverse_transform(gradient(random_test_function(grid, rng)))
        denom = nf * np.sqrt(_quadrature(grid, _pointwise_sq(gphi, grid)))
        gap = inner_product(gu, gphi, grid) - inner_product(f_phys, gphi, grid)
        worst = max(worst, abs(gap) / denom)
    return worst
