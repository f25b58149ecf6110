"""Discrete norms: L_q quadrature, Sobolev surrogates, weighted time norms.

Spatial integrals use uniform weights horizontally and Clenshaw-Curtis weights
vertically.  Time integrals use the left-endpoint rule with the exponential
weight evaluated at the sample times; time derivatives are first-order
backward differences (the first sample uses the forward difference), matching
the implicit-Euler stepping downstream.
"""

from __future__ import annotations

import numpy as np

from .calculus import vector_gradient, vector_hessian
from .grid import LayerGrid, SpectralField, inverse_transform

__all__ = [
    "discrete_lq_norm",
    "sobolev_norm",
    "weighted_time_lp",
    "weighted_trajectory_norm",
    "parabolic_stack_norm",
    "trajectory_xnorm",
]


def _pointwise_sq(values: np.ndarray, grid: LayerGrid) -> np.ndarray:
    """|f|^2 per grid point, Euclidean over any trailing component axes."""
    mag2 = np.abs(values) ** 2
    while mag2.ndim > grid.dim:
        mag2 = mag2.sum(axis=-1)
    return mag2


def _quadrature(grid: LayerGrid, pointwise: np.ndarray) -> float:
    wz = grid.cc_weights.reshape((1,) * grid.n_axes + (-1,))
    return float(grid.horizontal_weight * np.sum(pointwise * wz))


def discrete_lq_norm(field, q: float = 2.0, grid: LayerGrid | None = None) -> float:
    """Discrete L_q(layer) norm of a spectral field or physical array.

    Rejects q < 1; complex-valued samples use their modulus.
    """
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    if isinstance(field, SpectralField):
        grid = field.grid
        values = inverse_transform(field)
    else:
        if grid is None:
            raise ValueError("grid required for raw arrays")
        values = np.asarray(field)
    mag2 = _pointwise_sq(values, grid)
    return _quadrature(grid, mag2 ** (q / 2.0)) ** (1.0 / q)


def _derivative_stack(field: SpectralField, order: int) -> list[np.ndarray]:
    """Physical magnitudes-squared of (f, grad f, ...) up to ``order``."""
    grid = field.grid
    if field.rank == "scalar":
        vec = SpectralField(grid, field.data[..., None])
    else:
        vec = field
    levels = [_pointwise_sq(inverse_transform(field), grid)]
    if order >= 1:
        grad = vector_gradient(vec)
        levels.append(_pointwise_sq(inverse_transform(grad), grid))
    if order >= 2:
        hess = vector_hessian(vec)
        levels.append(_pointwise_sq(inverse_transform(hess), grid))
    if order >= 3:
        raise ValueError("only orders 0..2 are supported")
    return levels


def sobolev_norm(field: SpectralField, q: float = 2.0, order: int = 1) -> float:
    """Discrete W^order_q norm: l_q combination of the derivative-level norms."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q}")
    grid = field.grid
    total = 0.0
    for mag2 in _derivative_stack(field, order):
        total += _quadrature(grid, mag2 ** (q / 2.0))
    return total ** (1.0 / q)


def weighted_time_lp(sample_values: np.ndarray, tau: float, p: float,
                     gamma: float = 0.0, times: np.ndarray | None = None) -> float:
    """Left-endpoint rule for (int (e^{gamma t} s(t))^p dt)^{1/p} on the samples.

    The final sample is the right endpoint and carries no weight; a
    single-sample series therefore integrates to zero.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    s = np.asarray(sample_values, dtype=float)
    if s.size == 0:
        raise ValueError("empty trajectory")
    if times is None:
        times = tau * np.arange(s.size)
    if s.size == 1:
        return 0.0
    w = np.exp(gamma * times[:-1])
    return float((tau * np.sum((w * s[:-1]) ** p)) ** (1.0 / p))


def parabolic_stack_norm(u_curr: SpectralField, u_prev: SpectralField | None,
                         tau: float, q: float = 2.0,
                         forward_next: SpectralField | None = None) -> float:
    """L_q norm of the stacked (du/dt, u, grad u, grad^2 u) at one sample.

    du/dt is the backward difference against ``u_prev``; the first sample of a
    trajectory passes ``forward_next`` instead and uses the forward difference.
    A lone sample contributes no time derivative.
    """
    grid = u_curr.grid
    if u_prev is not None:
        dudt = (u_curr - u_prev) * (1.0 / tau)
    elif forward_next is not None:
        dudt = (forward_next - u_curr) * (1.0 / tau)
    else:
        dudt = SpectralField.zeros(grid, u_curr.component_shape)
    mag2 = _pointwise_sq(inverse_transform(dudt), grid)
    for lvl in _derivative_stack(u_curr, 2):
        mag2 = mag2 + lvl
    return _quadrature(grid, mag2 ** (q / 2.0)) ** (1.0 / q)


def weighted_trajectory_norm(trajectory, p: float = 2.0, q: float = 2.0,
                             gamma: float = 0.0) -> float:
    """Weighted parabolic norm of a trajectory's velocity series.

    Discrete surrogate of || e^{gamma t} (du/dt, u, grad u, grad^2 u) ||
    in L_p(time; L_q(layer)).
    """
    us = trajectory.velocities
    if len(us) == 0:
        raise ValueError("empty trajectory")
    tau = trajectory.step
    s = np.empty(len(us))
    for n, u in enumerate(us):
        prev = us[n - 1] if n > 0 else None
        fwd = us[1] if (n == 0 and len(us) > 1) else None
        s[n] = parabolic_stack_norm(u, prev, tau, q, forward_next=fwd)
    return weighted_time_lp(s, tau, p, gamma, trajectory.times)


def trajectory_xnorm(trajectory, p: float = 2.0, q: float = 2.0,
                     gamma: float = 0.0) -> float:
    """Velocity parabolic norm plus the weighted L_p(W^1_q) pressure norm."""
    total = weighted_trajectory_norm(trajectory, p, q, gamma)
    if trajectory.pressures:
        s = np.array([sobolev_norm(pr, q, 1) for pr in trajectory.pressures])
        total += weighted_time_lp(s, trajectory.step, p, gamma, trajectory.times)
    return total
