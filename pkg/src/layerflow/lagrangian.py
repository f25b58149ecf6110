"""Deformation bookkeeping and exact nonlinear terms of the Lagrangian form.

State per time: the accumulated displacement gradient B = int_0^t grad u ds,
the deformation gradient A = I + B, its inverse, calB = A^{-1} - I, and det A.
The momentum, divergence, and boundary-stress corrections are assembled
pointwise from these matrices; every term carries at least one factor of B or
calB, so all of them vanish identically at B = 0.

Physical-array conventions follow :mod:`.grid`: (grad u)[..., i, j] = d_j u_i,
hess[..., m, j, k] = d_j d_k u_m, (grad calB)[..., k, i, j] = d_j calB_ki.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import lambda_correction, matrix_inverse_det, stress_correction
from .calculus import derivative, vector_gradient
from .grid import LayerGrid, SpectralField, forward_transform, inverse_transform
from .norms import _pointwise_sq, _quadrature
from .trajectory import Trajectory

__all__ = [
    "DeformationState",
    "DegenerateDeformationError",
    "initial_deformation",
    "accumulate_deformation",
    "nonlinear_F",
    "nonlinear_G",
    "nonlinear_Gvec",
    "nonlinear_H",
    "FlowMap",
    "flow_map",
    "jacobian_diagnostics",
    "JacobianReport",
    "push_forward",
    "EulerianSamples",
    "eulerian_lq_norm",
]


class DegenerateDeformationError(RuntimeError):
    """The deformation gradient lost invertibility (det A below threshold)."""


@dataclass
class DeformationState:
    grid: LayerGrid
    time: float
    B: np.ndarray        # (..., N, N) accumulated displacement gradient
    A: np.ndarray        # I + B
    Ainv: np.ndarray     # A^{-1}
    calB: np.ndarray     # A^{-1} - I
    detA: np.ndarray     # (...,)
    grad_prev: np.ndarray  # grad u at the last accumulated sample


def initial_deformation(grid: LayerGrid) -> DeformationState:
    n = grid.dim
    shape = grid.physical_shape((n, n))
    eye = np.broadcast_to(np.eye(n), shape).copy()
    zeros = np.zeros(shape)
    return DeformationState(
        grid=grid, time=0.0, B=zeros.copy(), A=eye.copy(), Ainv=eye.copy(),
        calB=zeros.copy(), detA=np.ones(shape[:-2]), grad_prev=zeros.copy(),
    )


def _rebuild(grid: LayerGrid, time: float, b: np.ndarray,
             grad_prev: np.ndarray, det_floor: float = 0.1) -> DeformationState:
    n = grid.dim
    a = b + np.eye(n)
    ainv, det = matrix_inverse_det(a)
    worst = float(np.min(det))
    if worst < det_floor:
        raise DegenerateDeformationError(
            f"det A reached {worst:.4f} (< {det_floor}) at t={time:.4f}; "
            f"max |B| = {np.max(np.abs(b)):.4f}")
    return DeformationState(grid=grid, time=time, B=b, A=a, Ainv=ainv,
                            calB=ainv - np.eye(n), detA=det, grad_prev=grad_prev)


def accumulate_deformation(state: DeformationState, grad_u: np.ndarray,
                           tau: float) -> DeformationState:
    """Advance B by one trapezoidal step with the new velocity gradient."""
    if grad_u.shape != state.B.shape:
        raise ValueError("velocity gradient shape does not match the state")
    b = state.B + 0.5 * tau * (state.grad_prev + grad_u)
    return _rebuild(state.grid, state.time + tau, b, grad_u.copy())


def _grad_of_matrix_field(grid: LayerGrid, mat_phys: np.ndarray) -> np.ndarray:
    """All first derivatives of a physical matrix field, (..., k, i, j)."""
    spec = forward_transform(grid, mat_phys)
    parts = [inverse_transform(derivative(spec, a)) for a in range(grid.dim)]
    return np.stack(parts, axis=-1)


def nonlinear_F(state: DeformationState, du_dt: np.ndarray, grad_u: np.ndarray,
                hess_u: np.ndarray, mu: float) -> SpectralField:
    """Momentum correction

    F = -B^T du/dt + mu B^T Lap u + mu grad(calB^T : grad u)
        + mu (I + B^T) (second/first-order transformed-Laplacian corrections).

    Inputs are physical arrays; the result is returned spectrally.  Exactly
    zero when B = 0.
    """
    grid = state.grid
    bt = np.swapaxes(state.B, -1, -2)
    lap_u = np.einsum("...mjj->...m", hess_u)
    out = -np.einsum("...ij,...j->...i", bt, du_dt)
    out += mu * np.einsum("...ij,...j->...i", bt, lap_u)

    s = np.einsum("...ji,...ij->...", state.calB, grad_u)  # calB^T : grad u
    if np.any(s):
        grad_s = inverse_transform(
            SpectralField(grid, np.stack(
                [derivative(forward_transform(grid, s), a).data
                 for a in range(grid.dim)], axis=-1)))
        out += mu * grad_s

    if np.any(state.calB):
        grad_calb = _grad_of_matrix_field(grid, state.calB)
        lam = lambda_correction(state.calB, grad_calb, grad_u, hess_u)
        out += mu * (lam + np.einsum("...ij,...j->...i", bt, lam))
    return forward_transform(grid, out)


def nonlinear_G(state: DeformationState, grad_u: np.ndarray) -> SpectralField:
    """Divergence correction G = -calB^T : grad u (scalar field)."""
    g = -np.einsum("...ji,...ij->...", state.calB, grad_u)
    return forward_transform(state.grid, g)


def nonlinear_Gvec(state: DeformationState, u: np.ndarray) -> SpectralField:
    """Vector potential of the divergence correction: -calB u."""
    gv = -np.einsum("...ij,...j->...i", state.calB, u)
    return forward_transform(state.grid, gv)


def nonlinear_H(state: DeformationState, grad_u: np.ndarray,
                mu: float) -> tuple[SpectralField, SpectralField]:
    """Boundary-stress correction matrix and its e_N column.

    H = -mu [ D(u) calB^T + (G calB + B^T G (I + calB)) (I + calB^T) ]
    with G the velocity Jacobian (d_j u_i); the second return value is
    H e_N as a vector field whose top-boundary values feed the linear
    solver.  Pulling the moving-boundary load back through the deformed
    normal reproduces the flat-boundary stress minus exactly this term.
    """
    grid = state.grid
    hm = stress_correction(state.B, state.calB, grad_u, mu)
    h_mat = forward_transform(grid, hm)
    h_en = forward_transform(grid, hm[..., :, grid.dim - 1])
    return h_mat, h_en


# -- flow map ----------------------------------------------------------------


@dataclass
class FlowMap:
    grid: LayerGrid
    step: float
    times: np.ndarray
    thetas: list      # physical particle positions per sample, (..., N)
    jacobians: list   # grad Theta = I + B per sample, (..., N, N)
    grad_sup: np.ndarray  # max-norm of grad u per sample


def flow_map(trajectory: Trajectory) -> FlowMap:
    """Integrate particle positions Theta = xi + int u dt by the trapezoid rule."""
    if len(trajectory) == 0:
        raise ValueError("empty trajectory")
    grid = trajectory.grid
    tau = trajectory.step
    mesh = np.stack(grid.meshgrid(), axis=-1)
    n = grid.dim
    theta = mesh.copy()
    jac = np.broadcast_to(np.eye(n), grid.physical_shape((n, n))).copy()
    thetas = [theta.copy()]
    jacs = [jac.copy()]
    grads = []
    prev_u = prev_g = None
    sup = []
    for u_field in trajectory.velocities:
        u = inverse_transform(u_field)
        g = inverse_transform(vector_gradient(u_field))
        grads.append(g)
        sup.append(float(np.max(np.abs(g))))
        if prev_u is not None:
            theta = theta + 0.5 * tau * (prev_u + u)
            jac = jac + 0.5 * tau * (prev_g + g)
            thetas.append(theta.copy())
            jacs.append(jac.copy())
        prev_u, prev_g = u, g
    return FlowMap(grid=grid, step=tau, times=trajectory.times.copy(),
                   thetas=thetas, jacobians=jacs, grad_sup=np.array(sup))


@dataclass
class JacobianReport:
    min_singular_value: float
    max_det_deviation: float
    integrated_gradient: float
    passed: bool


def jacobian_diagnostics(fmap: FlowMap) -> JacobianReport:
    """Bijectivity indicators of the flow map over the whole run.

    PASS means the small-deformation implication held: whenever the
    accumulated gradient stays below 1/4 the Jacobian keeps singular values
    at least 3/4 (checked on the samples, not assumed).
    """
    msv = np.inf
    max_dev = 0.0
    for jac in fmap.jacobians:
        sv = np.linalg.svd(jac, compute_uv=False)
        msv = min(msv, float(sv.min()))
        det = np.linalg.det(jac)
        max_dev = max(max_dev, float(np.max(np.abs(det - 1.0))))
    integrated = float(fmap.step * np.sum(fmap.grad_sup[:-1]))
    passed = (integrated > 0.25) or (msv >= 0.75)
    return JacobianReport(min_singular_value=msv, max_det_deviation=max_dev,
                          integrated_gradient=integrated, passed=passed)


@dataclass
class EulerianSamples:
    positions: np.ndarray
    velocity: np.ndarray
    pressure: np.ndarray
    jacobian_det: np.ndarray


def push_forward(u: SpectralField, p: SpectralField, fmap: FlowMap,
                 t: float) -> EulerianSamples:
    """Sample the Eulerian fields on the displaced particle positions.

    v(Theta(xi, t), t) = u(xi, t), so forward sampling needs no inversion of
    the flow map; the Jacobian determinant rides along for change-of-variables
    quadrature.
    """
    idx = np.flatnonzero(np.isclose(fmap.times, t, rtol=0, atol=1e-12 * max(1.0, abs(t))))
    if idx.size == 0:
        raise ValueError(f"time {t} is not a flow-map sample")
    n = int(idx[0])
    det = np.linalg.det(fmap.jacobians[n])
    if np.min(np.abs(det)) < 1e-8:
        raise DegenerateDeformationError("flow-map Jacobian is numerically singular")
    return EulerianSamples(
        positions=fmap.thetas[n],
        velocity=inverse_transform(u),
        pressure=inverse_transform(p),
        jacobian_det=det,
    )


def eulerian_lq_norm(samples: EulerianSamples, grid: LayerGrid, q: float = 2.0) -> float:
    """L_q norm over the displaced domain: quadrature weighted by |det grad Theta|."""
    mag2 = _pointwise_sq(samples.velocity, grid)
    return _quadrature(grid, mag2 ** (q / 2.0) * np.abs(samples.jacobian_det)) ** (1.0 / q)
