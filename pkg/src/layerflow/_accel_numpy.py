"""Pure-numpy implementations of the pointwise hot kernels.

All functions take point-flattened arrays: matrices are (P, N, N), vectors
(P, N), third-order stacks (P, N, N, N) with derivative axes last.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def inv_det(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched inverse and determinant of small square matrices."""
    return np.linalg.inv(a), np.linalg.det(a)


def lambda_terms(calb: np.ndarray, grad_calb: np.ndarray,
                 grad_u: np.ndarray, hess_u: np.ndarray) -> np.ndarray:
    """Second- and first-order correction terms of the transformed Laplacian.

    out_m = sum_{jk} (2 calb_jk + (calb calb^T)_jk) d_j d_k u_m
          + sum_k (sum_j d_j calb_kj + sum_ij calb_ji d_j calb_ki) d_k u_m

    with grad_calb[p, k, i, j] = d_j calb_ki and hess_u[p, m, j, k] = d_j d_k u_m.
    """
    c2 = 2.0 * calb + np.einsum("pji,pki->pjk", calb, calb)
    out = np.einsum("pjk,pmjk->pm", c2, hess_u)
    c1 = np.einsum("pkjj->pk", grad_calb)
    c1 = c1 + np.einsum("pji,pkij->pk", calb, grad_calb)
    out += np.einsum("pk,pmk->pm", c1, grad_u)
    return out


def boundary_stress_matrix(b: np.ndarray, calb: np.ndarray,
                           grad_u: np.ndarray, mu: float) -> np.ndarray:
    """Stress correction -mu [D(u) calb^T + (G calb + b^T G (I + calb))
    (I + calb^T)] with G[i, j] = d_j u_i.

    Derived by pulling the moving-boundary load back to the reference top
    through the deformed normal; the derivation contracts the velocity
    Jacobian in this orientation.
    """
    n = b.shape[-1]
    eye = np.eye(n)
    d = grad_u + np.swapaxes(grad_u, -1, -2)
    inner = grad_u @ calb + np.swapaxes(b, -1, -2) @ grad_u @ (eye + calb)
    return -mu * (d @ np.swapaxes(calb, -1, -2) + inner @ (eye + np.swapaxes(calb, -1, -2)))
