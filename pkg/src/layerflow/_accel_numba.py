"""Numba implementations of the pointwise hot kernels.

Same contracts as :mod:`._accel_numpy`; loops are serial so results do not
depend on thread count.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BACKEND_NAME = "numba"


@njit(cache=True)
def inv_det(a):
    p, n = a.shape[0], a.shape[1]
    inv = np.empty_like(a)
    det = np.empty(p, dtype=a.dtype)
    if n == 2:
        for i in range(p):
            d = a[i, 0, 0] * a[i, 1, 1] - a[i, 0, 1] * a[i, 1, 0]
            det[i] = d
            inv[i, 0, 0] = a[i, 1, 1] / d
            inv[i, 0, 1] = -a[i, 0, 1] / d
            inv[i, 1, 0] = -a[i, 1, 0] / d
            inv[i, 1, 1] = a[i, 0, 0] / d
    elif n == 3:
        for i in range(p):
            c00 = a[i, 1, 1] * a[i, 2, 2] - a[i, 1, 2] * a[i, 2, 1]
            c01 = a[i, 1, 2] * a[i, 2, 0] - a[i, 1, 0] * a[i, 2, 2]
            c02 = a[i, 1, 0] * a[i, 2, 1] - a[i, 1, 1] * a[i, 2, 0]
            d = a[i, 0, 0] * c00 + a[i, 0, 1] * c01 + a[i, 0, 2] * c02
            det[i] = d
            inv[i, 0, 0] = c00 / d
            inv[i, 1, 0] = c01 / d
            inv[i, 2, 0] = c02 / d
            inv[i, 0, 1] = (a[i, 0, 2] * a[i, 2, 1] - a[i, 0, 1] * a[i, 2, 2]) / d
            inv[i, 1, 1] = (a[i, 0, 0] * a[i, 2, 2] - a[i, 0, 2] * a[i, 2, 0]) / d
            inv[i, 2, 1] = (a[i, 0, 1] * a[i, 2, 0] - a[i, 0, 0] * a[i, 2, 1]) / d
            inv[i, 0, 2] = (a[i, 0, 1] * a[i, 1, 2] - a[i, 0, 2] * a[i, 1, 1]) / d
            inv[i, 1, 2] = (a[i, 0, 2] * a[i, 1, 0] - a[i, 0, 0] * a[i, 1, 2]) / d
            inv[i, 2, 2] = (a[i, 0, 0] * a[i, 1, 1] - a[i, 0, 1] * a[i, 1, 0]) / d
    else:
        for i in range(p):
            inv[i] = np.linalg.inv(a[i])
            det[i] = np.linalg.det(a[i])
    return inv, det


@njit(cache=True)
def lambda_terms(calb, grad_calb, grad_u, hess_u):
    p, n = calb.shape[0], calb.shape[1]
    out = np.zeros((p, n), dtype=calb.dtype)
    for q in range(p):
        for j in range(n):
            for k in range(n):
                c2 = 2.0 * calb[q, j, k]
                for i in range(n):
                    c2 += calb[q, j, i] * calb[q, k, i]
                for m in range(n):
                    out[q, m] += c2 * hess_u[q, m, j, k]
        for k in range(n):
            c1 = 0.0
            for j in range(n):
                c1 += grad_calb[q, k, j, j]
                for i in range(n):
                    c1 += calb[q, j, i] * grad_calb[q, k, i, j]
            for m in range(n):
                out[q, m] += c1 * grad_u[q, m, k]
    return out


@njit(cache=True)
def boundary_stress_matrix(b, calb, grad_u, mu):
    p, n = b.shape[0], b.shape[1]
    out = np.empty_like(b)
    inner = np.empty((n, n), dtype=b.dtype)
    for q in range(p):
        # inner = G calb + b^T G (I + calb), G[i, j] = d_j u_i
        for i in range(n):
            for j in range(n):
                s = 0.0
                for k in range(n):
                    s += grad_u[q, i, k] * calb[q, k, j]
                for k in range(n):
                    for l in range(n):
                        ident = 1.0 if l == j else 0.0
                        s += b[q, k, i] * grad_u[q, k, l] * (ident + calb[q, l, j])
                inner[i, j] = s
        # out = -mu [ D(u) calb^T + inner (I + calb^T) ]
        for i in range(n):
            for j in range(n):
                s = 0.0
                for k in range(n):
                    dik = grad_u[q, i, k] + grad_u[q, k, i]
                    s += dik * calb[q, j, k]
                for k in range(n):
                    ident = 1.0 if k == j else 0.0
                    s += inner[i, k] * (ident + calb[q, j, k])
                out[q, i, j] = -mu * s
    return out
