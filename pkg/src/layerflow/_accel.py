"""Backend dispatch for the pointwise hot kernels.

Set ``LAYERFLOW_BACKEND=numpy`` to force the pure-numpy path,
``LAYERFLOW_BACKEND=numba`` to require the jitted path; the default (``auto``)
uses numba when it is importable.  Both paths implement identical contracts;
``benchmarks/bench_backends.py`` compares them.
"""

from __future__ import annotations

import os

import numpy as np

_choice = os.environ.get("LAYERFLOW_BACKEND", "auto").lower()
if _choice not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"LAYERFLOW_BACKEND must be auto, numba or numpy, got {_choice!r}")

if _choice == "numpy":
    from . import _accel_numpy as _impl
else:
    try:
        from . import _accel_numba as _impl
    except ImportError:
        if _choice == "numba":
            raise
        from . import _accel_numpy as _impl

BACKEND = _impl.BACKEND_NAME

__all__ = ["BACKEND", "matrix_inverse_det", "lambda_correction", "stress_correction"]


def _flatten(arr: np.ndarray, comp_dims: int) -> tuple[np.ndarray, tuple[int, ...]]:
    lead = arr.shape[: arr.ndim - comp_dims]
    flat = np.ascontiguousarray(arr.reshape((-1,) + arr.shape[arr.ndim - comp_dims:]))
    return flat, lead


def matrix_inverse_det(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise inverse and determinant of a (..., N, N) matrix field."""
    flat, lead = _flatten(np.asarray(mats, dtype=float), 2)
    inv, det = _impl.inv_det(flat)
    return inv.reshape(mats.shape), det.reshape(lead)


def lambda_correction(calb: np.ndarray, grad_calb: np.ndarray,
                      grad_u: np.ndarray, hess_u: np.ndarray) -> np.ndarray:
    """Transformed-Laplacian correction (second+first order) as a (..., N) field."""
    n = calb.shape[-1]
    cb, lead = _flatten(np.asarray(calb, dtype=float), 2)
    gcb, _ = _flatten(np.asarray(grad_calb, dtype=float), 3)
    gu, _ = _flatten(np.asarray(grad_u, dtype=float), 2)
    hu, _ = _flatten(np.asarray(hess_u, dtype=float), 3)
    out = _impl.lambda_terms(cb, gcb, gu, hu)
    return out.reshape(lead + (n,))


def stress_correction(b: np.ndarray, calb: np.ndarray,
                      grad_u: np.ndarray, mu: float) -> np.ndarray:
    """Pointwise boundary-stress correction matrix field (..., N, N)."""
    bf, lead = _flatten(np.asarray(b, dtype=float), 2)
    cb, _ = _flatten(np.asarray(calb, dtype=float), 2)
    gu, _ = _flatten(np.asarray(grad_u, dtype=float), 2)
    out = _impl.boundary_stress_matrix(bf, cb, gu, float(mu))
    return out.reshape(lead + b.shape[-2:])
