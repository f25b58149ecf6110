"""Helmholtz decomposition on the layer.

Splits a vector field into a solenoidal part (zero weak divergence, zero
normal trace on the rigid bottom; the top trace is unconstrained) and the
gradient of a potential vanishing on the top boundary.  The potential's
Dirichlet condition fixes the gauge, so the splitting is unique.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import bottom_trace, gradient
from .grid import SpectralField
from .norms import discrete_lq_norm, sobolev_norm
from .weak_dn import solve_weak_dn

__all__ = ["project", "idempotency_check", "HelmholtzParts", "IdempotencyReport"]


@dataclass
class HelmholtzParts:
    p_part: SpectralField   # solenoidal component
    potential: SpectralField  # scalar potential of the gradient component


def project(f: SpectralField) -> HelmholtzParts:
    """Split f = p_part + grad(potential).

    The potential solves the weak Dirichlet-Neumann problem with data f, so
    the remainder is weakly divergence free and has zero normal trace on the
    bottom by construction.
    """
    potential = solve_weak_dn(f)
    p_part = f - gradient(potential)
    return HelmholtzParts(p_part=p_part, potential=potential)


@dataclass
class IdempotencyReport:
    residual: float
    passed: bool


def idempotency_check(f: SpectralField, tol: float = 1e-10) -> IdempotencyReport:
    """Verify project(project(f).p_part).p_part == project(f).p_part."""
    once = project(f).p_part
    twice = project(once).p_part
    scale = discrete_lq_norm(once, 2.0)
    gap = discrete_lq_norm(twice - once, 2.0)
    residual = gap / scale if scale > 0 else gap
    return IdempotencyReport(residual=residual, passed=residual < tol)


def boundedness_constants(f: SpectralField, q: float = 2.0) -> dict:
    """Measured stability constants of the splitting for one input field."""
    parts = project(f)
    nf = discrete_lq_norm(f, q)
    return {
        "p_norm": discrete_lq_norm(parts.p_part, q),
        "potential_w1q": sobolev_norm(parts.potential, q, 1),
        "input_norm": nf,
        "constant": (discrete_lq_norm(parts.p_part, q)
                     + sobolev_norm(parts.potential, q, 1)) / nf if nf > 0 else 0.0,
        "normal_trace": float(np.max(np.abs(
            bottom_trace(SpectralField(f.grid, parts.p_part.data[..., f.grid.dim - 1]))
        ))),
    }
