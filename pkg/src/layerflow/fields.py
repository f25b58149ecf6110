"""Field constructors: manufactured profiles, initial-data presets, randoms.

Divergence-free data is built from stream functions psi with psi = d_z psi = 0
on the bottom, so u = (d_z psi, -d_x psi) satisfies no-slip exactly; the cubic
profile coefficient is chosen to cancel the tangential stress on the top,
which puts the field in the discrete domain of the Stokes operator.

Random smooth fields are sums of harmonic-times-polynomial terms drawn once
from an rng; the same :class:`SmoothFieldSpec` can be evaluated on grids of
different resolution, which is what the refinement studies need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import LayerGrid, SpectralField, forward_transform

__all__ = [
    "stream_profile",
    "single_mode_field",
    "random_solenoidal_field",
    "SmoothFieldSpec",
    "smooth_field_spec",
    "random_smooth_field",
    "initial_data",
]


def stream_profile(grid: LayerGrid, xi: float) -> tuple[np.ndarray, np.ndarray]:
    """Vertical profile z^2 (1 + c z) and its derivative; c kills the top
    tangential stress (phi'' + xi^2 phi = 0 at z = d) for harmonic xi."""
    d = grid.depth
    z = grid.vertical_nodes
    c = -(2.0 + xi**2 * d**2) / (6.0 * d + xi**2 * d**3)
    phi = z**2 * (1.0 + c * z)
    dphi = 2.0 * z + 3.0 * c * z**2
    return phi, dphi


def _stream_velocity(grid: LayerGrid, k: int, amp: float, phase: float,
                     horizontal_axis: int = 0) -> np.ndarray:
    """Velocity of amp * sin(xi x + phase) * phi(z) as a physical array."""
    xi = 2.0 * np.pi * k / grid.period
    mesh = grid.meshgrid()
    x = mesh[horizontal_axis]
    z = mesh[-1]
    phi, dphi = stream_profile(grid, xi)
    shape = (1,) * grid.n_axes + (-1,)
    phi = phi.reshape(shape) * np.ones_like(z)
    dphi = dphi.reshape(shape) * np.ones_like(z)
    u = np.zeros(grid.physical_shape((grid.dim,)))
    u[..., horizontal_axis] = amp * np.sin(xi * x + phase) * dphi
    u[..., grid.dim - 1] = -amp * xi * np.cos(xi * x + phase) * phi
    return u


def single_mode_field(grid: LayerGrid, amplitude: float = 1.0,
                      k: int = 1) -> SpectralField:
    """Divergence-free single-harmonic field in the Stokes operator domain,
    scaled so that its physical maximum equals ``amplitude``."""
    u = _stream_velocity(grid, k, 1.0, 0.0)
    peak = np.max(np.abs(u))
    if peak > 0:
        u *= amplitude / peak
    return forward_transform(grid, u)


def random_solenoidal_field(grid: LayerGrid, rng: np.random.Generator,
                            amplitude: float = 1.0, n_modes: int = 3) -> SpectralField:
    """Random combination of stream-function modes; exactly divergence free,
    no-slip on the bottom, tangential-stress free on the top.

    Includes a horizontal mean-shear component (the k = 0 profile), which is
    the slowest-decaying admissible mode; without it, norm tails bend once
    round-off repopulates it.
    """
    u = np.zeros(grid.physical_shape((grid.dim,)))
    kmax = max(1, grid.n_horizontal // 2 - 1)
    z = grid.vertical_nodes
    _, dphi0 = stream_profile(grid, 0.0)
    mean_profile = dphi0.reshape((1,) * grid.n_axes + (-1,)) * np.ones(
        grid.physical_shape())
    for axis in range(grid.n_axes):
        u[..., axis] += rng.normal() * mean_profile
    for _ in range(n_modes):
        for axis in range(grid.n_axes):
            k = int(rng.integers(1, min(kmax, 4) + 1))
            amp = rng.normal()
            phase = rng.uniform(0.0, 2.0 * np.pi)
            u += _stream_velocity(grid, k, amp, phase, horizontal_axis=axis)
    peak = np.max(np.abs(u))
    if peak > 0:
        u *= amplitude / peak
    return forward_transform(grid, u)


@dataclass
class SmoothFieldSpec:
    """Grid-independent description of a smooth field on the layer.

    Each term is amp * prod_a cos(2 pi k_a x_a / L + phase_a) * poly(z / d)
    for one component; evaluating on any grid samples the same function.
    """

    dim: int
    components: tuple[int, ...]
    terms: list  # (comp_index, k per axis, phases per axis, amp, poly coeffs)

    def evaluate(self, grid: LayerGrid) -> SpectralField:
        if grid.dim != self.dim:
            raise ValueError("grid dimension does not match the field spec")
        mesh = grid.meshgrid()
        zn = mesh[-1] / grid.depth
        out = np.zeros(grid.physical_shape(self.components))
        for comp, ks, phases, amp, coeffs in self.terms:
            term = amp * np.polyval(coeffs, zn)
            for a, (k, ph) in enumerate(zip(ks, phases)):
                term = term * np.cos(2.0 * np.pi * k * mesh[a] / grid.period + ph)
            out[(...,) + comp] += term
        return forward_transform(grid, out)


def smooth_field_spec(rng: np.random.Generator, dim: int,
                      components: tuple[int, ...] = (), n_terms: int = 4,
                      max_k: int = 3, poly_degree: int = 5) -> SmoothFieldSpec:
    """Draw a random :class:`SmoothFieldSpec` (band-limited, low poly degree)."""
    comp_indices = list(np.ndindex(components)) if components else [()]
    terms = []
    for comp in comp_indices:
        for _ in range(n_terms):
            ks = tuple(int(k) for k in rng.integers(0, max_k + 1, size=dim - 1))
            phases = tuple(float(p) for p in rng.uniform(0, 2 * np.pi, size=dim - 1))
            amp = float(rng.normal())
            coeffs = rng.normal(size=poly_degree + 1) / (1.0 + np.arange(poly_degree + 1))
            terms.append((comp, ks, phases, amp, coeffs))
    return SmoothFieldSpec(dim=dim, components=components, terms=terms)


def random_smooth_field(grid: LayerGrid, rng: np.random.Generator,
                        components: tuple[int, ...] = (),
                        n_terms: int = 4) -> SpectralField:
    """Random smooth real field sampled on ``grid``."""
    kmax = min(3, grid.n_horizontal // 2 - 1)
    spec = smooth_field_spec(rng, grid.dim, components, n_terms, max_k=kmax)
    return spec.evaluate(grid)


def initial_data(name: str, grid: LayerGrid, rng: np.random.Generator,
                 amplitude: float = 1.0) -> SpectralField:
    """Named initial-data presets used by the scenario driver."""
    if name == "zero":
        return SpectralField.zeros(grid, (grid.dim,))
    if name == "single_mode":
        return single_mode_field(grid, amplitude)
    if name == "random_solenoidal":
        return random_solenoidal_field(grid, rng, amplitude)
    raise ValueError(f"unknown initial_data preset {name!r}")
