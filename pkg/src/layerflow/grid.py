"""Discretization substrate for the periodic fluid layer.

The domain is a layer 0 < z < d, periodic with period ``L`` in each of the
``dim - 1`` horizontal directions (dim is 2 or 3).  Horizontal directions are
discretized by a uniform Fourier grid, the vertical by Chebyshev-Gauss-Lobatto
collocation mapped to [0, d], so z = 0 (rigid bottom) and z = d (free top) are
exact grid nodes.

Array conventions used throughout the package:

* physical arrays: shape ``(nx[, ny], nz)`` plus trailing component axes;
  a vector field is ``(..., N)``, a matrix field ``(..., N, N)`` with
  ``(grad u)[..., i, j] = d u_i / d x_j``.  Derivative axes are appended last.
* spectral arrays: same shape, complex; the horizontal axes hold FFT modes in
  numpy ordering, normalized so the k-th coefficient is the Fourier
  coefficient of exp(i k . 2 pi x / L).
* for real physical fields the spectral data is Hermitian (coefficient at -k
  equals the conjugate at k) and the Nyquist column is zeroed.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "LayerGrid",
    "SpectralField",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "vertical_derivative",
    "horizontal_derivative",
    "hermitian_residual",
]


def _cheb_nodes_matrix(M: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Lobatto nodes cos(j*pi/M) (descending) and differentiation matrix."""
    if M == 0:
        return np.array([1.0]), np.zeros((1, 1))
    j = np.arange(M + 1)
    x = np.cos(np.pi * j / M)
    c = np.ones(M + 1)
    c[0] = c[M] = 2.0
    c = c * (-1.0) ** j
    X = np.tile(x, (M + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(M + 1))
    D = D - np.diag(D.sum(axis=1))
    return x, D


def _clenshaw_curtis_weights(M: int) -> np.ndarray:
    """Clenshaw-Curtis weights on [-1, 1] for the M+1 Gauss-Lobatto nodes.

    Exact for polynomials of degree <= M.
    """
    if M == 0:
        return np.array([2.0])
    j = np.arange(M + 1)
    w = np.zeros(M + 1)
    ks = np.arange(1, M // 2 + 1)
    b = np.where(2 * ks == M, 1.0, 2.0)
    # w_j = (c_j/M) * (1 - sum_k b_k cos(2 k j pi / M) / (4k^2 - 1))
    s = (b / (4.0 * ks**2 - 1.0)) @ np.cos(2.0 * np.pi * np.outer(ks, j) / M)
    c = np.full(M + 1, 2.0)
    c[0] = c[M] = 1.0
    w = (c / M) * (1.0 - s)
    return w


class LayerGrid:
    """Grid for the periodic layer: Fourier in x (and y), Chebyshev in z.

    Parameters
    ----------
    dim : 2 or 3
        Spatial dimension N; there are N-1 horizontal directions.
    depth : float
        Layer depth d > 0; vertical nodes span [0, d].
    period : float
        Horizontal period L > 0 (same in each horizontal direction).
    n_horizontal : int
        Even number of uniform points per horizontal direction.
    n_vertical : int
        Number of Gauss-Lobatto collocation nodes on [0, d] (>= 2).
    """

    def __init__(self, dim: int, depth: float, period: float,
                 n_horizontal: int, n_vertical: int):
        if dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {dim}")
        if depth <= 0 or period <= 0:
            raise ValueError("depth and period must be positive")
        if n_horizontal < 2 or n_horizontal % 2 != 0:
            raise ValueError(f"n_horizontal must be even and >= 2, got {n_horizontal}")
        if n_vertical < 2:
            raise ValueError(f"n_vertical must be >= 2, got {n_vertical}")

        self.dim = dim
        self.depth = float(depth)
        self.period = float(period)
        self.n_horizontal = int(n_horizontal)
        self.n_vertical = int(n_vertical)

        M = n_vertical - 1
        x, D = _cheb_nodes_matrix(M)
        # z = d (1 - x) / 2 maps descending x in [-1,1] to ascending z in [0,d]
        self.vertical_nodes = self.depth * (1.0 - x) / 2.0
        self.vertical_nodes[0] = 0.0
        self.vertical_nodes[-1] = self.depth
        self.diff1 = -(2.0 / self.depth) * D
        self.diff2 = self.diff1 @ self.diff1
        self.cc_weights = (self.depth / 2.0) * _clenshaw_curtis_weights(M)

        n = self.n_horizontal
        k_int = np.rint(np.fft.fftfreq(n) * n).astype(int)
        self._k_int = k_int
        self.n_axes = dim - 1
        self.horizontal_shape = (n,) * self.n_axes
        self.z_axis = self.n_axes  # axis index of the vertical direction

        # frequency arrays broadcastable over the horizontal shape, one per axis
        xi_1d = 2.0 * np.pi * k_int / self.period
        self.xi_axes = []
        for a in range(self.n_axes):
            shape = [1] * self.n_axes
            shape[a] = n
            self.xi_axes.append(xi_1d.reshape(shape))
        self.xi2 = sum(x**2 for x in self.xi_axes) * np.ones(self.horizontal_shape)

        nyq = np.zeros(self.horizontal_shape, dtype=bool)
        for a in range(self.n_axes):
            shape = [1] * self.n_axes
            shape[a] = n
            nyq |= (np.abs(k_int) == n // 2).reshape(shape)
        self.nyquist_mask = nyq

        self.mode_count = n ** self.n_axes
        # per-mode frequency vectors, flattened in C order
        self.xi_flat = np.stack(
            [np.broadcast_to(x, self.horizontal_shape).ravel() for x in self.xi_axes],
            axis=-1,
        )
        self.xi2_flat = self.xi2.ravel()
        self.horizontal_weight = (self.period / n) ** self.n_axes

        # solver-level factorization caches, keyed by the consuming module
        self._cache: dict = {}

    # -- coordinates -----------------------------------------------------

    def horizontal_coords(self) -> list[np.ndarray]:
        n = self.n_horizontal
        x = np.linspace(0.0, self.period, n, endpoint=False)
        return [x] * self.n_axes

    def meshgrid(self) -> list[np.ndarray]:
        """Physical coordinate arrays of shape (nx[, ny], nz), one per dimension."""
        axes = self.horizontal_coords() + [self.vertical_nodes]
        return list(np.meshgrid(*axes, indexing="ij"))

    def physical_shape(self, components: tuple[int, ...] = ()) -> tuple[int, ...]:
        return self.horizontal_shape + (self.n_vertical,) + components

    # -- vertical helpers ------------------------------------------------

    def apply_vertical(self, mat: np.ndarray, data: np.ndarray) -> np.ndarray:
        """Apply an (nz, nz) matrix along the vertical axis of ``data``."""
        moved = np.moveaxis(data, self.z_axis, 0)
        out = np.tensordot(mat, moved, axes=(1, 0))
        return np.moveaxis(out, 0, self.z_axis)

    def boundary_slice(self, data: np.ndarray, top: bool) -> np.ndarray:
        """Values of ``data`` on the top (z=d) or bottom (z=0) boundary."""
        idx = (slice(None),) * self.z_axis + (-1 if top else 0,)
        return data[idx]

    def interpolation_matrix(self, z_targets: np.ndarray) -> np.ndarray:
        """Barycentric interpolation matrix from the vertical nodes to z_targets."""
        z = self.vertical_nodes
        M = self.n_vertical - 1
        lam = (-1.0) ** np.arange(M + 1)
        lam[0] *= 0.5
        lam[-1] *= 0.5
        zt = np.asarray(z_targets, dtype=float)
        diff = zt[:, None] - z[None, :]
        exact = np.isclose(diff, 0.0, atol=1e-14)
        safe = np.where(exact, 1.0, diff)
        w = lam[None, :] / safe
        w[exact.any(axis=1)] = 0.0
        w[exact] = 1.0
        return w / w.sum(axis=1, keepdims=True)

    def unique_xi2(self) -> tuple[np.ndarray, np.ndarray]:
        """Unique squared frequency magnitudes and the per-mode index into them."""
        return np.unique(self.xi2_flat, return_inverse=True)

    def __repr__(self):
        return (f"LayerGrid(dim={self.dim}, depth={self.depth}, period={self.period}, "
                f"n_horizontal={self.n_horizontal}, n_vertical={self.n_vertical})")


def make_grid(dim: int, depth: float, period: float,
              n_horizontal: int, n_vertical: int) -> LayerGrid:
    """Construct a :class:`LayerGrid`; rejects odd horizontal counts and bad sizes."""
    return LayerGrid(dim, depth, period, n_horizontal, n_vertical)


class SpectralField:
    """Complex mode x vertical-node coefficient array on a :class:`LayerGrid`.

    ``data`` has shape ``grid.horizontal_shape + (nz,)`` plus 0/1/2 trailing
    component axes (scalar/vector/matrix rank).  Value semantics: arithmetic
    returns new fields, inputs are never mutated.
    """

    __slots__ = ("grid", "data")

    def __init__(self, grid: LayerGrid, data: np.ndarray):
        data = np.asarray(data)
        base = grid.horizontal_shape + (grid.n_vertical,)
        if data.shape[: grid.dim] != base:
            raise ValueError(
                f"field shape {data.shape} does not match grid {base}")
        if data.ndim - grid.dim > 3:
            raise ValueError("too many component axes")
        self.grid = grid
        self.data = np.ascontiguousarray(data, dtype=complex)

    @classmethod
    def zeros(cls, grid: LayerGrid, components: tuple[int, ...] = ()) -> "SpectralField":
        return cls(grid, np.zeros(grid.physical_shape(components), dtype=complex))

    @property
    def rank(self) -> str:
        # rank-3 arises only internally (stacked second derivatives)
        return ("scalar", "vector", "matrix", "tensor")[self.data.ndim - self.grid.dim]

    @property
    def component_shape(self) -> tuple[int, ...]:
        return self.data.shape[self.grid.dim:]

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.data.copy())

    def _binary(self, other, op):
        if not isinstance(other, SpectralField):
            return NotImplemented
        if other.grid is not self.grid and (
                other.grid.horizontal_shape != self.grid.horizontal_shape
                or other.grid.n_vertical != self.grid.n_vertical):
            raise ValueError("fields live on different grids")
        return SpectralField(self.grid, op(self.data, other.data))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return SpectralField(self.grid, -self.data)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float, complex)):
            return SpectralField(self.grid, self.data * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __repr__(self):
        return f"SpectralField(rank={self.rank}, shape={self.data.shape})"


def _horizontal_axes(grid: LayerGrid) -> tuple[int, ...]:
    return tuple(range(grid.n_axes))


def forward_transform(grid: LayerGrid, values: np.ndarray) -> SpectralField:
    """Physical samples -> spectral coefficients.

    Normalized so that constants map to the k=0 coefficient.  The Nyquist
    columns are zeroed: real fields are band-limited to resolvable symmetric
    modes, which keeps horizontal derivatives Hermitian.
    """
    values = np.asarray(values)
    base = grid.horizontal_shape + (grid.n_vertical,)
    if values.shape[: grid.dim] != base:
        raise ValueError(f"sample shape {values.shape} does not match grid {base}")
    hat = np.fft.fftn(values, axes=_horizontal_axes(grid)) / grid.mode_count
    mask = grid.nyquist_mask
    extra = hat.ndim - grid.n_axes
    hat = hat * (~mask).reshape(mask.shape + (1,) * extra)
    return SpectralField(grid, hat)


def inverse_transform(field: SpectralField) -> np.ndarray:
    """Spectral coefficients -> physical samples.

    Returns a real array when the coefficients are (numerically) Hermitian,
    otherwise the complex samples.
    """
    grid = field.grid
    out = np.fft.ifftn(field.data, axes=_horizontal_axes(grid)) * grid.mode_count
    scale = np.max(np.abs(out)) if out.size else 0.0
    if scale == 0.0 or np.max(np.abs(out.imag)) <= 1e-10 * scale:
        return np.ascontiguousarray(out.real)
    return out


def vertical_derivative(field: SpectralField, order: int = 1) -> SpectralField:
    """Spectral-collocation d/dz (order 1) or d^2/dz^2 (order 2)."""
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if field.grid.n_vertical < order + 2:
        raise ValueError("not enough vertical nodes for this derivative order")
    mat = field.grid.diff1 if order == 1 else field.grid.diff2
    return SpectralField(field.grid, field.grid.apply_vertical(mat, field.data))


def horizontal_derivative(field: SpectralField, axis: int) -> SpectralField:
    """Derivative along horizontal axis ``axis`` (0-based) via i*xi multipliers."""
    grid = field.grid
    if not 0 <= axis < grid.n_axes:
        raise ValueError(f"horizontal axis {axis} out of range for dim={grid.dim}")
    xi = grid.xi_axes[axis]
    extra = field.data.ndim - grid.n_axes
    mult = (1j * xi).reshape(xi.shape + (1,) * extra)
    return SpectralField(grid, field.data * mult)


def hermitian_residual(field: SpectralField) -> float:
    """Max deviation from Hermitian symmetry, relative to the largest coefficient."""
    data = field.data
    flipped = data
    for a in _horizontal_axes(field.grid):
        flipped = np.flip(np.roll(flipped, -1, axis=a), axis=a)
    scale = np.max(np.abs(data))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(data - np.conj(flipped))) / scale)
