"""Closed-form scalar kernels for the layer potential theory, plus a
finite-difference checker for Fourier-multiplier symbol bounds."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "residue_kernel_pair",
    "layer_harmonic_kernel",
    "symbol_bound_check",
    "SymbolBoundReport",
]


def residue_kernel_pair(a: float, xi_mag: float) -> tuple[float, float]:
    """Vertical-frequency integrals of 1/|xi|^2 and i xi_N/|xi|^2.

    For a != 0 and |xi'| > 0:

        int e^{i a s} / (|xi'|^2 + s^2) ds       = pi e^{-|a| |xi'|} / |xi'|
        int i s e^{i a s} / (|xi'|^2 + s^2) ds   = -pi e^{-|a| |xi'|} sign(a)

    The first is even in a, the second odd.
    """
    if a == 0:
        raise ValueError("a must be nonzero")
    if xi_mag <= 0:
        raise ValueError(f"xi_mag must be positive, got {xi_mag}")
    decay = np.exp(-abs(a) * xi_mag)
    return float(np.pi * decay / xi_mag), float(-np.pi * decay * np.sign(a))


def layer_harmonic_kernel(branch: int, x_n: float, y: float,
                          xi_mag: float, depth: float) -> float:
    """Harmonic-correction kernel e^{-|xi'| (y + (-1)^k x_N)} / (1 + e^{-2 |xi'| d}).

    ``branch`` selects k in {1, 2} (decaying from the top and the bottom
    image).  At xi_mag = 0 the limit value 1/2 is returned.  Admissible
    arguments satisfy y + (-1)^k x_N >= 0, which keeps the value in (0, 1].
    """
    if branch not in (1, 2):
        raise ValueError(f"branch must be 1 or 2, got {branch}")
    if depth <= 0:
        raise ValueError("depth must be positive")
    if xi_mag == 0.0:
        return 0.5
    arg = y + ((-1.0) ** branch) * x_n
    return float(np.exp(-xi_mag * arg) / (1.0 + np.exp(-2.0 * xi_mag * depth)))


@dataclass
class SymbolBoundReport:
    """Measured sup of |d^a m(xi')| |xi'|^{|a|} per derivative order."""

    worst_ratio: dict = field(default_factory=dict)
    cap: float = 0.0
    passed: bool = False

    def __str__(self):
        lines = [f"order {k}: {v:.6g}" for k, v in sorted(self.worst_ratio.items())]
        lines.append(f"cap {self.cap:.6g} -> {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _fd_partial(symbol, xi: np.ndarray, alpha: tuple[int, ...], h: float) -> complex:
    """Central finite-difference d^alpha m at xi, one coordinate at a time."""
    for axis, times in enumerate(alpha):
        if times > 0:
            step = np.zeros_like(xi)
            step[axis] = h
            rest = alpha[:axis] + (times - 1,) + alpha[axis + 1:]
            fp = _fd_partial(symbol, xi + step, rest, h)
            fm = _fd_partial(symbol, xi - step, rest, h)
            return (fp - fm) / (2.0 * h)
    return symbol(xi)


def symbol_bound_check(symbol, max_order: int = 3, sample_count: int = 40,
                       seed: int = 0, dim: int = 2,
                       cap_factor: float = 10.0) -> SymbolBoundReport:
    """Check Mikhlin-type bounds |d^a m(xi')| <= C |xi'|^{-|a|} by sampling.

    Partial derivatives up to ``max_order`` are estimated by central finite
    differences (relative step) at log-spaced magnitudes in [1e-3, 1e3] with
    random directions.  PASS iff every ratio is finite and the supremum at
    each order is at most ``cap_factor`` times the order-0 supremum.  The cap
    is a harness choice: the theory only asserts boundedness, it fixes no
    constants.
    """
    if max_order > 3:
        raise ValueError("max_order must be <= 3")
    rng = np.random.default_rng(seed)
    mags = np.logspace(-3, 3, sample_count)
    worst = {order: 0.0 for order in range(max_order + 1)}
    alphas = [
        alpha
        for alpha in itertools.product(range(max_order + 1), repeat=dim)
        if sum(alpha) <= max_order
    ]
    for mag in mags:
        if dim == 1:
            direction = np.array([rng.choice([-1.0, 1.0])])
        else:
            direction = rng.normal(size=dim)
            direction /= np.linalg.norm(direction)
        xi = mag * direction
        h = 1e-2 * mag
        for alpha in alphas:
            order = sum(alpha)
            val = _fd_partial(symbol, xi, alpha, h)
            if not np.isfinite(val):
                raise ValueError(f"symbol not finite near xi'={xi}")
            ratio = abs(val) * mag**order
            worst[order] = max(worst[order], float(ratio))
    cap = cap_factor * worst[0]
    passed = all(np.isfinite(v) and v <= cap for v in worst.values())
    return SymbolBoundReport(worst_ratio=worst, cap=cap, passed=passed)
