"""Time series of velocity/pressure fields produced by the time steppers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import LayerGrid, SpectralField

__all__ = ["Trajectory"]


@dataclass
class Trajectory:
    """Uniformly sampled (velocity, pressure) fields on one grid.

    ``times[n] = n * step``; velocities are vector fields, pressures scalar
    fields, one of each per sample.
    """

    grid: LayerGrid
    step: float
    times: np.ndarray
    velocities: list = field(default_factory=list)
    pressures: list = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.velocities) != len(self.times):
            raise ValueError("one velocity sample required per time")
        if self.pressures and len(self.pressures) != len(self.times):
            raise ValueError("one pressure sample required per time")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("sample times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def samples(self):
        for n, t in enumerate(self.times):
            p = self.pressures[n] if self.pressures else None
            yield t, self.velocities[n], p

    def sample_norms(self, q: float = 2.0) -> dict:
        """Per-sample discrete L_q and W^2_q norms of the velocity."""
        from .norms import discrete_lq_norm, sobolev_norm

        return {
            "lq": np.array([discrete_lq_norm(u, q) for u in self.velocities]),
            "w2q": np.array([sobolev_norm(u, q, 2) for u in self.velocities]),
        }

    def map(self, fn) -> "Trajectory":
        """New trajectory with fn applied to every velocity and pressure field."""
        return Trajectory(
            grid=self.grid,
            step=self.step,
            times=self.times.copy(),
            velocities=[fn(u) for u in self.velocities],
            pressures=[fn(p) for p in self.pressures] if self.pressures else [],
        )

    def __sub__(self, other: "Trajectory") -> "Trajectory":
        if len(other) != len(self):
            raise ValueError("trajectories have different lengths")
        return Trajectory(
            grid=self.grid,
            step=self.step,
            times=self.times.copy(),
            velocities=[a - b for a, b in zip(self.velocities, other.velocities)],
            pressures=[a - b for a, b in zip(self.pressures, other.pressures)]
            if self.pressures and other.pressures else [],
        )

    def __add__(self, other: "Trajectory") -> "Trajectory":
        if len(other) != len(self):
            raise ValueError("trajectories have different lengths")
        return Trajectory(
            grid=self.grid,
            step=self.step,
            times=self.times.copy(),
            velocities=[a + b for a, b in zip(self.velocities, other.velocities)],
            pressures=[a + b for a, b in zip(self.pressures, other.pressures)]
            if self.pressures and other.pressures else [],
        )

    @staticmethod
    def zeros(grid: LayerGrid, step: float, n_samples: int) -> "Trajectory":
        times = step * np.arange(n_samples)
        return Trajectory(
            grid=grid,
            step=step,
            times=times,
            velocities=[SpectralField.zeros(grid, (grid.dim,)) for _ in times],
            pressures=[SpectralField.zeros(grid) for _ in times],
        )
