"""Flat key = value configuration for the scenario driver.

One assignment per line, ``#`` starts a comment, unknown keys are rejected.
Example::

    dim = 2
    n_horizontal = 16
    n_vertical = 17
    tau = 0.05
    horizon = 5.0
    initial_data = single_mode
"""

from __future__ import annotations

from dataclasses import dataclass, fields

__all__ = ["SolverConfig", "ConfigError", "parse_config"]


class ConfigError(ValueError):
    """Malformed configuration file or value."""


@dataclass
class SolverConfig:
    dim: int = 2
    depth: float = 1.0
    period: float = 6.283185307179586
    n_horizontal: int = 16
    n_vertical: int = 17
    mu: float = 1.0
    tau: float = 0.05
    horizon: float = 5.0
    gamma0: float | None = None     # X-norm weight; measured when unset
    sigma0: float | None = None     # shift for the decomposition; measured when unset
    tolerance: float = 1e-10
    max_iter: int = 12
    seed: int = 1234
    initial_data: str = "single_mode"
    amplitude: float | None = None  # gate-derived when unset
    workers: int | None = None      # caps kernel-backend threading

    def validate(self):
        if self.dim not in (2, 3):
            raise ConfigError(f"dim must be 2 or 3, got {self.dim}")
        if self.n_horizontal % 2 != 0 or self.n_horizontal < 2:
            raise ConfigError("n_horizontal must be even and >= 2")
        if min(self.depth, self.period, self.mu, self.tau, self.horizon) <= 0:
            raise ConfigError("depth, period, mu, tau, horizon must be positive")
        if self.initial_data not in ("zero", "single_mode", "random_solenoidal"):
            raise ConfigError(f"unknown initial_data {self.initial_data!r}")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(SolverConfig)}
_INT_KEYS = {"dim", "n_horizontal", "n_vertical", "max_iter", "seed", "workers"}
_STR_KEYS = {"initial_data"}


def _convert(key: str, raw: str):
    if key in _STR_KEYS:
        return raw
    if raw.lower() in ("none", ""):
        return None
    try:
        if key in _INT_KEYS:
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config(path: str) -> SolverConfig:
    cfg = SolverConfig()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (s.strip() for s in text.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            setattr(cfg, key, _convert(key, raw))
    return cfg.validate()
