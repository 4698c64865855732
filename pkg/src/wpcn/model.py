"""Domain types and configuration handling.

All powers are in watts. Channel gains come in two flavours: raw power gains
``x'`` (dimensionless) and noise-normalized gains ``x = x'/N0`` (per watt).
Rates are carried in nats internally and converted to bits only when reported.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np

LN2 = math.log(2.0)


@dataclass(frozen=True)
class Violation:
    field: str
    value: Any
    constraint: str

    def __str__(self) -> str:
        return f"{self.field}={self.value!r}: {self.constraint}"


class ConfigError(ValueError):
    """Raised when a configuration is unusable; carries every violation found."""

    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass(frozen=True)
class NetworkConfig:
    num_nodes: int = 1
    noise_power: float = 1e-12
    avg_power: float = 0.1
    max_power: float = 1.0
    processing_cost: float = 0.0
    mean_gain: tuple[float, ...] = (1e6,)
    num_epochs: int = 10_000
    rng_seed: int = 0
    root_tol: float = 1e-10
    lambda_tol: float = 1e-6

    def __post_init__(self):
        # a scalar mean gain applies to every node
        mg = self.mean_gain
        if np.isscalar(mg):
            mg = (float(mg),) * max(int(self.num_nodes), 1)
        object.__setattr__(self, "mean_gain", tuple(float(v) for v in mg))

    @property
    def mean_raw_gain(self) -> np.ndarray:
        """E[x'_j] = Omega_j * N0 for each node."""
        return np.asarray(self.mean_gain) * self.noise_power

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                text = ", ".join(repr(v) for v in value)
            else:
                text = repr(value)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "NetworkConfig":
        known = {f.name: f for f in fields(cls)}
        values: dict[str, Any] = {}
        problems = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = (s.strip() for s in line.partition("="))
            if not sep or not key:
                problems.append(Violation(f"line {lineno}", raw, "expected 'key = value'"))
                continue
            if key not in known:
                problems.append(Violation(key, value, "unknown key"))
                continue
            try:
                values[key] = _parse_value(key, value)
            except ValueError as exc:
                problems.append(Violation(key, value, str(exc)))
        if problems:
            raise ConfigError(problems)
        return cls(**values)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path: str | Path) -> "NetworkConfig":
        return cls.from_text(Path(path).read_text())

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


_INT_FIELDS = {"num_nodes", "num_epochs", "rng_seed"}


def _parse_value(key: str, text: str):
    if key == "mean_gain":
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise ValueError("empty list")
        return tuple(float(p) for p in parts)
    if key in _INT_FIELDS:
        # accept '1e5' style integers as long as they are integral
        v = float(text) if any(c in text for c in ".eE") else int(text)
        if v != int(v):
            raise ValueError("not an integer")
        return int(v)
    return float(text)


def validate_config(cfg: NetworkConfig) -> NetworkConfig:
    """Return ``cfg`` unchanged if every invariant holds, else raise ConfigError."""
    bad: list[Violation] = []

    def check(ok: bool, name: str, constraint: str):
        if not ok:
            bad.append(Violation(name, getattr(cfg, name), constraint))

    def finite(v) -> bool:
        try:
            return math.isfinite(v)
        except TypeError:
            return False

    check(isinstance(cfg.num_nodes, int) and cfg.num_nodes >= 1, "num_nodes", "must be an integer >= 1")
    check(isinstance(cfg.num_epochs, int) and cfg.num_epochs >= 1, "num_epochs", "must be an integer >= 1")
    check(isinstance(cfg.rng_seed, int) and 0 <= cfg.rng_seed < 2**64, "rng_seed", "must be a 64-bit unsigned integer")
    check(finite(cfg.noise_power) and cfg.noise_power > 0, "noise_power", "must be > 0")
    check(finite(cfg.max_power) and cfg.max_power > 0, "max_power", "must be > 0")
    check(finite(cfg.avg_power) and cfg.avg_power > 0, "avg_power", "must be > 0")
    if finite(cfg.avg_power) and finite(cfg.max_power) and cfg.avg_power > cfg.max_power:
        bad.append(Violation("avg_power", cfg.avg_power, f"P_avg exceeds P_max ({cfg.max_power!r})"))
    check(finite(cfg.processing_cost) and cfg.processing_cost >= 0, "processing_cost", "must be >= 0")
    check(all(finite(g) and g > 0 for g in cfg.mean_gain), "mean_gain", "every entry must be > 0")
    if isinstance(cfg.num_nodes, int) and len(cfg.mean_gain) != cfg.num_nodes:
        bad.append(Violation("mean_gain", cfg.mean_gain, f"needs {cfg.num_nodes} entries"))
    check(finite(cfg.root_tol) and 0 < cfg.root_tol < 1, "root_tol", "must lie in (0, 1)")
    check(finite(cfg.lambda_tol) and 0 < cfg.lambda_tol < 1, "lambda_tol", "must lie in (0, 1)")
    if bad:
        raise ConfigError(bad)
    return cfg


@dataclass(frozen=True, eq=False)
class EpochChannelState:
    """Channel of one epoch. ``raw_gains`` is the uplink; ``raw_gains_down``
    defaults to the same values (reciprocal channels)."""

    raw_gains: np.ndarray
    noise_power: float
    raw_gains_down: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "raw_gains", np.atleast_1d(np.asarray(self.raw_gains, dtype=float)))
        if self.raw_gains_down is not None:
            down = np.atleast_1d(np.asarray(self.raw_gains_down, dtype=float))
            if down.shape != self.raw_gains.shape:
                raise ValueError("uplink/downlink gain shapes differ")
            object.__setattr__(self, "raw_gains_down", down)
        if not np.all(self.raw_gains > 0) or (
            self.raw_gains_down is not None and not np.all(self.raw_gains_down > 0)
        ):
            raise ValueError("channel gains must be strictly positive")
        if not self.noise_power > 0:
            raise ValueError("noise_power must be > 0")

    @property
    def num_nodes(self) -> int:
        return self.raw_gains.shape[0]

    @property
    def normalized_gains(self) -> np.ndarray:
        return self.raw_gains / self.noise_power

    @property
    def normalized_gains_down(self) -> np.ndarray:
        if self.raw_gains_down is None:
            return self.normalized_gains
        return self.raw_gains_down / self.noise_power

    @property
    def aux_coeffs(self) -> np.ndarray:
        return self.noise_power * self.normalized_gains * self.normalized_gains_down

    @property
    def aux_sum(self) -> float:
        return float(self.aux_coeffs.sum())


@dataclass(frozen=True, eq=False)
class EpochAllocation:
    bs_power: float
    eh_fraction: float
    time_shares: np.ndarray
    tx_powers: np.ndarray
    rates: np.ndarray  # nats/symbol

    @property
    def sum_rate(self) -> float:
        return float(np.sum(self.rates))


@dataclass(frozen=True, eq=False)
class TraceAllocation:
    """Allocations for every epoch of a trace, stored column-wise.

    Shapes: ``bs_power`` and ``eh_fraction`` are (M,); the rest are (M, K).
    """

    bs_power: np.ndarray
    eh_fraction: np.ndarray
    time_shares: np.ndarray
    tx_powers: np.ndarray
    rates: np.ndarray

    def __len__(self) -> int:
        return self.bs_power.shape[0]

    @property
    def active(self) -> np.ndarray:
        return self.bs_power > 0

    @property
    def delivered_power(self) -> float:
        """(1/M) sum_i p_i tau0_i."""
        return float(np.mean(self.bs_power * self.eh_fraction))

    def epoch(self, i: int) -> EpochAllocation:
        return EpochAllocation(
            bs_power=float(self.bs_power[i]),
            eh_fraction=float(self.eh_fraction[i]),
            time_shares=self.time_shares[i].copy(),
            tx_powers=self.tx_powers[i].copy(),
            rates=self.rates[i].copy(),
        )


@dataclass(frozen=True)
class LambdaSolution:
    """Calibrated dual variable.

    ``lam`` is on the joint-allocation scale (1/W) for every scheme; the
    point-to-point allocator uses ``lam / N0``. ``converged`` is False only
    when delivered power jumps across the budget between two adjacent
    floating-point values of ``lam`` (possible with processing cost); the
    feasible side of the jump is returned then.
    """

    lam: float
    achieved_avg_power: float
    iterations: int
    constraint_active: bool
    converged: bool = True


def to_bits(nats):
    return nats / LN2


__all__ = [
    "ConfigError",
    "EpochAllocation",
    "EpochChannelState",
    "LambdaSolution",
    "NetworkConfig",
    "TraceAllocation",
    "Violation",
    "to_bits",
    "validate_config",
]
