"""Reference schemes with a constant BS power of P_avg in every epoch."""

from __future__ import annotations

import numpy as np

from .channel import ChannelTrace
from .joint import allocate_trace_t1
from .model import EpochAllocation, EpochChannelState, NetworkConfig, TraceAllocation, validate_config


def benchmark_fixed_power_trace(trace: ChannelTrace, avg_power: float, cfg: NetworkConfig) -> TraceAllocation:
    """Fixed power p = P_avg with the throughput-optimal time split per epoch.

    With power fixed, the per-epoch problem is the joint one at lambda = 0
    and P_max replaced by P_avg; every epoch is active.
    """
    return allocate_trace_t1(trace, 0.0, cfg, power=avg_power)


def equal_share_trace(trace: ChannelTrace, avg_power: float, cfg: NetworkConfig) -> TraceAllocation:
    m, k = trace.raw_gains.shape
    frac = 1.0 / (k + 1)
    p = np.full(m, float(avg_power))
    tau0 = np.full(m, frac)
    shares = np.full((m, k), frac)
    harvested = trace.noise_power * p[:, None] * trace.normalized_gains_down * frac
    tx = harvested / frac
    rates = frac * np.log1p(tx * trace.normalized_gains)
    return TraceAllocation(p, tau0, shares, tx, rates)


def _as_trace(state: EpochChannelState) -> ChannelTrace:
    down = None if state.raw_gains_down is None else state.raw_gains_down[None, :]
    return ChannelTrace(state.raw_gains[None, :], state.noise_power, "epoch", down)


def benchmark_fixed_power_epoch(state: EpochChannelState, avg_power: float, cfg: NetworkConfig) -> EpochAllocation:
    validate_config(cfg)
    return benchmark_fixed_power_trace(_as_trace(state), avg_power, cfg).epoch(0)


def equal_share_epoch(state: EpochChannelState, avg_power: float, cfg: NetworkConfig) -> EpochAllocation:
    validate_config(cfg)
    return equal_share_trace(_as_trace(state), avg_power, cfg).epoch(0)
