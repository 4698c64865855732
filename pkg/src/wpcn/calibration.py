"""Bisection on the dual variable of the average BS power budget."""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np

from .channel import ChannelTrace
from .joint import allocate_trace_t1
from .model import LambdaSolution, NetworkConfig, TraceAllocation, validate_config
from .p2p import allocate_trace_t2

log = logging.getLogger(__name__)

MAX_DOUBLINGS = 200
MAX_BISECTIONS = 200

# Allocators take lambda on the joint (1/W) scale.
Allocator = Callable[[ChannelTrace, float, NetworkConfig], TraceAllocation]


class CalibrationError(RuntimeError):
    pass


def joint_allocator(trace: ChannelTrace, lam: float, cfg: NetworkConfig) -> TraceAllocation:
    return allocate_trace_t1(trace, lam, cfg)


def p2p_allocator(trace: ChannelTrace, lam: float, cfg: NetworkConfig) -> TraceAllocation:
    # the point-to-point budget constraint carries an extra N0 factor
    return allocate_trace_t2(trace, lam / cfg.noise_power, cfg)


def delivered_average_power(trace: ChannelTrace, lam: float, allocator: Allocator, cfg: NetworkConfig) -> float:
    return allocator(trace, lam, cfg).delivered_power


def calibrate_lambda(
    trace: ChannelTrace,
    cfg: NetworkConfig,
    allocator: Allocator = joint_allocator,
    hint: float | None = None,
) -> LambdaSolution:
    """Find lambda so that (1/M) sum p_i tau0_i meets ``cfg.avg_power``.

    Delivered power is non-increasing in lambda. If the budget is slack at
    lambda = 0 the constraint is inactive. Otherwise an upper bracket is found
    by doubling (starting from ``hint`` or the median of b_i) and the
    interval is bisected until the delivered power is within
    ``lambda_tol * P_avg`` of the budget.
    """
    validate_config(cfg)
    target = cfg.avg_power
    tol = cfg.lambda_tol * target
    evals = 0

    def delivered(lam: float) -> float:
        nonlocal evals
        evals += 1
        return delivered_average_power(trace, lam, allocator, cfg)

    d0 = delivered(0.0)
    if d0 <= target:
        return LambdaSolution(0.0, d0, evals, constraint_active=False)

    lo = 0.0
    hi = float(hint) if hint else float(np.median(trace.aux_sum))
    d_hi = delivered(hi)
    if abs(d_hi - target) <= tol:
        return LambdaSolution(hi, d_hi, evals, constraint_active=True)
    for _ in range(MAX_DOUBLINGS):
        if d_hi < target:
            break
        lo, hi = hi, 2.0 * hi
        d_hi = delivered(hi)
    else:
        raise CalibrationError(f"no lambda below {hi!r} brings delivered power under {target!r}")

    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # delivered power jumps across the budget at this lambda; stay feasible
            log.info(
                "delivered power jumps over P_avg=%g at lambda=%g; returning feasible side %g",
                target, hi, d_hi,
            )
            return LambdaSolution(hi, d_hi, evals, constraint_active=True, converged=False)
        d = delivered(mid)
        if abs(d - target) <= tol:
            return LambdaSolution(mid, d, evals, constraint_active=True)
        if d > target:
            lo = mid
        else:
            hi, d_hi = mid, d
    raise CalibrationError(f"bisection did not converge within {MAX_BISECTIONS} steps")
