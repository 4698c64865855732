"""Jointly optimal BS power and TDMA time sharing for a K-node network.

Per epoch, for a given multiplier ``lam`` (1/W) of the average-power budget:
the BS transmits at full power iff ``b > lam`` (``b = sum_j N0 x_j^2``), the
energy-harvesting fraction solves a one-dimensional transcendental equation,
and the remaining time is split among nodes proportionally to ``a_j``.
"""

from __future__ import annotations

import numpy as np

from .channel import ChannelTrace
from .model import EpochAllocation, EpochChannelState, NetworkConfig, TraceAllocation, validate_config
from .roots import RootFindingError, bisect

EPS = 1e-12


def epoch_coefficients(state: EpochChannelState) -> tuple[np.ndarray, float]:
    a = state.aux_coeffs
    return a, float(a.sum())


def power_decision_t1(b, lam: float, max_power: float):
    return np.where(np.asarray(b) > lam, max_power, 0.0)[()]


def eh_residual_t1(tau0, b_pmax, lam_pmax):
    """Stationarity residual in tau0; increasing, negative near 0 when b > lam."""
    tau0 = np.asarray(tau0, dtype=float)
    one_minus = 1.0 - tau0
    return (
        np.log1p(b_pmax * tau0 / one_minus)
        + lam_pmax
        - b_pmax / (one_minus + b_pmax * tau0)
    )


def solve_eh_duration_t1(b, max_power: float, lam: float, root_tol: float = 1e-10):
    """Optimal EH fraction for active epochs (``b > lam``), scalar or array."""
    b = np.asarray(b, dtype=float)
    if np.any(b <= lam):
        raise RootFindingError("epoch is inactive (b <= lambda)", np.flatnonzero(np.atleast_1d(b <= lam)))
    bp = np.atleast_1d(b * max_power)
    lp = lam * max_power
    tau = bisect(
        lambda t: eh_residual_t1(t, bp, lp),
        np.full(bp.shape, EPS),
        np.full(bp.shape, 1.0 - EPS),
        tol=root_tol,
    )
    return tau.reshape(b.shape)[()]


def time_shares_t1(a, b: float, tau0: float) -> np.ndarray:
    # dividing by b/(1 - tau0) keeps a few-ulp relative error for every tau0
    # and rounds decimal inputs such as tau0 = 0.2 correctly more often
    return np.asarray(a, dtype=float) / (b / (1.0 - tau0))


def _allocate(
    a: np.ndarray,
    x_down: np.ndarray,
    noise_power: float,
    lam: float,
    power: float,
    root_tol: float,
) -> TraceAllocation:
    """Vectorised allocation over epochs; all gain arrays are (M, K)."""
    m = a.shape[0]
    b = a.sum(axis=1)
    active = b > lam
    p = np.where(active, power, 0.0)
    tau0 = np.zeros(m)
    if active.any():
        try:
            tau0[active] = solve_eh_duration_t1(b[active], power, lam, root_tol)
        except RootFindingError as exc:
            where = np.flatnonzero(active)[exc.index]
            raise RootFindingError(f"eh-duration solve failed at epoch(s) {where.tolist()[:10]}", where) from None
    shares = time_shares_t1(a, b[:, None], tau0[:, None])
    harvested = noise_power * p[:, None] * x_down * tau0[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = np.where(active[:, None], harvested / shares, 0.0)
        rates = np.where(active[:, None], shares * np.log1p(a * p[:, None] * tau0[:, None] / shares), 0.0)
    return TraceAllocation(p, tau0, shares, tx, rates)


def allocate_trace_t1(trace: ChannelTrace, lam: float, cfg: NetworkConfig, power: float | None = None) -> TraceAllocation:
    """Allocate every epoch of ``trace`` at multiplier ``lam``.

    ``power`` replaces ``cfg.max_power`` as the BS power level (the
    fixed-power benchmark uses ``P_avg`` with ``lam = 0``).
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    pw = cfg.max_power if power is None else power
    return _allocate(
        trace.aux_coeffs,
        trace.normalized_gains_down,
        trace.noise_power,
        lam,
        pw,
        cfg.root_tol,
    )


def allocate_epoch_t1(state: EpochChannelState, lam: float, cfg: NetworkConfig) -> EpochAllocation:
    validate_config(cfg)
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    alloc = _allocate(
        state.aux_coeffs[None, :],
        state.normalized_gains_down[None, :],
        state.noise_power,
        lam,
        cfg.max_power,
        cfg.root_tol,
    )
    return alloc.epoch(0)
