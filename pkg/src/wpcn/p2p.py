"""Point-to-point harvest-then-transmit link with a fixed circuit power cost.

Single node, gain ``x`` normalized by noise (per watt). The dual variable
``lam`` here multiplies the budget constraint written in units of ``N0 * P``,
so it is ``lam_joint / N0`` relative to the multi-node allocator.

Activation rule: the per-epoch dual objective is positively homogeneous in
the (transmit-energy, transmit-time) pair, so full BS power pays off iff

    log(x^2/lam) - 1 + lam * (1 - p_c x) / x^2 > 0,

which has a single threshold in ``x`` and no upper limit. The closed-form
window returned by :func:`activation_window` coincides with it only for
``p_c = 0``; it is kept for reference and diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelTrace
from .model import NetworkConfig, TraceAllocation, validate_config
from .roots import RootFindingError, bisect

EPS = 1e-12


@dataclass(frozen=True)
class P2PAllocation:
    bs_power: float
    eh_fraction: float
    tx_power: float
    rate: float  # nats/symbol


def activation_window(lam: float, p_c: float) -> tuple[float, float]:
    """Closed-form gain window (x_lo, x_hi); x_hi is infinite when p_c = 0."""
    lp = lam * p_c
    x_lo = -lp / 2.0 + math.sqrt(lp * lp / 4.0 + lam)
    x_hi = math.inf if p_c == 0 else 1.0 / p_c
    return x_lo, x_hi


def _activation_margin(x, lam: float, p_c: float):
    """Sign gives the activation decision; defined for x^2 > lam."""
    x = np.asarray(x, dtype=float)
    d = lam / (x * x) - 1.0
    return d - np.log1p(d) - lam * p_c / x


def is_active_p2p(x, lam: float, p_c: float):
    x = np.asarray(x, dtype=float)
    if lam == 0:
        return np.ones(x.shape, dtype=bool)[()]
    above = x * x > lam
    if p_c == 0:
        return above[()]
    with np.errstate(divide="ignore", invalid="ignore"):
        margin = _activation_margin(x, lam, p_c)
    return (above & (margin > 0))[()]


def activation_threshold(lam: float, p_c: float) -> float:
    """Smallest gain that receives BS power; epochs with x above it are active."""
    if lam == 0:
        return 0.0
    root = math.sqrt(lam)
    if p_c == 0:
        return root
    # work in t = x / sqrt(lam); margin(t=1) = -sqrt(lam) p_c < 0
    scaled = root * p_c

    def margin(t):
        d = 1.0 / (t * t) - 1.0
        return d - np.log1p(d) - scaled / t

    hi = 2.0
    while margin(hi) <= 0:
        hi *= 2.0
    t = bisect(margin, np.array([1.0]), np.array([hi]), tol=1e-15)
    return float(t[0] * root)


def transmit_power_p2p(p, x, tau0, p_c: float, noise_power: float):
    """Node transmit power after the circuit cost, floored at zero."""
    p, x, tau0 = (np.asarray(v, dtype=float) for v in (p, x, tau0))
    harvested = noise_power * p * x * tau0 / (1.0 - tau0)
    return np.maximum(harvested - p_c, 0.0)[()]


def eh_residual_t2(tau0, x, gain_term, lam_term, p_c: float):
    """Stationarity residual; ``gain_term = N0 P x^2``, ``lam_term = N0 lam P``.

    Valid for tau0 above the zero-transmit-power point, where it is increasing.
    """
    tau0 = np.asarray(tau0, dtype=float)
    one_minus = 1.0 - tau0
    c = 1.0 - x * p_c
    return (
        np.log1p(gain_term * tau0 / one_minus - x * p_c)
        + lam_term
        - gain_term / (one_minus * c + gain_term * tau0)
    )


def _zero_power_point(x, max_power: float, noise_power: float, p_c: float):
    """tau0 at which harvested power exactly covers the circuit cost."""
    return p_c / (p_c + noise_power * max_power * x)


def solve_eh_duration_t2(x, max_power: float, noise_power: float, lam: float, p_c: float, root_tol: float = 1e-10):
    """Optimal EH fraction for active epochs, scalar or array."""
    x = np.asarray(x, dtype=float)
    active = np.atleast_1d(is_active_p2p(x, lam, p_c))
    if not active.all():
        raise RootFindingError("gain outside the activation region", np.flatnonzero(~active))
    xs = np.atleast_1d(x)
    return _solve(xs, noise_power * xs * xs, max_power, noise_power, lam, p_c, root_tol).reshape(x.shape)[()]


def _solve(x, a, max_power, noise_power, lam, p_c, root_tol):
    # a = N0 x^2, shared with the multi-node allocator so both agree bitwise at p_c = 0
    gain_term = a * max_power
    lam_term = noise_power * lam * max_power
    if p_c > 0:
        lo = _zero_power_point(x, max_power, noise_power, p_c) + EPS
    else:
        lo = np.full(x.shape, EPS)
    hi = np.full(x.shape, 1.0 - EPS)
    if np.any(lo >= hi):
        raise RootFindingError("harvest cannot cover circuit cost", np.flatnonzero(lo >= hi))
    return bisect(lambda t: eh_residual_t2(t, x, gain_term, lam_term, p_c), lo, hi, tol=root_tol)


def allocate_trace_t2(trace: ChannelTrace, lam: float, cfg: NetworkConfig) -> TraceAllocation:
    if trace.num_nodes != 1 or not trace.reciprocal:
        raise ValueError("point-to-point allocation needs a single-node reciprocal trace")
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    x = trace.normalized_gains[:, 0]
    a = trace.aux_coeffs[:, 0]
    return _allocate(x, a, lam, cfg)


def _allocate(x: np.ndarray, a: np.ndarray, lam: float, cfg: NetworkConfig) -> TraceAllocation:
    m = x.shape[0]
    p_c = cfg.processing_cost
    active = np.atleast_1d(is_active_p2p(x, lam, p_c))
    p = np.where(active, cfg.max_power, 0.0)
    tau0 = np.zeros(m)
    if active.any():
        try:
            tau0[active] = _solve(x[active], a[active], cfg.max_power, cfg.noise_power, lam, p_c, cfg.root_tol)
        except RootFindingError as exc:
            where = np.flatnonzero(active)[exc.index]
            raise RootFindingError(f"eh-duration solve failed at epoch(s) {where.tolist()[:10]}", where) from None
    ps = np.where(active, transmit_power_p2p(p, x, tau0, p_c, cfg.noise_power), 0.0)
    rate = np.where(active, (1.0 - tau0) * np.log1p(ps * x), 0.0)
    return TraceAllocation(p, tau0, (1.0 - tau0)[:, None], ps[:, None], rate[:, None])


def allocate_epoch_t2(x: float, lam: float, cfg: NetworkConfig) -> P2PAllocation:
    validate_config(cfg)
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    xs = np.array([float(x)])
    alloc = _allocate(xs, cfg.noise_power * xs * xs, lam, cfg)
    return P2PAllocation(
        bs_power=float(alloc.bs_power[0]),
        eh_fraction=float(alloc.eh_fraction[0]),
        tx_power=float(alloc.tx_powers[0, 0]),
        rate=float(alloc.rates[0, 0]),
    )
