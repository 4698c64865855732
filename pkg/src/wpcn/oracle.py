"""Brute-force checks of the analytic allocators.

Each oracle maximises the per-epoch Lagrangian dual objective by exhaustive
search over a (p, tau0) grid with a 3-point parabolic refinement in tau0.
The search never calls the root solvers it is meant to check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelTrace, generate_trace
from .model import EpochChannelState, NetworkConfig, validate_config

# lambda values on the joint (1/W) scale; chosen so that both active and
# inactive epochs occur in the default N0 = 1e-12, Omega = 1e6 regime
DEFAULT_LAMBDAS_T1 = (0.0, 0.25, 1.0, 2.0, 4.0)
DEFAULT_LAMBDAS_T2 = (0.0, 0.01, 0.03, 0.1, 0.3)

_ROW_BLOCK = 256


@dataclass(frozen=True)
class GridResult:
    value: float
    p: float
    tau0: float


def dual_objective_t1(b, p, tau0, lam):
    """(1 - tau0) log(1 + b p tau0 / (1 - tau0)) - lam p tau0."""
    b, p, tau0 = (np.asarray(v, dtype=float) for v in (b, p, tau0))
    one_minus = 1.0 - tau0
    return one_minus * np.log1p(b * p * tau0 / one_minus) - lam * p * tau0


def dual_objective_t2(x, p, tau0, lam, p_c, noise_power):
    """Point-to-point dual; ``lam`` on the point-to-point scale.

    Zero rate when the harvested power does not cover the circuit cost, but
    the BS energy is still charged.
    """
    x, p, tau0 = (np.asarray(v, dtype=float) for v in (x, p, tau0))
    one_minus = 1.0 - tau0
    ps = noise_power * p * x * tau0 / one_minus - p_c
    rate = one_minus * np.log1p(x * np.maximum(ps, 0.0))
    return rate - lam * noise_power * p * tau0


def _refine_rows(f, p_rows, taus, values):
    """Per row: argmax over tau plus a parabolic step, evaluated exactly."""
    n = taus.shape[0]
    j = np.argmax(values, axis=1)
    best = values[np.arange(values.shape[0]), j]
    best_tau = taus[j]
    inner = (j > 0) & (j < n - 1)
    if inner.any():
        r = np.flatnonzero(inner)
        jj = j[r]
        y0, y1, y2 = values[r, jj - 1], values[r, jj], values[r, jj + 1]
        h = taus[1] - taus[0]
        denom = y0 - 2.0 * y1 + y2
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(denom < 0, 0.5 * h * (y0 - y2) / denom, 0.0)
        t = np.clip(taus[jj] + step, taus[jj - 1], taus[jj + 1])
        refined = f(p_rows[r], t)
        better = refined > best[r]
        best[r] = np.where(better, refined, best[r])
        best_tau[r] = np.where(better, t, best_tau[r])
    return best, best_tau


def _grid_max(f, max_power: float, grid_n: int) -> GridResult:
    if grid_n < 100:
        raise ValueError("grid_n must be >= 100")
    ps = max_power * np.arange(1, grid_n + 1) / grid_n
    # tau0 = 0 (value exactly 0) is kept as a node so that the parabolic step
    # can reach optima inside the first interior cell
    taus = np.arange(0, grid_n + 1) / (grid_n + 1)
    row_best = np.empty(grid_n)
    row_tau = np.empty(grid_n)
    for s in range(0, grid_n, _ROW_BLOCK):
        rows = ps[s : s + _ROW_BLOCK]
        vals = f(rows[:, None], taus[None, :])
        row_best[s : s + rows.size], row_tau[s : s + rows.size] = _refine_rows(f, rows, taus, vals)
    k = int(np.argmax(row_best))
    # p = 0 gives value 0 for every tau0
    if row_best[k] <= 0.0:
        return GridResult(0.0, 0.0, 0.0)
    return GridResult(float(row_best[k]), float(ps[k]), float(row_tau[k]))


def grid_max_dual_t1(state: EpochChannelState, lam: float, cfg: NetworkConfig, grid_n: int = 2000) -> GridResult:
    b = state.aux_sum
    return _grid_max(lambda p, t: dual_objective_t1(b, p, t, lam), cfg.max_power, grid_n)


def grid_max_dual_t2(x: float, lam: float, cfg: NetworkConfig, grid_n: int = 2000) -> GridResult:
    """``lam`` on the point-to-point scale (joint lambda / N0)."""
    p_c, n0 = cfg.processing_cost, cfg.noise_power
    return _grid_max(lambda p, t: dual_objective_t2(x, p, t, lam, p_c, n0), cfg.max_power, grid_n)


def grid_time_split(state: EpochChannelState, e: float, tau0: float, grid_n: int = 2000) -> tuple[float, np.ndarray]:
    """Best two-node split of the transmit time ``1 - tau0`` for harvested energy ``e``."""
    a = state.aux_coeffs
    if a.shape[0] != 2:
        raise ValueError("grid_time_split needs exactly two nodes")
    if grid_n < 100:
        raise ValueError("grid_n must be >= 100")
    budget = 1.0 - tau0

    def f(t1):
        t2 = budget - t1
        return t1 * np.log1p(a[0] * e / t1) + t2 * np.log1p(a[1] * e / t2)

    t1 = budget * np.arange(1, grid_n + 1) / (grid_n + 1)
    vals = f(t1)[None, :]
    best, best_t = _refine_rows(lambda _p, t: f(t), np.zeros(1), t1, vals)
    return float(best[0]), np.array([best_t[0], budget - best_t[0]])


@dataclass(frozen=True)
class OracleCase:
    epoch: int
    lam: float
    analytic_value: float
    analytic_p: float
    oracle: GridResult
    window_active: bool | None = None


@dataclass
class OracleReport:
    theorem: str
    grid_n: int
    max_power: float
    value_tol: float
    cases: list[OracleCase] = field(default_factory=list)

    @property
    def value_failures(self) -> list[OracleCase]:
        return [c for c in self.cases if c.analytic_value < c.oracle.value - self.value_tol]

    @property
    def endpoint_failures(self) -> list[OracleCase]:
        """Cases whose grid argmax p is more than one cell away from {0, P_max}."""
        edge = self.max_power * (1.0 - 1.0 / self.grid_n)
        return [c for c in self.cases if c.oracle.p != 0.0 and c.oracle.p < edge]

    @property
    def activation_mismatches(self) -> list[OracleCase]:
        return [c for c in self.cases if c.oracle.p > 0 and c.analytic_p == 0]

    @property
    def window_mismatches(self) -> list[OracleCase]:
        return [c for c in self.cases if c.window_active is not None and c.window_active != (c.analytic_p > 0)]

    @property
    def passed(self) -> bool:
        return not self.value_failures and not self.endpoint_failures


def check_t1(
    cfg: NetworkConfig,
    trace: ChannelTrace | None = None,
    lambdas=DEFAULT_LAMBDAS_T1,
    grid_n: int = 2000,
    value_tol: float = 1e-7,
) -> OracleReport:
    from .joint import allocate_trace_t1

    validate_config(cfg)
    trace = generate_trace(cfg) if trace is None else trace
    report = OracleReport("t1", grid_n, cfg.max_power, value_tol)
    for lam in lambdas:
        alloc = allocate_trace_t1(trace, lam, cfg)
        b = trace.aux_sum
        values = np.where(alloc.active, dual_objective_t1(b, alloc.bs_power, alloc.eh_fraction, lam), 0.0)
        for i in range(len(trace)):
            grid = grid_max_dual_t1(trace.epoch(i), lam, cfg, grid_n)
            report.cases.append(OracleCase(i, lam, float(values[i]), float(alloc.bs_power[i]), grid))
    return report


def check_t2(
    cfg: NetworkConfig,
    trace: ChannelTrace | None = None,
    lambdas=DEFAULT_LAMBDAS_T2,
    grid_n: int = 2000,
    value_tol: float = 1e-7,
) -> OracleReport:
    """``lambdas`` on the joint scale; converted to the point-to-point scale here."""
    from .p2p import activation_window, allocate_trace_t2

    validate_config(cfg)
    trace = generate_trace(cfg) if trace is None else trace
    x = trace.normalized_gains[:, 0]
    report = OracleReport("t2", grid_n, cfg.max_power, value_tol)
    for lam_joint in lambdas:
        lam = lam_joint / cfg.noise_power
        alloc = allocate_trace_t2(trace, lam, cfg)
        values = np.where(
            alloc.active,
            dual_objective_t2(x, alloc.bs_power, alloc.eh_fraction, lam, cfg.processing_cost, cfg.noise_power),
            0.0,
        )
        lo, hi = activation_window(lam, cfg.processing_cost)
        for i in range(len(trace)):
            grid = grid_max_dual_t2(float(x[i]), lam, cfg, grid_n)
            report.cases.append(
                OracleCase(i, lam_joint, float(values[i]), float(alloc.bs_power[i]), grid, bool(lo < x[i] < hi))
            )
    return report
