"""Monte Carlo throughput runs, P_avg sweeps and result files."""

from __future__ import annotations

import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .baselines import benchmark_fixed_power_trace, equal_share_trace
from .calibration import CalibrationError, calibrate_lambda, joint_allocator, p2p_allocator
from .channel import ChannelTrace, generate_trace
from .model import LN2, LambdaSolution, NetworkConfig, TraceAllocation, validate_config
from .roots import RootFindingError

SCHEMES = ("joint_t1", "joint_t2", "benchmark_fixed", "equal_share")
RESULT_FIELDS = ("scheme", "p_avg_w", "throughput_bits_per_symbol", "achieved_power_w", "lambda", "active_epochs")

RESULT_SCHEMA = {
    "type": "object",
    "required": ["results"],
    "additionalProperties": False,
    "properties": {
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": list(RESULT_FIELDS),
                "additionalProperties": False,
                "properties": {
                    "scheme": {"enum": list(SCHEMES)},
                    "p_avg_w": {"type": "number", "exclusiveMinimum": 0},
                    "throughput_bits_per_symbol": {"type": "number", "minimum": 0},
                    "achieved_power_w": {"type": "number", "minimum": 0},
                    "lambda": {"type": "number", "minimum": 0},
                    "active_epochs": {"type": "integer", "minimum": 0},
                },
            },
        }
    },
}


class SimulationError(RuntimeError):
    def __init__(self, message: str, epochs=()):
        self.epochs = list(epochs)
        super().__init__(message)


@dataclass(frozen=True)
class ConstraintAudit:
    budget_ok: bool  # C1 within lambda_tol (or slack)
    peak_ok: bool  # every p_i in [0, P_max]
    bang_bang: bool  # every p_i exactly 0 or the scheme's power level
    simplex_error: float  # max |tau0 + sum_j tau_j - 1| over active epochs

    @property
    def ok(self) -> bool:
        return self.budget_ok and self.peak_ok and self.bang_bang and self.simplex_error <= 1e-12


@dataclass(frozen=True)
class ThroughputReport:
    scheme: str
    p_avg: float
    per_node_rate: tuple[float, ...]  # bits/symbol
    sum_throughput: float  # bits/symbol
    achieved_power: float
    lam: float
    active_epochs: int
    wall_time: float
    audit: ConstraintAudit
    converged: bool = True

    def row(self) -> dict:
        return {
            "scheme": self.scheme,
            "p_avg_w": self.p_avg,
            "throughput_bits_per_symbol": self.sum_throughput,
            "achieved_power_w": self.achieved_power,
            "lambda": self.lam,
            "active_epochs": self.active_epochs,
        }


@dataclass(frozen=True)
class SweepPoint:
    p_avg: float
    reports: dict[str, ThroughputReport]


@dataclass(frozen=True)
class SweepCurve:
    points: list[SweepPoint] = field(default_factory=list)

    def series(self, scheme: str) -> np.ndarray:
        return np.array([pt.reports[scheme].sum_throughput for pt in self.points])

    @property
    def p_avg(self) -> np.ndarray:
        return np.array([pt.p_avg for pt in self.points])

    def rows(self) -> list[dict]:
        return [pt.reports[s].row() for pt in self.points for s in pt.reports]


def _audit(alloc: TraceAllocation, cfg: NetworkConfig, power_level: float, sol: LambdaSolution | None) -> ConstraintAudit:
    delivered = alloc.delivered_power
    tol = cfg.lambda_tol * cfg.avg_power
    if sol is not None and sol.constraint_active:
        budget_ok = abs(delivered - cfg.avg_power) <= tol
    else:
        budget_ok = delivered <= cfg.avg_power + tol
    p = alloc.bs_power
    peak_ok = bool(np.all((p >= 0) & (p <= cfg.max_power)))
    bang = bool(np.all((p == 0) | (p == power_level)))
    act = alloc.active
    if act.any():
        total = alloc.eh_fraction[act] + alloc.time_shares[act].sum(axis=1)
        simplex = float(np.max(np.abs(total - 1.0)))
    else:
        simplex = 0.0
    return ConstraintAudit(bool(budget_ok), peak_ok, bang, simplex)


def _allocate_scheme(trace: ChannelTrace, cfg: NetworkConfig, scheme: str):
    if scheme == "joint_t1":
        sol = calibrate_lambda(trace, cfg, joint_allocator)
        return joint_allocator(trace, sol.lam, cfg), sol, cfg.max_power
    if scheme == "joint_t2":
        if cfg.num_nodes != 1:
            raise SimulationError("joint_t2 is defined for a single node only (num_nodes = 1)")
        sol = calibrate_lambda(trace, cfg, p2p_allocator)
        return p2p_allocator(trace, sol.lam, cfg), sol, cfg.max_power
    if scheme == "benchmark_fixed":
        return benchmark_fixed_power_trace(trace, cfg.avg_power, cfg), None, cfg.avg_power
    if scheme == "equal_share":
        return equal_share_trace(trace, cfg.avg_power, cfg), None, cfg.avg_power
    raise SimulationError(f"unknown scheme {scheme!r}; expected one of {', '.join(SCHEMES)}")


def run_simulation(
    cfg: NetworkConfig,
    scheme: str,
    trace: ChannelTrace | None = None,
    workers: int = 1,
) -> ThroughputReport:
    validate_config(cfg)
    start = time.perf_counter()
    if trace is None:
        trace = generate_trace(cfg, workers=workers)
    if len(trace) != cfg.num_epochs or trace.num_nodes != cfg.num_nodes:
        raise SimulationError(
            f"trace shape {trace.raw_gains.shape} does not match config ({cfg.num_epochs}, {cfg.num_nodes})"
        )
    try:
        alloc, sol, level = _allocate_scheme(trace, cfg, scheme)
    except RootFindingError as exc:
        raise SimulationError(f"{scheme}: {exc}", exc.index.tolist()) from exc
    except CalibrationError as exc:
        raise SimulationError(f"{scheme}: {exc}") from exc

    per_node = alloc.rates.mean(axis=0) / LN2
    return ThroughputReport(
        scheme=scheme,
        p_avg=cfg.avg_power,
        per_node_rate=tuple(float(v) for v in per_node),
        sum_throughput=float(per_node.sum()),
        achieved_power=alloc.delivered_power,
        lam=0.0 if sol is None else sol.lam,
        active_epochs=int(alloc.active.sum()),
        wall_time=time.perf_counter() - start,
        audit=_audit(alloc, cfg, level, sol),
        converged=True if sol is None else sol.converged,
    )


def default_pavg_grid(points: int = 20, lo: float = 1e-3, hi: float = 1.0) -> list[float]:
    return [float(v) for v in np.logspace(np.log10(lo), np.log10(hi), points)]


def sweep_pavg(
    cfg: NetworkConfig,
    pavg_list: Sequence[float],
    schemes: Iterable[str] = ("joint_t1", "benchmark_fixed", "equal_share"),
    trace: ChannelTrace | None = None,
    workers: int = 1,
) -> SweepCurve:
    """Run every scheme at every budget on one shared channel trace."""
    validate_config(cfg)
    pavg = [float(v) for v in pavg_list]
    schemes = list(schemes)
    if not pavg:
        raise SimulationError("empty P_avg list")
    if any(b <= a for a, b in zip(pavg, pavg[1:])):
        raise SimulationError("P_avg values must be strictly increasing")
    if pavg[0] <= 0 or pavg[-1] > cfg.max_power:
        raise SimulationError(f"P_avg values must lie in (0, P_max={cfg.max_power!r}]")
    if not schemes:
        raise SimulationError("no schemes requested")
    if trace is None:
        trace = generate_trace(cfg, workers=workers)
    points = []
    for p in pavg:
        cfg_p = replace(cfg, avg_power=p)
        points.append(SweepPoint(p, {s: run_simulation(cfg_p, s, trace) for s in schemes}))
    return SweepCurve(points)


def _rows(results) -> list[dict]:
    if isinstance(results, ThroughputReport):
        return [results.row()]
    if isinstance(results, SweepCurve):
        return results.rows()
    raise TypeError(f"cannot emit {type(results).__name__}")


def format_results(results, fmt: str = "csv") -> str:
    rows = _rows(results)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(RESULT_FIELDS)
        for r in rows:
            w.writerow([repr(r[k]) if isinstance(r[k], float) else r[k] for k in RESULT_FIELDS])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps({"results": [{k: r[k] for k in RESULT_FIELDS} for r in rows]}, indent=2) + "\n"
    raise ValueError(f"unknown format {fmt!r}; expected csv or json")


def emit_results(results, path: str | Path | None, fmt: str = "csv") -> None:
    """Write a report or sweep to ``path`` (stdout when None or '-')."""
    text = format_results(results, fmt)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    if not str(path):
        raise OSError("empty output path")
    Path(path).write_text(text)


def read_results(path: str | Path, fmt: str = "csv") -> list[dict]:
    text = Path(path).read_text()
    if fmt == "json":
        return json.loads(text)["results"]
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for r in rows:
        out.append(
            {
                "scheme": r["scheme"],
                "p_avg_w": float(r["p_avg_w"]),
                "throughput_bits_per_symbol": float(r["throughput_bits_per_symbol"]),
                "achieved_power_w": float(r["achieved_power_w"]),
                "lambda": float(r["lambda"]),
                "active_epochs": int(r["active_epochs"]),
            }
        )
    return out
