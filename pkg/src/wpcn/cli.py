"""Command-line front end.

    wpcn simulate  --config net.cfg --scheme joint_t1 --format json
    wpcn sweep     --config net.cfg --schemes joint_t1,benchmark_fixed --out curve.csv
    wpcn validate  --config net.cfg --theorem t2
    wpcn gen-trace --config net.cfg --out trace.csv

Failures print one JSON object on stderr and exit with status 1.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .calibration import CalibrationError
from .channel import TraceError, generate_trace, load_trace, save_trace
from .model import ConfigError, NetworkConfig, validate_config
from .oracle import DEFAULT_LAMBDAS_T1, DEFAULT_LAMBDAS_T2, check_t1, check_t2
from .roots import RootFindingError
from .simulation import SCHEMES, SimulationError, default_pavg_grid, emit_results, run_simulation, sweep_pavg

FULL_SCALE_EPOCHS = 100_000


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _common(p: argparse.ArgumentParser, trace: bool = True, out: bool = True):
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    p.add_argument("--epochs", type=int, help="number of epochs M (overrides config)")
    p.add_argument("--full-scale", action="store_true", help=f"use M = {FULL_SCALE_EPOCHS} epochs")
    p.add_argument("--nodes", type=int, help="number of nodes K (overrides config)")
    p.add_argument("--processing-cost", type=float, help="circuit power p_c in watts (overrides config)")
    p.add_argument("--workers", type=int, default=1, help="threads for trace generation")
    if trace:
        p.add_argument("--trace", help="read channel gains from this CSV instead of generating them")
    if out:
        p.add_argument("--out", help="output path (stdout if omitted)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wpcn", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one scheme at one average power budget")
    _common(p)
    p.add_argument("--scheme", choices=SCHEMES, default="joint_t1")
    p.add_argument("--pavg", type=float, help="average BS power in watts (overrides config)")

    p = sub.add_parser("sweep", help="throughput versus average BS power")
    _common(p)
    p.add_argument("--schemes", default="joint_t1,benchmark_fixed,equal_share")
    p.add_argument("--pavg", type=_floats, help="comma-separated budgets in watts")
    p.add_argument("--points", type=int, default=20, help="log-spaced budgets when --pavg is absent")
    p.add_argument("--pavg-min", type=float, default=1e-3)

    p = sub.add_parser("validate", help="compare analytic allocations with grid search")
    _common(p, trace=False)
    p.add_argument("--theorem", choices=("t1", "t2", "both"), default="both")
    p.add_argument("--cases", type=int, default=100, help="random epochs per lambda")
    p.add_argument("--grid-n", type=int, default=2000)

    p = sub.add_parser("gen-trace", help="write a channel trace CSV")
    _common(p, trace=False, out=False)
    p.add_argument("--out", required=True)
    return parser


def _config(args) -> NetworkConfig:
    cfg = NetworkConfig.load(args.config) if args.config else NetworkConfig()
    changes = {}
    if args.seed is not None:
        changes["rng_seed"] = args.seed
    if args.full_scale:
        changes["num_epochs"] = FULL_SCALE_EPOCHS
    if args.epochs is not None:
        changes["num_epochs"] = args.epochs
    if args.processing_cost is not None:
        changes["processing_cost"] = args.processing_cost
    if args.nodes is not None:
        changes["num_nodes"] = args.nodes
        if len(set(cfg.mean_gain)) == 1:
            changes["mean_gain"] = cfg.mean_gain[:1] * args.nodes
    if getattr(args, "pavg", None) is not None and not isinstance(args.pavg, list):
        changes["avg_power"] = args.pavg
    return validate_config(replace(cfg, **changes))


def _trace(args, cfg):
    if getattr(args, "trace", None):
        return load_trace(args.trace, cfg)
    return generate_trace(cfg, workers=args.workers)


def _cmd_simulate(args) -> int:
    cfg = _config(args)
    report = run_simulation(cfg, args.scheme, _trace(args, cfg))
    emit_results(report, args.out, args.format)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config(args)
    pavg = args.pavg if args.pavg else default_pavg_grid(args.points, args.pavg_min, cfg.max_power)
    schemes = [s.strip() for s in args.schemes.split(",") if s.strip()]
    curve = sweep_pavg(cfg, pavg, schemes, _trace(args, cfg))
    emit_results(curve, args.out, args.format)
    return 0


def _cmd_validate(args) -> int:
    cfg = replace(_config(args), num_epochs=args.cases)
    reports = []
    if args.theorem in ("t1", "both"):
        reports.append(check_t1(cfg, lambdas=DEFAULT_LAMBDAS_T1, grid_n=args.grid_n))
    if args.theorem in ("t2", "both"):
        cfg2 = replace(cfg, num_nodes=1, mean_gain=cfg.mean_gain[:1])
        reports.append(check_t2(cfg2, lambdas=DEFAULT_LAMBDAS_T2, grid_n=args.grid_n))
    rows = []
    for r in reports:
        rows.append(
            {
                "theorem": r.theorem,
                "cases": len(r.cases),
                "value_failures": len(r.value_failures),
                "endpoint_failures": len(r.endpoint_failures),
                "closed_form_window_mismatches": len(r.window_mismatches) if r.theorem == "t2" else 0,
                "passed": r.passed,
            }
        )
    if args.format == "json":
        text = json.dumps({"validation": rows}, indent=2) + "\n"
    else:
        keys = list(rows[0])
        text = ",".join(keys) + "\n" + "".join(",".join(str(row[k]) for k in keys) + "\n" for row in rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if all(r.passed for r in reports) else 1


def _cmd_gen_trace(args) -> int:
    cfg = _config(args)
    save_trace(generate_trace(cfg, workers=args.workers), args.out)
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
    "gen-trace": _cmd_gen_trace,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, TraceError, SimulationError, CalibrationError, RootFindingError, OSError, ValueError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, SimulationError) and exc.epochs:
            err["epochs"] = exc.epochs[:20]
        print(json.dumps(err), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
