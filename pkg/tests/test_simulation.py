from dataclasses import replace

import jsonschema
import json
import numpy as np
import pytest

from wpcn.channel import generate_trace
from wpcn.model import NetworkConfig
from wpcn.simulation import (
    RESULT_FIELDS,
    RESULT_SCHEMA,
    SimulationError,
    default_pavg_grid,
    emit_results,
    format_results,
    read_results,
    run_simulation,
    sweep_pavg,
)


@pytest.fixture(scope="module")
def cfg():
    return NetworkConfig(num_nodes=2, mean_gain=1e6, num_epochs=2000, rng_seed=17)


@pytest.fixture(scope="module")
def curve(cfg):
    return sweep_pavg(cfg, default_pavg_grid(6), ("joint_t1", "benchmark_fixed", "equal_share"))


def test_report_fields(cfg):
    rep = run_simulation(cfg, "joint_t1")
    assert rep.audit.ok and rep.converged
    assert rep.sum_throughput == pytest.approx(sum(rep.per_node_rate))
    assert abs(rep.achieved_power - cfg.avg_power) <= 1e-6 * cfg.avg_power
    assert 0 < rep.active_epochs < cfg.num_epochs


def test_run_is_deterministic(cfg):
    a, b = run_simulation(cfg, "joint_t1"), run_simulation(cfg, "joint_t1")
    assert a.row() == b.row()


def test_joint_t2_single_node_only(cfg):
    with pytest.raises(SimulationError, match="single node"):
        run_simulation(cfg, "joint_t2")


def test_unknown_scheme(cfg):
    with pytest.raises(SimulationError, match="unknown scheme"):
        run_simulation(cfg, "greedy")


def test_trace_shape_checked(cfg):
    with pytest.raises(SimulationError, match="does not match"):
        run_simulation(cfg, "joint_t1", generate_trace(replace(cfg, num_epochs=10)))


def test_sweep_ordering(curve):
    j, b, e = (curve.series(s) for s in ("joint_t1", "benchmark_fixed", "equal_share"))
    assert np.all(np.diff(j) > 0)
    assert np.all(j[:-1] > b[:-1]) and np.all(b >= e)


def test_sweep_input_checks(cfg):
    for bad in ([], [0.2, 0.1], [0.0, 0.5], [0.5, 2.0]):
        with pytest.raises(SimulationError):
            sweep_pavg(cfg, bad)


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_emit_round_trip(curve, tmp_path, fmt):
    path = tmp_path / f"out.{fmt}"
    emit_results(curve, path, fmt)
    rows = read_results(path, fmt)
    assert rows == curve.rows()
    assert len(rows) == 6 * 3


def test_csv_layout(curve):
    lines = format_results(curve, "csv").splitlines()
    assert lines[0] == ",".join(RESULT_FIELDS)
    assert len(lines) == 1 + 18


def test_json_schema(curve):
    jsonschema.validate(json.loads(format_results(curve, "json")), RESULT_SCHEMA)


def test_emit_to_stdout(cfg, capsys):
    emit_results(run_simulation(cfg, "equal_share"), None, "csv")
    assert capsys.readouterr().out.startswith("scheme,")


def test_empty_path_rejected(cfg):
    with pytest.raises(OSError):
        emit_results(run_simulation(cfg, "equal_share"), "", "csv")
