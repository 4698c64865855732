import numpy as np
import pytest

from wpcn.channel import ChannelTrace, TraceError, generate_trace, load_trace, save_trace
from wpcn.model import NetworkConfig


@pytest.fixture(scope="module")
def big_trace():
    cfg = NetworkConfig(num_nodes=2, mean_gain=(1e6, 2e5), num_epochs=100_000, rng_seed=42)
    return cfg, generate_trace(cfg)


def test_raw_gain_mean_matches_path_loss(big_trace):
    cfg, trace = big_trace
    mean = trace.raw_gains.mean(axis=0)
    np.testing.assert_allclose(mean, cfg.mean_raw_gain, rtol=0.01)
    assert abs(mean[0] - 1e-6) / 1e-6 < 0.01


def test_normalized_gain_mean_matches_omega(big_trace):
    cfg, trace = big_trace
    np.testing.assert_allclose(trace.normalized_gains.mean(axis=0), cfg.mean_gain, rtol=0.01)


def test_exponential_variance(big_trace):
    _, trace = big_trace
    g = trace.raw_gains
    ratio = g.var(axis=0) / g.mean(axis=0) ** 2
    np.testing.assert_allclose(ratio, 1.0, atol=0.03)


def test_nodes_uncorrelated(big_trace):
    _, trace = big_trace
    assert abs(np.corrcoef(trace.raw_gains.T)[0, 1]) < 0.02


def test_same_seed_bit_identical():
    cfg = NetworkConfig(num_nodes=3, mean_gain=1e6, num_epochs=500, rng_seed=9)
    assert generate_trace(cfg).equals(generate_trace(cfg))
    other = generate_trace(NetworkConfig(num_nodes=3, mean_gain=1e6, num_epochs=500, rng_seed=10))
    assert not generate_trace(cfg).equals(other)


@pytest.mark.parametrize("workers", [2, 3, 7])
@pytest.mark.parametrize("k", [1, 4, 5])
def test_partition_independent(workers, k):
    cfg = NetworkConfig(num_nodes=k, mean_gain=1e6, num_epochs=1001, rng_seed=123)
    assert generate_trace(cfg, workers=workers).equals(generate_trace(cfg, workers=1))


def test_prefix_stable_under_longer_runs():
    cfg = NetworkConfig(num_epochs=50, rng_seed=5)
    short = generate_trace(cfg)
    longer = generate_trace(cfg, num_epochs=80)
    np.testing.assert_array_equal(short.raw_gains, longer.raw_gains[:50])


def test_save_load_round_trip(tmp_path):
    cfg = NetworkConfig(num_nodes=3, mean_gain=1e6, num_epochs=40, rng_seed=1)
    trace = generate_trace(cfg)
    path = tmp_path / "t.csv"
    save_trace(trace, path)
    back = load_trace(path, cfg)
    assert back.equals(trace)
    assert path.read_text().splitlines()[0] == "epoch,node,gain_raw"


def test_non_reciprocal_round_trip(tmp_path):
    cfg = NetworkConfig(num_nodes=2, mean_gain=1e6, num_epochs=3)
    up = np.array([[1e-6, 2e-6], [3e-7, 4e-6], [5e-6, 6e-7]])
    trace = ChannelTrace(up, 1e-12, raw_gains_down=up[::-1].copy())
    save_trace(trace, tmp_path / "nr.csv")
    assert load_trace(tmp_path / "nr.csv", cfg).equals(trace)


def test_one_epoch_one_node(tmp_path):
    cfg = NetworkConfig(num_nodes=1, num_epochs=1)
    trace = generate_trace(cfg)
    save_trace(trace, tmp_path / "one.csv")
    assert len((tmp_path / "one.csv").read_text().splitlines()) == 2


def test_zero_gain_rejected(tmp_path):
    path = tmp_path / "z.csv"
    path.write_text("epoch,node,gain_raw\n0,0,1e-6\n1,0,0.0\n")
    with pytest.raises(TraceError, match=r"non-positive gain at \(1,0\)"):
        load_trace(path, NetworkConfig(num_epochs=2))


def test_short_file_rejected(tmp_path):
    cfg = NetworkConfig(num_epochs=4)
    save_trace(generate_trace(cfg, num_epochs=3), tmp_path / "s.csv")
    with pytest.raises(TraceError, match="length mismatch"):
        load_trace(tmp_path / "s.csv", cfg)


def test_parse_error_reports_position(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("epoch,node,gain_raw\n0,0,abc\n")
    with pytest.raises(TraceError, match="row 2, column 3"):
        load_trace(path, NetworkConfig(num_epochs=1))


def test_empty_path_is_io_error():
    trace = generate_trace(NetworkConfig(num_epochs=2))
    with pytest.raises(OSError):
        save_trace(trace, "")
