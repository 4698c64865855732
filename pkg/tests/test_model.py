import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpcn.model import ConfigError, EpochChannelState, NetworkConfig, validate_config


def test_reference_regime_is_valid():
    cfg = NetworkConfig(num_nodes=5, noise_power=1e-12, avg_power=0.1, max_power=1.0,
                        num_epochs=100_000, mean_gain=1e6)
    assert validate_config(cfg) is cfg
    assert cfg.mean_gain == (1e6,) * 5


def test_avg_above_max_rejected():
    with pytest.raises(ConfigError, match="P_avg exceeds P_max"):
        validate_config(NetworkConfig(avg_power=2.0, max_power=1.0))


def test_processing_cost_valid():
    validate_config(NetworkConfig(processing_cost=1e-5))


def test_every_violation_reported():
    cfg = NetworkConfig(num_nodes=0, noise_power=-1.0, avg_power=0.0, processing_cost=-1.0,
                        num_epochs=0, root_tol=2.0, lambda_tol=0.0, mean_gain=(1.0,))
    with pytest.raises(ConfigError) as info:
        validate_config(cfg)
    fields = {v.field for v in info.value.violations}
    assert {"num_nodes", "noise_power", "avg_power", "processing_cost", "num_epochs",
            "root_tol", "lambda_tol"} <= fields


def test_mean_gain_length_must_match_nodes():
    with pytest.raises(ConfigError, match="mean_gain"):
        validate_config(NetworkConfig(num_nodes=3, mean_gain=(1e6, 1e6)))


def test_config_text_grammar():
    text = """
    # network
    num_nodes = 2      # two sensors
    mean_gain = 1e6, 2e6
    num_epochs = 1e4
    avg_power = 0.05
    """
    cfg = NetworkConfig.from_text(text)
    assert cfg.num_nodes == 2 and cfg.num_epochs == 10_000
    assert cfg.mean_gain == (1e6, 2e6)
    assert cfg.avg_power == 0.05


def test_config_parse_errors():
    with pytest.raises(ConfigError, match="unknown key"):
        NetworkConfig.from_text("colour = blue\n")
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        NetworkConfig.from_text("num_nodes 3\n")
    with pytest.raises(ConfigError, match="num_epochs"):
        NetworkConfig.from_text("num_epochs = 1.5\n")


positive = st.floats(min_value=1e-15, max_value=1e15, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(
    k=st.integers(1, 6),
    n0=positive,
    pmax=st.floats(1e-3, 1e3),
    frac=st.floats(1e-6, 1.0),
    pc=st.floats(0, 1e-2),
    gain=positive,
    m=st.integers(1, 10**6),
    seed=st.integers(0, 2**64 - 1),
)
def test_config_round_trip(k, n0, pmax, frac, pc, gain, m, seed):
    cfg = validate_config(NetworkConfig(num_nodes=k, noise_power=n0, avg_power=pmax * frac, max_power=pmax,
                                        processing_cost=pc, mean_gain=gain, num_epochs=m, rng_seed=seed))
    assert NetworkConfig.from_text(cfg.to_text()) == cfg


def test_config_file_round_trip(tmp_path):
    cfg = NetworkConfig(num_nodes=3, mean_gain=(1e6, 2e6, 3.5e5), rng_seed=2**63 + 11)
    cfg.save(tmp_path / "net.cfg")
    assert NetworkConfig.load(tmp_path / "net.cfg") == cfg


def test_unit_audit():
    raw = np.array([1e-6, 3e-7, 2.5e-6])
    s = EpochChannelState(raw, 1e-12)
    # a = N0 x^2 = x'^2 / N0
    np.testing.assert_allclose(s.aux_coeffs, raw**2 / 1e-12, rtol=1e-12)
    assert math.isclose(s.aux_sum, s.aux_coeffs.sum(), rel_tol=1e-15)
    np.testing.assert_allclose(s.normalized_gains, raw / 1e-12, rtol=1e-15)


def test_non_reciprocal_aux():
    s = EpochChannelState([2e-6], 1e-12, raw_gains_down=[5e-7])
    np.testing.assert_allclose(s.aux_coeffs, [1e-12 * 2e6 * 5e5], rtol=1e-14)


def test_gains_must_be_positive():
    with pytest.raises(ValueError):
        EpochChannelState([1e-6, 0.0], 1e-12)
