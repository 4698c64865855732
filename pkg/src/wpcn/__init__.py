"""Joint BS power and time allocation for wireless powered TDMA networks."""

from .calibration import calibrate_lambda, delivered_average_power, joint_allocator, p2p_allocator
from .channel import ChannelTrace, generate_trace, load_trace, save_trace
from .joint import allocate_epoch_t1, allocate_trace_t1, solve_eh_duration_t1, time_shares_t1
from .model import (
    ConfigError,
    EpochAllocation,
    EpochChannelState,
    LambdaSolution,
    NetworkConfig,
    TraceAllocation,
    validate_config,
)
from .p2p import activation_threshold, activation_window, allocate_epoch_t2, allocate_trace_t2, solve_eh_duration_t2
from .simulation import run_simulation, sweep_pavg

__version__ = "0.1.0"
