"""Sum-computation-rate maximization for IRS-aided edge computing with binary offloading."""
from .allocation import local_rate, offload_allocation, offload_rate_if_added
from .beamforming import align_phase, effective_gain, shared_beam_sca
from .channel import (ChannelSet, GeometryConfig, path_loss, realize_channels,
                      realize_trial, rician_vector, trial_rng)
from .estimator import OffloadingAllocator
from .model import Device, Solution, SystemParams, dbm_to_watts, validate_scenario
from .oracle import OracleResult, grouping_oracle, subset_oracle
from .selection import activation_test, solve_finite_q, solve_infinite_q, trading_rate

__version__ = "0.1.0"

__all__ = [
    "ChannelSet", "Device", "GeometryConfig", "OffloadingAllocator", "OracleResult",
    "Solution", "SystemParams", "activation_test", "align_phase", "dbm_to_watts",
    "effective_gain", "grouping_oracle", "local_rate", "offload_allocation",
    "offload_rate_if_added", "path_loss", "realize_channels", "realize_trial", "rician_vector",
    "shared_beam_sca", "solve_finite_q", "solve_infinite_q", "subset_oracle",
    "trading_rate", "trial_rng", "validate_scenario",
]
