"""Secure-and-covert power allocation for untrusted amplify-and-forward relaying.

Subpackages:

- ``channel``: geometry, path-loss variances, seeded channel sampling.
- ``links``: two-phase AF SINR algebra and secrecy rates.
- ``detection``: Willie's energy-detection statistics and covert certificates.
- ``allocation``: the DC/SCA power allocator, grid oracles, relay selection.
- ``direct``: single-phase null-space-beamforming benchmark.
- ``experiments``: seeded Monte Carlo sweeps, figure presets, CSV output.
"""

from .channel import (
    ChannelRealization,
    LinkVariances,
    SystemParams,
    Topology,
    dbw_to_watts,
    link_variances,
    lsma_leakage_variance,
    lsma_sinr_si,
    mrt_weights,
    sample_channels,
)
from .links import LinkGains, PowerSplit, secrecy_rate
from .detection import (
    CltMoments,
    DetectionOutcome,
    PhaseScales,
    covert_box_bounds,
    fa_md,
    min_error_sum,
    optimal_threshold,
)
from .allocation import AllocationResult, ScaConfig, grid_oracle, sca_optimize
from .direct import DirectResult, direct_optimize
from .experiments import ExperimentConfig, SweepResult, emit_csv, ergodic_rate, run_preset

__version__ = "0.1.0"

__all__ = [
    "AllocationResult",
    "ChannelRealization",
    "CltMoments",
    "DetectionOutcome",
    "DirectResult",
    "ExperimentConfig",
    "LinkGains",
    "LinkVariances",
    "PhaseScales",
    "PowerSplit",
    "ScaConfig",
    "SweepResult",
    "SystemParams",
    "Topology",
    "covert_box_bounds",
    "dbw_to_watts",
    "direct_optimize",
    "emit_csv",
    "ergodic_rate",
    "fa_md",
    "grid_oracle",
    "link_variances",
    "lsma_leakage_variance",
    "lsma_sinr_si",
    "min_error_sum",
    "mrt_weights",
    "optimal_threshold",
    "run_preset",
    "sample_channels",
    "sca_optimize",
    "secrecy_rate",
]
