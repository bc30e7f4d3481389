"""Key rates of passive decoy-state BB84 transmitters.

The package models a transmitter whose intensity and polarization settings
come from interfering phase-randomized pulses, a lossy channel, and an
active BB84 receiver with threshold detectors. It provides the photon
statistics, gains and error rates (closed forms and quadratures), the
decoy-state bounds, key rates, optimizers and a Monte Carlo cross-check.
"""

from ._backend import BACKEND
from .decoy import DecoyBounds, estimate_bounds
from .detection import ChannelConfig, ObservedStats, click_probabilities, eta_sys, observe
from .errors import (
    ConfigError,
    ConsistencyError,
    DomainError,
    EstimationError,
    NumericalError,
    QkdError,
    QuadratureError,
)
from .key_rate import (
    RateResult,
    active_infinite_decoy_rate,
    asymptotic_passive_rate,
    binary_entropy,
    passive_rate,
)
from .montecarlo import McReport, run_detection_mc, run_source_mc
from .optimizer import OptimizationResult, OptimizerOptions, distance_sweep, find_cutoff, optimize_at_distance
from .photon_stats import PhotonStats, build_stats, p_acc
from .source import SourceConfig

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChannelConfig",
    "ConfigError",
    "ConsistencyError",
    "DecoyBounds",
    "DomainError",
    "EstimationError",
    "McReport",
    "NumericalError",
    "ObservedStats",
    "OptimizationResult",
    "OptimizerOptions",
    "PhotonStats",
    "QkdError",
    "QuadratureError",
    "RateResult",
    "SourceConfig",
    "active_infinite_decoy_rate",
    "asymptotic_passive_rate",
    "binary_entropy",
    "build_stats",
    "click_probabilities",
    "distance_sweep",
    "estimate_bounds",
    "eta_sys",
    "find_cutoff",
    "observe",
    "optimize_at_distance",
    "p_acc",
    "passive_rate",
    "run_detection_mc",
    "run_source_mc",
]
