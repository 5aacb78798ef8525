"""Regeneration-block bootstrap for finite-alphabet chains with long memory.

The package simulates chains whose next-symbol law depends on the whole past,
builds their canonical order-k Markov approximations, cuts trajectories into
excursion blocks at the return times of the initial k-string, resamples those
blocks uniformly to form bootstrap samples, and ships a Monte Carlo harness
that checks asymptotic normality of the normalized bootstrap mean together
with the supporting tail, moment, and coupling bounds.
"""

from .blocks import (
    BlockStats,
    RegenerationDecomposition,
    block_statistics,
    extract_blocks,
    regeneration_diagnostics,
    return_times,
)
from .bootstrap import (
    BootstrapReplicate,
    assemble_sample,
    bootstrap_distribution,
    bootstrap_replicate,
    draw_indices,
    normalized_statistic,
    segment_mean,
    sigma_star,
)
from .chains import (
    Alphabet,
    FiniteOrderKernel,
    GeometricMixtureKernel,
    HypothesisReport,
    Observable,
    conditional_distribution,
    continuity_rate,
    delta_lower_bound,
    hypothesis_report,
    long_run_variance_estimate,
    mixing_exponent,
)
from .errors import (
    ConfigError,
    DegenerateSampleError,
    InsufficientReturnsError,
    RegenbootError,
    ResourceCapError,
    StationarityError,
)
from .harness import (
    ExperimentConfig,
    ExperimentReport,
    clt_experiment,
    coupling_check,
    mean_scaling_check,
    tail_and_moment_check,
)
from .markov import (
    CoupledPair,
    OrderKKernel,
    canonical_from_kernel,
    canonical_from_trajectory,
    coupled_pair_trajectories,
    discrepancy_rate,
    markov_mean,
    maximal_coupling_step,
    stationary_distribution,
)
from .rng import SeedSpec
from .schedule import AdmissibilityWindow, admissibility_window, block_count
from .simulate import (
    default_burn_in,
    sample_infinite_order_trajectory,
    sample_markov_trajectory,
)
from .stats import ks_distance, normal_cdf, sample_skewness

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "AdmissibilityWindow",
    "BlockStats",
    "BootstrapReplicate",
    "ConfigError",
    "CoupledPair",
    "DegenerateSampleError",
    "ExperimentConfig",
    "ExperimentReport",
    "FiniteOrderKernel",
    "GeometricMixtureKernel",
    "HypothesisReport",
    "InsufficientReturnsError",
    "Observable",
    "OrderKKernel",
    "RegenbootError",
    "RegenerationDecomposition",
    "ResourceCapError",
    "SeedSpec",
    "StationarityError",
    "admissibility_window",
    "assemble_sample",
    "block_count",
    "block_statistics",
    "bootstrap_distribution",
    "bootstrap_replicate",
    "canonical_from_kernel",
    "canonical_from_trajectory",
    "clt_experiment",
    "conditional_distribution",
    "continuity_rate",
    "coupled_pair_trajectories",
    "coupling_check",
    "default_burn_in",
    "delta_lower_bound",
    "discrepancy_rate",
    "draw_indices",
    "extract_blocks",
    "hypothesis_report",
    "ks_distance",
    "long_run_variance_estimate",
    "markov_mean",
    "maximal_coupling_step",
    "mean_scaling_check",
    "mixing_exponent",
    "normal_cdf",
    "normalized_statistic",
    "regeneration_diagnostics",
    "return_times",
    "sample_infinite_order_trajectory",
    "sample_markov_trajectory",
    "sample_skewness",
    "segment_mean",
    "sigma_star",
    "stationary_distribution",
    "tail_and_moment_check",
]
