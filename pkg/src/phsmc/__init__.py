"""Multi-chain Markov chain Monte Carlo for Bayesian model selection.

Samplers: Metropolis-Hastings (:func:`run_mh`), parallel tempering
(:func:`run_pt`) and the parallel hierarchical sampler (:func:`run_phs`).
Targets: a scalar Gaussian mixture, linear-regression variable selection
and Weibull survival trees (:mod:`phsmc.survival`).
"""
__version__ = "0.1.0"

from .core import (
    ChainState,
    FunctionTarget,
    InvalidStateError,
    MHKernel,
    Proposal,
    StateSpaceKind,
    TargetDistribution,
    make_rng,
    mh_accept_log_ratio,
    mh_step,
)
from .diagnostics import RunReport, Trace, histogram, inclusion_probabilities, mcse
from .samplers import (
    ConfigurationError,
    SamplerRuntimeError,
    SwapConfig,
    SwapMode,
    TemperatureLadder,
    run_mh,
    run_phs,
    run_pt,
)

__all__ = [
    "__version__",
    "ChainState",
    "FunctionTarget",
    "InvalidStateError",
    "MHKernel",
    "Proposal",
    "StateSpaceKind",
    "TargetDistribution",
    "make_rng",
    "mh_accept_log_ratio",
    "mh_step",
    "RunReport",
    "Trace",
    "histogram",
    "inclusion_probabilities",
    "mcse",
    "ConfigurationError",
    "SamplerRuntimeError",
    "SwapConfig",
    "SwapMode",
    "TemperatureLadder",
    "run_mh",
    "run_phs",
    "run_pt",
]
