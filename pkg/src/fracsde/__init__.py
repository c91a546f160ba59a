"""Simulation and (β, H) inference for SDEs driven by fractional Brownian motion."""

from .asymptotics import (alpha_constant_ratio, inconsistency_experiment, plugin_limit,
                          standardized_mle)
from .bayes import (PriorSpec, TmcmcConfig, default_priors, log_posterior, run_tmcmc,
                    summarize)
from .hurst import HurstConstants, HurstDomainError, TimeGrid, kernel_kh, make_constants
from .likelihood import (KernelWeightCache, PathLikelihood, compute_delta_g, compute_delta_z,
                         log_likelihood, profile_beta)
from .mle import AnnealConfig, anneal_tmcmc, bootstrap_mle, fit_mle, grid_init
from .paths import (FbmSampler, ModelSpec, ObservedPath, ZeroNoiseSampler, example_model,
                    simulate_sde)
from .rng import derive_seed

__all__ = [
    "AnnealConfig", "FbmSampler", "HurstConstants", "HurstDomainError", "KernelWeightCache",
    "ModelSpec", "ObservedPath", "PathLikelihood", "PriorSpec", "TimeGrid", "TmcmcConfig",
    "ZeroNoiseSampler", "alpha_constant_ratio", "anneal_tmcmc", "bootstrap_mle",
    "compute_delta_g", "compute_delta_z", "default_priors", "derive_seed", "example_model",
    "fit_mle", "grid_init", "inconsistency_experiment", "kernel_kh", "log_likelihood",
    "log_posterior", "make_constants", "plugin_limit", "profile_beta", "run_tmcmc",
    "simulate_sde", "standardized_mle", "summarize",
]
__version__ = "0.1.0"
