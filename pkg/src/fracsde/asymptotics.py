"""Normalising constants for the β-MLE and the plug-in inconsistency experiment.

For a constant drift/diffusion ratio r,

    C_1(H)  = r B(3/2 - H, 3/2 - H)
    α_H     = k_H c_H / (4H(1 - H) C_1(H))
    Ψ       = T^{1-Ĥ} (β̂ - β_0) / |α_Ĥ|      (rate exponent 1 - H)
    d_H     = 2 k_H^{-1} (1 - H) C_1(H)

and with H fixed at a wrong value H* the β estimate behaves like
β_0 (d_{H_0}/d_{H*}) T^{2(H* - H_0)}.  For non-constant ratios only
``a_H = k_H c_H / (2H C_2)`` is available, with C_2 supplied by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .hurst import DEFAULT_ETA, TimeGrid, make_constants
from .likelihood import KernelWeightCache, PathLikelihood, innovations
from .paths import FbmSampler, ModelSpec, simulate_sde
from .rng import derive_seed


@dataclass(frozen=True)
class NormalizationConstants:
    h: float
    c1: Optional[float]
    alpha_h: float
    rate_exponent: float


def alpha_constant_ratio(h: float, ratio_value: float, eta: float = DEFAULT_ETA) -> NormalizationConstants:
    if ratio_value == 0:
        raise ValueError("ratio_value must be nonzero")
    k = make_constants(h, eta)
    c1 = ratio_value * k.beta_integral
    alpha = k.k_h * k.c_h / (4.0 * k.h * (1.0 - k.h) * c1)
    return NormalizationConstants(k.h, c1, alpha, 1.0 - k.h)


def a_general(h: float, c2_value: float, eta: float = DEFAULT_ETA) -> NormalizationConstants:
    """Constant for the general-ratio case; ``c2_value`` is the caller's C_2(H, X)."""
    if c2_value == 0:
        raise ValueError("c2_value must be nonzero")
    k = make_constants(h, eta)
    return NormalizationConstants(k.h, None, k.k_h * k.c_h / (2.0 * k.h * c2_value), 2.0 - k.h)


def standardized_mle(boot, beta0: float, t_max: float, ratio_value: float = 1.0,
                     eta: float = DEFAULT_ETA) -> np.ndarray:
    """``T^{1-Ĥ_r} (β̂_r - β_0) / |α_{Ĥ_r}|`` for each bootstrap replicate."""
    out = []
    for rep in boot.replicates:
        nc = alpha_constant_ratio(rep.h_hat, ratio_value, eta)
        out.append(t_max ** nc.rate_exponent / abs(nc.alpha_h) * (rep.beta_hat - beta0))
    return np.array(out)


def d_constant(h: float, ratio_value: float = 1.0, eta: float = DEFAULT_ETA) -> float:
    k = make_constants(h, eta)
    return 2.0 / k.k_h * (1.0 - k.h) * ratio_value * k.beta_integral


def plugin_limit(beta0: float, h0: float, h_star: float, t_max, ratio_value: float = 1.0,
                 eta: float = DEFAULT_ETA):
    """Predicted β estimate when H is held at ``h_star`` instead of ``h0``."""
    t_max = np.asarray(t_max, dtype=float)
    return beta0 * d_constant(h0, ratio_value, eta) / d_constant(h_star, ratio_value, eta) * t_max ** (
        2.0 * (h_star - h0)
    )


@dataclass(frozen=True)
class InconsistencyRow:
    t_max: float
    n: int
    beta_tilde: float
    theory_prediction: float
    seed: int


def default_n_of_t(t_max: float) -> int:
    return int(round(20 * t_max * t_max))


def inconsistency_experiment(model: ModelSpec, beta0: float, h0: float, h_star: float,
                             t_values: Sequence[float],
                             n_of_t: Callable[[float], int] = default_n_of_t,
                             seed: int = 0, kernel_hurst: str = "candidate",
                             eta: float = DEFAULT_ETA) -> list:
    """β estimated at fixed ``h_star`` on paths simulated at ``(beta0, h0)``, for each T.

    ``kernel_hurst="candidate"`` builds the Z-transform with ``h_star`` like
    every other estimator here; ``"true"`` builds it with ``h0`` and uses
    ``h_star`` only for the drift and variance terms.
    """
    if h_star == h0:
        raise ValueError("h_star must differ from h0")
    if kernel_hurst not in ("candidate", "true"):
        raise ValueError(f"unknown kernel_hurst {kernel_hurst!r}")
    t_values = [float(t) for t in t_values]
    if any(b <= a for a, b in zip(t_values, t_values[1:])):
        raise ValueError("t_values must be strictly increasing")
    if not model.ratio_is_constant:
        raise ValueError("the plug-in prediction needs a constant drift/diffusion ratio")
    rows = []
    for idx, t_max in enumerate(t_values):
        n = int(n_of_t(t_max))
        grid = TimeGrid(t_max, n)
        path_seed = derive_seed(seed, idx)
        method = "cholesky" if n <= 2000 else "circulant"
        path = simulate_sde(model, beta0, h0, grid, path_seed,
                            sampler=FbmSampler(h0, grid, method=method, eta=eta), eta=eta)
        lik = PathLikelihood(path, model, eta=eta)
        if kernel_hurst == "candidate":
            beta_tilde = lik.profile_beta(h_star)
        else:
            cache = KernelWeightCache(grid)
            dz = np.diff(cache.transform(h0, innovations(path, model)))
            _, dg, vs, _ = lik.terms(h_star)
            beta_tilde = float(np.sum(dz * dg / vs) / np.sum(dg * dg / vs))
        rows.append(InconsistencyRow(t_max, n, float(beta_tilde),
                                     float(plugin_limit(beta0, h0, h_star, t_max,
                                                        model.ratio_value, eta)),
                                     path_seed))
    return rows


@dataclass(frozen=True)
class NormalityCheck:
    n: int
    mean: float
    sd: float
    ks_stat: float
    ks_pvalue: float
    ad_stat: float
    ad_critical_1pct: float

    def passes(self, level: float = 0.01) -> bool:
        return self.ks_pvalue > level


def normality_check(psi) -> NormalityCheck:
    """KS against N(0, 1), plus the Anderson-Darling shape statistic for reference."""
    from scipy import stats

    psi = np.asarray(psi, dtype=float)
    ks = stats.kstest(psi, "norm")
    ad = stats.anderson(psi, "norm")
    crit = float(ad.critical_values[list(ad.significance_level).index(1.0)])
    return NormalityCheck(psi.size, float(psi.mean()), float(psi.std(ddof=1)),
                          float(ks.statistic), float(ks.pvalue), float(ad.statistic), crit)


def is_monotone(rows: Sequence[InconsistencyRow], increasing: bool) -> bool:
    mags = np.abs([r.beta_tilde for r in rows])
    steps = np.diff(mags)
    return bool(np.all(steps > 0) if increasing else np.all(steps < 0))


def direction_fraction(model: ModelSpec, beta0: float, h0: float, h_star: float,
                       t_values: Sequence[float], seeds: Sequence[int],
                       kernel_hurst: str = "candidate",
                       n_of_t: Callable[[float], int] = default_n_of_t) -> tuple[float, list]:
    """Share of seeds whose ``|β̃_T|`` moves monotonically in the predicted direction."""
    runs = [inconsistency_experiment(model, beta0, h0, h_star, t_values, n_of_t, seed=s,
                                     kernel_hurst=kernel_hurst) for s in seeds]
    hits = [is_monotone(r, increasing=h_star > h0) for r in runs]
    return float(np.mean(hits)), runs
