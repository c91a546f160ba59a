"""Posterior sampling for (β, ν) with H = logistic(ν).

Priors: ν ~ N(nu_mean, nu_sd²), β ~ N(beta_mean, beta_sd²).  The sampler is
an additive TMCMC: a random-sign move of both coordinates driven by one
innovation, followed by a same-sign move that helps the chain travel along
the (β, ν) ridge.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .hurst import DEFAULT_ETA
from .likelihood import FlatLikelihood, PathLikelihood
from .paths import ModelSpec, ObservedPath
from .rng import derive_seed, make_rng
from .trace import ChainTrace

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def logistic(nu: float) -> float:
    """``e^ν / (1 + e^ν)`` without overflow for large ``|ν|``."""
    if nu >= 0:
        return 1.0 / (1.0 + math.exp(-nu))
    e = math.exp(nu)
    return e / (1.0 + e)


def logit(h: float) -> float:
    return math.log(h / (1.0 - h))


def _normal_logpdf(x: float, mean: float, sd: float) -> float:
    z = (x - mean) / sd
    return -0.5 * z * z - math.log(sd) - _HALF_LOG_2PI


@dataclass(frozen=True)
class PriorSpec:
    nu_mean: float
    nu_sd: float
    beta_mean: float
    beta_sd: float

    def __post_init__(self):
        if not (self.nu_sd > 0 and self.beta_sd > 0):
            raise ValueError("prior standard deviations must be positive")

    def log_density(self, beta: float, nu: float) -> float:
        return _normal_logpdf(nu, self.nu_mean, self.nu_sd) + _normal_logpdf(
            beta, self.beta_mean, self.beta_sd
        )


def default_priors(mle, case_extreme: bool = False) -> PriorSpec:
    """Priors centred on an MLE (anything with ``beta_hat`` and ``h_hat``)."""
    h = float(mle.h_hat)
    if not 0.0 < h < 1.0:
        raise ValueError(f"h_hat must lie in (0, 1), got {h}")
    return PriorSpec(
        nu_mean=logit(h),
        nu_sd=0.02 if case_extreme else 0.2,
        beta_mean=float(mle.beta_hat),
        beta_sd=0.01 if case_extreme else 0.1,
    )


@dataclass(frozen=True)
class TmcmcConfig:
    n_iter: int = 50000
    step_beta: float = 0.05
    step_nu: float = 0.05
    seed: int = 0
    burn_in: int = 1000
    thin: int = 50
    eta: float = DEFAULT_ETA
    jacobian: bool = True
    audit: bool = False

    def __post_init__(self):
        if int(self.n_iter) != self.n_iter or self.n_iter < 1:
            raise ValueError(f"n_iter must be a positive integer, got {self.n_iter!r}")
        if self.step_beta < 0 or self.step_nu < 0:
            raise ValueError("step sizes must be non-negative")
        if not 0 <= self.burn_in < self.n_iter:
            raise ValueError(f"burn_in={self.burn_in} must be in [0, n_iter={self.n_iter})")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")


class Posterior:
    """Unnormalised log-posterior in (β, ν) coordinates."""

    def __init__(self, loglik, prior: PriorSpec, eta: float = DEFAULT_ETA):
        self.loglik = loglik
        self.prior = prior
        self.eta = eta

    def in_support(self, nu: float) -> bool:
        return self.eta <= logistic(nu) <= 1.0 - self.eta

    def __call__(self, beta: float, nu: float) -> float:
        return self.loglik(beta, logistic(nu)) + self.prior.log_density(beta, nu)


def log_posterior(path: ObservedPath, model: ModelSpec, beta: float, nu: float,
                  prior: PriorSpec, cache=None, jacobian: bool = True,
                  eta: float = DEFAULT_ETA) -> float:
    return Posterior(PathLikelihood(path, model, cache, eta=eta, jacobian=jacobian),
                     prior, eta)(beta, nu)


def run_tmcmc(path: Optional[ObservedPath], model: Optional[ModelSpec], prior: PriorSpec,
              config: TmcmcConfig, init: Optional[tuple] = None, loglik=None) -> ChainTrace:
    """Two-stage additive TMCMC.

    ``loglik`` overrides the path likelihood (e.g. :class:`FlatLikelihood`);
    ``init`` defaults to the prior means.  Proposals whose H leaves
    ``[eta, 1 - eta]`` are rejected.
    """
    if loglik is None:
        loglik = PathLikelihood(path, model, eta=config.eta, jacobian=config.jacobian)
    post = Posterior(loglik, prior, config.eta)
    beta, nu = init if init is not None else (prior.beta_mean, prior.nu_mean)
    beta, nu = float(beta), float(nu)
    if not post.in_support(nu):
        raise ValueError(f"initial H={logistic(nu)} outside the parameter space")
    cur = post(beta, nu)

    n = int(config.n_iter)
    a1, a2 = config.step_beta, config.step_nu
    rng = make_rng(config.seed)
    eps = np.abs(rng.standard_normal((n, 2)))
    signs = rng.choice(np.array([-1.0, 1.0]), size=(n, 2))
    joint = np.where(rng.uniform(size=n) < 0.5, 1.0, -1.0)
    log_u = np.log(rng.uniform(size=(n, 2)))

    states = np.empty((n + 1, 3))
    states[0] = beta, nu, cur
    accepted = np.zeros((n + 1, 2), dtype=bool)
    audit = None
    if config.audit:
        audit = {"proposal": np.full((n, 2, 3), np.nan), "current": np.empty((n, 2)),
                 "log_u": log_u}
    for t in range(n):
        for stage in (0, 1):
            e = eps[t, stage]
            if stage == 0:
                b_new = beta + signs[t, 0] * a1 * e
                nu_new = nu + signs[t, 1] * a2 * e
            else:
                b_new = beta + joint[t] * a1 * e
                nu_new = nu + joint[t] * a2 * e
            if audit is not None:
                audit["current"][t, stage] = cur
            if not post.in_support(nu_new):
                continue
            val = post(b_new, nu_new)
            if audit is not None:
                audit["proposal"][t, stage] = b_new, nu_new, val
            if log_u[t, stage] < val - cur:
                beta, nu, cur = b_new, nu_new, val
                accepted[t + 1, stage] = True
        states[t + 1] = beta, nu, cur
    return ChainTrace(states, ("beta", "nu", "log_post"), accepted,
                      burn_in=config.burn_in, thin=config.thin, audit=audit)


def _chain_job(args):
    path, model, prior, config, init, flat = args
    loglik = FlatLikelihood(config.eta) if flat else None
    return run_tmcmc(path, model, prior, config, init, loglik=loglik)


def run_chains(path, model, prior: PriorSpec, config: TmcmcConfig, n_chains: int,
               init: Optional[tuple] = None, flat: bool = False, workers: int = 1) -> list:
    """Independent chains with seeds ``derive_seed(config.seed, c)``, ordered by ``c``."""
    jobs = [(path, model, prior, replace(config, seed=derive_seed(config.seed, c)), init, flat)
            for c in range(n_chains)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_chain_job, jobs))
    return [_chain_job(j) for j in jobs]


def effective_sample_size(x: np.ndarray) -> float:
    """ESS from the initial positive sequence of paired autocorrelations.

    NaN when the chain has zero variance.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 4 or np.ptp(x) == 0:
        return float("nan")
    xc = x - x.mean()
    var = float(np.dot(xc, xc)) / n
    if var <= 0 or not np.isfinite(var):
        return float("nan")
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, m)
    acf = np.fft.irfft(f * np.conj(f), m)[:n] / (n * var)
    tau = -1.0
    for k in range(0, n - 1, 2):
        pair = acf[k] + acf[k + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    return float(n / max(tau, 1e-12))


def split_rhat(chains: list) -> float:
    """Split-R̂ for a list of 1-d chains."""
    halves = []
    for c in chains:
        c = np.asarray(c, dtype=float)
        m = c.size // 2
        halves += [c[:m], c[m:2 * m]]
    x = np.vstack(halves)
    n = x.shape[1]
    w = x.var(axis=1, ddof=1).mean()
    b = n * x.mean(axis=1).var(ddof=1)
    if w == 0:
        return float("nan")
    return float(np.sqrt(((n - 1) / n * w + b / n) / w))


@dataclass
class PosteriorSummary:
    mean_beta: float
    mean_h: float
    bci_beta: tuple
    bci_h: tuple
    ess_beta: float
    ess_h: float
    level: float
    n_samples: int
    accept_rates: tuple
    degenerate: bool


def summarize(trace: ChainTrace, level: float = 0.95) -> PosteriorSummary:
    post = trace.post_burn_in()
    if post.shape[0] == 0:
        raise ValueError("no states after burn-in")
    beta = post[:, 0]
    h = np.array([logistic(v) for v in post[:, 1]])
    alpha = (1.0 - level) / 2.0
    q = [alpha, 1.0 - alpha]
    bci_beta = tuple(float(v) for v in np.quantile(beta, q))
    bci_h = tuple(float(v) for v in np.quantile(h, q))
    ess_b = effective_sample_size(beta)
    ess_h = effective_sample_size(h)
    degenerate = not (bci_beta[0] < bci_beta[1] and bci_h[0] < bci_h[1])
    return PosteriorSummary(
        mean_beta=float(beta.mean()),
        mean_h=float(h.mean()),
        bci_beta=bci_beta,
        bci_h=bci_h,
        ess_beta=ess_b,
        ess_h=ess_h,
        level=level,
        n_samples=int(post.shape[0]),
        accept_rates=trace.accept_rates,
        degenerate=degenerate,
    )
