"""Maximum likelihood for (β, H): grid start, annealed additive TMCMC, bootstrap."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from .hurst import DEFAULT_ETA, TimeGrid, check_hurst
from .likelihood import LOG_2PI, PathLikelihood
from .paths import FbmSampler, ModelSpec, ObservedPath, ZeroNoiseSampler, simulate_sde
from .rng import derive_seed, make_rng
from .trace import ChainTrace

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnnealConfig:
    n_iter: int = 20000
    step_beta: float = 1e-4
    step_h: float = 1e-4
    grid_beta: tuple = (-3.0, 3.0, 301)
    grid_h: tuple = (0.05, 0.95, 181)
    seed: int = 0
    eta: float = DEFAULT_ETA
    jacobian: bool = True
    record_trace: bool = False

    def __post_init__(self):
        if int(self.n_iter) != self.n_iter or self.n_iter < 0:
            raise ValueError(f"n_iter must be a non-negative integer, got {self.n_iter!r}")
        if not (self.step_beta > 0 and self.step_h > 0):
            raise ValueError("annealing step sizes must be positive")
        for name in ("grid_beta", "grid_h"):
            lo, hi, count = getattr(self, name)
            if int(count) != count or count < 1 or hi < lo:
                raise ValueError(f"{name} must be (lo, hi, count>=1) with lo <= hi")
        lo, hi, _ = self.grid_h
        check_hurst(lo, self.eta)
        check_hurst(hi, self.eta)

    def beta_values(self) -> np.ndarray:
        lo, hi, count = self.grid_beta
        return np.linspace(lo, hi, int(count))

    def h_values(self) -> np.ndarray:
        lo, hi, count = self.grid_h
        return np.linspace(lo, hi, int(count))


@dataclass
class MleResult:
    beta_hat: float
    h_hat: float
    best_loglik: float
    init: tuple
    accept_rate: float
    trace: Optional[ChainTrace] = field(default=None, repr=False)
    method: str = "anneal"


class BootstrapError(RuntimeError):
    pass


@dataclass
class BootstrapDistribution:
    replicates: list
    seeds: list
    ci_beta: tuple
    ci_h: tuple
    level: float
    failures: list = field(default_factory=list)

    @property
    def n_replicates(self) -> int:
        return len(self.replicates)

    @property
    def beta_values(self) -> np.ndarray:
        return np.array([r.beta_hat for r in self.replicates])

    @property
    def h_values(self) -> np.ndarray:
        return np.array([r.h_hat for r in self.replicates])

    # point estimates are the mean of the MLE distribution
    @property
    def beta_hat(self) -> float:
        return float(self.beta_values.mean())

    @property
    def h_hat(self) -> float:
        return float(self.h_values.mean())


def _objective(path, model, config, objective):
    if objective is not None:
        return objective
    return PathLikelihood(path, model, eta=config.eta, jacobian=config.jacobian)


def _loglik_over_beta(obj, betas: np.ndarray, h: float) -> np.ndarray:
    if not isinstance(obj, PathLikelihood):
        return np.array([obj(b, h) for b in betas])
    dz, dg, vs, lj = obj.terms(h)
    resid = dz[None, :] - betas[:, None] * dg[None, :]
    vals = -0.5 * np.sum(LOG_2PI + np.log(vs) + resid * resid / vs, axis=1)
    return vals + lj if obj.jacobian else vals


def grid_init(path: ObservedPath, model: ModelSpec, config: AnnealConfig, objective=None):
    """Best grid point; ties go to the smallest H, then the smallest β."""
    obj = _objective(path, model, config, objective)
    betas = config.beta_values()
    best = (-math.inf, None, None)
    for h in config.h_values():
        vals = _loglik_over_beta(obj, betas, float(h))
        j = int(np.argmax(vals))
        if vals[j] > best[0]:
            best = (float(vals[j]), float(betas[j]), float(h))
    if best[1] is None:
        raise ValueError("log-likelihood was not finite anywhere on the initial grid")
    return best[1], best[2]


def temperature(t: int) -> float:
    """Cooling schedule: ``1/log log log t`` once that is positive (floored at 1e-3), else ``1/t``."""
    if t >= 3:
        lll = math.log(math.log(math.log(t)))
        if lll > 0:
            return 1.0 / max(lll, 1e-3)
    return 1.0 / t


def anneal_tmcmc(path: ObservedPath, model: ModelSpec, config: AnnealConfig,
                 init: Optional[tuple] = None, objective=None) -> MleResult:
    """Simulated annealing with additive-transformation moves.

    Each iteration draws one ``ε ~ N(0, 1)`` and two independent signs and
    proposes ``(β ± a1|ε|, H ± a2|ε|)``.  Proposals with H outside
    ``[eta, 1 - eta]`` are rejected.  The best state visited, including the
    start, is returned.
    """
    obj = _objective(path, model, config, objective)
    if init is None:
        init = grid_init(path, model, config, obj)
    beta, h = float(init[0]), float(init[1])
    check_hurst(h, config.eta)
    cur = obj(beta, h)
    n = int(config.n_iter)

    rng = make_rng(config.seed)
    eps = np.abs(rng.standard_normal(n))
    signs = rng.choice(np.array([-1.0, 1.0]), size=(n, 2))
    log_u = np.log(rng.uniform(size=n))

    lo, hi = config.eta, 1.0 - config.eta
    best = (cur, beta, h)
    accepted = np.zeros((n + 1, 1), dtype=bool)
    states = np.empty((n + 1, 3)) if config.record_trace else None
    if states is not None:
        states[0] = beta, h, cur
    n_acc = 0
    for t in range(1, n + 1):
        e = eps[t - 1]
        b_new = beta + signs[t - 1, 0] * config.step_beta * e
        h_new = h + signs[t - 1, 1] * config.step_h * e
        if lo <= h_new <= hi:
            val = obj(b_new, h_new)
            delta = val - cur
            if delta >= 0 or log_u[t - 1] < delta / temperature(t):
                beta, h, cur = b_new, h_new, val
                accepted[t, 0] = True
                n_acc += 1
                if cur > best[0]:
                    best = (cur, beta, h)
        if states is not None:
            states[t] = beta, h, cur
    trace = None
    if states is not None:
        trace = ChainTrace(states, ("beta", "h", "loglik"), accepted)
    return MleResult(
        beta_hat=best[1],
        h_hat=best[2],
        best_loglik=best[0],
        init=(float(init[0]), float(init[1])),
        accept_rate=n_acc / n if n else float("nan"),
        trace=trace,
        method="anneal",
    )


def fit_profile(path: ObservedPath, model: ModelSpec, config: AnnealConfig,
                objective=None) -> MleResult:
    """MLE by maximising the β-profile over H (grid bracket, then bounded Brent)."""
    from scipy.optimize import minimize_scalar

    obj = _objective(path, model, config, objective)
    hs = config.h_values()
    vals = np.array([obj.profile(float(h))[1] for h in hs])
    k = int(np.argmax(vals))
    h0 = float(hs[k])
    lo = float(hs[max(k - 1, 0)])
    hi = float(hs[min(k + 1, hs.size - 1)])
    lo, hi = max(lo, config.eta), min(hi, 1.0 - config.eta)
    h_best, v_best = h0, float(vals[k])
    if hi > lo:
        res = minimize_scalar(lambda x: -obj.profile(float(x))[1], bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-7})
        if -res.fun > v_best:
            h_best, v_best = float(res.x), float(-res.fun)
    b_best = obj.profile_beta(h_best)
    return MleResult(b_best, h_best, v_best, (obj.profile_beta(h0), h0), float("nan"),
                     method="profile")


def fit_mle(path: ObservedPath, model: ModelSpec, config: AnnealConfig,
            method: str = "anneal") -> MleResult:
    if method == "anneal":
        return anneal_tmcmc(path, model, config)
    if method == "profile":
        return fit_profile(path, model, config)
    raise ValueError(f"unknown MLE method {method!r}")


def percentile_ci(values, level: float = 0.95) -> tuple:
    """Empirical ``(1-level)/2`` and ``(1+level)/2`` quantiles (inverse-CDF rule)."""
    values = np.asarray(values, dtype=float)
    # rounding keeps (1 - 0.95) / 2 from landing just above 0.025
    alpha = round((1.0 - level) / 2.0, 12)
    lo, hi = np.quantile(values, [alpha, 1.0 - alpha], method="inverted_cdf")
    return float(lo), float(hi)


@lru_cache(maxsize=8)
def _shared_sampler(h: float, grid: TimeGrid, method: str, eta: float):
    if method == "zero":
        return ZeroNoiseSampler(h, grid)
    return FbmSampler(h, grid, method=method, eta=eta)


def _replicate(args):
    model, beta0, h0, grid, config, rep, method, noise = args
    path_seed = derive_seed(config.seed, rep, 0)
    fit_seed = derive_seed(config.seed, rep, 1)
    try:
        sampler = _shared_sampler(float(h0), grid, noise, config.eta)
        path = simulate_sde(model, beta0, h0, grid, path_seed, sampler=sampler, eta=config.eta)
        fit = fit_mle(path, model, replace(config, seed=fit_seed, record_trace=False), method)
        return rep, path_seed, fit, None
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        return rep, path_seed, None, f"{type(exc).__name__}: {exc}"


def bootstrap_mle(model: ModelSpec, beta0: float, h0: float, grid: TimeGrid,
                  config: AnnealConfig, n_replicates: int, *, method: str = "anneal",
                  level: float = 0.95, noise: str = "cholesky",
                  workers: int = 1) -> BootstrapDistribution:
    """Parametric bootstrap of the MLE at ``(beta0, h0)``.

    Replicate ``r`` simulates with seed ``derive_seed(config.seed, r, 0)`` and
    fits with ``derive_seed(config.seed, r, 1)``.  ``noise`` picks the fBm
    method (``"cholesky"``, ``"circulant"``) or the all-zero test hook.
    """
    if n_replicates < 2:
        raise ValueError("n_replicates must be at least 2")
    jobs = [(model, beta0, h0, grid, config, r, method, noise) for r in range(n_replicates)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replicate, jobs))
    else:
        results = [_replicate(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    fits, seeds, failures = [], [], []
    for rep, seed, fit, err in results:
        if err is not None:
            failures.append((rep, err))
            log.warning("replicate %d failed: %s", rep, err)
            continue
        fits.append(fit)
        seeds.append(seed)
    if len(failures) > 0.1 * n_replicates or len(fits) < 2:
        raise BootstrapError(f"{len(failures)} of {n_replicates} replicates failed: {failures[:3]}")
    return BootstrapDistribution(
        replicates=fits,
        seeds=seeds,
        ci_beta=percentile_ci([f.beta_hat for f in fits], level),
        ci_h=percentile_ci([f.h_hat for f in fits], level),
        level=level,
        failures=failures,
    )
