"""The nine simulation-study cases and the runners behind the two result tables."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Optional

from .bayes import PosteriorSummary, TmcmcConfig, default_priors, run_tmcmc, summarize
from .hurst import TimeGrid
from .mle import (AnnealConfig, BootstrapDistribution, BootstrapError, _replicate,
                  _shared_sampler, bootstrap_mle, percentile_ci)
from .paths import example_model, simulate_sde
from .rng import derive_seed


@dataclass(frozen=True)
class Case:
    case_id: int
    h0: float
    beta0: float
    bayes_step: float = 0.05
    extreme: bool = False


CASES = {
    1: Case(1, 0.1, 1.0),
    2: Case(2, 0.2, 0.3, bayes_step=0.01),
    3: Case(3, 0.3, -1.0),
    4: Case(4, 0.4, -0.5),
    5: Case(5, 0.5, 0.7),
    6: Case(6, 0.6, -1.2),
    7: Case(7, 0.7, 1.7, bayes_step=1.0),
    8: Case(8, 0.8, -1.5, extreme=True),
    9: Case(9, 0.9, 1.4, extreme=True),
}

TABLE1_HEADER = ("case", "h0", "h_hat", "ci_h_lo", "ci_h_hi", "beta0", "beta_hat",
                 "ci_beta_lo", "ci_beta_hi", "replicates", "failures", "seed",
                 "runtime_s", "status")
TABLE2_HEADER = ("case", "h0", "mean_h", "bci_h_lo", "bci_h_hi", "beta0", "mean_beta",
                 "bci_beta_lo", "bci_beta_hi", "accept_stage1", "accept_stage2",
                 "ess_beta", "ess_h", "n_iter", "seed", "runtime_s", "status")

# TMCMC stream for the Bayesian table, kept apart from the bootstrap streams
BAYES_STREAM = 99

# seconds per likelihood evaluation at n=100 on the reference machine
_EVAL_COST_N100 = 5.5e-5


def get_case(case_id: int) -> Case:
    try:
        return CASES[int(case_id)]
    except KeyError:
        raise ValueError(f"unknown case id {case_id}; valid ids are 1..9") from None


def estimate_runtime(n_cases: int, replicates: int, n: int, anneal: AnnealConfig,
                     bayes_iter: int = 0) -> float:
    """Rough wall-clock estimate in seconds, quadratic in ``n``."""
    per_eval = _EVAL_COST_N100 * (n / 100.0) ** 2
    grid_evals = anneal.grid_h[2] * 0.05  # grid search is vectorised over β
    fit = (anneal.n_iter + grid_evals) * per_eval
    return n_cases * (replicates * fit + 2 * bayes_iter * per_eval)


def run_classical_case(case: Case, seed: int, grid: TimeGrid, anneal: AnnealConfig,
                       replicates: int, method: str = "anneal", level: float = 0.95,
                       workers: int = 1) -> tuple[dict, BootstrapDistribution]:
    start = time.perf_counter()
    cfg = replace(anneal, seed=seed)
    if replicates == 1:
        boot = _single_fit(case, grid, cfg, method, level)
    else:
        boot = bootstrap_mle(example_model(), case.beta0, case.h0, grid, cfg, replicates,
                             method=method, level=level, workers=workers)
    row = {
        "case": case.case_id, "h0": case.h0, "h_hat": boot.h_hat,
        "ci_h_lo": boot.ci_h[0], "ci_h_hi": boot.ci_h[1],
        "beta0": case.beta0, "beta_hat": boot.beta_hat,
        "ci_beta_lo": boot.ci_beta[0], "ci_beta_hi": boot.ci_beta[1],
        "replicates": boot.n_replicates, "failures": len(boot.failures), "seed": seed,
        "runtime_s": round(time.perf_counter() - start, 3), "status": "ok",
    }
    return row, boot


def _single_fit(case: Case, grid: TimeGrid, cfg: AnnealConfig, method: str,
                level: float) -> BootstrapDistribution:
    """Replicate 0 on its own; its interval collapses to the point."""
    _, seed, fit, err = _replicate((example_model(), case.beta0, case.h0, grid, cfg, 0,
                                    method, "cholesky"))
    if err is not None:
        raise BootstrapError(f"single replicate failed: {err}")
    return BootstrapDistribution([fit], [seed], percentile_ci([fit.beta_hat], level),
                                 percentile_ci([fit.h_hat], level), level)


def bayes_dataset(case: Case, seed: int, grid: TimeGrid, eta: float):
    """The first bootstrap replicate's path, reused as the Bayesian data set."""
    sampler = _shared_sampler(float(case.h0), grid, "cholesky", eta)
    return simulate_sde(example_model(), case.beta0, case.h0, grid,
                        derive_seed(seed, 0, 0), sampler=sampler, eta=eta)


def run_bayes_case(case: Case, seed: int, grid: TimeGrid, boot: BootstrapDistribution,
                   tmcmc: TmcmcConfig, level: float = 0.95,
                   step: Optional[float] = None) -> tuple[dict, PosteriorSummary, object]:
    """Posterior for one case with priors centred on the bootstrap point estimate."""
    start = time.perf_counter()
    path = bayes_dataset(case, seed, grid, tmcmc.eta)
    prior = default_priors(boot, case_extreme=case.extreme)
    a = case.bayes_step if step is None else step
    cfg = replace(tmcmc, seed=derive_seed(seed, BAYES_STREAM), step_beta=a, step_nu=a)
    trace = run_tmcmc(path, example_model(), prior, cfg)
    summ = summarize(trace, level)
    row = {
        "case": case.case_id, "h0": case.h0, "mean_h": summ.mean_h,
        "bci_h_lo": summ.bci_h[0], "bci_h_hi": summ.bci_h[1],
        "beta0": case.beta0, "mean_beta": summ.mean_beta,
        "bci_beta_lo": summ.bci_beta[0], "bci_beta_hi": summ.bci_beta[1],
        "accept_stage1": summ.accept_rates[0], "accept_stage2": summ.accept_rates[1],
        "ess_beta": summ.ess_beta, "ess_h": summ.ess_h, "n_iter": cfg.n_iter,
        "seed": cfg.seed, "runtime_s": round(time.perf_counter() - start, 3), "status": "ok",
    }
    return row, summ, trace


def failed_row(header, case: Case, seed: int, err: Exception) -> dict:
    row = {k: "" for k in header}
    row.update(case=case.case_id, h0=case.h0, beta0=case.beta0, seed=seed,
               status=f"failed: {type(err).__name__}: {err}".replace("\n", " "))
    return row
