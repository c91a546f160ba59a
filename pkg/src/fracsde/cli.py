"""Command-line entry point.

    fracsde <command> [--config FILE] [--set key=value ...] [--seed N] [--output DIR]

Exit codes: 0 success, 2 invalid configuration, 3 missing or unreadable
input, 4 numerical failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .asymptotics import inconsistency_experiment
from .bayes import PriorSpec, TmcmcConfig, default_priors, logistic, logit, run_tmcmc, summarize
from .experiments import (TABLE1_HEADER, TABLE2_HEADER, estimate_runtime, failed_row,
                          get_case, run_bayes_case, run_classical_case)
from .hurst import TimeGrid
from .io import read_path, write_csv, write_decomposition, write_json, write_path
from .likelihood import FlatLikelihood, PathLikelihood
from .mle import AnnealConfig, BootstrapError, bootstrap_mle, fit_mle
from .paths import FbmSampler, SimulationError, ZeroNoiseSampler, get_model, simulate_sde

log = logging.getLogger("fracsde")

EXIT_OK, EXIT_OTHER, EXIT_CONFIG, EXIT_FILE, EXIT_NUMERIC = 0, 1, 2, 3, 4

COMMANDS = ("simulate", "fit-mle", "fit-bayes", "bootstrap", "inconsistency", "reproduce-tables")


class InputError(OSError):
    """Input file missing or malformed."""


def _bounded_workers(requested: int) -> int:
    return max(1, min(int(requested), os.cpu_count() or 1))


def _anneal_config(v: dict) -> AnnealConfig:
    return AnnealConfig(n_iter=v["n_iter"], step_beta=v["step_beta"], step_h=v["step_h"],
                        grid_beta=v["grid_beta"], grid_h=v["grid_h"], seed=v["seed"],
                        eta=v["eta"], jacobian=v["jacobian"])


def _load_input(src: str):
    try:
        return read_path(src)
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from None
    except (ValueError, IndexError) as exc:
        raise InputError(f"cannot read path file {src}: {exc}") from None


def _out(rc: cfgmod.RunConfig) -> Path:
    out = Path(rc.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _report(*files) -> None:
    for f in files:
        print(f)


def cmd_simulate(rc: cfgmod.RunConfig) -> int:
    v = rc.values
    model = get_model(v["model"])
    grid = TimeGrid(v["t_max"], v["n"])
    if v["fbm_method"] == "zero":
        sampler = ZeroNoiseSampler(v["hurst"], grid)
    else:
        sampler = FbmSampler(v["hurst"], grid, method=v["fbm_method"], eta=v["eta"])
    path = simulate_sde(model, v["beta"], v["hurst"], grid, v["seed"], sampler=sampler,
                        eta=v["eta"])
    _report(*write_path(path, _out(rc) / "path.csv", rc.provenance))
    return EXIT_OK


def cmd_fit_mle(rc: cfgmod.RunConfig) -> int:
    v = rc.values
    path = _load_input(v["input"])
    model = get_model(v["model"])
    acfg = replace(_anneal_config(v), record_trace=v["trace"])
    fit = fit_mle(path, model, acfg, method=v["method"])
    out = _out(rc)
    summary = {
        **rc.provenance,
        "input": v["input"],
        "method": fit.method,
        "beta_hat": fit.beta_hat,
        "h_hat": fit.h_hat,
        "best_loglik": fit.best_loglik,
        "init_beta": fit.init[0],
        "init_h": fit.init[1],
        "accept_rate": fit.accept_rate,
        "n_iter": acfg.n_iter,
    }
    files = [write_json(out / "mle.json", summary)]
    decomp = PathLikelihood(path, model, eta=v["eta"]).decomposition(fit.beta_hat, fit.h_hat)
    files.append(write_decomposition(decomp, path.grid, out / "decomposition.csv", rc.provenance))
    if fit.trace is not None:
        st = fit.trace.states
        rows = ((i, st[i, 0], st[i, 1], st[i, 2], fit.trace.accepted[i, 0])
                for i in range(len(fit.trace)))
        files.append(write_csv(out / "mle_trace.csv", ("iter", "beta", "h", "loglik", "accepted"),
                               rows, rc.provenance))
    _report(*files)
    return EXIT_OK


def _trace_rows(trace, export: str):
    idx = trace.thinned() if export == "thinned" else np.arange(len(trace))
    st, acc = trace.states, trace.accepted
    for i in idx:
        yield (int(i), st[i, 0], st[i, 1], logistic(st[i, 1]), st[i, 2], acc[i, 0], acc[i, 1])


TRACE_HEADER = ("iter", "beta", "nu", "h", "log_post", "stage1_accepted", "stage2_accepted")


def _summary_dict(summ) -> dict:
    return {
        "mean_beta": summ.mean_beta, "mean_h": summ.mean_h,
        "bci_beta": list(summ.bci_beta), "bci_h": list(summ.bci_h),
        "ess_beta": summ.ess_beta, "ess_h": summ.ess_h, "level": summ.level,
        "n_samples": summ.n_samples, "accept_stage1": summ.accept_rates[0],
        "accept_stage2": summ.accept_rates[1], "degenerate": summ.degenerate,
    }


def cmd_fit_bayes(rc: cfgmod.RunConfig) -> int:
    v = rc.values
    path = _load_input(v["input"])
    model = get_model(v["model"])
    if v["nu_mean"] is not None:
        prior = PriorSpec(v["nu_mean"], v["nu_sd"], v["beta_mean"], v["beta_sd"])
        init = (prior.beta_mean, prior.nu_mean)
    else:
        fit = fit_mle(path, model, _anneal_config(v), method=v["method"])
        prior = default_priors(fit, case_extreme=v["case_extreme"])
        init = (fit.beta_hat, logit(fit.h_hat))
    tcfg = TmcmcConfig(n_iter=v["bayes_iter"], step_beta=v["step_beta_bayes"],
                       step_nu=v["step_nu"], seed=v["seed"], burn_in=v["burn_in"],
                       thin=v["thin"], eta=v["eta"], jacobian=v["jacobian"])
    loglik = FlatLikelihood(v["eta"]) if v["likelihood"] == "flat" else None
    trace = run_tmcmc(path, model, prior, tcfg, init=init, loglik=loglik)
    summ = summarize(trace, v["level"])
    out = _out(rc)
    payload = {**rc.provenance, "input": v["input"], "likelihood": v["likelihood"],
               "prior": {"nu_mean": prior.nu_mean, "nu_sd": prior.nu_sd,
                         "beta_mean": prior.beta_mean, "beta_sd": prior.beta_sd},
               "init_beta": init[0], "init_nu": init[1], "n_iter": tcfg.n_iter,
               "burn_in": tcfg.burn_in, "thin": tcfg.thin, **_summary_dict(summ)}
    _report(
        write_csv(out / "trace.csv", TRACE_HEADER, _trace_rows(trace, v["export"]), rc.provenance),
        write_json(out / "posterior.json", payload),
    )
    return EXIT_OK


def cmd_bootstrap(rc: cfgmod.RunConfig) -> int:
    v = rc.values
    grid = TimeGrid(v["t_max"], v["n"])
    boot = bootstrap_mle(get_model(v["model"]), v["beta"], v["hurst"], grid, _anneal_config(v),
                         v["replicates"], method=v["method"], level=v["level"],
                         noise=v["fbm_method"], workers=_bounded_workers(v["workers"]))
    out = _out(rc)
    rows = ((i, r.beta_hat, r.h_hat, r.best_loglik, s)
            for i, (r, s) in enumerate(zip(boot.replicates, boot.seeds)))
    summary = {**rc.provenance, "beta0": v["beta"], "h0": v["hurst"], "T": v["t_max"],
               "n": v["n"], "replicates": boot.n_replicates, "failures": len(boot.failures),
               "beta_hat": boot.beta_hat, "h_hat": boot.h_hat, "ci_beta": list(boot.ci_beta),
               "ci_h": list(boot.ci_h), "level": boot.level}
    _report(
        write_csv(out / "bootstrap.csv", ("rep", "beta_hat", "h_hat", "loglik", "seed"), rows,
                  rc.provenance),
        write_json(out / "bootstrap.json", summary),
    )
    return EXIT_OK


def cmd_inconsistency(rc: cfgmod.RunConfig) -> int:
    v = rc.values
    factor = v["n_factor"]
    rows = inconsistency_experiment(get_model(v["model"]), v["beta"], v["hurst"], v["h_star"],
                                    v["t_values"], n_of_t=lambda t: int(round(factor * t * t)),
                                    seed=v["seed"], kernel_hurst=v["kernel_hurst"], eta=v["eta"])
    out = _out(rc)
    prov = {**rc.provenance, "h0": v["hurst"], "h_star": v["h_star"], "beta0": v["beta"]}
    _report(write_csv(out / "inconsistency.csv", ("T", "n", "beta_tilde", "theory_prediction", "seed"),
                      ((r.t_max, r.n, r.beta_tilde, r.theory_prediction, r.seed) for r in rows),
                      prov))
    return EXIT_OK


def cmd_reproduce_tables(rc: cfgmod.RunConfig) -> int:
    v = rc.values
    grid = TimeGrid(v["t_max"], v["n"])
    acfg = _anneal_config(v)
    cases = [get_case(c) for c in v["cases"]]
    eta = v["eta"]
    estimate = estimate_runtime(len(cases), v["replicates"], v["n"], acfg,
                                v["bayes_iter"] if v["bayes"] else 0)
    if estimate > v["budget_seconds"]:
        log.warning("estimated runtime %.0fs exceeds the %.0fs budget", estimate, v["budget_seconds"])
    workers = _bounded_workers(v["workers"])
    tcfg = TmcmcConfig(n_iter=v["bayes_iter"], burn_in=v["burn_in"], thin=v["thin"], eta=eta,
                       jacobian=v["jacobian"])
    t1, t2 = [], []
    n_failed = 0
    for case in cases:
        try:
            row, boot = run_classical_case(case, v["seed"], grid, acfg, v["replicates"],
                                           method=v["method"], level=v["level"], workers=workers)
            t1.append(row)
        except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
            log.error("case %d (classical) failed: %s", case.case_id, exc)
            t1.append(failed_row(TABLE1_HEADER, case, v["seed"], exc))
            n_failed += 1
            boot = None
        if not v["bayes"]:
            continue
        if boot is None:
            t2.append(failed_row(TABLE2_HEADER, case, v["seed"], RuntimeError("no MLE")))
            continue
        try:
            row2, _, _ = run_bayes_case(case, v["seed"], grid, boot, tcfg, level=v["level"],
                                        step=v["bayes_step"])
            t2.append(row2)
        except (ArithmeticError, ValueError, RuntimeError) as exc:
            log.error("case %d (Bayes) failed: %s", case.case_id, exc)
            t2.append(failed_row(TABLE2_HEADER, case, v["seed"], exc))
            n_failed += 1
    out = _out(rc)
    files = [write_csv(out / "table1.csv", TABLE1_HEADER, ([r[k] for k in TABLE1_HEADER] for r in t1),
                       rc.provenance)]
    if v["bayes"]:
        files.append(write_csv(out / "table2.csv", TABLE2_HEADER,
                               ([r[k] for k in TABLE2_HEADER] for r in t2), rc.provenance))
    _report(*files)
    return EXIT_NUMERIC if n_failed else EXIT_OK


HANDLERS = {
    "simulate": cmd_simulate,
    "fit-mle": cmd_fit_mle,
    "fit-bayes": cmd_fit_bayes,
    "bootstrap": cmd_bootstrap,
    "inconsistency": cmd_inconsistency,
    "reproduce-tables": cmd_reproduce_tables,
}


def _parse_set(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or not key.strip():
            raise cfgmod.ConfigError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = val.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracsde",
                                     description="Inference for fBm-driven SDEs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI file with [common] and [%s] sections" % name)
        p.add_argument("--set", action="append", metavar="KEY=VALUE", default=[],
                       help="override one config key (repeatable)")
        p.add_argument("--seed", type=int)
        p.add_argument("--output")
        if name in ("fit-mle", "fit-bayes"):
            p.add_argument("--input")
    return parser


def resolve_args(args) -> cfgmod.RunConfig:
    text = None
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise InputError(f"cannot read config file {args.config}: {exc.strerror}") from None
    overrides = _parse_set(args.set)
    for key in ("seed", "output", "input"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    return cfgmod.resolve(args.command, text, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = resolve_args(args)
        return HANDLERS[args.command](rc)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputError, OSError) as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except (ArithmeticError, SimulationError, BootstrapError, np.linalg.LinAlgError,
            ValueError) as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
