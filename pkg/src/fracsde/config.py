"""Run configuration: INI-style text, one section per subcommand.

Grammar (``configparser`` syntax)::

    [common]            # optional, applies to every command
    seed = 2024
    output = runs/case5

    [bootstrap]         # section named after the subcommand
    beta = 0.7
    hurst = 0.5
    replicates = 20

Keys not listed in a command's schema are rejected.  Values from ``--set
key=value`` on the command line override the file.  The config hash is the
SHA-256 of the canonical JSON of the resolved, typed values, so whitespace,
key order and comments never change it.  ``output`` and ``workers`` do not
enter the hash since they cannot change results.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass
from typing import Any, Optional


class ConfigError(ValueError):
    pass


def _bool(s: str) -> bool:
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s) -> tuple:
    if isinstance(s, (tuple, list)):
        return tuple(float(v) for v in s)
    return tuple(float(v) for v in str(s).replace(" ", "").split(",") if v)


def _grid(s) -> tuple:
    vals = _floats(s)
    if len(vals) != 3:
        raise ValueError("expected lo,hi,count")
    return (vals[0], vals[1], int(vals[2]))


def _cases(s) -> tuple:
    text = str(s).strip().lower()
    if text == "all":
        return tuple(range(1, 10))
    out = []
    for part in text.replace(" ", "").split(","):
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        elif part:
            out.append(int(part))
    return tuple(out)


Key = tuple  # (parser, default, check or None)

_REQUIRED = object()

COMMON: dict[str, Key] = {
    "seed": (int, 0, None),
    "output": (str, "out", None),
    "eta": (float, 0.01, lambda v: 0 < v < 0.5),
    "workers": (int, 1, lambda v: v >= 1),
}

_SIM = {
    "model": (str, "example", None),
    "beta": (float, 0.7, None),
    "hurst": (float, 0.5, lambda v: 0 < v < 1),
    "t_max": (float, 5.0, lambda v: v > 0),
    "n": (int, 100, lambda v: v >= 1),
    "fbm_method": (str, "cholesky", lambda v: v in ("cholesky", "circulant", "zero")),
}

_ANNEAL = {
    "n_iter": (int, 20000, lambda v: v >= 0),
    "step_beta": (float, 1e-4, lambda v: v > 0),
    "step_h": (float, 1e-4, lambda v: v > 0),
    "grid_beta": (_grid, (-3.0, 3.0, 301), lambda v: v[2] >= 1 and v[1] >= v[0]),
    "grid_h": (_grid, (0.05, 0.95, 181), lambda v: v[2] >= 1 and 0 < v[0] <= v[1] < 1),
    "method": (str, "anneal", lambda v: v in ("anneal", "profile")),
    "jacobian": (_bool, True, None),
}

_BAYES = {
    "bayes_iter": (int, 50000, lambda v: v >= 1),
    "burn_in": (int, 1000, lambda v: v >= 0),
    "thin": (int, 50, lambda v: v >= 1),
    "level": (float, 0.95, lambda v: 0 < v < 1),
}

SCHEMAS: dict[str, dict[str, Key]] = {
    "simulate": dict(_SIM),
    "fit-mle": {
        "input": (str, _REQUIRED, None),
        "model": (str, "example", None),
        **_ANNEAL,
        "trace": (_bool, False, None),
    },
    "fit-bayes": {
        "input": (str, _REQUIRED, None),
        "model": (str, "example", None),
        **_BAYES,
        **_ANNEAL,
        "step_beta_bayes": (float, 0.05, lambda v: v >= 0),
        "step_nu": (float, 0.05, lambda v: v >= 0),
        "nu_mean": (float, None, None),
        "nu_sd": (float, None, lambda v: v > 0),
        "beta_mean": (float, None, None),
        "beta_sd": (float, None, lambda v: v > 0),
        "case_extreme": (_bool, False, None),
        "likelihood": (str, "path", lambda v: v in ("path", "flat")),
        "export": (str, "thinned", lambda v: v in ("thinned", "full")),
    },
    "bootstrap": {
        **_SIM,
        **_ANNEAL,
        "replicates": (int, 20, lambda v: v >= 2),
        "level": (float, 0.95, lambda v: 0 < v < 1),
    },
    "inconsistency": {
        "model": (str, "example", None),
        "beta": (float, 0.7, None),
        "hurst": (float, 0.5, lambda v: 0 < v < 1),
        "h_star": (float, 0.7, lambda v: 0 < v < 1),
        "t_values": (_floats, (5.0, 10.0, 20.0), lambda v: len(v) >= 1 and min(v) > 0),
        "n_factor": (float, 20.0, lambda v: v > 0),
        "kernel_hurst": (str, "candidate", lambda v: v in ("candidate", "true")),
    },
    "reproduce-tables": {
        "cases": (_cases, tuple(range(1, 10)), None),
        "replicates": (int, 20, lambda v: v >= 1),
        "t_max": (float, 5.0, lambda v: v > 0),
        "n": (int, 100, lambda v: v >= 1),
        **_ANNEAL,
        **_BAYES,
        "bayes": (_bool, True, None),
        # None keeps each case's own TMCMC step
        "bayes_step": (float, None, lambda v: v >= 0),
        "budget_seconds": (float, 900.0, lambda v: v > 0),
    },
}

_UNHASHED = ("output", "workers")


@dataclass(frozen=True)
class RunConfig:
    command: str
    values: dict
    config_hash: str

    def __getattr__(self, name: str) -> Any:
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None

    @property
    def provenance(self) -> dict:
        return {"config_hash": self.config_hash, "seed": self.values["seed"]}


def _canonical(command: str, values: dict) -> str:
    payload = {k: v for k, v in values.items() if k not in _UNHASHED}
    payload["command"] = command
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def resolve(command: str, text: Optional[str] = None,
            overrides: Optional[dict] = None) -> RunConfig:
    """Parse config text for ``command``, apply overrides, validate every field."""
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    schema = {**COMMON, **SCHEMAS[command]}
    raw: dict[str, str] = {}
    if text:
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}") from exc
        for section in ("common", command):
            if cp.has_section(section):
                raw.update(cp.items(section))
    raw.update({k: str(v) for k, v in (overrides or {}).items()})

    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"{command}: unknown keys {', '.join(unknown)}")

    values = {}
    for key, (parse, default, check) in schema.items():
        if key in raw:
            try:
                val = parse(raw[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{command}.{key}: cannot parse {raw[key]!r} ({exc})") from None
        elif default is _REQUIRED:
            raise ConfigError(f"{command}.{key}: required")
        else:
            val = default
        if val is not None and check is not None and not check(val):
            raise ConfigError(f"{command}.{key}: invalid value {val!r}")
        values[key] = val

    if "burn_in" in values and "bayes_iter" in values and values["burn_in"] >= values["bayes_iter"]:
        raise ConfigError(
            f"{command}.burn_in: must be smaller than bayes_iter ({values['bayes_iter']})"
        )
    if "grid_h" in values:
        lo, hi, _ = values["grid_h"]
        eta = values["eta"]
        if lo < eta or hi > 1 - eta:
            raise ConfigError(f"{command}.grid_h: must lie inside [{eta}, {1 - eta}]")
    for key in ("hurst", "h_star"):
        if key in values and not values["eta"] <= values[key] <= 1 - values["eta"]:
            raise ConfigError(f"{command}.{key}: outside [eta, 1 - eta]")
    prior_keys = ("nu_mean", "nu_sd", "beta_mean", "beta_sd")
    if command == "fit-bayes":
        given = [values[k] is not None for k in prior_keys]
        if any(given) and not all(given):
            raise ConfigError(f"{command}: give all of {', '.join(prior_keys)} or none")
    if command == "inconsistency" and values["h_star"] == values["hurst"]:
        raise ConfigError(f"{command}.h_star: must differ from hurst")
    if command == "reproduce-tables":
        bad = [c for c in values["cases"] if c not in range(1, 10)]
        if bad or not values["cases"]:
            raise ConfigError(f"{command}.cases: unknown case ids {bad}")

    canon = _canonical(command, values)
    return RunConfig(command, values, hashlib.sha256(canon.encode()).hexdigest())
