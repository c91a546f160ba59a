"""Discretised fundamental-semimartingale likelihood.

For an observed path the transform

    Z_{t_i} = Σ_{j<i} k_H(t_i, s_j) C(t_j, X_{t_j})^{-1} (X_{t_{j+1}} - X_{t_j}),

with cell midpoints ``s_j``, splits into a drift part ``β ΔG_i`` and Gaussian
martingale increments ``ΔM_i ~ N(0, υ_i^2)`` that are independent across cells.
The log-likelihood is the sum of the corresponding normal log-densities.

On a uniform grid ``t_i - s_j = (i - j - 1/2) T/n`` depends on the lag only, so
``k_H(t_i, s_j)`` factors into a column term and a lag term and ``Z`` is a
discrete convolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .hurst import DEFAULT_ETA, HurstConstants, TimeGrid, make_constants, v_squared
from .paths import ModelSpec, ObservedPath

LOG_2PI = math.log(2.0 * math.pi)


class DiffusionError(ValueError):
    """The diffusion coefficient vanished on the observed path."""


class DegenerateDesignError(ValueError):
    pass


class KernelWeightCache:
    """Log tables for the midpoint kernel weights on one grid.

    ``weights(h)`` is recomputed only when ``h`` changes; the log tables are
    immutable and may be shared, the per-``h`` weights are not thread-safe.
    """

    def __init__(self, grid: TimeGrid):
        self.grid = grid
        n = grid.n
        self.log_s_mid = np.log(grid.midpoints)
        # t_i - s_j for lag m = i - j = 1..n
        self.log_t_minus_s = np.log(grid.t_max * (np.arange(1, n + 1, dtype=float) - 0.5) / n)
        self.log_s_mid.setflags(write=False)
        self.log_t_minus_s.setflags(write=False)
        self.last_h: Optional[float] = None
        self._head = None
        self._lag = None
        self._log_k = None

    def weights(self, h: float):
        """Return ``(head, lag)`` with ``k_H(t_i, s_j) = head[j] * lag[i - j - 1]``."""
        if h != self.last_h:
            if not 0.0 < h < 1.0:
                raise ValueError(f"hurst={h!r} outside (0, 1)")
            a = 0.5 - h
            log_k = math.log(make_constants(h, eta=min(h, 1.0 - h, 0.25)).k_h)
            self._head = np.exp(a * self.log_s_mid - log_k)
            self._lag = np.exp(a * self.log_t_minus_s)
            self._log_k = log_k
            self.last_h = h
        return self._head, self._lag

    def weight_matrix(self, h: float) -> np.ndarray:
        """Dense ``W[i-1, j] = k_H(t_i, s_j)`` for ``j < i`` (zeros above)."""
        head, lag = self.weights(h)
        n = self.grid.n
        i, j = np.indices((n, n))
        lagidx = i - j
        w = np.where(lagidx >= 0, head[j] * lag[np.clip(lagidx, 0, None)], 0.0)
        return w

    def log_jacobian(self, h: float) -> float:
        """log |det dZ/dy|: sum of the log diagonal weights ``k_H(t_i, s_{i-1})``."""
        self.weights(h)
        a = 0.5 - h
        n = self.grid.n
        return float(np.sum(a * self.log_s_mid - self._log_k) + n * a * self.log_t_minus_s[0])

    def transform(self, h: float, y: np.ndarray) -> np.ndarray:
        """``Z_{t_i}`` for i = 0..n from per-cell integrands ``y``."""
        head, lag = self.weights(h)
        n = self.grid.n
        z = np.empty(n + 1)
        z[0] = 0.0
        z[1:] = np.convolve(head * y, lag)[:n]
        return z


def _cache_for(path: ObservedPath, cache: Optional[KernelWeightCache]) -> KernelWeightCache:
    if cache is None:
        return KernelWeightCache(path.grid)
    if cache.grid != path.grid:
        raise ValueError("kernel cache was built for a different grid")
    return cache


def innovations(path: ObservedPath, model: ModelSpec) -> np.ndarray:
    """``ΔX_j / C(t_j, X_{t_j})``, diffusion taken at the left end of each cell."""
    t = path.times[:-1]
    x = path.values[:-1]
    c = np.broadcast_to(np.asarray(model.diffusion_c(t, x), dtype=float), t.shape)
    bad = np.flatnonzero(c == 0)
    if bad.size:
        raise DiffusionError(f"diffusion coefficient is zero at grid index {int(bad[0])}")
    return np.diff(path.values) / c


def drift_ratio_midpoint(path: ObservedPath, model: ModelSpec) -> np.ndarray:
    """``(B/C)(s_j, X̄_j)`` with ``X̄_j`` the linearly interpolated midpoint state."""
    s = path.grid.midpoints
    xbar = 0.5 * (path.values[:-1] + path.values[1:])
    c = np.broadcast_to(np.asarray(model.diffusion_c(s, xbar), dtype=float), s.shape)
    bad = np.flatnonzero(c == 0)
    if bad.size:
        raise DiffusionError(f"diffusion coefficient is zero at midpoint of cell {int(bad[0])}")
    b = np.broadcast_to(np.asarray(model.drift_b(s, xbar), dtype=float), s.shape)
    return b / c


def compute_delta_z(path: ObservedPath, model: ModelSpec, h: float,
                    cache: Optional[KernelWeightCache] = None) -> np.ndarray:
    cache = _cache_for(path, cache)
    return np.diff(cache.transform(h, innovations(path, model)))


def _delta_g_closed_form(grid: TimeGrid, ratio: float, consts: HurstConstants) -> np.ndarray:
    du = np.diff(grid.points ** consts.time_power)
    return ratio * consts.beta_integral / consts.k_h * du


def compute_delta_g(path: ObservedPath, model: ModelSpec, h: float,
                    cache: Optional[KernelWeightCache] = None,
                    consts: Optional[HurstConstants] = None) -> np.ndarray:
    """Drift-integral increments ΔG_i (β factored out)."""
    if consts is None:
        consts = make_constants(h)
    if model.ratio_is_constant:
        return _delta_g_closed_form(path.grid, model.ratio_value, consts)
    cache = _cache_for(path, cache)
    y = drift_ratio_midpoint(path, model) * path.grid.dt
    return np.diff(cache.transform(h, y))


@dataclass(frozen=True)
class MartingaleDecomposition:
    delta_z: np.ndarray
    delta_g: np.ndarray
    delta_m: np.ndarray
    v_sq: np.ndarray
    h: float
    beta: float


@dataclass(frozen=True)
class LogLikelihood:
    """``value`` is the sum of Gaussian log-densities of the martingale increments.

    ``log_jacobian`` is the log-determinant of the path-to-Z map; ``total``
    adds it so that values at different ``h`` are densities of the same data.
    """

    value: float
    n_terms: int
    log_jacobian: float = 0.0

    @property
    def total(self) -> float:
        return self.value + self.log_jacobian

    @property
    def ell(self) -> float:
        """``-2 log L``."""
        return -2.0 * self.value


def _gaussian_sum(dm: np.ndarray, v_sq: np.ndarray) -> float:
    return float(-0.5 * np.sum(LOG_2PI + np.log(v_sq) + dm * dm / v_sq))


class PathLikelihood:
    """Likelihood evaluator bound to one path; reuses innovations and caches per-``h`` terms.

    A single instance is not thread-safe, give each chain its own.
    """

    def __init__(self, path: ObservedPath, model: ModelSpec,
                 cache: Optional[KernelWeightCache] = None,
                 eta: float = DEFAULT_ETA, jacobian: bool = True):
        self.path = path
        self.model = model
        self.eta = eta
        self.jacobian = jacobian
        self.cache = _cache_for(path, cache)
        self._y = innovations(path, model)
        if model.ratio_is_constant:
            self._ratio_y = None
        else:
            self._ratio_y = drift_ratio_midpoint(path, model) * path.grid.dt
        self._h = None
        self._terms = None

    def terms(self, h: float):
        """``(delta_z, delta_g, v_sq, log_jacobian)`` at ``h``."""
        if h != self._h:
            consts = make_constants(h, self.eta)
            dz = np.diff(self.cache.transform(h, self._y))
            if self._ratio_y is None:
                dg = _delta_g_closed_form(self.path.grid, self.model.ratio_value, consts)
            else:
                dg = np.diff(self.cache.transform(h, self._ratio_y))
            vs = v_squared(self.path.grid, consts)
            self._terms = (dz, dg, vs, self.cache.log_jacobian(h))
            self._h = h
        return self._terms

    def evaluate(self, beta: float, h: float) -> LogLikelihood:
        dz, dg, vs, lj = self.terms(h)
        return LogLikelihood(_gaussian_sum(dz - beta * dg, vs), dz.size, lj)

    def __call__(self, beta: float, h: float) -> float:
        """Objective used by the samplers: total log-density (or the bare sum)."""
        ll = self.evaluate(beta, h)
        return ll.total if self.jacobian else ll.value

    def profile_beta(self, h: float) -> float:
        dz, dg, vs, _ = self.terms(h)
        den = float(np.sum(dg * dg / vs))
        if not den > 0:
            raise DegenerateDesignError("all drift increments vanish; beta is not identified")
        return float(np.sum(dz * dg / vs)) / den

    def profile(self, h: float) -> tuple[float, float]:
        """``(beta*(h), objective(beta*(h), h))``."""
        b = self.profile_beta(h)
        return b, self(b, h)

    def decomposition(self, beta: float, h: float) -> MartingaleDecomposition:
        dz, dg, vs, _ = self.terms(h)
        return MartingaleDecomposition(dz, dg, dz - beta * dg, vs, float(h), float(beta))


class FlatLikelihood:
    """Constant log-likelihood; leaves a sampler targeting its prior alone."""

    jacobian = False

    def __init__(self, eta: float = DEFAULT_ETA):
        self.eta = eta

    def __call__(self, beta: float, h: float) -> float:
        return 0.0

    def evaluate(self, beta: float, h: float) -> LogLikelihood:
        return LogLikelihood(0.0, 0)

    def profile_beta(self, h: float) -> float:
        raise DegenerateDesignError("flat likelihood has no profile in beta")


def decompose(path: ObservedPath, model: ModelSpec, beta: float, h: float,
              cache: Optional[KernelWeightCache] = None) -> MartingaleDecomposition:
    return PathLikelihood(path, model, cache).decomposition(beta, h)


def log_likelihood(path: ObservedPath, model: ModelSpec, beta: float, h: float,
                   cache: Optional[KernelWeightCache] = None,
                   eta: float = DEFAULT_ETA) -> LogLikelihood:
    return PathLikelihood(path, model, cache, eta=eta).evaluate(beta, h)


def profile_beta(path: ObservedPath, model: ModelSpec, h: float,
                 cache: Optional[KernelWeightCache] = None) -> float:
    """Closed-form maximiser of the log-likelihood in β at fixed ``h``."""
    return PathLikelihood(path, model, cache).profile_beta(h)
