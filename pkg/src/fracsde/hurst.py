"""Hurst-dependent constants, the fundamental-martingale kernel and grid transforms.

Everything here is a closed-form function of the Hurst index ``h``:

    k_H      = 2H Γ(3/2 - H) Γ(H + 1/2)
    k_H(t,s) = k_H^{-1} s^{1/2-H} (t - s)^{1/2-H},   0 < s < t
    λ_H      = 2H Γ(3 - 2H) Γ(H + 1/2) / Γ(3/2 - H)
    w_t      = λ_H^{-1} t^{2-2H}
    c_H      = [2H Γ(3/2 - H) / (Γ(H + 1/2) Γ(2 - 2H))]^{1/2}
    c_2      = c_H / (2H (2 - 2H)^{1/2})

and the Beta value B(3/2 - H, 3/2 - H) = ∫_0^1 u^{1/2-H}(1-u)^{1/2-H} du.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

DEFAULT_ETA = 0.01


class HurstDomainError(ValueError):
    """Raised when a Hurst value falls outside ``[eta, 1 - eta]``."""


def check_hurst(h: float, eta: float = DEFAULT_ETA) -> float:
    if not eta > 0 or not eta < 0.5:
        raise HurstDomainError(f"eta must lie in (0, 1/2), got {eta!r}")
    h = float(h)
    if not (eta <= h <= 1.0 - eta):
        raise HurstDomainError(f"hurst={h!r} outside [{eta}, {1.0 - eta}]")
    return h


@dataclass(frozen=True)
class HurstConstants:
    h: float
    k_h: float
    lambda_h: float
    c_h: float
    c2: float
    beta_integral: float

    @property
    def exponent(self) -> float:
        """Kernel exponent 1/2 - H."""
        return 0.5 - self.h

    @property
    def time_power(self) -> float:
        """Power 2 - 2H of the martingale clock."""
        return 2.0 - 2.0 * self.h


def make_constants(h: float, eta: float = DEFAULT_ETA) -> HurstConstants:
    """Evaluate every Hurst-dependent scalar at ``h``.

    Gamma arguments stay inside (0.5, 3) for admissible ``h``, where
    :func:`math.gamma` is accurate to a few ulps.
    """
    h = check_hurst(h, eta)
    g_a = math.gamma(1.5 - h)
    g_b = math.gamma(h + 0.5)
    k_h = 2.0 * h * g_a * g_b
    lambda_h = 2.0 * h * math.gamma(3.0 - 2.0 * h) * g_b / g_a
    c_h = math.sqrt(2.0 * h * g_a / (g_b * math.gamma(2.0 - 2.0 * h)))
    c2 = c_h / (2.0 * h * math.sqrt(2.0 - 2.0 * h))
    beta_integral = g_a * g_a / math.gamma(3.0 - 2.0 * h)
    return HurstConstants(h, k_h, lambda_h, c_h, c2, beta_integral)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_i = T i / n`` for ``i = 0..n``."""

    t_max: float
    n: int

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            raise ValueError(f"t_max must be positive and finite, got {self.t_max!r}")

    @property
    def dt(self) -> float:
        return self.t_max / self.n

    @cached_property
    def points(self) -> np.ndarray:
        # per-index T*i/n, never cumulative sums
        return self.t_max * np.arange(self.n + 1, dtype=float) / self.n

    @cached_property
    def midpoints(self) -> np.ndarray:
        return self.t_max * (np.arange(self.n, dtype=float) + 0.5) / self.n


def kernel_kh(t, s, consts: HurstConstants):
    """Fundamental-martingale kernel ``k_H(t, s)``; vectorised over ``t``/``s``."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0) or np.any(s >= t):
        raise ValueError("kernel_kh requires 0 < s < t")
    a = consts.exponent
    out = (s * (t - s)) ** a / consts.k_h
    return out if out.ndim else float(out)


def _clock_increments(grid: TimeGrid, consts: HurstConstants) -> np.ndarray:
    return np.diff(grid.points ** consts.time_power)


def w_increments(grid: TimeGrid, consts: HurstConstants) -> np.ndarray:
    """Increments of ``w_t = λ_H^{-1} t^{2-2H}`` over each grid cell (length n)."""
    return _clock_increments(grid, consts) / consts.lambda_h


def v_squared(grid: TimeGrid, consts: HurstConstants) -> np.ndarray:
    """Variances ``c_2^2 (t_{i+1}^{2-2H} - t_i^{2-2H})`` of the martingale increments."""
    return consts.c2 ** 2 * _clock_increments(grid, consts)
