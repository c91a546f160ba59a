"""Fractional Gaussian noise synthesis and forward Euler integration of

    dX_t = β B(t, X_t) dt + C(t, X_t) dW^H_t

on a uniform grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .hurst import DEFAULT_ETA, TimeGrid, check_hurst
from .rng import make_rng

Coefficient = Callable[[np.ndarray, np.ndarray], np.ndarray]


class SimulationError(RuntimeError):
    pass


def _one_minus_x(t, x):
    return 1.0 - np.asarray(x, dtype=float)


@dataclass(frozen=True)
class ModelSpec:
    """Drift/diffusion pair.  Coefficients must accept numpy arrays."""

    drift_b: Coefficient
    diffusion_c: Coefficient
    x0: float = 0.0
    ratio_is_constant: bool = False
    ratio_value: Optional[float] = None
    name: str = "custom"

    def __post_init__(self):
        if self.ratio_is_constant:
            if self.ratio_value is None or not np.isfinite(self.ratio_value):
                raise ValueError("constant-ratio model needs a finite ratio_value")
            t, x = np.meshgrid(np.linspace(0.0, 10.0, 10), np.linspace(-2.0, 2.0, 10))
            b = np.broadcast_to(self.drift_b(t, x), t.shape)
            c = np.broadcast_to(self.diffusion_c(t, x), t.shape)
            ok = c != 0
            ratio = b[ok] / c[ok]
            if not np.allclose(ratio, self.ratio_value, rtol=1e-9, atol=1e-12):
                raise ValueError(
                    f"drift/diffusion ratio is not constant at {self.ratio_value} on the probe grid"
                )

    def ratio(self, t, x) -> np.ndarray:
        return np.asarray(self.drift_b(t, x), dtype=float) / np.asarray(
            self.diffusion_c(t, x), dtype=float
        )


def example_model() -> ModelSpec:
    """``dX = β(1 - X) dt + (1 - X) dW^H`` started at 0."""
    return ModelSpec(
        drift_b=_one_minus_x,
        diffusion_c=_one_minus_x,
        x0=0.0,
        ratio_is_constant=True,
        ratio_value=1.0,
        name="example",
    )


MODELS = {"example": example_model}


def get_model(name: str) -> ModelSpec:
    try:
        return MODELS[name]()
    except KeyError:
        raise ValueError(f"unknown model {name!r}; known: {sorted(MODELS)}") from None


@dataclass(frozen=True)
class ObservedPath:
    grid: TimeGrid
    values: np.ndarray
    seed: Optional[int] = None
    true_params: Optional[tuple] = None
    model_name: Optional[str] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n + 1,):
            raise ValueError(f"expected {self.grid.n + 1} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("path contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def times(self) -> np.ndarray:
        return self.grid.points


def fgn_autocovariance(h: float, n: int, dt: float = 1.0) -> np.ndarray:
    """γ(k) = ½(|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) dt^{2H}, k = 0..n-1."""
    k = np.arange(n, dtype=float)
    two_h = 2.0 * h
    g = 0.5 * (np.abs(k + 1) ** two_h - 2.0 * k ** two_h + np.abs(k - 1) ** two_h)
    return g * dt ** two_h


class FbmSampler:
    """Exact sampler of fBm increments on ``grid``.

    ``method`` is ``"cholesky"`` (dense factor of the Toeplitz covariance) or
    ``"circulant"`` (Davies-Harte embedding, O(n log n) per draw).
    """

    METHODS = ("cholesky", "circulant")

    def __init__(self, h: float, grid: TimeGrid, method: str = "cholesky", eta: float = DEFAULT_ETA):
        if method not in self.METHODS:
            raise ValueError(f"unknown fBm method {method!r}")
        self.h = check_hurst(h, eta)
        self.grid = grid
        self.method = method
        gamma = fgn_autocovariance(self.h, grid.n, grid.dt)
        if method == "cholesky":
            from scipy.linalg import toeplitz

            try:
                self.factor_cache = np.linalg.cholesky(toeplitz(gamma))
            except np.linalg.LinAlgError as exc:
                raise SimulationError(
                    f"Cholesky factorisation failed for H={self.h}, n={grid.n}"
                ) from exc
        else:
            n = grid.n
            tail = fgn_autocovariance(self.h, n + 1, grid.dt)[n]
            row = np.concatenate([gamma, [tail], gamma[:0:-1]])
            eig = np.fft.fft(row).real
            if eig.min() < -1e-10 * eig.max():
                raise SimulationError(
                    f"circulant embedding not nonnegative-definite for H={self.h}, n={n}"
                )
            self.factor_cache = np.sqrt(np.clip(eig, 0.0, None) / (2 * n))
        self.factor_cache.setflags(write=False)

    def sample(self, rng_seed: int, size: Optional[int] = None) -> np.ndarray:
        """Draw increments; shape ``(n,)`` or ``(size, n)``."""
        rng = make_rng(rng_seed)
        n = self.grid.n
        reps = 1 if size is None else int(size)
        if self.method == "cholesky":
            z = rng.standard_normal((reps, n))
            out = z @ self.factor_cache.T
        else:
            m = 2 * n
            z = rng.standard_normal((reps, m)) + 1j * rng.standard_normal((reps, m))
            out = np.fft.fft(self.factor_cache * z, axis=1).real[:, :n]
        return out[0] if size is None else out


class ZeroNoiseSampler:
    """Deterministic stand-in that returns all-zero increments."""

    def __init__(self, h: float, grid: TimeGrid):
        self.h = float(h)
        self.grid = grid
        self.method = "zero"

    def sample(self, rng_seed: int, size: Optional[int] = None) -> np.ndarray:
        shape = (self.grid.n,) if size is None else (int(size), self.grid.n)
        return np.zeros(shape)


def sample_fbm_increments(sampler, rng_seed: int) -> np.ndarray:
    return sampler.sample(rng_seed)


def euler_path(model: ModelSpec, beta: float, grid: TimeGrid, noise: np.ndarray) -> np.ndarray:
    n = grid.n
    t = grid.points
    dt = grid.dt
    x = np.empty(n + 1)
    x[0] = model.x0
    for i in range(n):
        c = float(model.diffusion_c(t[i], x[i]))
        if c == 0.0:
            raise SimulationError(f"diffusion vanished at step {i} (t={t[i]:.6g}, x={x[i]:.6g})")
        x[i + 1] = x[i] + beta * float(model.drift_b(t[i], x[i])) * dt + c * noise[i]
        if not np.isfinite(x[i + 1]):
            raise SimulationError(f"path became non-finite at step {i + 1}")
    return x


def simulate_sde(
    model: ModelSpec,
    beta: float,
    h: float,
    grid: TimeGrid,
    rng_seed: int,
    sampler=None,
    eta: float = DEFAULT_ETA,
) -> ObservedPath:
    """Euler scheme driven by exact fBm increments."""
    if sampler is None:
        sampler = FbmSampler(h, grid, eta=eta)
    elif sampler.grid != grid or sampler.h != float(h):
        raise ValueError("sampler was built for a different (h, grid)")
    noise = sampler.sample(rng_seed)
    x = euler_path(model, beta, grid, noise)
    return ObservedPath(grid, x, seed=int(rng_seed), true_params=(float(beta), float(h)),
                        model_name=model.name)
