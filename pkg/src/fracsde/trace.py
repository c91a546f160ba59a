from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class ChainTrace:
    """Recorded chain: one row per state, ``n_iter + 1`` rows including the start.

    ``states`` columns are ``columns``; ``accepted`` holds per-iteration,
    per-stage acceptance flags (row 0 is the initial state, always False).
    """

    states: np.ndarray
    columns: tuple
    accepted: np.ndarray
    burn_in: int = 0
    thin: int = 1
    audit: Optional[dict] = field(default=None, repr=False)

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[1] != len(self.columns):
            raise ValueError("states must be (n_rows, len(columns))")
        if not 0 <= self.burn_in < self.states.shape[0]:
            raise ValueError(
                f"burn_in={self.burn_in} must be smaller than the chain length {self.states.shape[0]}"
            )
        if self.thin < 1:
            raise ValueError("thin must be >= 1")

    def __len__(self):
        return self.states.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.states[:, self.columns.index(name)]

    @property
    def accept_rates(self) -> tuple:
        if len(self) <= 1:
            return tuple(float("nan") for _ in range(self.accepted.shape[1]))
        return tuple(float(r) for r in self.accepted[1:].mean(axis=0))

    def post_burn_in(self) -> np.ndarray:
        return self.states[self.burn_in:]

    def thinned(self) -> np.ndarray:
        """Row indices kept for export: every ``thin``-th state after burn-in."""
        return np.arange(self.burn_in, len(self), self.thin)
