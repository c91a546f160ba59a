"""Seed derivation for independent replicate streams."""

from __future__ import annotations

import numpy as np


def derive_seed(master: int, *path: int) -> int:
    """Deterministic child seed for ``(master, *path)``.

    Streams for different paths are statistically independent (SeedSequence
    hashing), and the result does not depend on execution order.
    """
    ss = np.random.SeedSequence([int(master), *(int(p) for p in path)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed))
