"""Seed handling shared by the engine, the oracles, and the auditors."""

from __future__ import annotations

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def derive_seed(seed: int, *keys: int) -> int:
    """Child seed for sample ``keys`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def pick(candidates: list, rng: np.random.Generator):
    """Uniform tie-break over candidates sorted canonically by the caller.

    Draws nothing for a single candidate so that the engine and the greedy
    oracle consume the generator identically.
    """
    if len(candidates) == 1:
        return candidates[0]
    return candidates[int(rng.integers(len(candidates)))]
