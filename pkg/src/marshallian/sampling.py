"""Type realizations for expectation estimates.

Degenerate and explicit-joint priors are enumerated exactly; everything
else is sampled with per-sample seeds derived from the audit seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._rng import derive_seed
from .market import (
    Degenerate,
    ExplicitJoint,
    Inspectable,
    TypePrior,
    TypeProfile,
    realize_types,
)

MAX_ENUMERATED = 10_000


@dataclass(frozen=True)
class Draw:
    weight: float
    types: TypeProfile
    run_seed: int


@dataclass(frozen=True)
class Draws:
    items: tuple
    exact: bool

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)


def _fully_drawn(p: TypeProfile) -> bool:
    return all(not isinstance(v, Inspectable) or v.drawn is not None for v in p.entries.values())


def draws(prior: TypePrior, samples: int, seed: int) -> Draws:
    if isinstance(prior, Degenerate) and _fully_drawn(prior.profile):
        return Draws((Draw(1.0, prior.profile, derive_seed(seed, 0)),), True)
    if (
        isinstance(prior, ExplicitJoint)
        and len(prior.outcomes) <= MAX_ENUMERATED
        and all(_fully_drawn(p) for p, _ in prior.outcomes)
    ):
        return Draws(
            tuple(
                Draw(prob, p, derive_seed(seed, n))
                for n, (p, prob) in enumerate(prior.outcomes)
                if prob > 0
            ),
            True,
        )
    if samples < 1:
        raise ValueError("need at least one sample")
    return Draws(
        tuple(
            Draw(1.0 / samples, realize_types(prior, derive_seed(seed, n)), derive_seed(seed, n, 1))
            for n in range(samples)
        ),
        False,
    )


def mean_stderr(values, weights, exact: bool) -> tuple:
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    mean = math.fsum(values * weights)
    if exact or len(values) < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / math.sqrt(len(values)))


def parallel_map(fn, items, jobs: int = 1) -> list:
    """``list(map(fn, items))``, across processes when ``jobs > 1``."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))
