"""Strike prices, covered calls, and the inspection-side audits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .engine import Transcript, run_match
from .market import (
    Distribution,
    FiniteSupport,
    Inspectable,
    PointMass,
    Scenario,
    TypeProfile,
    Uniform,
    group_key,
)
from .report import AuditReport
from .sampling import draws

XTOL = 1e-12
MAX_ITER = 200
EXERCISE_TOL = 1e-9


def strike_price(dist: Distribution, r: float) -> float:
    """The sigma solving E[(v - sigma)^+] = r.

    Closed form for point masses and uniforms, bisection for finite
    supports.  With r = 0 this is the top of the support.
    """
    if r < 0:
        raise ValueError("inspection cost must be nonnegative")
    mean = dist.mean()
    if mean < r:
        raise ValueError(f"mean(D) = {mean} < r = {r}: no strike price")
    if isinstance(dist, PointMass):
        return dist.v - r
    if isinstance(dist, Uniform):
        width = dist.hi - dist.lo
        if width == 0:
            return dist.lo - r
        if r <= width / 2:
            return dist.hi - math.sqrt(2 * r * width)
        return mean - r
    if isinstance(dist, FiniteSupport):
        if r == 0:
            return dist.support_max()
        lo, hi = min(0.0, mean - r), dist.support_max()
        for _ in range(MAX_ITER):
            if hi - lo <= XTOL * max(1.0, abs(hi)):
                break
            mid = (lo + hi) / 2
            if dist.expected_excess(mid) > r:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2
    raise TypeError(f"unsupported distribution {dist!r}")


_strike_cached = lru_cache(maxsize=4096)(strike_price)


def strike_of(val: Inspectable) -> float:
    return _strike_cached(val.dist, val.r)


def covered_call(v: float, sigma: float) -> float:
    return min(sigma, v)


def exercise_audit(transcripts, types, agents=None) -> AuditReport:
    """Pass iff no inspected incidence with v > sigma went unmatched."""
    transcripts, types = list(transcripts), list(types)
    if len(transcripts) != len(types):
        raise ValueError("one type profile per transcript")
    checked = 0
    witness = None
    worst = 0.0
    for n, (tr, prof) in enumerate(zip(transcripts, types)):
        for a, g in sorted(tr.inspected):
            if agents is not None and a not in agents:
                continue
            val = prof.valuation(a, g)
            sigma = strike_of(val)
            checked += 1
            if val.drawn > sigma + EXERCISE_TOL and (a, g) not in tr.matched:
                gap = val.drawn - sigma
                if witness is None or gap > worst:
                    worst = gap
                    witness = {
                        "realization": n,
                        "agent": a,
                        "group": list(g),
                        "value": val.drawn,
                        "strike": sigma,
                        "types": prof.to_dict(),
                        "seed": tr.seed,
                    }
    return AuditReport(
        "exercise",
        "fail" if witness else "pass",
        statistic=worst,
        bound=0.0,
        witness=witness,
        samples=len(transcripts),
        details={"inspectionsChecked": checked},
    )


@dataclass
class CoveredCallGap:
    lhs: float  # estimate of E[sum A v - I r]
    rhs: float  # estimate of E[sum A kappa]
    stderr: float  # of lhs - rhs
    per_incidence: dict = field(default_factory=dict)
    samples: int = 0

    @property
    def violation(self) -> bool:
        return self.lhs > self.rhs + 3 * self.stderr


def incidence_terms(tr: Transcript, prof: TypeProfile) -> dict:
    """Per inspectable incidence: (A v - I r, A kappa)."""
    out = {}
    for (a, g), val in sorted(prof.entries.items()):
        if not isinstance(val, Inspectable):
            continue
        A = (a, g) in tr.matched
        I = (a, g) in tr.inspected
        kappa = covered_call(val.drawn, strike_of(val))
        out[(a, g)] = (A * val.drawn - I * val.r, A * kappa)
    return out


def covered_call_gap(scenario: Scenario, profile, samples: int, seed: int) -> CoveredCallGap:
    ds = draws(scenario.prior, samples, seed)
    lhs, rhs = [], []
    per: dict = {}
    for d in ds:
        tr = run_match(scenario.graph, d.types, profile, scenario.payment_rule, d.run_seed)
        terms = incidence_terms(tr, d.types)
        lhs.append(math.fsum(x for x, _ in terms.values()))
        rhs.append(math.fsum(y for _, y in terms.values()))
        for key, (x, y) in terms.items():
            acc = per.setdefault(key, [0.0, 0.0])
            acc[0] += d.weight * x
            acc[1] += d.weight * y
    w = np.array([d.weight for d in ds])
    diff = np.array(lhs) - np.array(rhs)
    if ds.exact or len(ds) < 2:
        stderr = 0.0
    else:
        stderr = float(np.std(diff, ddof=1) / math.sqrt(len(ds)))
    return CoveredCallGap(
        lhs=float(np.dot(w, lhs)),
        rhs=float(np.dot(w, rhs)),
        stderr=stderr,
        per_incidence={f"{a}/{group_key(g)}": tuple(v) for (a, g), v in per.items()},
        samples=len(ds),
    )
