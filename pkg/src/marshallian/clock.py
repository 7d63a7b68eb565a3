"""Descending price clock.

The clock runs from price +inf at t = 0 down to 0 at t = 1 using
p(t) = 1/(2t) on (0, 1/2] and p(t) = 2 - 2t on [1/2, 1], capped at ``p_max``.
The engine works in price space; times are only for reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PriceSchedule:
    p_max: float | None = None

    def __post_init__(self):
        if self.p_max is not None and not self.p_max > 0:
            raise ValueError("p_max must be positive")

    @property
    def start_time(self) -> float:
        """Clock time at which the simulated sweep starts (price p_max)."""
        if self.p_max is None:
            return 0.0
        return self.time_at_price(self.p_max)

    def price_at_time(self, t: float) -> float:
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"time {t} outside [0, 1]")
        if t == 0.0:
            if self.p_max is None:
                raise ValueError("price at t = 0 is infinite; set p_max")
            return float(self.p_max)
        p = 1.0 / (2.0 * t) if t <= 0.5 else 2.0 - 2.0 * t
        if self.p_max is not None:
            p = min(p, self.p_max)
        return p

    def time_at_price(self, p: float) -> float:
        if p < 0:
            raise ValueError(f"price {p} is negative")
        if self.p_max is not None:
            p = min(p, self.p_max)
        if math.isinf(p):
            return 0.0
        if p >= 1.0:
            return 1.0 / (2.0 * p)
        return 1.0 - p / 2.0


def clock_convert(sched: PriceSchedule, *, time: float | None = None, price: float | None = None) -> float:
    """Map a clock time to its price or a price to its clock time."""
    if (time is None) == (price is None):
        raise ValueError("give exactly one of time= or price=")
    if time is not None:
        return sched.price_at_time(time)
    return sched.time_at_price(price)
