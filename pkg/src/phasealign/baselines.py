"""Reference schemes on the complex channel (unit noise power).

Three comparators, all with closed-form rates that do not depend on the
phase draw because every link has unit gain magnitude:

- tdma_peak: round-robin, each user transmits at peak power 1 in its slot.
- tdma_bursty: round-robin with energy saved across the frame and spent in
  one slot at power K. This violates the peak constraint (comparator only).
- tin_all_on: everyone transmits at peak power every slot and receivers
  treat interference as noise; the K-1 unit-magnitude interferers contribute
  power K-1, so each user gets ln(1 + 1/K).
"""

import math

import numpy as np

from .channel import LN2, ChannelRealization, RateReport


def tdma_peak(k: int) -> RateReport:
    """Peak-power round-robin: per user ln(2)/K, sum ln 2 for every K."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return RateReport("tdma_peak", np.full(k, LN2 / k), LN2)


def tdma_bursty(k: int) -> RateReport:
    """Average-power round-robin (power K in the active slot): sum ln(1+K)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    total = math.log1p(float(k))
    return RateReport("tdma_bursty", np.full(k, total / k), total)


def tin_all_on(ch) -> RateReport:
    """All users on, interference as noise: per user ln(1 + 1/K).

    Accepts a ChannelRealization or a plain user count; the value is
    channel-independent since all gain magnitudes are 1.
    """
    k = ch.k if isinstance(ch, ChannelRealization) else int(ch)
    if k < 1:
        raise ValueError("k must be >= 1")
    per = math.log1p(1.0 / k)
    return RateReport("tin_all_on", np.full(k, per), k * per)
