# markov/frequencies.py
"""
Probabilities of empirical-frequency events for a homogeneous chain.

Up to the configured cutoff the probability is computed exactly (in
double precision) by dynamic programming over (current symbol, running
count). Longer horizons fall back to Monte Carlo with a Wilson interval.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from django.conf import settings
from scipy.stats import binomtest

from .chains import INDEX, StochasticMatrix


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SymbolFrequency:
    """low <= (#{1 <= j <= n : x_j = symbol}) / n <= high."""

    symbol: str
    low: float
    high: float

    def tracks(self, previous: int | None, current: int) -> bool:
        return current == INDEX[self.symbol]

    def accepts(self, counts: np.ndarray, n: int) -> np.ndarray:
        ratio = counts / n
        return (ratio >= self.low) & (ratio <= self.high)


@dataclass(frozen=True)
class PairFrequency:
    """(#{1 <= j < n : x_j x_{j+1} = pair}) / n > threshold."""

    pair: str
    threshold: float

    def tracks(self, previous: int | None, current: int) -> bool:
        return previous is not None and (previous, current) == (INDEX[self.pair[0]], INDEX[self.pair[1]])

    def accepts(self, counts: np.ndarray, n: int) -> np.ndarray:
        return counts / n > self.threshold


FrequencyEvent = Union[SymbolFrequency, PairFrequency]


@dataclass(frozen=True)
class FrequencyResult:
    probability: float
    method: str
    horizon: int
    ci_low: float
    ci_high: float

    def exceeds(self, level: float) -> bool:
        """Certified only when the whole interval clears the level."""
        return self.ci_low > level


def _as_arrays(matrix: StochasticMatrix, law: Sequence) -> tuple[np.ndarray, np.ndarray]:
    p = matrix.to_numpy()
    pi = np.array([float(value) for value in law], dtype=np.float64)
    return p, pi


def _dynamic_programme(p: np.ndarray, pi: np.ndarray, n: int, event: FrequencyEvent) -> float:
    table = np.zeros((3, n + 1))
    for s in range(3):
        table[s, int(event.tracks(None, s))] += pi[s]
    for _ in range(1, n):
        step = np.zeros_like(table)
        for previous in range(3):
            row = table[previous]
            for current in range(3):
                weight = p[previous, current]
                if weight == 0.0:
                    continue
                if event.tracks(previous, current):
                    step[current, 1:] += weight * row[:-1]
                else:
                    step[current] += weight * row
        table = step
    counts = np.arange(n + 1)
    mask = event.accepts(counts, n)
    return float(table[:, mask].sum())


def _monte_carlo(p: np.ndarray, pi: np.ndarray, n: int, event: FrequencyEvent,
                 samples: int, seed: int) -> tuple[int, int]:
    rng = np.random.default_rng(seed)
    cumulative = np.cumsum(p, axis=1)
    state = rng.choice(3, size=samples, p=pi / pi.sum())
    counts = np.zeros(samples, dtype=np.int64)
    tracked = np.array([[event.tracks(a, b) for b in range(3)] for a in range(3)])
    if isinstance(event, SymbolFrequency):
        counts += state == INDEX[event.symbol]
    for _ in range(1, n):
        draw = rng.random(samples)
        following = (draw > cumulative[state, 0]).astype(np.int64) + (draw > cumulative[state, 1])
        if isinstance(event, SymbolFrequency):
            counts += following == INDEX[event.symbol]
        else:
            counts += tracked[state, following]
        state = following
    hits = int(event.accepts(counts, n).sum())
    return hits, samples


def empirical_frequency_prob(
    matrix: StochasticMatrix,
    law: Sequence,
    n: int,
    event: FrequencyEvent,
    *,
    cutoff: int | None = None,
    samples: int | None = None,
    seed: int | None = None,
) -> FrequencyResult:
    """Probability of ``event`` for the chain started from ``law`` over n coordinates."""
    if n < 1:
        raise ValueError("horizon must be at least 1")
    if cutoff is None:
        cutoff = getattr(settings, "GOLDEN_DP_CUTOFF", 4000)
    p, pi = _as_arrays(matrix, law)
    if n <= cutoff:
        probability = min(1.0, max(0.0, _dynamic_programme(p, pi, n, event)))
        return FrequencyResult(probability, "dp", n, probability, probability)

    if samples is None:
        samples = getattr(settings, "GOLDEN_MC_SAMPLES", 20000)
    if seed is None:
        seed = getattr(settings, "GOLDEN_SEED", 0)
    logger.info("frequency_mc_fallback horizon=%s samples=%s seed=%s", n, samples, seed)
    hits, total = _monte_carlo(p, pi, n, event, samples, seed)
    interval = binomtest(hits, total).proportion_ci(confidence_level=0.99, method="wilson")
    return FrequencyResult(hits / total, "monte-carlo", n, float(interval.low), float(interval.high))
