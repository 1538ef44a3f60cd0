"""Rank-sum testing and replicate summaries."""

from __future__ import annotations

import itertools
import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import norm, rankdata

EXACT_MAX_N = 8  # exact enumeration when both samples are smaller than this


class MannWhitneyResult(NamedTuple):
    U: float
    p_two_sided: float


def mann_whitney_u(sample_a: Sequence[float], sample_b: Sequence[float]) -> MannWhitneyResult:
    """Two-sided Mann-Whitney U test; ``U`` is the statistic of ``sample_a``.

    Ties get midranks.  Small samples (both below 8) use the exact null
    distribution of the midrank statistic, enumerated over every way of
    splitting the pooled ranks; larger ones use the normal approximation
    with tie and continuity corrections.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    na, nb = a.size, b.size
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    u = float(ranks[:na].sum() - na * (na + 1) / 2)
    if np.all(pooled == pooled[0]):
        return MannWhitneyResult(u, 1.0)

    if na < EXACT_MAX_N and nb < EXACT_MAX_N:
        offset = na * (na + 1) / 2
        # rank sums doubled so midranks stay integral
        twice = np.rint(2 * ranks).astype(np.int64)
        target = round(2 * (u + offset))
        total = lo = hi = 0
        for idx in itertools.combinations(range(na + nb), na):
            s = int(twice[list(idx)].sum())
            total += 1
            lo += s <= target
            hi += s >= target
        return MannWhitneyResult(u, min(1.0, 2 * min(lo, hi) / total))

    n = na + nb
    mu = na * nb / 2
    _, counts = np.unique(pooled, return_counts=True)
    tie = float(np.sum(counts ** 3 - counts)) / (n * (n - 1))
    sigma = math.sqrt(na * nb / 12 * ((n + 1) - tie))
    z = (abs(u - mu) - 0.5) / sigma
    return MannWhitneyResult(u, float(min(1.0, 2 * norm.sf(max(z, 0.0)))))


class Summary(NamedTuple):
    n: int
    median: float
    q1: float
    q3: float

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def summarize(values: Sequence[float]) -> Summary:
    v = np.asarray([x for x in values if x is not None and not math.isnan(x)], dtype=float)
    if v.size == 0:
        return Summary(0, math.nan, math.nan, math.nan)
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return Summary(int(v.size), float(med), float(q1), float(q3))


def median_curve(curves: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise median and quartiles over equally long replicate curves."""
    m = np.vstack(curves)
    q1, med, q3 = np.percentile(m, [25, 50, 75], axis=0)
    return med, q1, q3
