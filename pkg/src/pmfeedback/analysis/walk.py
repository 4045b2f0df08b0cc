"""The decoder's contraction random walk and its visit counts.

``S_k = L_0 + ... + L_k`` is the log2 inverse length of the decoder
interval after ``k`` backward steps; ``N_{t,k}`` counts the steps
``1 <= j <= k`` at which the walk sits below ``t`` bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import accumulate
from typing import Iterable, Sequence

import gmpy2
import numpy as np
from scipy import stats

_MPFR = type(gmpy2.mpfr(0))


def partial_sums(contractions) -> list:
    """S_0 .. S_n, accumulated at the precision of the terms when they are mpfr."""
    prec = max((c.precision for c in contractions if isinstance(c, _MPFR)), default=0)
    if prec:
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            return list(accumulate(contractions))
    return list(accumulate(float(c) for c in contractions))


@dataclass
class WalkTrace:
    s: list[float]
    t: float
    visits: list[int]

    @property
    def n(self) -> int:
        return len(self.s) - 1


def walk_trace(decode_result, t: float) -> WalkTrace:
    """Partial sums of the contraction terms and the running visit count below ``t``.

    Accepts a decode result, a trial summary, or a plain sequence of
    contraction terms ``L_0 .. L_n``.  High-precision terms are summed at
    their own precision before rounding to float.
    """
    if getattr(decode_result, "walk", None):
        s = list(decode_result.walk)
    else:
        ls = list(getattr(decode_result, "contractions", decode_result))
        if not ls:
            raise ValueError("no contraction terms")
        s = [float(x) for x in partial_sums(ls)]
    visits = [0]
    for sk in s[1:]:
        visits.append(visits[-1] + (1 if sk < t else 0))
    return WalkTrace(s, t, visits)


DEFAULT_BUCKETS = (0.0, 2.0**-20, 2.0**-10, 2.0**-5, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0,
                   16.0, 32.0, 64.0, 128.0, math.inf)


@dataclass
class BucketRow:
    lo: float
    hi: float
    count: int
    mean: float
    stderr: float
    ok: bool


def submartingale_check(traces: Iterable[WalkTrace], edges: Sequence[float] = DEFAULT_BUCKETS,
                        min_count: int = 30, sigmas: float = 3.0) -> list[BucketRow]:
    """Mean increment ``S_{k+1} - S_k`` grouped by the bucket holding ``S_k``.

    A bucket passes when its mean is at least ``-sigmas`` standard errors;
    buckets with fewer than ``min_count`` increments are reported with
    ``ok=True`` and a NaN standard error.
    """
    level, step = [], []
    for tr in traces:
        s = np.asarray(tr.s)
        level.append(s[:-1])
        step.append(np.diff(s))
    level = np.concatenate(level) if level else np.empty(0)
    step = np.concatenate(step) if step else np.empty(0)
    idx = np.searchsorted(np.asarray(edges), level, side="right") - 1
    rows = []
    for b in range(len(edges) - 1):
        d = step[idx == b]
        if len(d) < min_count:
            rows.append(BucketRow(edges[b], edges[b + 1], len(d),
                                  float(d.mean()) if len(d) else math.nan, math.nan, True))
            continue
        mean = float(d.mean())
        se = float(d.std(ddof=1) / math.sqrt(len(d)))
        rows.append(BucketRow(edges[b], edges[b + 1], len(d), mean, se, mean >= -sigmas * se))
    return rows


def visit_counts(traces: Iterable[WalkTrace]) -> np.ndarray:
    """Final ``N_{t,n}`` of each trace."""
    return np.array([tr.visits[-1] for tr in traces])


def saturation_test(counts_short, counts_long, alpha: float = 0.01):
    """Two-sample KS test of visit counts at two horizons.

    If the walk escapes to infinity the counts stop growing with the
    horizon, and the two samples should be indistinguishable.  Returns
    ``(statistic, p_value, passed)`` where passing means no rejection.
    """
    res = stats.ks_2samp(np.asarray(counts_short), np.asarray(counts_long))
    return float(res.statistic), float(res.pvalue), bool(res.pvalue >= alpha)
