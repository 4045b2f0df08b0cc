"""Rate statistics of the end-to-end scheme across horizons."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..channel import ChannelSpec, mutual_information
from ..codec import Seeds
from .trials import TrialSummary, run_trials

MIN_TRIALS = 100


@dataclass
class SweepRow:
    n: int
    trials: int
    mean_rate: float
    stderr: float
    fraction_above: float
    fraction_stderr: float
    error_rate: float

    @property
    def ci95(self) -> tuple[float, float]:
        return self.mean_rate - 1.96 * self.stderr, self.mean_rate + 1.96 * self.stderr


@dataclass
class SweepTable:
    capacity: float
    epsilon: float
    p_e: str
    rows: list[SweepRow]

    def monotone_within(self, sigmas: float = 2.0) -> bool:
        """Fractions never drop by more than ``sigmas`` combined standard errors."""
        for a, b in zip(self.rows, self.rows[1:]):
            slack = sigmas * math.hypot(a.fraction_stderr, b.fraction_stderr)
            if b.fraction_above < a.fraction_above - slack:
                return False
        return True


def sweep_row(n: int, summaries: Sequence[TrialSummary], threshold: float) -> SweepRow:
    rates = np.array([s.rate for s in summaries], dtype=float)
    m = len(rates)
    frac = float(np.mean(rates > threshold))
    return SweepRow(
        n=n,
        trials=m,
        mean_rate=float(rates.mean()),
        stderr=float(rates.std(ddof=1) / math.sqrt(m)) if m > 1 else math.nan,
        fraction_above=frac,
        fraction_stderr=math.sqrt(frac * (1 - frac) / m),
        error_rate=float(np.mean([s.error for s in summaries])),
    )


def rate_sweep(spec: ChannelSpec, p_e, n_list: Sequence[int], trials: int, seeds: Seeds,
               epsilon: float = 0.1, precision: int | None = None,
               workers: int | None = None) -> SweepTable:
    """Run ``trials`` independent trials at each horizon and tabulate R_n.

    ``fraction_above`` is the share of trials with ``R_n > I(X;Y) - epsilon``.
    """
    if list(n_list) != sorted(set(n_list)) or not n_list:
        raise ValueError("n_list must be strictly increasing and non-empty")
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be at least {MIN_TRIALS}")
    cap = mutual_information(spec)
    rows = []
    for n in n_list:
        summaries = run_trials(spec, n, p_e, seeds, trials, precision=precision,
                               workers=workers)
        rows.append(sweep_row(n, summaries, cap - epsilon))
    return SweepTable(cap, epsilon, str(p_e), rows)
