"""Batched end-to-end trials with an optional process pool.

Every trial draws from streams keyed by its own index, so results do not
depend on how trials are split across workers or in which order chunks
finish; aggregation re-sorts by trial index.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ..channel import ChannelSpec
from ..codec import Seeds, check_invertibility, run_trial
from ..kernel import build_kernel
from .walk import partial_sums


@dataclass(frozen=True)
class TrialSummary:
    """Float-level record of one trial, cheap to ship between processes."""

    trial: int
    n: int
    error: bool
    invertible: bool
    rate: float | None
    contractions: tuple[float, ...]
    walk: tuple[float, ...]
    bits: str
    wrapped: bool
    log2_length: float


def summarize(outcome, trial: int) -> TrialSummary:
    r = outcome.result
    return TrialSummary(
        trial=trial,
        n=r.n,
        error=outcome.truth.error,
        invertible=check_invertibility(outcome),
        rate=r.rate_float,
        contractions=tuple(float(c) for c in r.contractions),
        walk=tuple(float(s) for s in partial_sums(r.contractions)),
        bits=r.bits,
        wrapped=r.wrapped,
        log2_length=float(r.interval.log2_length()),
    )


def _run_chunk(args) -> list[TrialSummary]:
    spec, n, p_e, seeds, precision, trial_ids, j0_start = args
    kernel = build_kernel(spec)
    out = []
    for t in trial_ids:
        o = run_trial(spec, kernel, n, p_e, seeds, precision=precision, trial=t,
                      j0_start=j0_start)
        out.append(summarize(o, t))
    return out


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("PMFEEDBACK_WORKERS", "1")))
    except ValueError:
        return 1


def run_trials(spec: ChannelSpec, n: int, p_e, seeds: Seeds, trials: int,
               precision: int | None = None, workers: int | None = None,
               first_trial: int = 0, j0_start=None) -> list[TrialSummary]:
    """Run trials ``first_trial .. first_trial + trials - 1`` and summarize each."""
    ids = list(range(first_trial, first_trial + trials))
    workers = default_workers() if workers is None else max(1, workers)
    if workers == 1 or trials < 2 * workers:
        return _run_chunk((spec, n, p_e, seeds, precision, ids, j0_start))
    chunks = [ids[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(_run_chunk, [(spec, n, p_e, seeds, precision, c, j0_start)
                                      for c in chunks])
        results = [s for part in parts for s in part]
    return sorted(results, key=lambda s: s.trial)
