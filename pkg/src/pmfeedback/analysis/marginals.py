"""Distributional checks on the randomized encoder.

With the random shift the encoder state ``Theta_n`` is uniform at every
step and independent of the past outputs and shifts; the inputs then
follow ``P_X`` and the outputs are i.i.d. ``P_Y``.  These helpers collect
encoder paths over independent trials and test those statements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from ..channel import ChannelSpec
from ..codec import Seeds, encode_trial
from ..codec.grid import precision_budget
from ..kernel import PmKernel, build_kernel
from ..streams import RandomStream


@dataclass
class CheckRow:
    name: str
    n: int
    statistic: float
    p_value: float
    threshold: float
    passed: bool


@dataclass
class EncoderPaths:
    """Per-trial encoder records up to a common horizon.

    ``theta[t, j]`` is Theta_{j+1} as a float, ``x[t, j]`` and ``y[t, j]``
    the input and output of use j+1, ``v[t, j]`` the shift V_{j+1}.
    """

    theta: np.ndarray
    x: np.ndarray
    y: np.ndarray
    v: np.ndarray


def _to_unit(values: Sequence[int], precision: int) -> np.ndarray:
    shift = max(precision - 53, 0)
    return np.array([t >> shift for t in values], dtype=float) / float(1 << (precision - shift))


def encoder_paths(spec: ChannelSpec, kernel: PmKernel, horizon: int, trials: int,
                  seeds: Seeds, first_trial: int = 0) -> EncoderPaths:
    precision = precision_budget(kernel, horizon)
    th, xs, ys, vs = [], [], [], []
    for t in range(first_trial, first_trial + trials):
        tr, thetas = encode_trial(spec, kernel, horizon, seeds, trial=t, precision=precision)
        th.append(_to_unit(thetas[:horizon], precision))
        vs.append(_to_unit(tr.v_seq, precision))
        xs.append(tr.x_seq)
        ys.append(tr.y_seq)
    return EncoderPaths(np.array(th), np.array(xs, dtype=float), np.array(ys, dtype=float),
                        np.array(vs))


def _binned(values: np.ndarray, bins: int, discrete: bool) -> np.ndarray:
    if discrete:
        _, codes = np.unique(values, return_inverse=True)
        return codes
    edges = np.quantile(values, np.linspace(0, 1, bins + 1)[1:-1])
    return np.searchsorted(edges, values, side="right")


def independence_chi2(a: np.ndarray, b: np.ndarray, bins: int = 8,
                      a_discrete: bool = False, b_discrete: bool = False) -> tuple[float, float]:
    """Chi-square test of independence on a binned contingency table."""
    ca = _binned(a, bins, a_discrete)
    cb = _binned(b, bins, b_discrete)
    table = np.zeros((ca.max() + 1, cb.max() + 1))
    np.add.at(table, (ca, cb), 1)
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if min(table.shape) < 2:
        return 0.0, 1.0
    res = stats.chi2_contingency(table, correction=False)
    return float(res.statistic), float(res.pvalue)


def marginal_tests(spec: ChannelSpec, paths: EncoderPaths, n_list: Sequence[int],
                   alpha: float = 0.01) -> list[CheckRow]:
    """Theta_n uniformity (KS) and the law of X_n, at each horizon in ``n_list``.

    X_n is compared with ``P_X`` by a chi-square goodness-of-fit test for
    discrete channels and with ``N(0, P)`` by KS for the Gaussian channel.
    """
    rows = []
    for n in n_list:
        th = paths.theta[:, n - 1]
        ks = stats.kstest(th, "uniform")
        rows.append(CheckRow("theta_uniform", n, float(ks.statistic), float(ks.pvalue), alpha,
                            bool(ks.pvalue >= alpha)))
        x = paths.x[:, n - 1]
        if spec.is_discrete:
            px = np.array([float(p) for p in spec.input_pmf])
            counts = np.bincount(x.astype(int), minlength=len(px))
            res = stats.chisquare(counts, px * len(x))
            stat, pval = float(res.statistic), float(res.pvalue)
        else:
            res = stats.kstest(x / math.sqrt(spec.power), "norm")
            stat, pval = float(res.statistic), float(res.pvalue)
        rows.append(CheckRow("input_law", n, stat, pval, alpha, bool(pval >= alpha)))
    return rows


def independence_tests(spec: ChannelSpec, paths: EncoderPaths, n_list: Sequence[int],
                       alpha: float = 0.01) -> list[CheckRow]:
    """Theta_n against the previous output and shift, for each n >= 2.

    Two checks per pair: the sample correlation must lie within
    ``4 / sqrt(trials)`` of zero, and a binned chi-square independence
    test must not reject at ``alpha``.
    """
    trials = paths.theta.shape[0]
    limit = 4.0 / math.sqrt(trials)
    rows = []
    for n in n_list:
        if n < 2:
            continue
        th = paths.theta[:, n - 1]
        for label, other, discrete in (("y", paths.y[:, n - 2], spec.is_discrete),
                                       ("v", paths.v[:, n - 2], False)):
            r = float(np.corrcoef(th, other)[0, 1]) if np.std(other) > 0 else 0.0
            rows.append(CheckRow(f"corr_theta_{label}", n, r, math.nan, limit, abs(r) <= limit))
            stat, pval = independence_chi2(th, other, b_discrete=discrete)
            rows.append(CheckRow(f"indep_theta_{label}", n, stat, pval, alpha, pval >= alpha))
    return rows


def serial_permutation_test(seq: Sequence[float], permutations: int = 999,
                            rng: RandomStream | None = None) -> tuple[float, float]:
    """Lag-1 autocorrelation with a permutation p-value (two-sided)."""
    y = np.asarray(seq, dtype=float)
    y = y - y.mean()
    denom = float(np.dot(y, y))
    if denom == 0:
        return 0.0, 1.0
    obs = float(np.dot(y[:-1], y[1:]) / denom)
    rng = rng or RandomStream(0, "perm")
    gen = np.random.Generator(np.random.PCG64(rng.bits(64)))
    hits = 0
    for _ in range(permutations):
        p = gen.permutation(y)
        if abs(float(np.dot(p[:-1], p[1:]) / denom)) >= abs(obs):
            hits += 1
    return obs, (hits + 1) / (permutations + 1)


def output_serial_test(spec: ChannelSpec, n: int, seeds: Seeds, trial: int = 0,
                       permutations: int = 999, alpha: float = 0.01) -> CheckRow:
    kernel = build_kernel(spec)
    tr, _ = encode_trial(spec, kernel, n, seeds, trial=trial)
    stat, p = serial_permutation_test(tr.y_seq, permutations,
                                      RandomStream(seeds.common, "permutation", trial))
    return CheckRow("output_serial", n, stat, p, alpha, p >= alpha)


def bonferroni(rows: list[CheckRow], alpha: float = 0.01) -> list[CheckRow]:
    """Re-judge p-value rows at ``alpha / m`` with m the number of such rows."""
    m = sum(1 for r in rows if not math.isnan(r.p_value))
    if m == 0:
        return rows
    level = alpha / m
    return [CheckRow(r.name, r.n, r.statistic, r.p_value, level, r.p_value >= level)
            if not math.isnan(r.p_value) else r for r in rows]

