import math

import gmpy2
import numpy as np
import pytest

from pmfeedback.analysis import (BucketRow, SweepRow, SweepTable, WalkTrace, bonferroni,
                                 csv_text, encoder_paths, hl_tail_test, identity_map,
                                 independence_tests, lambda_curve, marginal_tests,
                                 partial_sums, rate_sweep, row, run_trials, saturation_test,
                                 serial_permutation_test, square_map, submartingale_check,
                                 visit_counts, walk_trace)
from pmfeedback.analysis.marginals import CheckRow
from pmfeedback.channel import bsc, dmc, mutual_information
from pmfeedback.codec import Seeds
from pmfeedback.kernel import build_kernel, inverse_kernel_map, smoothed_derivative
from pmfeedback.streams import RandomStream

I_BSC011 = 0.50008404183547200435950040586972


# --- contraction curve -----------------------------------------------------

def test_single_segment_kernel_has_no_contraction():
    k = build_kernel(dmc(["1"], [["0.4", "0.6"]]))
    curve = lambda_curve(k, [0.5, 2.0**-8], 1.0, 500, RandomStream(1))
    assert all(abs(m) < 1e-12 for m in curve.means)


def test_bsc_curve_inside_the_capacity_band(bsc011_kernel):
    curve = lambda_curve(bsc011_kernel, [0.5, 2.0**-4, 2.0**-12], 1.0, 20_000,
                         RandomStream(2, "curve"))
    for m, se in zip(curve.means, curve.stderrs):
        assert 3 * se < m < I_BSC011 - 3 * se or abs(m - I_BSC011) < 4 * se
    assert curve.means[-1] == pytest.approx(I_BSC011, abs=4 * curve.stderrs[-1])
    assert len(curve.continuity()) == 2


def test_small_width_contraction_is_exact_log_slope(bsc011_kernel):
    """Away from the breakpoints a tiny window sees one segment: L = log2 slope."""
    k = bsc011_kernel
    g = inverse_kernel_map(k, 0)
    assert -math.log2(smoothed_derivative(g, 0.3, 1e-6)) == pytest.approx(math.log2(1.78))
    assert -math.log2(smoothed_derivative(g, 0.95, 1e-6)) == pytest.approx(math.log2(0.22))


def test_curve_grid_validation(bsc011_kernel):
    with pytest.raises(ValueError):
        lambda_curve(bsc011_kernel, [0.25, 0.5], 1.0, 10, RandomStream(0))
    with pytest.raises(ValueError):
        lambda_curve(bsc011_kernel, [1.0, 0.5], 1.0, 10, RandomStream(0))


# --- trials and the walk ---------------------------------------------------

def test_parallel_trials_match_serial(bsc011):
    a = run_trials(bsc011, 24, "0.1", Seeds.from_base(3), 12, workers=1)
    b = run_trials(bsc011, 24, "0.1", Seeds.from_base(3), 12, workers=2)
    assert a == b
    assert [s.trial for s in a] == list(range(12))


def test_summary_rate_recomputes_from_terms(bsc011):
    for s in run_trials(bsc011, 40, "0.05", Seeds.from_base(4), 10):
        assert s.invertible
        assert s.rate == pytest.approx(math.fsum(s.contractions) / 40, rel=1e-12)
        assert s.walk[-1] == pytest.approx(-s.log2_length, rel=1e-9, abs=1e-9)
        assert s.rate == pytest.approx(s.walk[-1] / 40, rel=1e-12)


def test_partial_sums_keep_mpfr_precision():
    terms = [gmpy2.mpfr(1, 200), gmpy2.mpfr(2, 200) ** -150, gmpy2.mpfr(1, 200)]
    s = partial_sums(terms)
    assert s[-1] - 2 == gmpy2.mpfr(2, 200) ** -150
    assert partial_sums([0.5, 0.25]) == [0.5, 0.75]


def test_walk_trace_counts():
    tr = walk_trace([1.0, 1.0, 1.0, 1.0], 2.5)
    assert tr.s == [1.0, 2.0, 3.0, 4.0]
    assert tr.visits == [0, 1, 1, 1]
    assert walk_trace([0.2, 0.0, 0.3], 0.0).visits == [0, 0, 0]
    with pytest.raises(ValueError):
        walk_trace([], 1.0)


def test_walk_trace_from_summary(bsc011):
    s = run_trials(bsc011, 16, "0.1", Seeds.from_base(5), 1)[0]
    assert walk_trace(s, 5.0).s == list(s.walk)


def _synthetic_traces(drift, count=200, n=60, seed=0):
    gen = np.random.default_rng(seed)
    return [WalkTrace(list(np.concatenate([[0.5], 0.5 + np.cumsum(drift + gen.normal(size=n))])),
                      5.0, [0] * (n + 1)) for _ in range(count)]


def test_submartingale_check_detects_drift():
    ok_rows = submartingale_check(_synthetic_traces(0.3), edges=(-math.inf, 0, 5, math.inf))
    assert all(r.ok for r in ok_rows)
    bad_rows = submartingale_check(_synthetic_traces(-0.5), edges=(-math.inf, 0, 5, math.inf))
    assert not all(r.ok for r in bad_rows)


def test_sparse_buckets_are_reported_not_judged():
    rows = submartingale_check(_synthetic_traces(0.0, count=1, n=5), min_count=30)
    assert all(isinstance(r, BucketRow) and r.ok for r in rows)


def test_saturation_test():
    gen = np.random.default_rng(1)
    same = saturation_test(gen.poisson(4, 300), gen.poisson(4, 300))
    assert same[2]
    grown = saturation_test(gen.poisson(4, 300), gen.poisson(8, 300))
    assert not grown[2]
    assert list(visit_counts([WalkTrace([0, 1], 2, [0, 3])])) == [3]


# --- rate sweep ------------------------------------------------------------

def test_useless_channel_only_pays_for_the_initial_interval():
    spec = bsc("0.5")
    table = rate_sweep(spec, "0.1", [4, 8], 100, Seeds.from_base(6))
    assert table.capacity == 0
    for r in table.rows:
        assert r.mean_rate == pytest.approx(-math.log2(0.9) / r.n, rel=1e-9)
        assert r.error_rate == pytest.approx(0.1, abs=0.1)


def test_sweep_argument_checks(bsc011):
    with pytest.raises(ValueError):
        rate_sweep(bsc011, "0.1", [8, 4], 100, Seeds.from_base(0))
    with pytest.raises(ValueError):
        rate_sweep(bsc011, "0.1", [4], 10, Seeds.from_base(0))


def test_monotone_within():
    def table(fracs):
        rows = [SweepRow(n, 100, 0.0, 0.0, f, math.sqrt(f * (1 - f) / 100), 0.0)
                for n, f in zip((1, 2, 3), fracs)]
        return SweepTable(0.5, 0.1, "0.1", rows)
    assert table([0.2, 0.5, 0.45]).monotone_within()
    assert not table([0.9, 0.2, 0.95]).monotone_within()


# --- tail bound ------------------------------------------------------------

def test_identity_never_stretches():
    rep = hl_tail_test(identity_map(), [2, 4], 2000, rng=RandomStream(7))
    assert rep.ok and all(r.prob == 0 and r.lipschitz_zero for r in rep.rows)


def test_square_tail_against_dense_brute_force():
    g = square_map()
    a = 1.9
    rep = hl_tail_test(g, [a, 2.0], 20_000, rng=RandomStream(8, "sq"))
    xs = np.linspace(0, 1, 4001, endpoint=False)
    lams = np.linspace(1e-4, 0.9999, 2000)
    best = np.max([smoothed_derivative(g, xs, lam) for lam in lams], axis=0)
    brute = float(np.mean(best > a))
    row_a, row_2 = rep.rows
    assert row_a.prob == pytest.approx(brute, abs=4 * row_a.stderr + 1e-3)
    assert row_a.ok and row_2.ok and row_2.lipschitz_zero


def test_bsc_inverse_kernel_tail(bsc011_kernel):
    for y in (0, 1):
        g = inverse_kernel_map(bsc011_kernel, y)
        rep = hl_tail_test(g, [2, 4, 8, 16], 5000, rng=RandomStream(9, "bsc", y))
        assert rep.ok
        assert rep.rows[-1].lipschitz_zero


def test_tail_thresholds_must_be_positive():
    with pytest.raises(ValueError):
        hl_tail_test(identity_map(), [0], 10)


# --- marginal laws ---------------------------------------------------------

def test_encoder_marginals_small(bsc011, bsc011_kernel):
    paths = encoder_paths(bsc011, bsc011_kernel, 8, 2000, Seeds.from_base(10))
    assert paths.theta.shape == (2000, 8)
    rows = bonferroni(marginal_tests(bsc011, paths, [1, 4, 8]) +
                      independence_tests(bsc011, paths, [4, 8]))
    assert all(r.passed for r in rows)


def test_marginal_test_rejects_biased_states(bsc011):
    from pmfeedback.analysis import EncoderPaths
    gen = np.random.default_rng(3)
    th = gen.uniform(size=(3000, 1)) ** 2
    bad = EncoderPaths(th, (th > 0.5).astype(float), np.zeros_like(th), gen.uniform(size=th.shape))
    rows = marginal_tests(bsc011, bad, [1])
    assert not any(r.passed for r in rows)


def test_serial_permutation():
    gen = np.random.default_rng(4)
    _, p = serial_permutation_test(gen.integers(0, 2, 400), 199, RandomStream(1))
    assert p > 0.01
    _, p = serial_permutation_test([0, 1] * 200, 199, RandomStream(1))
    assert p <= 0.01


def test_bonferroni_scales_level():
    rows = [CheckRow("a", 1, 0.0, 0.004, 0.01, True), CheckRow("b", 1, 0.0, 0.5, 0.01, True),
            CheckRow("c", 1, 0.0, math.nan, 0.1, True)]
    out = bonferroni(rows, 0.01)
    assert out[0].threshold == 0.005 and not out[0].passed
    assert out[1].passed and out[2] is rows[2]


# --- report ----------------------------------------------------------------

def test_csv_format():
    text = csv_text([row("x", "abc", 4, 0.5, 0.25, math.nan, None, True)])
    assert text.splitlines() == ["name,channel_hash,n,lambda,mean,stderr,p_value,pass",
                                 "x,abc,4,0.5,0.25,,,true"]


def test_bsc_curve_matches_deterministic_integration(bsc011_kernel):
    # E L(lam) for BSC(0.11) from a 2e6-point midpoint rule over V with exact
    # piecewise-linear images (computed outside the package)
    frozen = {0.5: 0.13077, 0.25: 0.26989, 0.125: 0.37742, 2.0**-6: 0.48475}
    curve = lambda_curve(bsc011_kernel, sorted(frozen, reverse=True), 1.0, 40_000,
                         RandomStream(12, "frozen-curve"))
    for lam, m, se in zip(curve.grid, curve.means, curve.stderrs):
        assert m == pytest.approx(frozen[lam], abs=4 * se + 1e-5)
