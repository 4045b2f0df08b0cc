from fractions import Fraction

import gmpy2
import pytest

from pmfeedback.channel import awgn, bsc, dmc
from pmfeedback.codec import (CircleInterval, ConfigError, EncoderState, Seeds, Transcript,
                              check_invertibility, encode_step, encode_trial,
                              interval_map_inverse, membership, rifs_decode, run_trial,
                              to_grid)
from pmfeedback.kernel import build_kernel

F = Fraction
P = 64
ULP = F(1, 1 << P)


def identity_kernel():
    return build_kernel(dmc(["1"], [["1"]]))


def test_encode_step_classical_and_shifted(bsc011_kernel):
    s = EncoderState(1 << (P - 2), P)
    x, nxt = encode_step(s, bsc011_kernel, 0, 0)
    assert x == 0
    assert F("0.445") - ULP < nxt.value <= F("0.445")
    assert nxt.step == 2
    _, shifted = encode_step(s, bsc011_kernel, 0, F("0.7"))
    assert abs(shifted.value - F("0.145")) <= 2 * ULP


def test_encoder_input_on_second_segment(bsc011_kernel):
    x, _ = encode_step(EncoderState(3 << (P - 2), P), bsc011_kernel, 1, 0)
    assert x == 1


def test_interval_preimage_example(bsc011_kernel):
    j = CircleInterval.from_reals(F("0.89"), F("0.055"), P)
    out = interval_map_inverse(bsc011_kernel, j, 0, 0)
    assert abs(out.lo - F("0.5")) <= 8 * ULP
    assert abs(out.size - F("0.25")) <= 8 * ULP


def test_identity_kernel_preserves_and_rotates():
    k = identity_kernel()
    j = CircleInterval.from_reals(F("0.3"), F("0.2"), P)
    assert interval_map_inverse(k, j, 0, 0) == j
    w = CircleInterval.from_reals(F("0.9"), F("0.2"), P)
    out = interval_map_inverse(k, w, 0, F("0.1"))
    assert out.length == w.length
    assert abs(out.lo - F("0.8")) <= ULP


def test_zero_length_horizon(bsc011, bsc011_kernel):
    o = run_trial(bsc011, bsc011_kernel, 0, "0.1", Seeds.from_base(1))
    assert o.result.rate is None
    assert o.result.interval.size == pytest.approx(0.9, abs=1e-30)
    assert o.result.n == 0


def test_fixed_seeds_reproduce_everything(bsc011, bsc011_kernel):
    a = run_trial(bsc011, bsc011_kernel, 40, "0.05", Seeds(1, 2, 3), trial=4)
    b = run_trial(bsc011, bsc011_kernel, 40, "0.05", Seeds(1, 2, 3), trial=4)
    assert a.transcript == b.transcript
    assert a.result.to_json() == b.result.to_json()
    c = run_trial(bsc011, bsc011_kernel, 40, "0.05", Seeds(1, 2, 3), trial=5)
    assert c.transcript.v_seq != a.transcript.v_seq


def test_rate_is_minus_log_length_over_n(bsc011, bsc011_kernel):
    """The contraction sum telescopes to -log2 |J_n| up to the rounding of |J_0|."""
    for t in range(5):
        o = run_trial(bsc011, bsc011_kernel, 32, "0.1", Seeds.from_base(9), trial=t)
        r = o.result
        with gmpy2.context(gmpy2.get_context(), precision=r.interval.precision + 64):
            direct = -r.interval.log2_length() / 32
            assert abs(r.rate - direct) < gmpy2.mpfr(2) ** -(r.interval.precision - 4)
            assert r.rate == gmpy2.fsum(r.contractions) / 32


def test_first_contraction(bsc011, bsc011_kernel):
    o = run_trial(bsc011, bsc011_kernel, 4, "0.1", Seeds.from_base(2))
    assert float(o.result.contractions[0]) == pytest.approx(0.15200309344504997, rel=1e-15)


def test_error_flag_is_non_membership(bsc011, bsc011_kernel):
    for t in range(30):
        o = run_trial(bsc011, bsc011_kernel, 16, "0.3", Seeds.from_base(5), trial=t)
        theta0 = F(o.truth.theta0, 1 << o.transcript.precision)
        assert o.truth.error == (not membership(o.result.interval, theta0))


@pytest.mark.parametrize("spec", [bsc("0.11"), bsc("0.25"),
                                  dmc(["0.2", "0.5", "0.3"],
                                      [["0.7", "0.2", "0.1"], ["0.1", "0.8", "0.1"],
                                       ["0.25", "0.25", "0.5"]])])
def test_invertibility_discrete(spec):
    k = build_kernel(spec)
    for n in (1, 8, 64):
        for t in range(20):
            assert check_invertibility(run_trial(spec, k, n, "0.2", Seeds.from_base(6), trial=t))


def test_invertibility_gaussian(awgn11, awgn11_kernel):
    for n in (1, 8):
        for t in range(5):
            assert check_invertibility(run_trial(awgn11, awgn11_kernel, n, "0.2",
                                                 Seeds.from_base(7), trial=t))


def test_small_error_rate(bsc011, bsc011_kernel):
    errors = sum(run_trial(bsc011, bsc011_kernel, 32, "0.1", Seeds.from_base(8), trial=t)
                 .truth.error for t in range(2000))
    assert abs(errors / 2000 - 0.1) <= 3 * (0.1 * 0.9 / 2000) ** 0.5


def test_noiseless_single_step_halves_the_interval():
    """On a noiseless binary channel one backward step on the realized branch is one bit."""
    spec = bsc(0)
    k = build_kernel(spec)
    p_e = F(1, 10)
    j0 = CircleInterval.from_reals(p_e / 2, 1 - p_e, P)
    # shift J_0 to an even start well inside (0, 1) so that the arc avoids
    # the flat run at either end and both endpoints halve exactly
    start = (j0.start // 2) & ~1
    assert j0.length % 2 == 0
    for y in (0, 1):
        t = Transcript([y], [j0.start - start], Seeds.from_base(0), P)
        r = rifs_decode(k, t, p_e)
        assert r.interval.length * 2 == j0.length
        assert r.contractions[1] == 1


def test_precision_below_budget_is_a_config_error(bsc011, bsc011_kernel):
    with pytest.raises(ConfigError):
        encode_trial(bsc011, bsc011_kernel, 64, Seeds.from_base(1), precision=100)


@pytest.mark.parametrize("bad", ["0", "1", "-0.2", "x", 1.5])
def test_bad_error_probability(bsc011, bsc011_kernel, bad):
    with pytest.raises(ConfigError):
        run_trial(bsc011, bsc011_kernel, 4, bad, Seeds.from_base(1))


def test_negative_horizon(bsc011, bsc011_kernel):
    with pytest.raises(ConfigError):
        encode_trial(bsc011, bsc011_kernel, -1, Seeds.from_base(1))


def test_gaussian_inputs_follow_state(awgn11, awgn11_kernel):
    tr, thetas = encode_trial(awgn11, awgn11_kernel, 5, Seeds.from_base(3))
    from scipy.special import ndtri
    for x, th in zip(tr.x_seq, thetas):
        assert x == pytest.approx(float(ndtri(th / 2.0 ** tr.precision)), abs=1e-9)
