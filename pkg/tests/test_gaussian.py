import mpmath
import pytest
from gmpy2 import mpfr

from pmfeedback import gaussian


def _mp(x):
    return mpmath.mpf(str(x)) if not isinstance(x, mpfr) else mpmath.mpf(x.as_integer_ratio()[0]) / x.as_integer_ratio()[1]


@pytest.mark.parametrize("x", ["-40", "-5.5", "-1", "0", "0.3", "1", "3", "8.25"])
def test_ndtr_matches_mpmath(x):
    with mpmath.workdps(80):
        ref = mpmath.ncdf(mpmath.mpf(x))
        got = _mp(gaussian.ndtr(mpfr(x, 256), 200))
        assert abs(got - ref) <= abs(ref) * mpmath.mpf(2) ** -195


@pytest.mark.parametrize("p", ["1e-300", "1e-20", "0.001", "0.1", "0.5", "0.75", "0.999999"])
def test_ndtri_matches_mpmath(p):
    with mpmath.workdps(80):
        pm = mpmath.mpf(p)
        ref = mpmath.findroot(lambda z: mpmath.log(mpmath.ncdf(z)) - mpmath.log(pm),
                              mpmath.sqrt(-2 * mpmath.log(pm)) * (-1 if pm < 0.5 else 0.1))
        got = _mp(gaussian.ndtri(mpfr(p, 300), 200))
        assert abs(got - ref) <= max(abs(ref), 1) * mpmath.mpf(2) ** -190


def test_ndtri_exact_grid_argument_near_one():
    # (t, B) means t / 2**B; 1 - 2**-200 must not round to 1
    z = gaussian.ndtri(((1 << 200) - 1, 200), 256)
    with mpmath.workdps(90):
        tail = mpmath.mpf(2) ** -200
        ref = -mpmath.findroot(lambda z: mpmath.log(mpmath.ncdf(z)) - mpmath.log(tail), -16)
        assert abs(_mp(z) - ref) < mpmath.mpf(10) ** -60


def test_round_trip():
    for p in ["0.01", "0.3", "0.97"]:
        z = gaussian.ndtri(mpfr(p, 200), 180)
        assert abs(gaussian.ndtr(z, 180) - mpfr(p, 200)) < mpfr(2) ** -170


def test_upper_tail_and_density():
    assert abs(float(gaussian.ndtr_upper(mpfr(1), 64)) - 0.15865525393145705) < 1e-16
    assert abs(float(gaussian.npdf(mpfr(0), 64)) - 0.3989422804014327) < 1e-16
