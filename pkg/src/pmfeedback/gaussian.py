"""Standard normal CDF and quantile at arbitrary binary precision.

``ndtr`` uses MPFR's correctly rounded ``erfc`` (error <= 1/2 ulp before the
final halving, which is exact).  ``ndtri`` solves ``ndtr(x) = p`` by Newton
iteration, doubling the working precision at every step from a double
precision seed; a final iteration at ``prec + 16`` bits leaves the result
within 2 ulp at ``prec`` bits for every ``p`` representable at that precision.
"""

from __future__ import annotations

import math

import gmpy2
from gmpy2 import mpfr
from scipy.special import ndtri as _ndtri_double

_GUARD = 16


def ndtr(x, prec: int):
    """Phi(x) rounded to ``prec`` bits."""
    with gmpy2.context(gmpy2.get_context(), precision=prec + _GUARD):
        x = mpfr(x)
        r = gmpy2.erfc(-x / gmpy2.sqrt(2)) / 2
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        return +r


def ndtr_upper(x, prec: int):
    """1 - Phi(x) rounded to ``prec`` bits, accurate in the upper tail."""
    with gmpy2.context(gmpy2.get_context(), precision=prec + _GUARD):
        x = mpfr(x)
        r = gmpy2.erfc(x / gmpy2.sqrt(2)) / 2
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        return +r


def npdf(x, prec: int):
    with gmpy2.context(gmpy2.get_context(), precision=prec + _GUARD):
        x = mpfr(x)
        r = gmpy2.exp(-x * x / 2) / gmpy2.sqrt(2 * gmpy2.const_pi())
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        return +r


def _seed_lower(p) -> float:
    """Double-precision start for Phi^{-1}(p), p <= 1/2 (p may underflow a double)."""
    pf = float(p)
    if pf > 1e-300:
        return float(_ndtri_double(pf))
    # asymptotic inversion of the Mills ratio: x ~ -sqrt(2L - log(2 pi (2L)))
    big_l = -float(gmpy2.log(p))
    return -math.sqrt(2 * big_l - math.log(4 * math.pi * big_l))


def _newton_lower(p, prec: int):
    """Phi^{-1}(p) for 0 < p <= 1/2."""
    x = mpfr(_seed_lower(p), 64)
    steps = []
    q = prec + _GUARD
    while q > 48:
        steps.append(q)
        q = q // 2 + 8
    steps.reverse()
    # two iterations at the seed precision polish the double start for deep tails
    steps = [steps[0], steps[0]] + steps
    for q in steps:
        with gmpy2.context(gmpy2.get_context(), precision=q):
            x = mpfr(x)
            pp = mpfr(p)
            f = gmpy2.erfc(-x / gmpy2.sqrt(2)) / 2 - pp
            d = gmpy2.exp(-x * x / 2) / gmpy2.sqrt(2 * gmpy2.const_pi())
            x = x - f / d
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        return +x


def ndtri(p, prec: int):
    """Phi^{-1}(p) for 0 < p < 1, within 2 ulp at ``prec`` bits.

    ``p`` may be an mpfr, int/float, or a pair ``(num, exp)`` meaning
    ``num / 2**exp`` so that 1 - p can be formed exactly.
    """
    if isinstance(p, tuple):
        num, e = p
        with gmpy2.context(gmpy2.get_context(), precision=max(e, 53) + 2):
            lo = gmpy2.mul_2exp(mpfr(num), -e)
            hi = gmpy2.mul_2exp(mpfr((1 << e) - num), -e)
    else:
        with gmpy2.context(gmpy2.get_context(), precision=max(prec, 53) + _GUARD):
            lo = mpfr(p)
            hi = 1 - lo
    if not 0 < lo < 1:
        raise ValueError("ndtri argument must lie strictly inside (0, 1)")
    if lo <= hi:
        return _newton_lower(lo, prec)
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        return -_newton_lower(hi, prec)
