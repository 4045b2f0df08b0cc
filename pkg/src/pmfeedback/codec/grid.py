"""Fixed-point realizations of a kernel on the grid {0, 1, ..., 2**B - 1} / 2**B.

The encoder applies ``fwd(T) = min(floor(2**B F(T / 2**B | y)), 2**B - 1)``
and the decoder maps interval endpoints with the exact lower inverse of
that same integer map, ``inv(A) = min{T : fwd(T) >= A}``.  Because both
sides use one monotone integer map, ``fwd(T) in [A, A')`` holds exactly
when ``T in [inv(A), inv(A'))``, which makes membership of the message
point in the decoded interval an exact, rounding-free statement.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpfr

from .. import gaussian
from ..channel import cumulative_rows
from ..kernel import AwgnKernel, DmcKernel, KernelError

MAX_ADJUST = 64


class PrecisionError(ArithmeticError):
    """The working precision cannot separate the quantities involved."""


def _ceil_fraction(f: Fraction) -> int:
    return -((-f.numerator) // f.denominator)


class DmcGrid:
    """Integer tables for a discrete kernel at ``precision`` bits.

    On segment ``i`` of output ``y``, ``fwd(T) = (alpha * T + beta) // den``
    with integers chosen so that this is the exact floor of the rational
    kernel.  ``thresholds[i] = ceil(2**B breaks[i])`` is the first grid
    point of segment ``i`` and ``values[y][i] = fwd(thresholds[i])``, with a
    sentinel ``2**B`` appended.
    """

    def __init__(self, kernel: DmcKernel, precision: int):
        self.kernel = kernel
        self.precision = precision
        self.modulus = m = 1 << precision
        self.thresholds = tuple(_ceil_fraction(b * m) for b in kernel.breaks)
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise PrecisionError("precision too low to separate the input segments")
        tables, values = [], []
        for y in range(kernel.n_outputs):
            if not kernel.reachable(y):
                tables.append(None)
                values.append(None)
                continue
            segs = []
            for i, (s, c, t) in enumerate(zip(kernel.slopes[y], kernel.values[y], kernel.breaks)):
                offset = c - s * t
                den = math.lcm(s.denominator, offset.denominator)
                alpha = s.numerator * (den // s.denominator)
                beta = offset.numerator * (den // offset.denominator) * m
                if alpha == 0 and beta // den >= m:
                    # flat run ending at F = 1 would land on the wrap point
                    beta = (m - 1) * den
                segs.append((alpha, beta, den))
            tables.append(tuple(segs))
            values.append(tuple(
                (a * t + b) // d for (a, b, d), t in zip(segs, self.thresholds)
            ) + (m,))
        self.tables = tuple(tables)
        self.values = tuple(values)
        self.cum_rows = cumulative_rows(kernel.spec)

    def _check(self, y):
        if not self.kernel.reachable(y):
            raise KernelError(f"output {y!r} is unreachable (P_Y = 0) or out of range")

    def input_of(self, t: int) -> int:
        return min(max(bisect_right(self.thresholds, t) - 1, 0), len(self.thresholds) - 2)

    def fwd(self, t: int, y) -> int:
        self._check(y)
        a, b, d = self.tables[y][self.input_of(t)]
        return (a * t + b) // d

    def inv(self, target: int, y) -> int:
        self._check(y)
        return dmc_lower_inverse(target, self.values[y], self.tables[y], self.thresholds)


def dmc_lower_inverse(target, values, segs, thresholds):
    # first segment boundary whose value reaches the target
    j = bisect_left(values, target)
    if j == 0:
        return 0
    a, b, d = segs[j - 1]
    if a == 0:
        return thresholds[j]
    c = -((b - target * d) // a)
    t = thresholds[j]
    return c if c < t else t


class AwgnGrid:
    """MPFR realization of the Gaussian kernel at ``precision`` bits.

    Evaluations carry 64 guard bits.  The lower inverse starts from the
    analytic inverse and is corrected against ``fwd`` so that it is exact
    for the computed forward map.
    """

    GUARD = 64

    def __init__(self, kernel: AwgnKernel, precision: int):
        self.kernel = kernel
        self.precision = precision
        self.modulus = 1 << precision
        self.work = precision + self.GUARD
        self.sqrt_p, self.gain, self.sigma = kernel.constants(self.work)

    def clamp(self, t: int) -> int:
        return min(max(t, 1), self.modulus - 1)

    def quantile(self, t: int):
        """Phi^{-1}(t / 2**B) for 0 < t < 2**B."""
        return gaussian.ndtri((t, self.precision), self.work)

    def input_of(self, t: int):
        """Channel input sqrt(P) Phi^{-1}(theta) with theta clamped into the open grid."""
        u = self.quantile(self.clamp(t))
        with gmpy2.context(gmpy2.get_context(), precision=self.work):
            return self.sqrt_p * u

    def _floor_scaled(self, p) -> int:
        with gmpy2.context(gmpy2.get_context(), precision=self.work):
            return int(gmpy2.floor(gmpy2.mul_2exp(p, self.precision)))

    def fwd_from_quantile(self, u, y) -> int:
        with gmpy2.context(gmpy2.get_context(), precision=self.work):
            z = (self.sqrt_p * u - self.gain * mpfr(y)) / self.sigma
        return min(self._floor_scaled(gaussian.ndtr(z, self.work)), self.modulus - 1)

    def fwd(self, t: int, y) -> int:
        if t <= 0:
            return 0
        return self.fwd_from_quantile(self.quantile(t), y)

    def inv(self, target: int, y) -> int:
        m = self.modulus
        if target <= 0:
            return 0
        if target >= m:
            return m
        u = gaussian.ndtri((target, self.precision), self.work)
        with gmpy2.context(gmpy2.get_context(), precision=self.work):
            w = (self.sigma * u + self.gain * mpfr(y)) / self.sqrt_p
            scaled = gmpy2.mul_2exp(gaussian.ndtr(w, self.work), self.precision)
            c = int(gmpy2.ceil(scaled))
        c = min(max(c, 1), m - 1)
        steps = 0
        while c > 1 and self.fwd(c - 1, y) >= target:
            c -= 1
            steps += 1
            if steps > MAX_ADJUST:
                raise PrecisionError(
                    f"kernel too flat near v={target}/2^{self.precision} for y={y}: "
                    "forward map not resolvable at this precision")
        while c < m and self.fwd(c, y) < target:
            c += 1
            steps += 1
            if steps > MAX_ADJUST:
                raise PrecisionError(
                    f"kernel too flat near v={target}/2^{self.precision} for y={y}: "
                    "forward map not resolvable at this precision")
        return c


@lru_cache(maxsize=64)
def grid_for(kernel, precision: int):
    if isinstance(kernel, DmcKernel):
        return DmcGrid(kernel, precision)
    return AwgnGrid(kernel, precision)


def precision_budget(kernel, n: int) -> int:
    """Default working precision in bits for horizon ``n``."""
    return 128 + n * kernel.max_slope_bits()
