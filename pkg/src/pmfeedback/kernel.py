"""Posterior matching kernels and smoothed-derivative tools.

The kernel ``F(theta | y)`` is the conditional CDF of the uniform message
representation given a channel output, and its generalized inverse is
``F^{-1}(v | y) = inf{theta : F(theta | y) > v}``.

Discrete kernels are piecewise linear in theta with breakpoints at the
input CDF and evaluate exactly in rationals.  Gaussian kernels evaluate in
MPFR at a configurable precision.  Both expose float64 views used by the
Monte-Carlo analysis code.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr
from scipy import special, stats

from . import gaussian
from .channel import ChannelSpec
from .streams import RandomStream

DEFAULT_PRECISION = 256
DEFAULT_GRID_DEPTH = 40


class KernelError(ValueError):
    """Invalid kernel query: unreachable output, argument out of range."""


class DmcKernel:
    """Piecewise-linear kernel of a discrete channel.

    For output ``y`` the segment over input ``i`` runs from
    ``breaks[i] = P_X(0) + ... + P_X(i-1)`` to ``breaks[i+1]`` with slope
    ``P(X=i | Y=y) / P_X(i) = W(y|i) / P_Y(y)``.
    """

    kind = "DMC"

    def __init__(self, spec: ChannelSpec):
        self.spec = spec
        px = spec.input_pmf
        breaks = [Fraction(0)]
        for p in px:
            breaks.append(breaks[-1] + p)
        breaks[-1] = Fraction(1)
        self.breaks = tuple(breaks)
        self.output_pmf = spec.output_pmf()
        slopes, values = [], []
        for y, py in enumerate(self.output_pmf):
            if py == 0:
                slopes.append(None)
                values.append(None)
                continue
            s = tuple(spec.matrix[i][y] / py for i in range(len(px)))
            c = [Fraction(0)]
            for i, p in enumerate(px):
                c.append(c[-1] + s[i] * p)
            c[-1] = Fraction(1)
            slopes.append(s)
            values.append(tuple(c))
        self.slopes = tuple(slopes)
        self.values = tuple(values)

    @property
    def n_outputs(self) -> int:
        return len(self.output_pmf)

    def reachable(self, y) -> bool:
        return isinstance(y, (int, np.integer)) and 0 <= y < self.n_outputs \
            and self.slopes[y] is not None

    def _check(self, y):
        if not self.reachable(y):
            raise KernelError(f"output {y!r} is unreachable (P_Y = 0) or out of range")

    def input_index(self, theta) -> int:
        """F_X^{-1}(theta): index of the input segment containing theta."""
        return min(bisect_right(self.breaks, Fraction(theta)) - 1, len(self.breaks) - 2)

    def cdf(self, theta, y) -> Fraction:
        self._check(y)
        theta = Fraction(theta)
        if not 0 <= theta <= 1:
            raise KernelError("theta must lie in [0, 1]")
        if theta == 1:
            return Fraction(1)
        i = self.input_index(theta)
        return self.values[y][i] + self.slopes[y][i] * (theta - self.breaks[i])

    def inverse(self, v, y) -> Fraction:
        self._check(y)
        v = Fraction(v)
        if not 0 <= v <= 1:
            raise KernelError("v must lie in [0, 1]")
        c = self.values[y]
        if v >= 1:
            return Fraction(1)
        # last breakpoint with F <= v: skips flat runs, giving inf{F > v}
        i = bisect_right(c, v) - 1
        return self.breaks[i] + (v - c[i]) / self.slopes[y][i]

    def density(self, theta, y) -> Fraction:
        self._check(y)
        return self.slopes[y][self.input_index(theta)]

    def max_slope_bits(self) -> int:
        worst = 0.0
        for s in self.slopes:
            if s is None:
                continue
            for si in s:
                if si > 0:
                    worst = max(worst, abs(math.log2(si)))
        return math.ceil(worst - 1e-12)

    # float views -------------------------------------------------------
    @lru_cache(maxsize=None)
    def _knots(self, y):
        self._check(y)
        vk, tk = [], []
        for c, t in zip(self.values[y], self.breaks):
            if vk and float(c) == vk[-1]:
                # flat segment: keep the right end so the view is the inf-inverse
                tk[-1] = float(t)
                continue
            vk.append(float(c))
            tk.append(float(t))
        return np.array(vk), np.array(tk)

    def inverse_array(self, v, y):
        vk, tk = self._knots(y)
        return np.interp(v, vk, tk)

    def inverse_diff(self, a, b, y):
        return self.inverse_array(b, y) - self.inverse_array(a, y)

    def inverse_slope_array(self, v, y):
        """d/dv F^{-1}(v|y) as floats (1 / posterior slope)."""
        vk, tk = self._knots(y)
        idx = np.clip(np.searchsorted(vk, v, side="right") - 1, 0, len(vk) - 2)
        return (tk[idx + 1] - tk[idx]) / (vk[idx + 1] - vk[idx])

    def lipschitz_inverse(self, y) -> float:
        return float(max(1 / s for s in self.slopes[y] if s > 0))

    def sample_outputs(self, count: int, rng: RandomStream) -> np.ndarray:
        cum = np.cumsum([float(p) for p in self.output_pmf])
        cum[-1] = 1.0
        u = np.array(rng.uniforms(count))
        return np.searchsorted(cum, u, side="right")

    def mutual_information_theta(self) -> float:
        """I(Theta;Y) computed from the kernel slopes, in bits."""
        total = 0.0
        for y, py in enumerate(self.output_pmf):
            if py == 0:
                continue
            for i, p in enumerate(self.spec.input_pmf):
                s = self.slopes[y][i]
                if s > 0:
                    total += float(py * p * s) * math.log2(s)
        return total

    def segment_table(self):
        """Rows of (y, i, theta_lo, theta_hi, slope) for reporting."""
        rows = []
        for y in range(self.n_outputs):
            if self.slopes[y] is None:
                continue
            for i in range(len(self.breaks) - 1):
                rows.append((y, i, self.breaks[i], self.breaks[i + 1], self.slopes[y][i]))
        return rows


class AwgnKernel:
    """Kernel of the Gaussian channel with Gaussian input.

    With ``a = P/(P+N)`` and ``sigma^2 = P N/(P+N)`` the posterior of X
    given y is N(a y, sigma^2), and since ``X = sqrt(P) Phi^{-1}(theta)``::

        F(theta | y) = Phi((sqrt(P) Phi^{-1}(theta) - a y) / sigma)
    """

    kind = "AWGN"

    def __init__(self, spec: ChannelSpec, precision: int = DEFAULT_PRECISION):
        self.spec = spec
        self.precision = precision
        p, n = spec.power, spec.noise_power
        self.gain = p / (p + n)
        self.post_var = p * n / (p + n)
        self.a = float(self.gain)
        self.sigma = math.sqrt(self.post_var)
        self.sqrt_p = math.sqrt(p)

    def reachable(self, y) -> bool:
        try:
            return math.isfinite(float(y))
        except (TypeError, ValueError):
            return False

    def _check(self, y):
        if not self.reachable(y):
            raise KernelError(f"output {y!r} is not a finite real")

    @lru_cache(maxsize=None)
    def constants(self, prec: int):
        """(sqrt P, a, sigma) as mpfr at ``prec`` bits."""
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            def q(f: Fraction):
                return mpfr(f.numerator) / mpfr(f.denominator)
            return (gmpy2.sqrt(q(self.spec.power)), q(self.gain), gmpy2.sqrt(q(self.post_var)))

    def cdf(self, theta, y, prec: int | None = None):
        self._check(y)
        prec = prec or self.precision
        theta = mpfr(theta, prec + 16) if not isinstance(theta, Fraction) else \
            mpfr(theta.numerator, prec + 16) / theta.denominator
        if not 0 <= theta <= 1:
            raise KernelError("theta must lie in [0, 1]")
        if theta == 0 or theta == 1:
            return mpfr(theta, prec)
        sp, a, sg = self.constants(prec + 16)
        u = gaussian.ndtri(theta, prec + 16)
        with gmpy2.context(gmpy2.get_context(), precision=prec + 16):
            z = (sp * u - a * mpfr(y)) / sg
        return gaussian.ndtr(z, prec)

    def inverse(self, v, y, prec: int | None = None):
        self._check(y)
        prec = prec or self.precision
        v = mpfr(v, prec + 16) if not isinstance(v, Fraction) else \
            mpfr(v.numerator, prec + 16) / v.denominator
        if not 0 <= v <= 1:
            raise KernelError("v must lie in [0, 1]")
        if v == 0 or v == 1:
            return mpfr(v, prec)
        sp, a, sg = self.constants(prec + 16)
        u = gaussian.ndtri(v, prec + 16)
        with gmpy2.context(gmpy2.get_context(), precision=prec + 16):
            w = (sg * u + a * mpfr(y)) / sp
        return gaussian.ndtr(w, prec)

    def density(self, theta, y, prec: int | None = None):
        """Posterior density f(theta | y) of Theta given Y = y."""
        prec = prec or self.precision
        sp, a, sg = self.constants(prec + 16)
        u = gaussian.ndtri(mpfr(theta, prec + 16), prec + 16)
        with gmpy2.context(gmpy2.get_context(), precision=prec + 16):
            z = (sp * u - a * mpfr(y)) / sg
            r = gaussian.npdf(z, prec + 16) * sp / sg / gaussian.npdf(u, prec + 16)
        return mpfr(r, prec)

    def max_slope_bits(self) -> int:
        return 4

    # float views -------------------------------------------------------
    def _z_out(self, v, y):
        return (self.sigma * special.ndtri(v) + self.a * y) / self.sqrt_p

    def inverse_array(self, v, y):
        return special.ndtr(self._z_out(np.asarray(v, dtype=float), y))

    def inverse_diff(self, a, b, y):
        """F^{-1}(b|y) - F^{-1}(a|y), computed on the side of the smaller tail."""
        za = self._z_out(np.asarray(a, dtype=float), y)
        zb = self._z_out(np.asarray(b, dtype=float), y)
        upper = special.ndtr(-za) - special.ndtr(-zb)
        lower = special.ndtr(zb) - special.ndtr(za)
        with np.errstate(invalid="ignore"):
            # the full circle gives inf - inf; either branch then returns 1
            return np.where(za + zb > 0, upper, lower)

    def inverse_slope_array(self, v, y):
        u = special.ndtri(np.asarray(v, dtype=float))
        w = (self.sigma * u + self.a * y) / self.sqrt_p
        return np.exp(stats.norm.logpdf(w) - stats.norm.logpdf(u)) * self.sigma / self.sqrt_p

    def sample_outputs(self, count: int, rng: RandomStream) -> np.ndarray:
        scale = math.sqrt(self.spec.power + self.spec.noise_power)
        return scale * np.array(rng.normals(count))


PmKernel = DmcKernel | AwgnKernel


def build_kernel(spec: ChannelSpec, precision: int = DEFAULT_PRECISION) -> PmKernel:
    if spec.is_discrete:
        return DmcKernel(spec)
    return AwgnKernel(spec, precision)


def kernel_eval(k: PmKernel, theta, y):
    return k.cdf(theta, y)


def kernel_inverse(k: PmKernel, v, y):
    return k.inverse(v, y)


# --------------------------------------------------------------------------
# smoothed derivatives

class MonotoneMap:
    """A monotone map on [0, 1] usable by :func:`smoothed_derivative`.

    ``diff(a, b)`` should return ``g(b) - g(a)`` with as little cancellation
    as the map allows; it defaults to the plain difference.
    """

    def __init__(self, func: Callable, diff: Callable | None = None,
                 derivative: Callable | None = None, lipschitz: float | None = None):
        self.func = func
        self._diff = diff
        self.derivative = derivative
        self.lipschitz = lipschitz

    def __call__(self, x):
        return self.func(x)

    def diff(self, a, b):
        if self._diff is not None:
            return self._diff(a, b)
        return self.func(b) - self.func(a)

    def total_variation(self) -> float:
        """E|g'(X)| for X uniform; equals |g(1) - g(0)| for monotone g."""
        return float(abs(self.diff(0.0, 1.0)))


def inverse_kernel_map(k: PmKernel, y) -> MonotoneMap:
    """The decoder's map v -> F^{-1}(v | y) as a :class:`MonotoneMap`."""
    lip = k.lipschitz_inverse(y) if isinstance(k, DmcKernel) else None
    return MonotoneMap(
        lambda v: k.inverse_array(v, y),
        diff=lambda a, b: k.inverse_diff(a, b, y),
        derivative=lambda v: k.inverse_slope_array(v, y),
        lipschitz=lip,
    )


def _as_map(g) -> MonotoneMap:
    return g if isinstance(g, MonotoneMap) else MonotoneMap(g)


def smoothed_derivative(g, x, lam: float):
    """(1/lam) |g([x - lam/2, x + lam/2] mod 1)| for monotone ``g``.

    ``x`` may be a scalar or an array.  A window crossing 0 is split into
    two arcs whose image measures are added.
    """
    if not 0 < lam <= 1:
        raise KernelError(f"smoothing width must lie in (0, 1], got {lam}")
    g = _as_map(g)
    x = np.asarray(x, dtype=float)
    if lam == 1:
        return np.full(x.shape, abs(float(g.diff(0.0, 1.0)))) if x.ndim else \
            abs(float(g.diff(0.0, 1.0)))
    lo = np.mod(x - lam / 2, 1.0)
    hi = np.mod(x + lam / 2, 1.0)
    plain = lo <= hi
    one = np.ones_like(lo)
    zero = np.zeros_like(lo)
    inner = np.abs(g.diff(lo, np.where(plain, hi, one)))
    outer = np.where(plain, 0.0, np.abs(g.diff(zero, hi)))
    out = (inner + outer) / lam
    return out if out.ndim else float(out)


def dyadic_grid(depth: int = DEFAULT_GRID_DEPTH, include_one: bool = True) -> list[float]:
    """[1, 2^-1, ..., 2^-depth] (the 1 stands for the lambda -> 1 limit)."""
    grid = [2.0 ** -j for j in range(1, depth + 1)]
    return ([1.0] if include_one else []) + grid


def max_stretch(g, x, lam_grid: Sequence[float] | None = None):
    """Maximum of the smoothed derivative over ``lam_grid``.

    This is a lower bound on the supremum over all widths in (0, 1), exact
    only as the grid becomes dense.
    """
    grid = dyadic_grid() if lam_grid is None else list(lam_grid)
    if not grid:
        raise KernelError("empty smoothing grid")
    g = _as_map(g)
    best = None
    for lam in grid:
        d = smoothed_derivative(g, x, lam)
        best = d if best is None else np.maximum(best, d)
    return best if np.ndim(best) else float(best)


# --------------------------------------------------------------------------
# family property reports

@dataclass
class P1Report:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_p1(k: PmKernel, y_samples=None, theta_grid=None) -> P1Report:
    """Flag outputs whose kernel has a flat segment or fails to increase.

    Discrete kernels are checked exactly on every reachable output and
    return ``(y, segment)`` pairs; other kernels are checked numerically on
    ``theta_grid`` for each y in ``y_samples`` and return ``(y, theta)``.
    """
    report = P1Report()
    if isinstance(k, DmcKernel):
        ys = range(k.n_outputs) if y_samples is None else y_samples
        for y in ys:
            if not k.reachable(y):
                continue
            for i, s in enumerate(k.slopes[y]):
                if s == 0:
                    report.violations.append((int(y), i))
        return report
    ys = [-1.0, 0.0, 1.0] if y_samples is None else y_samples
    grid = np.linspace(0, 1, 257) if theta_grid is None else theta_grid
    for y in ys:
        prev = None
        for t in grid:
            f = k.cdf(float(t), float(y), prec=96)
            if prev is not None and f <= prev:
                report.violations.append((float(y), float(t)))
            prev = f
    return report


@dataclass
class P2Report:
    lambdas: list
    moments: list
    stderrs: list
    order: float
    trend_slope: float
    trend_pvalue: float
    growing: bool


def log_smoothed_derivative(k: PmKernel, lam: float, ys, vs) -> np.ndarray:
    """log2 D_lam[F^{-1}(v | y)] for paired arrays of outputs and points."""
    ys = np.asarray(ys)
    vs = np.asarray(vs, dtype=float)
    out = np.empty(len(vs))
    if isinstance(k, DmcKernel):
        for y in np.unique(ys):
            sel = ys == y
            out[sel] = np.log2(smoothed_derivative(inverse_kernel_map(k, int(y)), vs[sel], lam))
    else:
        # Gaussian outputs are all distinct: vectorize over (y, v) pairs directly
        g = MonotoneMap(lambda v: k.inverse_array(v, ys),
                        diff=lambda a, b: k.inverse_diff(a, b, ys))
        out[:] = np.log2(smoothed_derivative(g, vs, lam))
    return out


def validate_p2(k: PmKernel, delta: float = 1.0, lambdas: Sequence[float] | None = None,
                n_samples: int = 100_000, rng: RandomStream | None = None,
                tail: int = 5, alpha: float = 0.05) -> P2Report:
    """Monte-Carlo estimate of E|log2 D_lam[F^{-1}(V|Y)]|^(2+delta) per lambda.

    ``growing`` is set when the moments over the last ``tail`` (smallest)
    widths increase significantly with -log2(lambda) at level ``alpha``.
    """
    if delta <= 0:
        raise KernelError("delta must be positive")
    lams = [2.0 ** -j for j in range(4, 17, 2)] if lambdas is None else list(lambdas)
    if any(b >= a for a, b in zip(lams, lams[1:])):
        raise KernelError("lambdas must be strictly decreasing")
    rng = rng or RandomStream(0, "p2")
    ys = k.sample_outputs(n_samples, rng)
    vs = np.array(rng.uniforms(n_samples))
    order = 2 + delta
    moments, errs = [], []
    for lam in lams:
        m = np.abs(log_smoothed_derivative(k, lam, ys, vs)) ** order
        moments.append(float(m.mean()))
        errs.append(float(m.std(ddof=1) / math.sqrt(n_samples)))
    slope, pval = trend_test(lams[-tail:], moments[-tail:], errs[-tail:])
    return P2Report(lams, moments, errs, order, slope, pval,
                    growing=bool(slope > 0 and pval < alpha))


def trend_test(lams, means, errs) -> tuple[float, float]:
    """Weighted least-squares slope of ``means`` against -log2(lambda).

    Returns the slope and the one-sided p-value for a positive slope.
    """
    if len(lams) < 3:
        return 0.0, 1.0
    x = -np.log2(np.asarray(lams, dtype=float))
    y = np.asarray(means, dtype=float)
    w = 1.0 / np.maximum(np.asarray(errs, dtype=float), 1e-150) ** 2
    xm = np.sum(w * x) / np.sum(w)
    ym = np.sum(w * y) / np.sum(w)
    sxx = np.sum(w * (x - xm) ** 2)
    slope = float(np.sum(w * (x - xm) * (y - ym)) / sxx)
    se = math.sqrt(1.0 / sxx)
    return slope, float(stats.norm.sf(slope / se))
