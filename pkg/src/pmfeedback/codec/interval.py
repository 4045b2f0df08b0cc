"""Half-open arcs of the circle [0, 1) with fixed-point endpoints."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import gmpy2
from gmpy2 import mpfr


def to_grid(value, precision: int) -> int:
    """Round a real in [0, 1] to the nearest multiple of 2**-precision.

    Integers are taken to be grid numerators already.
    """
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        value = Fraction(value)
    elif not isinstance(value, Fraction):
        value = Fraction(str(value)) if isinstance(value, str) else \
            Fraction(*mpfr(value).as_integer_ratio())
    scaled = value * (1 << precision)
    return int((scaled + Fraction(1, 2)) // 1)


@dataclass(frozen=True)
class CircleInterval:
    """The arc ``[start, start + length) mod 1`` on the grid of ``2**-precision``.

    ``start`` and ``length`` are integer numerators; the arc wraps through
    0 when ``start + length > 2**precision``.
    """

    start: int
    length: int
    precision: int

    def __post_init__(self):
        m = 1 << self.precision
        if not 0 <= self.start < m:
            raise ValueError("interval start outside [0, 1)")
        if not 0 < self.length <= m:
            raise ValueError("interval length outside (0, 1]")

    @classmethod
    def from_reals(cls, start, length, precision: int) -> "CircleInterval":
        m = 1 << precision
        return cls(to_grid(start, precision) % m, to_grid(length, precision), precision)

    @property
    def modulus(self) -> int:
        return 1 << self.precision

    @property
    def wraps(self) -> bool:
        return self.start + self.length > self.modulus

    @property
    def lo(self) -> Fraction:
        return Fraction(self.start, self.modulus)

    @property
    def hi(self) -> Fraction:
        """Right end, reduced mod 1 (so a wrapping arc has ``hi < lo``)."""
        return Fraction((self.start + self.length) % self.modulus, self.modulus)

    @property
    def size(self) -> Fraction:
        return Fraction(self.length, self.modulus)

    def log2_length(self, prec: int | None = None):
        """log2 of the arc length as an mpfr (default precision + 64 bits)."""
        with gmpy2.context(gmpy2.get_context(), precision=prec or self.precision + 64):
            return gmpy2.log2(mpfr(self.length)) - self.precision

    def contains_grid(self, t: int) -> bool:
        return (t - self.start) % self.modulus < self.length

    def arcs(self) -> list[tuple[int, int]]:
        end = self.start + self.length
        if end <= self.modulus:
            return [(self.start, end)]
        return [(self.start, self.modulus), (0, end - self.modulus)]

    def rescaled(self, precision: int) -> "CircleInterval":
        """Same arc on a finer grid (exact) or a coarser one (rounded)."""
        if precision >= self.precision:
            sh = precision - self.precision
            return CircleInterval(self.start << sh, self.length << sh, precision)
        return CircleInterval.from_reals(self.lo, self.size, precision)

    def to_json(self) -> dict:
        width = -(-self.precision // 4)
        return {
            "precision": self.precision,
            "start_hex": format(self.start, f"0{width}x"),
            "length_hex": format(self.length, f"0{width}x"),
            "start": float(self.lo),
            "log2_length": float(self.log2_length()),
            "wraps": self.wraps,
        }


def membership(j: CircleInterval, theta) -> bool:
    """Whether ``theta`` lies in the arc (half-open, wrap-aware, exact).

    ``theta`` may be a real (float, Fraction, mpfr) or an object carrying
    ``theta`` and ``precision`` attributes such as an encoder state.
    """
    if hasattr(theta, "precision") and hasattr(theta, "theta"):
        t = Fraction(theta.theta, 1 << theta.precision)
    elif isinstance(theta, Fraction):
        t = theta
    elif isinstance(theta, (int, float)):
        t = Fraction(theta)
    else:
        t = Fraction(*mpfr(theta).as_integer_ratio())
    offset = (t * j.modulus - j.start) % j.modulus
    return offset < j.length


class BitPrefix(NamedTuple):
    bits: str
    wrapped: bool


def extract_bits(j: CircleInterval) -> BitPrefix:
    """Longest binary prefix shared by every point of the arc.

    A wrapping arc contains points on both sides of 0 and yields an empty
    prefix with ``wrapped`` set.
    """
    if j.wraps:
        return BitPrefix("", True)
    lo = j.start
    last = j.start + j.length - 1
    diff = lo ^ last
    common = j.precision - diff.bit_length()
    if common <= 0:
        return BitPrefix("", False)
    return BitPrefix(format(lo >> (j.precision - common), f"0{common}b"), False)
