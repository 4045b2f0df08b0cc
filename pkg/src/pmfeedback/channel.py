"""Memoryless channels paired with a fixed input distribution.

Two families are supported: discrete memoryless channels given by a
row-stochastic transition matrix, and the additive white Gaussian noise
channel with a Gaussian input.  Discrete probabilities are held as exact
:class:`fractions.Fraction` values so that kernels built from them can be
evaluated without rounding.
"""

from __future__ import annotations

import hashlib
import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .streams import RandomStream

DMC = "DMC"
AWGN = "AWGN"

ROW_TOL = Fraction(1, 10**12)

Number = Union[str, int, float, Fraction]


class ChannelError(ValueError):
    """Raised for malformed channel specifications or invalid symbols."""


def _as_fraction(value: Number, field: str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ChannelError(f"{field}: boolean is not a probability")
    if isinstance(value, float):
        # floats go through their shortest repr so 0.11 means 11/100
        value = repr(value)
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ChannelError(f"{field}: cannot parse {value!r}") from exc


@dataclass(frozen=True)
class ChannelSpec:
    """A channel law together with the input distribution used on it.

    For ``kind == "DMC"`` the fields ``input_pmf`` and ``matrix`` are set
    (``matrix[x][y] = W(y|x)``).  For ``kind == "AWGN"`` the fields
    ``power`` and ``noise_power`` are set.  Instances are immutable and
    validated on construction; use :func:`dmc`, :func:`awgn` or
    :func:`load_channel` rather than the raw constructor.
    """

    kind: str
    input_pmf: tuple[Fraction, ...] = ()
    matrix: tuple[tuple[Fraction, ...], ...] = ()
    power: Fraction = Fraction(0)
    noise_power: Fraction = Fraction(0)

    def __post_init__(self):
        if self.kind == DMC:
            self._validate_dmc()
        elif self.kind == AWGN:
            if self.power <= 0:
                raise ChannelError("power: must be > 0")
            if self.noise_power <= 0:
                raise ChannelError("noise_power: must be > 0")
        else:
            raise ChannelError(f"kind: unknown channel kind {self.kind!r}")

    def _validate_dmc(self):
        px, w = self.input_pmf, self.matrix
        if not px:
            raise ChannelError("input_pmf: empty")
        if len(w) != len(px):
            raise ChannelError(
                f"matrix: expected {len(px)} rows (one per input), got {len(w)}")
        width = len(w[0])
        if width == 0:
            raise ChannelError("matrix: empty rows")
        for i, p in enumerate(px):
            if p <= 0:
                raise ChannelError(
                    f"input_pmf[{i}]: zero-mass inputs must be removed before loading")
        if abs(sum(px) - 1) > ROW_TOL:
            raise ChannelError("input_pmf: does not sum to 1")
        for i, row in enumerate(w):
            if len(row) != width:
                raise ChannelError(f"matrix[{i}]: ragged row")
            if any(p < 0 for p in row):
                raise ChannelError(f"matrix[{i}]: negative entry")
            if abs(sum(row) - 1) > ROW_TOL:
                raise ChannelError(f"matrix[{i}]: row does not sum to 1")

    @property
    def is_discrete(self) -> bool:
        return self.kind == DMC

    @property
    def n_inputs(self) -> int:
        return len(self.input_pmf)

    @property
    def n_outputs(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0

    def output_pmf(self) -> tuple[Fraction, ...]:
        """Exact output distribution P_Y for a discrete channel."""
        if not self.is_discrete:
            raise ChannelError("output_pmf is only defined for discrete channels")
        return tuple(
            sum(p * row[y] for p, row in zip(self.input_pmf, self.matrix))
            for y in range(self.n_outputs)
        )

    def to_json(self) -> dict:
        if self.is_discrete:
            return {
                "kind": DMC,
                "input_pmf": [_fraction_str(p) for p in self.input_pmf],
                "matrix": [[_fraction_str(p) for p in row] for row in self.matrix],
            }
        return {
            "kind": AWGN,
            "power": _fraction_str(self.power),
            "noise_power": _fraction_str(self.noise_power),
        }

    def hash(self) -> str:
        """Short content hash used to tag output files."""
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fraction_str(p: Fraction) -> str:
    if p.denominator == 1:
        return str(p.numerator)
    # exact decimal when the denominator is 2^a 5^b, fraction string otherwise
    d = p.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{p.numerator}/{p.denominator}"
    digits = max(twos, fives)
    scaled = p * 10**digits
    sign = "-" if scaled < 0 else ""
    mag = str(abs(scaled.numerator))
    mag = mag.rjust(digits + 1, "0")
    return f"{sign}{mag[:-digits]}.{mag[-digits:]}"


def _normalized(values: Sequence[Fraction]) -> tuple[Fraction, ...]:
    total = sum(values)
    if total == 1:
        return tuple(values)
    return tuple(v / total for v in values)


def dmc(input_pmf: Sequence[Number], matrix: Sequence[Sequence[Number]]) -> ChannelSpec:
    """Build a discrete channel; rows within 1e-12 of stochastic are renormalized."""
    px = tuple(_as_fraction(p, f"input_pmf[{i}]") for i, p in enumerate(input_pmf))
    rows = tuple(
        tuple(_as_fraction(p, f"matrix[{i}][{j}]") for j, p in enumerate(row))
        for i, row in enumerate(matrix)
    )
    spec = ChannelSpec(kind=DMC, input_pmf=px, matrix=rows)
    return ChannelSpec(
        kind=DMC,
        input_pmf=_normalized(spec.input_pmf),
        matrix=tuple(_normalized(r) for r in spec.matrix),
    )


def awgn(power: Number, noise_power: Number) -> ChannelSpec:
    return ChannelSpec(
        kind=AWGN,
        power=_as_fraction(power, "power"),
        noise_power=_as_fraction(noise_power, "noise_power"),
    )


def bsc(p: Number, input_pmf: Sequence[Number] = ("0.5", "0.5")) -> ChannelSpec:
    """Binary symmetric channel with crossover probability ``p``."""
    p = _as_fraction(p, "p")
    return dmc(input_pmf, [[1 - p, p], [p, 1 - p]])


def channel_from_json(obj: dict) -> ChannelSpec:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ChannelError("kind: missing")
    kind = str(obj["kind"]).upper()
    if kind == DMC:
        for field in ("input_pmf", "matrix"):
            if field not in obj:
                raise ChannelError(f"{field}: missing")
        return dmc(obj["input_pmf"], obj["matrix"])
    if kind == AWGN:
        for field in ("power", "noise_power"):
            if field not in obj:
                raise ChannelError(f"{field}: missing")
        return awgn(obj["power"], obj["noise_power"])
    raise ChannelError(f"kind: unknown channel kind {obj['kind']!r}")


def load_channel(path: str | Path) -> ChannelSpec:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ChannelError(f"{path}: not valid JSON ({exc})") from exc
    return channel_from_json(obj)


def sample_output(spec: ChannelSpec, x, rng: RandomStream):
    """Draw one channel output given input ``x``.

    DMC inputs are integer indices; AWGN inputs are real numbers (any type
    convertible to float).  Consumes exactly one position of ``rng``.
    """
    if spec.is_discrete:
        if not isinstance(x, (int, np.integer)) or not 0 <= x < spec.n_inputs:
            raise ChannelError(f"input symbol {x!r} out of range 0..{spec.n_inputs - 1}")
        return draw_dmc_output(cumulative_rows(spec)[x], rng.uniform())
    return float(x) + math.sqrt(spec.noise_power) * rng.normal()


@lru_cache(maxsize=64)
def cumulative_rows(spec: ChannelSpec) -> tuple[tuple[float, ...], ...]:
    """Float CDFs of each transition row, computed exactly then rounded.

    The last entry of every row is exactly 1.0.
    """
    out = []
    for row in spec.matrix:
        acc = Fraction(0)
        cum = []
        for p in row:
            acc += p
            cum.append(float(acc))
        out.append(tuple(cum))
    return tuple(out)


def draw_dmc_output(cum_row: Sequence[float], u: float) -> int:
    # first index whose cumulative mass exceeds u; zero-mass symbols are never chosen
    return min(bisect_right(cum_row, u), len(cum_row) - 1)


def _xlogy_terms(spec: ChannelSpec) -> float:
    py = [float(p) for p in spec.output_pmf()]
    total = 0.0
    for px, row in zip(spec.input_pmf, spec.matrix):
        for y, w in enumerate(row):
            if w == 0:
                continue
            total += float(px) * float(w) * math.log2(float(w) / py[y])
    return total


def mutual_information(spec: ChannelSpec) -> float:
    """I(X;Y) in bits for the spec's input distribution (0 log 0 = 0)."""
    if spec.is_discrete:
        return max(_xlogy_terms(spec), 0.0)
    return 0.5 * math.log2(1 + spec.power / spec.noise_power)


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)
