"""Randomized posterior matching encoder and backward interval decoder.

Encoder, for n = 1, 2, ...::

    X_n         = F_X^{-1}(Theta_n)
    Theta_{n+1} = (F(Theta_n | Y_n) + V_n) mod 1,      Theta_1 = Theta_0

Decoder, for k = 0, ..., n-1, from an arc J_0 of length 1 - p_e::

    J_{k+1} = F^{-1}((J_k - V_{n-k}) mod 1 | Y_{n-k})

All state lives on the grid of 2**-B with B the working precision, and
both directions use the grid maps of :mod:`.grid`, so that
``Theta_0 in J_n`` exactly when ``Theta_{n+1} in J_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import gmpy2
from gmpy2 import mpfr

from .. import _core
from ..channel import ChannelSpec
from ..kernel import DmcKernel, PmKernel
from ..streams import RandomStream, trial_streams
from .grid import PrecisionError, grid_for, precision_budget
from .interval import CircleInterval, extract_bits, to_grid


class ConfigError(ValueError):
    """Invalid run configuration (probabilities, horizon, precision)."""


class InvariantError(RuntimeError):
    """An internal consistency check failed."""


@dataclass(frozen=True)
class Seeds:
    message: int
    channel: int
    common: int

    @classmethod
    def from_base(cls, seed: int) -> "Seeds":
        return cls(seed, seed, seed)

    def to_json(self) -> dict:
        return {"message_seed": self.message, "channel_seed": self.channel,
                "common_seed": self.common}


@dataclass(frozen=True)
class EncoderState:
    """Encoder message point ``theta / 2**precision`` at time ``step``."""

    theta: int
    precision: int
    step: int = 1

    def __post_init__(self):
        if not 0 <= self.theta < (1 << self.precision):
            raise ValueError("theta outside [0, 1)")

    @property
    def value(self) -> Fraction:
        return Fraction(self.theta, 1 << self.precision)


@dataclass
class Transcript:
    """What the receiver sees: outputs and shared shifts, plus provenance."""

    y_seq: list
    v_seq: list[int]
    seeds: Seeds
    precision: int
    x_seq: list = field(default_factory=list)
    trial: int = 0
    channel_hash: str = ""

    @property
    def n(self) -> int:
        return len(self.y_seq)


@dataclass
class DecodeResult:
    interval: CircleInterval
    contractions: list
    rate: Any
    bits: str
    wrapped: bool
    p_e: Fraction
    initial: CircleInterval | None = None

    @property
    def n(self) -> int:
        return len(self.contractions) - 1

    @property
    def rate_float(self) -> float | None:
        return None if self.rate is None else float(self.rate)

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "n": self.n,
            "p_e": str(self.p_e),
            "rate": self.rate_float,
            "contractions": [float(c) for c in self.contractions],
            "interval": self.interval.to_json(),
            "bits": self.bits,
            "wrapped": self.wrapped,
        }


@dataclass
class Truth:
    theta0: int
    theta_end: int
    error: bool
    thetas: list | None = None


@dataclass
class TrialOutcome:
    transcript: Transcript
    result: DecodeResult
    truth: Truth


def as_probability(p_e, name: str = "p_e") -> Fraction:
    try:
        p = Fraction(p_e) if not isinstance(p_e, float) else Fraction(repr(p_e))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: cannot parse {p_e!r}") from exc
    if not 0 < p < 1:
        raise ConfigError(f"{name}: must lie strictly between 0 and 1, got {p_e}")
    return p


def check_precision(kernel: PmKernel, n: int, precision: int):
    if precision < n * kernel.max_slope_bits() or precision < 8:
        raise ConfigError(
            f"precision: {precision} bits cannot carry horizon {n} "
            f"({kernel.max_slope_bits()} bits per step needed)")


def draw_message(rng: RandomStream, precision_bits: int, horizon: int = 0,
                 slope_bits: int = 0) -> EncoderState:
    """Theta_0 uniform on the grid of ``precision_bits`` bits (Theta_1 = Theta_0)."""
    if precision_bits < max(horizon * slope_bits, 1):
        raise ConfigError(
            f"precision: {precision_bits} bits is below the {horizon * slope_bits} "
            f"required for horizon {horizon}")
    return EncoderState(rng.bits(precision_bits), precision_bits, 1)


def encoder_input(kernel: PmKernel, state: EncoderState):
    grid = grid_for(kernel, state.precision)
    return grid.input_of(state.theta)


def encode_step(state: EncoderState, kernel: PmKernel, y, v) -> tuple[Any, EncoderState]:
    """One encoder update; returns the input sent at this step and the next state.

    ``v`` is a real in [0, 1) or a grid numerator (int).
    """
    grid = grid_for(kernel, state.precision)
    x = grid.input_of(state.theta)
    v = to_grid(v, state.precision) % grid.modulus
    nxt = (grid.fwd(state.theta, y) + v) % grid.modulus
    return x, EncoderState(nxt, state.precision, state.step + 1)


def interval_map_inverse(kernel: PmKernel, j: CircleInterval, y, v) -> CircleInterval:
    """Preimage of the arc ``j`` under theta -> (F(theta|y) + v) mod 1."""
    grid = grid_for(kernel, j.precision)
    m = grid.modulus
    v = to_grid(v, j.precision) % m
    s = (j.start - v) % m
    e = s + j.length
    gs = grid.inv(s, y)
    if e <= m:
        ge = grid.inv(e, y)
        if ge < gs:
            raise InvariantError("interval image is not an interval (kernel not monotone)")
        length = ge - gs
    else:
        ge = grid.inv(e - m, y)
        if ge > gs:
            raise InvariantError("interval image is not an interval (kernel not monotone)")
        length = m - gs + ge
    if length <= 0:
        raise PrecisionError(
            f"interval collapsed below 2^-{j.precision} at y={y}; raise the precision")
    return CircleInterval(gs % m, length, j.precision)


def initial_interval(p_e: Fraction, precision: int, j0_start=None) -> CircleInterval:
    start = p_e / 2 if j0_start is None else j0_start
    return CircleInterval.from_reals(Fraction(start) if isinstance(start, str) else start,
                                     1 - p_e, precision)


def _contractions(p_e: Fraction, lengths: list[int], precision: int) -> list:
    prec = precision + 64
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        l0 = -gmpy2.log2(1 - mpfr(p_e.numerator) / mpfr(p_e.denominator))
        logs = [gmpy2.log2(mpfr(length)) for length in lengths]
        return [l0] + [a - b for a, b in zip(logs, logs[1:])]


def _rate(contractions: list, n: int, precision: int):
    if n == 0:
        return None
    with gmpy2.context(gmpy2.get_context(), precision=precision + 64):
        return gmpy2.fsum(contractions) / n


def rifs_decode(kernel: PmKernel, t: Transcript, p_e, j0_start=None) -> DecodeResult:
    """Backward interval decoding of a transcript at its precision."""
    p_e = as_probability(p_e)
    grid = grid_for(kernel, t.precision)
    j0 = initial_interval(p_e, t.precision, j0_start)
    if isinstance(kernel, DmcKernel):
        start, lengths, failed = _core.dmc_decode(
            j0.start, j0.length, list(t.y_seq), list(t.v_seq), grid.modulus,
            grid.thresholds, grid.values, grid.tables)
        if failed >= 0:
            raise PrecisionError(
                f"interval collapsed below 2^-{t.precision} at decoder step {failed}; "
                "raise the precision")
        interval = CircleInterval(start, lengths[-1], t.precision)
    else:
        interval = j0
        lengths = [j0.length]
        for k in range(t.n):
            idx = t.n - 1 - k
            interval = interval_map_inverse(kernel, interval, t.y_seq[idx], t.v_seq[idx])
            lengths.append(interval.length)
    contractions = _contractions(p_e, lengths, t.precision)
    prefix = extract_bits(interval)
    return DecodeResult(interval, contractions, _rate(contractions, t.n, t.precision),
                        prefix.bits, prefix.wrapped, p_e, j0)


def encode_trial(spec: ChannelSpec, kernel: PmKernel, n: int, seeds: Seeds,
                 trial: int = 0, precision: int | None = None) -> tuple[Transcript, list]:
    """Run the encoder and channel for ``n`` uses.

    Returns the transcript and the encoder trajectory Theta_1 .. Theta_{n+1}
    as grid numerators.
    """
    if n < 0:
        raise ConfigError("n: must be non-negative")
    precision = precision or precision_budget(kernel, n)
    check_precision(kernel, n, precision)
    msg_rng, ch_rng, common_rng = trial_streams(seeds, trial)
    state = draw_message(msg_rng, precision, n, kernel.max_slope_bits())
    grid = grid_for(kernel, precision)
    vs = common_rng.bits_many(n, precision)
    if isinstance(kernel, DmcKernel):
        us = ch_rng.uniforms(n)
        thetas, xs, ys = _core.dmc_encode(state.theta, vs, us, grid.modulus,
                                          grid.thresholds, grid.cum_rows, grid.tables)
    else:
        thetas, xs, ys = [state.theta], [], []
        theta = state.theta
        noise = math.sqrt(spec.noise_power)
        for j in range(n):
            u = grid.quantile(grid.clamp(theta))
            with gmpy2.context(gmpy2.get_context(), precision=grid.work):
                x = grid.sqrt_p * u
            y = float(x) + noise * ch_rng.normal()
            f = 0 if theta == 0 else grid.fwd_from_quantile(u, y)
            theta = (f + vs[j]) % grid.modulus
            xs.append(float(x))
            ys.append(y)
            thetas.append(theta)
    transcript = Transcript(ys, vs, seeds, precision, xs, trial, spec.hash())
    return transcript, thetas


def run_trial(spec: ChannelSpec, kernel: PmKernel, n: int, p_e, seeds: Seeds,
              precision: int | None = None, trial: int = 0, j0_start=None,
              keep_path: bool = False) -> TrialOutcome:
    """Full feedback loop: encode over the channel, decode from (Y^n, V^n) alone."""
    p_e = as_probability(p_e)
    transcript, thetas = encode_trial(spec, kernel, n, seeds, trial, precision)
    result = rifs_decode(kernel, transcript, p_e, j0_start)
    theta0, theta_end = thetas[0], thetas[-1]
    error = not result.interval.contains_grid(theta0)
    truth = Truth(theta0, theta_end, error, thetas if keep_path else None)
    return TrialOutcome(transcript, result, truth)


def check_invertibility(outcome: TrialOutcome) -> bool:
    """Theta_0 in J_n  <=>  Theta_{n+1} in J_0, evaluated on the grid."""
    r = outcome.result
    inside_end = r.interval.contains_grid(outcome.truth.theta0)
    inside_start = r.initial.contains_grid(outcome.truth.theta_end)
    return inside_end == inside_start
