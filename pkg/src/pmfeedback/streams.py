"""Counter-based random streams.

Each position of a stream is an independent, arbitrarily long uniform bit
string derived by keyed BLAKE2b from ``(seed, label, index, position)``.
Drawing ``k`` bits at a position returns the first ``k`` bits of that
string, so raising the precision of a draw extends it without disturbing
its leading bits or any other position.  Output is identical on every
platform for the integer draws; float draws add one correctly rounded
division.
"""

from __future__ import annotations

import hashlib
from statistics import NormalDist

_BLOCK_BITS = 512
_STD_NORMAL = NormalDist()


class RandomStream:
    """Deterministic stream keyed by a 64-bit ``seed``.

    ``label`` and ``index`` select independent substreams (for example one
    per role and per Monte-Carlo trial).  ``counter`` is the next position
    to be consumed; every draw method consumes exactly one position.
    """

    __slots__ = ("seed", "label", "index", "counter", "_key", "_prefix")

    def __init__(self, seed: int, label: str = "", index: int = 0, counter: int = 0):
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        if index < 0:
            raise ValueError("index must be non-negative")
        self.seed = seed
        self.label = label
        self.index = index
        self.counter = counter
        self._key = seed.to_bytes(8, "big")
        self._prefix = label.encode() + b"\x00" + index.to_bytes(8, "big")

    def __repr__(self):
        return (f"RandomStream(seed={self.seed}, label={self.label!r}, "
                f"index={self.index}, counter={self.counter})")

    def _bits_at(self, position: int, k: int) -> int:
        blocks = -(-k // _BLOCK_BITS)
        base = self._prefix + position.to_bytes(8, "big")
        raw = b"".join(
            hashlib.blake2b(base + b.to_bytes(4, "big"), key=self._key,
                            digest_size=64).digest()
            for b in range(blocks)
        )
        return int.from_bytes(raw, "big") >> (blocks * _BLOCK_BITS - k)

    def bits(self, k: int) -> int:
        """Next position truncated to ``k`` bits, as an int in ``[0, 2**k)``."""
        if k < 1:
            raise ValueError("k must be positive")
        value = self._bits_at(self.counter, k)
        self.counter += 1
        return value

    def bits_many(self, count: int, k: int) -> list[int]:
        start = self.counter
        self.counter += count
        return [self._bits_at(start + j, k) for j in range(count)]

    def uniform(self) -> float:
        """Uniform float on ``[0, 1)`` with 53 random bits."""
        return self.bits(53) / 9007199254740992.0

    def uniforms(self, count: int) -> list[float]:
        return [b / 9007199254740992.0 for b in self.bits_many(count, 53)]

    def normal(self) -> float:
        # midpoint of the 53-bit cell keeps the argument strictly inside (0, 1)
        u = (self.bits(53) + 0.5) / 9007199254740992.0
        return _STD_NORMAL.inv_cdf(u)

    def normals(self, count: int) -> list[float]:
        inv = _STD_NORMAL.inv_cdf
        return [inv((b + 0.5) / 9007199254740992.0) for b in self.bits_many(count, 53)]

    def integers(self, count: int, upper: int) -> list[int]:
        """``count`` integers uniform on ``range(upper)`` (rejection-free for small upper)."""
        k = max(upper - 1, 1).bit_length() + 64
        return [(b * upper) >> k for b in self.bits_many(count, k)]


def trial_streams(seeds, trial: int) -> tuple[RandomStream, RandomStream, RandomStream]:
    """Message, channel and common-randomness streams for one trial."""
    return (
        RandomStream(seeds.message, "message", trial),
        RandomStream(seeds.channel, "channel", trial),
        RandomStream(seeds.common, "common", trial),
    )
