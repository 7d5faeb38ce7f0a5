"""Counter-based pseudo-random numbers for reproducible replications.

The generator is SplitMix64 written in counter form: output ``j`` of the
stream with key ``k`` is ``mix64((k + (j + 1) * GOLDEN) mod 2**64)``, a pure
function of ``(k, j)``.  Replication streams are derived by hashing the
master seed with the replication counter (``stream_key``), so any subset of
replications can be reproduced independently and in any order.

Uniform doubles take the top 53 bits; exponentials use the inverse CDF.
The compiled and pure-Python simulation kernels inline exactly this
arithmetic, which keeps their outputs bit-identical.
"""

from __future__ import annotations

import math

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """SplitMix64 finalizer: a 64-bit avalanche of the counter word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def stream_value(key: int, index: int) -> int:
    """Output ``index`` of the stream with the given key."""
    return mix64((key + ((index + 1) * GOLDEN)) & MASK64)


def stream_key(master_seed: int, replication: int) -> int:
    """Derived key for one replication of a batch."""
    return stream_value(master_seed & MASK64, replication)


class CounterStream:
    """Sequential view over one counter-based stream."""

    __slots__ = ("key", "counter")

    def __init__(self, key: int):
        self.key = key & MASK64
        self.counter = 0

    def next_u64(self) -> int:
        value = stream_value(self.key, self.counter)
        self.counter += 1
        return value

    def uniform(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def exponential(self, rate: float) -> float:
        """Inverse-CDF exponential draw with the given rate."""
        return -math.log1p(-self.uniform()) / rate
