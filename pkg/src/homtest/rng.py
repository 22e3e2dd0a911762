"""Deterministic splittable random streams.

Every experiment owns a single 64-bit seed. Each trial (and each role
within a trial: tester, adversary, instance) derives an independent
stream from the seed and a chain of integer ids, so trials are
order-independent and safe to run on any number of workers.

The generator is a SplitMix64 chain. It is deliberately tiny so the
compiled engine can reproduce the exact same draw sequence; the
per-trial equivalence tests rely on bit-identical output between this
module and the extension.
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15

# Stream roles, kept in one place so the engine and the pure path agree.
ROLE_TESTER = 0
ROLE_ADVERSARY = 1
ROLE_INSTANCE = 2


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *ids: int) -> int:
    """Derive a child seed from a root seed and a chain of stream ids."""
    s = _mix(seed & MASK64)
    for i in ids:
        s = _mix((s ^ (i & MASK64)) + _GAMMA & MASK64)
    return s


class Stream:
    """SplitMix64 generator over a derived seed."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        return _mix(self._state)

    def rand_below(self, n: int) -> int:
        """Uniform integer in [0, n) with rejection to kill modulo bias."""
        if n <= 0:
            raise ValueError("rand_below requires n >= 1")
        threshold = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < threshold:
                return r % n

    def rand_fraction(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def stream(seed: int, *ids: int) -> Stream:
    return Stream(derive_seed(seed, *ids))
