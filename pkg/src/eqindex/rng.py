"""Seeded linear congruential generator.

All randomized multistart seeding goes through this generator so that runs
are reproducible across platforms and languages from the (spec, config,
seed) triple alone.  Constants are the Numerical Recipes 32-bit LCG:

    state <- (1664525 * state + 1013904223) mod 2**32
    uniform = state / 2**32
"""

from __future__ import annotations

_A = 1664525
_C = 1013904223
_M = 2**32


class Lcg:
    def __init__(self, seed: int = 0):
        self.state = seed % _M

    def next_u32(self) -> int:
        self.state = (_A * self.state + _C) % _M
        return self.state

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * (self.next_u32() / _M)

    def point_in_disk(self, radius: float) -> tuple[float, float]:
        # rejection sampling keeps the distribution exactly uniform
        while True:
            x = self.uniform(-radius, radius)
            y = self.uniform(-radius, radius)
            if x * x + y * y <= radius * radius:
                return x, y

    def unit_vector(self, dim: int) -> list[float]:
        # Box-Muller pairs, normalized
        import math

        vals = []
        while len(vals) < dim:
            u1 = self.uniform()
            u2 = self.uniform()
            if u1 <= 1e-300:
                continue
            r = math.sqrt(-2.0 * math.log(u1))
            vals.append(r * math.cos(2.0 * math.pi * u2))
            vals.append(r * math.sin(2.0 * math.pi * u2))
        v = vals[:dim]
        n = math.sqrt(sum(x * x for x in v))
        if n == 0.0:
            return self.unit_vector(dim)
        return [x / n for x in v]
