"""Portable seeded random draws for the population simulator.

The generator is splitmix64, chosen because its full definition fits in a
few lines and reproduces bit-for-bit in any language with 64-bit unsigned
arithmetic; output files record the algorithm name so a reimplementation
can check itself against them.

Draw i (0-based) for seed s:

    z = (s + (i + 1) * 0x9E3779B97F4A7C15) mod 2^64
    z = (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
    z = (z XOR (z >> 27)) * 0x94D049BB133111EB mod 2^64
    u_i = (z XOR (z >> 31)) / 2^64        # uniform in [0, 1)

Type k is selected when cum_{k-1} <= u < cum_k, where cum is the running
sum of the probability masses with the final entry forced to exactly 1.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RNG_ID", "uniform01", "sample_indices"]

RNG_ID = "splitmix64"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def uniform01(seed: int, n: int) -> np.ndarray:
    """n splitmix64 draws mapped to [0, 1) as float64."""
    if n < 1:
        raise ValueError("need at least one draw")
    idx = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):   # mod-2^64 wraparound is the algorithm
        z = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return z.astype(np.float64) / 2.0**64


def sample_indices(pmf: tuple[float, ...], n: int, seed: int) -> np.ndarray:
    """n i.i.d. category draws from pmf, deterministic in seed."""
    cum = np.cumsum(np.asarray(pmf, dtype=float))
    cum[-1] = 1.0   # guard the last boundary against cumulative rounding
    return np.searchsorted(cum, uniform01(seed, n), side="right")
