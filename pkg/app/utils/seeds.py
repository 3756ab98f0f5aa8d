"""Deterministic seed derivation for chains and trials."""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One splitmix64 output for the given 64-bit state."""
    z = (state + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, index: int) -> int:
    """Seed of unit `index`: splitmix64(base + index * gamma), so units never share a stream."""
    return splitmix64((base_seed + index * GOLDEN_GAMMA) & MASK64)


def make_rng(base_seed: int, index: int) -> np.random.Generator:
    """numpy Generator for unit `index` of a run seeded with `base_seed`."""
    return np.random.default_rng(derive_seed(base_seed, index))
