"""
Seed derivation shared by every component that needs reproducible randomness.
"""

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF


def derive_seed(master: int, index: int) -> int:
    """
    Derive a child seed from a master seed with the SplitMix64 finaliser.

    The mix uses only 64-bit integer arithmetic, so child seeds are identical
    on every platform.

    Args:
        master: The master seed (any integer; reduced modulo 2**64)
        index: Position of the child stream (0, 1, 2, ...)

    Returns:
        A 64-bit unsigned child seed
    """
    z = (int(master) + (int(index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def make_rng(master: int, index: int = 0) -> np.random.Generator:
    """Return a numpy Generator seeded with ``derive_seed(master, index)``."""
    return np.random.default_rng(derive_seed(master, index))


def sklearn_seed(master: int, index: int = 0) -> int:
    """Child seed reduced to the 32-bit range scikit-learn accepts."""
    return derive_seed(master, index) & 0x7FFFFFFF
