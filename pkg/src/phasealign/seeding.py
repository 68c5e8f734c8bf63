"""Deterministic seed derivation and generator construction.

Every random draw in the package flows through numpy's Philox bit generator,
a counter-based 64-bit generator. Seeds for units of work (trials, restarts)
are derived by hashing integer coordinates with splitmix64, so any single
unit can be reproduced in isolation, independent of execution order.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the splitmix64 mixer (public-domain constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, *coords: int) -> int:
    """Hash a master seed plus integer coordinates into a 64-bit sub-seed.

    Order-sensitive: derive_seed(s, a, b) != derive_seed(s, b, a) in general.
    """
    state = splitmix64(master_seed & _MASK64)
    for c in coords:
        state = splitmix64(state ^ splitmix64(int(c) & _MASK64))
    return state


def make_generator(seed: int) -> np.random.Generator:
    """Philox generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))
