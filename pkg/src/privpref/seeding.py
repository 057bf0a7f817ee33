"""Stable seed derivation.

Component streams are derived from ``(master_seed, name, *coordinates)`` by
hashing, so a cell's randomness never depends on execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np

SEED_MASK = (1 << 64) - 1


def derive_seed(master_seed: int, *parts: object) -> int:
    """Return a 64-bit seed that is a stable function of its arguments."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master_seed) & SEED_MASK).encode())
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode())
    return int.from_bytes(h.digest(), "big")


def rng_for(master_seed: int, *parts: object) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *parts))
