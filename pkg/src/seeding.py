"""
Seed derivation: every random stream comes from (master seed, operation tag, indices).
"""

import hashlib

import numpy as np


def tag_key(tag: str) -> int:
    """Stable 32-bit key for an operation tag."""
    return int.from_bytes(hashlib.sha256(tag.encode("utf-8")).digest()[:4], "big")


def derive_seed_sequence(seed: int, tag: str, *indices: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(tag_key(tag),) + tuple(int(i) for i in indices))


def derive_rng(seed: int, tag: str, *indices: int) -> np.random.Generator:
    """Independent generator for one call of one operation."""
    return np.random.default_rng(derive_seed_sequence(seed, tag, *indices))


def derive_seed(seed: int, tag: str, *indices: int) -> int:
    """Integer child seed, used when a seed must be written to a report."""
    return int(derive_seed_sequence(seed, tag, *indices).generate_state(1, dtype=np.uint32)[0])
