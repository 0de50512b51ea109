"""Order-independent seed derivation shared by sampling and masking."""

import hashlib
import random
import struct


def derive_seed(seed: int, *keys: int) -> int:
    """64-bit seed from ``seed`` and integer keys; stable across runs and platforms."""
    h = hashlib.blake2b(digest_size=8)
    for part in (seed, *keys):
        h.update(struct.pack("<Q", part & 0xFFFFFFFFFFFFFFFF))
    return int.from_bytes(h.digest(), "little")


def uniform(seed: int, *keys: int) -> float:
    """Deterministic draw in [0, 1) from the derived seed."""
    return (derive_seed(seed, *keys) >> 11) / float(1 << 53)


def rng_for(seed: int, *keys: int) -> random.Random:
    return random.Random(derive_seed(seed, *keys))
