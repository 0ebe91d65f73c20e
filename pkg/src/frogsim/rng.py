"""Seeded substream derivation for reproducible parallel Monte Carlo.

One root seed; every replica / particle / purpose gets its own
counter-based generator derived by stable hashing of a key path, so
results do not depend on scheduling or worker count.
"""
from __future__ import annotations

import hashlib

import numpy as np


def _key_to_ints(key) -> list[int]:
    if isinstance(key, (int, np.integer)):
        return [int(key) & 0xFFFFFFFF, (int(key) >> 32) & 0xFFFFFFFF]
    if isinstance(key, str):
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    raise TypeError(f"substream keys must be int or str, got {type(key)!r}")


def substream(seed: int, *keys) -> np.random.Generator:
    """Return a Philox generator for the stream identified by ``(seed, *keys)``.

    Identical arguments always yield an identical stream; distinct key
    paths yield statistically independent streams.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for key in keys:
        entropy.extend(_key_to_ints(key))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
