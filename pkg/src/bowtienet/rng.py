"""Deterministic RNG stream derivation.

Every stochastic routine derives its generator from a single master seed plus
a context path (strings/ints naming the consumer and work item). Streams are
numpy PCG64 generators keyed through SeedSequence, so results are identical
across platforms, process counts, and evaluation orders.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.sha256(str(part).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_rng(master_seed: int, *path) -> np.random.Generator:
    """Generator for stream (master_seed, *path); stable across runs/platforms."""
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF] + [_key(p) for p in path]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
