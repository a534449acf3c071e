"""
Deterministic random sub-streams derived from a single 64-bit seed.
"""

from __future__ import annotations

import numpy as np

from core.errors import ContractError

# 每个子流的固定 spawn key，新增子流只能追加
STREAMS = {
    "generator": 0,
    "split": 1,
    "init": 2,
    "batching": 3,
    "probe": 4,
    "baseline": 5,
}

SEED_MASK = (1 << 64) - 1


def substream(seed: int, name: str) -> np.random.Generator:
    """Return the generator of stream ``name`` for ``seed``."""
    if name not in STREAMS:
        raise ContractError(f"Unknown random stream: {name}")
    sequence = np.random.SeedSequence(entropy=int(seed) & SEED_MASK, spawn_key=(STREAMS[name],))
    return np.random.default_rng(sequence)
