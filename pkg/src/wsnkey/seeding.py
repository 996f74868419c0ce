"""Deterministic random sub-streams.

Every random draw in the simulator comes from a stream keyed by
``(master seed, purpose tag, *ids)``.  Adding a new purpose never perturbs
the draws of an existing one.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _tag_key(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def seed_sequence(seed: int, tag: str, *ids: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed) & _MASK64, spawn_key=(_tag_key(tag), *map(int, ids)))


def substream(seed: int, tag: str, *ids: int) -> np.random.Generator:
    """Return an independent generator for one purpose (and optional ids)."""
    return np.random.default_rng(seed_sequence(seed, tag, *ids))


def derive_seed(seed: int, tag: str, *ids: int) -> int:
    """Derive a child 64-bit seed, e.g. one per replicated run."""
    state = seed_sequence(seed, tag, *ids).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)
