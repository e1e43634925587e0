"""Deterministic sub-seed derivation.

Every random stream descends from one master seed. A sub-seed is the first
64-bit word of ``SeedSequence(master, spawn_key=keys)``; string keys are
mapped through CRC-32 so names like ``"rf"`` or ``"split"`` are stable
across processes and platforms.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(k) -> int:
    if isinstance(k, str):
        return zlib.crc32(k.encode("utf-8"))
    return int(k)


def derive_seed(master: int, *keys) -> int:
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(_key(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_for(master: int, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, *keys))
