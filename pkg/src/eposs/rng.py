"""Deterministic seed derivation and counter-based per-run streams."""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(*parts: int | float | str) -> int:
    """Mix ints, floats, and strings into a reproducible 64-bit seed."""
    entropy: list[int] = []
    for p in parts:
        if isinstance(p, str):
            entropy.append(zlib.crc32(p.encode()))
        elif isinstance(p, float):
            entropy.append(int(round(p * 1_000_000_000)) & _MASK64)
        else:
            entropy.append(int(p) & _MASK64)
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def run_stream(seed: int, run_index: int) -> np.random.Generator:
    """Independent generator for one simulation run.

    Streams are counter-split, so any partition of runs into chunks (or
    across workers) draws identical values run-for-run.
    """
    bg = np.random.Philox(key=seed & _MASK64, counter=run_index << 128)
    return np.random.Generator(bg)
