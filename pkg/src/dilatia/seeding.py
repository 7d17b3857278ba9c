"""Deterministic RNG derivation: one root seed, one child stream per label.

Splitting by a stable hash of the label keeps sweeps reproducible from
(spec, seed) alone, independent of the order checks run in.
"""

import zlib

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF


def child_seed(seed: int, label: str) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed) & _MASK, zlib.crc32(label.encode("utf-8"))])


def child_rng(seed: int, label: str) -> np.random.Generator:
    """RNG reproducible from (seed, label), independent of call order."""
    return np.random.default_rng(child_seed(seed, label))
