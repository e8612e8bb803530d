"""Seeded random streams.

All randomness in the package flows through Philox4x64 counter-based
generators (numpy's ``Philox`` bit generator).  A stream is identified by a
64-bit master seed plus a small integer stream index, so independent
subsystems (node sampling, random-scene generation, ...) can draw from
non-overlapping streams that reproduce bit-exactly from the scenario seed.
"""

from __future__ import annotations

import numpy as np

# Stream indices used by the package. Keep stable: changing them changes
# every seeded artifact.
STREAM_WALK_SAMPLER = 1
STREAM_FLY_SAMPLER = 2
STREAM_SCENE = 3


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Return the Philox stream ``index`` for a 64-bit master ``seed``."""
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if not 0 <= int(index) < 2**64:
        raise ValueError(f"stream index must be a 64-bit unsigned integer, got {index}")
    # Philox keys are 128-bit; (seed, index) pairs never collide.
    return np.random.Generator(np.random.Philox(key=(int(seed), int(index))))


def split(rng_seed: int, index: int, n: int) -> list[np.random.Generator]:
    """Split stream ``index`` into ``n`` independent child streams."""
    # Children live in a disjoint index region keyed off the parent index.
    base = (int(index) + 1) * 0x9E3779B97F4A7C15 % 2**64
    return [stream(rng_seed, (base + k) % 2**64) for k in range(n)]
