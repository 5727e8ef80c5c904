"""Named, splittable random streams.

Every stream is a Philox generator keyed by ``(seed, purpose, *indices)`` through
``numpy.random.SeedSequence``, so any sub-stream (one HIT, one sweep point) can be
rebuilt directly without replaying the others.
"""

from __future__ import annotations

import numpy as np

RNG_VERSION = "philox4x64-seedseq-v1"

# Stable integer tags; changing these changes every derived stream.
PURPOSES = {
    "workload": 0,
    "answers": 1,
    "decisions": 2,
    "gold": 3,
    "quality": 4,
    "assign": 5,
}


def stream(seed: int, purpose: str, *indices: int) -> np.random.Generator:
    """Return the generator for ``purpose`` at ``indices`` under ``seed``."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    key = (PURPOSES[purpose], *(int(i) for i in indices))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))
