"""Counter-based RNG streams keyed by ``(master seed, job index)``."""

from __future__ import annotations

import numpy as np


def job_generator(master_seed: int, job_index: int) -> np.random.Generator:
    """Independent Philox stream for one job; scheduling order never matters."""
    if master_seed < 0 or job_index < 0:
        raise ValueError("seeds and job indices must be non-negative")
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(job_index),))
    return np.random.Generator(np.random.Philox(seq))
