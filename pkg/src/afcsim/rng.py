"""Counter-based per-trial random substreams.

Trial ``i`` of a run seeded with ``seed`` draws from Philox4x64-10 with key
``seed`` and initial counter ``(0, 0, 0, i)``. Streams advance the low
counter words only, so distinct trials never overlap, and a trial's numbers
do not depend on how trials are scheduled across workers.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

GENERATOR_NAME = "numpy.random.Philox(key=seed, counter=(0, 0, 0, trial))"
MAX_SEED = 2**64 - 1


def check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed <= MAX_SEED:
        raise ConfigError(f"seed must be an integer in [0, 2**64), got {seed!r}", "seed")
    return int(seed)


def substream(seed: int, trial: int) -> np.random.Philox:
    """Bit generator for one trial."""
    if trial < 0:
        raise ValueError("trial index must be non-negative")
    return np.random.Philox(key=check_seed(seed), counter=[0, 0, 0, int(trial)])


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(substream(seed, trial))
