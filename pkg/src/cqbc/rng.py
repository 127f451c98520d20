"""Deterministic random substream derivation.

Every stochastic routine in the package takes an explicit numpy Generator.
Substreams are derived from a master seed plus an integer path, so any
sequence/slot/photon is replayable in isolation and independent runs can be
executed in parallel without shared state.
"""

from __future__ import annotations

import numpy as np

# Fixed documented default seed for CLI reproducibility.
DEFAULT_SEED = 1


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Return an independent Generator keyed by (master_seed, *path).

    The path is an arbitrary tuple of non-negative integers, e.g.
    (sequence index, slot index, photon index).
    """
    return np.random.default_rng(np.random.SeedSequence((master_seed, *path)))
