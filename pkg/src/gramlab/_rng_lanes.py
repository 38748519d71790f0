"""Named sub-lanes of the per-trial streams (direction grids, plug-ins)
so auxiliary draws never collide with the scenario's own stream."""

from __future__ import annotations

import numpy as np

from ._rng import splitmix64, stream_seed

LANE_GRID = 0x67726964  # "grid"
LANE_PLUGIN = 0x706C7567  # "plug"


def lane_rng(root: int, trial: int, lane: int) -> np.random.Generator:
    return np.random.default_rng(splitmix64(stream_seed(root, trial) ^ splitmix64(lane)))
