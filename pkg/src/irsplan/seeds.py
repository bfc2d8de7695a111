"""Named substreams of the master seed.

Every random draw in the package goes through a substream keyed by
(master_seed, stream tag, indices...), so results are reproducible and
statistically independent across uses.  Fading draws additionally run in
fixed-size chunks with one substream per chunk, and element draws are laid
out with the element axis first, which makes a surface of N' < N elements
consume exactly the first N' elements' variates of the N-element stream
(common random numbers across element-count sweeps and splits).
"""

from __future__ import annotations

import numpy as np

STREAM_HEIGHTS = 1  # building heights of a generated layout
STREAM_UES = 2      # street-level UE placement
STREAM_FADING = 3   # per-(ue, spot) fading legs
STREAM_DIRECT = 4   # AP-only baseline fading

CHUNK = 512  # fading samples per substream chunk

LEG_DIRECT = 0
LEG_AP_IRS = 1
LEG_IRS_UE = 2


def substream(*path: int) -> np.random.Generator:
    """Generator seeded by an integer path, e.g. (master, tag, u, m)."""
    return np.random.default_rng(list(path))
