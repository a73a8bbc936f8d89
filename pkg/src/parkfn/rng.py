"""Seeded counter-based random streams.

Every stream is a Philox generator keyed by ``(seed, stream_id)``, so chunk
``i`` of a Monte Carlo run draws the same numbers no matter how many worker
threads process the chunks.
"""

from __future__ import annotations

import os

import numpy as np

RandomStream = np.random.Generator


def random_stream(seed: int, stream_id: int = 0) -> RandomStream:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(ss))


def thread_count() -> int:
    env = os.environ.get("PARKFN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1
