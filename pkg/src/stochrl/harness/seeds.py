"""Counter-based seed derivation.

One master seed per (run, repetition) fans out into named, statistically
independent generator streams.  Each consumer owns a stream, so toggling
the agent variant or switching diagnostics on and off never perturbs the
randomness seen by the others (environment noise in particular).
"""

from __future__ import annotations

import numpy as np

STREAMS = {
    "env": 0,
    "explore": 1,
    "select": 2,
    "update": 3,
    "memory": 4,
    "batch": 5,
    "init": 6,
    "coin": 7,
    "diag": 8,
}


def stream_rng(master_seed: int, name: str) -> np.random.Generator:
    """Generator for one named stream under the given master seed."""
    try:
        counter = STREAMS[name]
    except KeyError:
        raise ValueError(f"unknown stream {name!r}; expected one of {sorted(STREAMS)}") from None
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(counter,))
    return np.random.Generator(np.random.PCG64(seq))


def all_streams(master_seed: int) -> dict[str, np.random.Generator]:
    return {name: stream_rng(master_seed, name) for name in STREAMS}
