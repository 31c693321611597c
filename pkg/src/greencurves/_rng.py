"""Deterministic named random streams derived from a single scenario seed."""

import zlib

import numpy as np


def seed_stream(seed: int, name: str) -> np.random.Generator:
    """Return a generator for the named stream of a master seed.

    Distinct names give statistically independent streams; the same
    (seed, name) pair always gives the identical stream, so results are
    reproducible even when modules draw in different orders.
    """
    tag = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, tag]))
