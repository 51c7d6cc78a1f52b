"""Deterministic stream derivation for common-random-numbers experiments.

Every random stream is addressed by a string path hashed into a
SeedSequence spawn key, so streams are statistically independent and stable
across runs, platforms and parallelism levels.  Streams addressed without a
method or restart (activity, error channel, probability draw) are shared by
all methods within a repetition, which is what makes method comparisons
paired.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_rng(master_seed: int, *path) -> np.random.Generator:
    """Independent generator for the stream addressed by ``path``."""
    text = "/".join(str(part) for part in path)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    words = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 32, 4))
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=words))


def seed_plan(master_seed: int, repetition: int, method: str | None = None,
              restart: int | None = None,
              stream: str = "activity") -> np.random.Generator:
    """Stream for one (repetition, method, restart) slot of an experiment.

    Omitting ``method`` and ``restart`` addresses repetition-level streams
    (true activity, error channel), identical for every method.
    """
    path = [f"rep={repetition}"]
    if method is not None:
        path.append(f"method={method}")
    if restart is not None:
        path.append(f"restart={restart}")
    path.append(stream)
    return derive_rng(master_seed, *path)
