"""Seeded, splittable random streams.

Every random draw in the package goes through an :class:`RngStream`, a
``(seed, stream_id)`` key that expands into independent numpy generators via
``SeedSequence`` spawn keys. Work split into blocks or trials derives one
child stream per unit, so results do not depend on how the work is scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.stream_id) < 0:
            raise ValueError("stream_id must be non-negative")

    def child(self, *index: int) -> "RngStream":
        """Stream for a sub-unit of work (block, trial, trajectory...)."""
        return RngStream(self.seed, self.stream_id, self.path + tuple(int(i) for i in index))

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),) + self.path)

    def generator(self) -> np.random.Generator:
        """A fresh generator; calling twice gives two identical sequences."""
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))


RngLike = Union[RngStream, np.random.Generator, int]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return RngStream(int(rng)).generator()
