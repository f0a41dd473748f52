"""Per-trial random streams keyed by ``(master_seed, stream_index)``.

Each stream is a Philox counter-based generator whose key is derived from a
``SeedSequence`` over the seed and the index, so stream ``k`` never depends
on how many other streams were drawn or in which order.
"""

from dataclasses import dataclass

import numpy as np

TRIALS = 0
BOOTSTRAP = 1


@dataclass(frozen=True)
class RandomStream:
    master_seed: int
    stream_index: int
    domain: int = TRIALS

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.stream_index < 0:
            raise ValueError(f"stream_index must be non-negative, got {self.stream_index}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.domain, self.stream_index))
        return np.random.Generator(np.random.Philox(seq))
