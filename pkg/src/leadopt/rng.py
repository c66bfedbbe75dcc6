"""Seeded, replayable randomness.

Every source of randomness in the package is a counter-based Philox
stream addressed by (seed, path).  Child streams are derived from the
path alone, so an asynchronous schedule can hand out independent
streams without any hidden global state, and two runs with the same
seed produce bit-identical draws on every platform.
"""

import numpy as np

ALGORITHM = "philox4x64"


class Rng:
    """A single-owner random stream.

    Streams are never shared between workers: each consumer gets its
    own `Rng` via `child()`, keyed by a small integer path.
    """

    def __init__(self, seed, path=()):
        self.seed = int(seed)
        self.path = tuple(int(p) for p in path)
        self.algorithm = ALGORITHM
        # The path goes in spawn_key, not entropy: SeedSequence mixes
        # entropy words into a zero pool, so trailing-zero paths like
        # (seed,) and (seed, 0) would otherwise collide.
        seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
        self.gen = np.random.Generator(np.random.Philox(seq))

    def child(self, *path):
        """Derive an independent stream addressed by `path`."""
        return Rng(self.seed, self.path + path)

    def standard_normal(self, size=None):
        return self.gen.standard_normal(size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.gen.normal(loc, scale, size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self.gen.integers(low, high, size=size)

    def choice_weighted(self, n, weights):
        """Pick an index in [0, n) with the given positive weights."""
        w = np.asarray(weights, dtype=np.float64)
        return int(self.gen.choice(n, p=w / w.sum()))

    def __repr__(self):
        return f"Rng(seed={self.seed}, path={self.path})"
