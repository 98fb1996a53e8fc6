"""Deterministic random streams.

Every stochastic computation in the package draws from :class:`Rng`, which
wraps a numpy PCG64 bit generator but consumes it only through ``random()``
and ``integers()``. Permutations, subset draws, signs and exponential
variates are derived from those two primitives (Fisher-Yates, inverse CDF),
so the draw sequence is frozen by this module alone and identical runs are
bit-reproducible across platforms. Chain ``i`` of a multi-chain fit uses the
stream seeded with ``seed ^ i``.
"""

import math

import numpy as np


class Rng:
    """A seeded stream of reproducible draws."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def spawn(self, index: int) -> "Rng":
        """Independent stream for worker `index` (seed XOR index)."""
        return Rng(self.seed ^ index)

    def random(self) -> float:
        """Uniform draw in [0, 1)."""
        return float(self._gen.random())

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, n: int) -> int:
        """Uniform integer in 0..n-1."""
        return int(self._gen.integers(0, n))

    def sign(self) -> int:
        """Uniform draw from {+1, -1}."""
        return 1 if self.randint(2) == 0 else -1

    def exponential(self, rate: float) -> float:
        """Exponential variate by inverse CDF (one uniform consumed)."""
        return -math.log1p(-self.random()) / rate

    def permutation(self, n: int) -> list[int]:
        """Fisher-Yates permutation of 0..n-1 (n-1 integer draws)."""
        out = list(range(n))
        for i in range(n - 1):
            j = i + self.randint(n - i)
            out[i], out[j] = out[j], out[i]
        return out

    def sample_indices(self, n: int, k: int) -> list[int]:
        """Ordered sample of k distinct indices from 0..n-1 (partial Fisher-Yates)."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot sample {k} from {n}")
        pool = list(range(n))
        for i in range(k):
            j = i + self.randint(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
