"""Portable seeded random streams.

Every stream is the raw 64-bit output of Philox4x64-10 keyed by
``(seed, stream)``, with the counter starting at zero.  Distributions are
derived from the raw words here rather than through ``numpy.random.Generator``
so that another implementation of Philox can reproduce them exactly:

* uniform in [0, 1):  ``(w >> 11) * 2**-53``
* uniform in (0, 1]:  ``((w >> 11) + 1) * 2**-53``
* standard normal:    Box-Muller on consecutive word pairs ``(w1, w2)``,
  giving ``r*cos(t)`` then ``r*sin(t)`` with ``r = sqrt(-2 ln u1)``,
  ``u1`` from ``w1`` in (0, 1] and ``t = 2*pi*u2``, ``u2`` from ``w2`` in [0, 1)
* bounded integer in [0, k): ``floor(u * k)`` with ``u`` uniform in [0, 1)
"""
import numpy as np

ALGORITHM = "philox4x64-10/v1"

_MASK64 = (1 << 64) - 1
_TWO_M53 = 2.0 ** -53


class Stream:
    """Sequential draws from one keyed Philox stream."""

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        self._bits = np.random.Philox(key=[self.seed, self.stream])

    def raw(self, size: int) -> np.ndarray:
        return self._bits.random_raw(int(size)).astype(np.uint64, copy=False)

    def uniform(self, shape=()) -> np.ndarray:
        size = int(np.prod(shape, dtype=np.int64))
        words = self.raw(size)
        return ((words >> np.uint64(11)).astype(np.float64) * _TWO_M53).reshape(shape)

    def normal(self, shape=()) -> np.ndarray:
        size = int(np.prod(shape, dtype=np.int64))
        pairs = (size + 1) // 2
        words = self.raw(2 * pairs).reshape(pairs, 2)
        top = words >> np.uint64(11)
        u1 = (top[:, 0].astype(np.float64) + 1.0) * _TWO_M53
        u2 = top[:, 1].astype(np.float64) * _TWO_M53
        radius = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        out = np.empty((pairs, 2))
        out[:, 0] = radius * np.cos(theta)
        out[:, 1] = radius * np.sin(theta)
        return out.ravel()[:size].reshape(shape)

    def integers(self, bounds) -> np.ndarray:
        """One draw in [0, b) for every b in ``bounds``."""
        bounds = np.asarray(bounds, dtype=np.int64)
        u = self.uniform(bounds.shape)
        return np.minimum(np.floor(u * bounds).astype(np.int64), bounds - 1)

    def sample_without_replacement(self, population: int, k: int) -> np.ndarray:
        """``k`` distinct indices from ``range(population)`` by partial Fisher-Yates."""
        if not 0 <= k <= population:
            raise ValueError(f"cannot draw {k} items from {population}")
        pool = np.arange(population, dtype=np.int64)
        offsets = self.integers(population - np.arange(k, dtype=np.int64))
        for i in range(k):
            j = i + offsets[i]
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k].copy()
