"""Counter-based random streams keyed by (seed, stream index).

Each stream wraps a Philox generator whose 128-bit key is the pair
(seed, stream), so streams are independent of each other and of the order in
which they are consumed.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


class RngStream:
    def __init__(self, seed: int = 0, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        self._gen = np.random.Generator(np.random.Philox(key=self.seed | (self.stream << 64)))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def child(self, index: int) -> "RngStream":
        """Derived stream for sub-task ``index``; does not consume draws from self."""
        h = hashlib.blake2b(digest_size=8)
        h.update(self.stream.to_bytes(8, "little"))
        h.update((int(index) & _MASK64).to_bytes(8, "little"))
        return RngStream(self.seed, int.from_bytes(h.digest(), "little"))

    def uniform(self, size=None):
        return self._gen.random(size)

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def choice(self, probs: np.ndarray, size=None):
        """Indices drawn from the categorical distribution ``probs``."""
        cdf = np.cumsum(probs)
        cdf /= cdf[-1]
        u = self._gen.random(size)
        return np.searchsorted(cdf, u, side="right")

    def multinomial(self, n: int, probs: np.ndarray) -> np.ndarray:
        p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
        return self._gen.multinomial(n, p / p.sum())
