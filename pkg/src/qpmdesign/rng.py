"""Counter-based random streams for reproducible, order-independent runs.

Every stream is identified by an integer path, e.g. ``(seed, generation,
individual)``.  The key for a path is derived by folding the components
through splitmix64, and value ``i`` of a stream depends only on
``(key, i)``, never on how earlier values were consumed.  Two consequences:

* a run is bit-reproducible from its seed alone, and
* results cannot depend on the order in which parallel workers happen to
  evaluate individuals, because workers never draw random numbers.

The generator is splitmix64 applied to an incrementing counter; doubles are
the top 53 bits scaled to [0, 1).
"""

import numpy as np

from . import _kernels

_MASK64 = (1 << 64) - 1
_GOLD = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def fold_key(seed: int, *path: int) -> int:
    """Derive a 64-bit stream key from a seed and an integer path."""
    h = _mix(seed & _MASK64)
    for p in path:
        h = _mix((h + _GOLD + (p & _MASK64)) & _MASK64)
    return h


class CounterStream:
    """Sequential view over one keyed counter stream.

    ``uniforms(n)`` returns the next n doubles in [0, 1); ``randint(bound)``
    maps one double to an integer in [0, bound).  The draw position is the
    only mutable state.
    """

    __slots__ = ("key", "_pos")

    def __init__(self, seed: int, *path: int):
        self.key = fold_key(seed, *path)
        self._pos = 0

    def uniforms(self, n: int) -> np.ndarray:
        out = _kernels.uniform_fill(self.key, self._pos, n)
        self._pos += n
        return out

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def randint(self, bound: int) -> int:
        """One integer uniform over [0, bound)."""
        return min(int(self.uniform() * bound), bound - 1)

    def randints(self, n: int, bound: int) -> np.ndarray:
        u = self.uniforms(n)
        return np.minimum((u * bound).astype(np.int64), bound - 1)


def stream(seed: int, *path: int) -> CounterStream:
    return CounterStream(seed, *path)
