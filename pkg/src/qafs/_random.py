"""Portable splitmix64 pseudorandom streams.

Every random draw in the package goes through this generator so results are
bit-reproducible across platforms and numpy versions. splitmix64 is
counter-based: draw ``i`` of a stream seeded with ``s`` is
``mix(s + (i + 1) * GAMMA)`` (all arithmetic mod 2**64), which lets the
vectorized numpy path and the scalar numba path agree exactly.
"""

from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1

_U53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int | str) -> int:
    """Derive an independent 64-bit seed from ``seed`` and a path of keys.

    String keys are folded in byte by byte, so derivation does not depend on
    Python's randomized ``hash``.
    """
    s = mix64(seed & MASK64)
    for key in keys:
        if isinstance(key, str):
            for b in key.encode("utf-8"):
                s = mix64(s ^ b)
        else:
            s = mix64(s ^ (int(key) & MASK64))
    return s


def _mix_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
    return z ^ (z >> np.uint64(31))


def raw_stream(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Draws ``offset .. offset+n-1`` of the stream as uint64."""
    counter = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & MASK64) + counter * np.uint64(GAMMA)
        return _mix_array(z)


class PortableRandom:
    """Sequential consumer of one splitmix64 stream.

    Mirrors the handful of ``numpy.random.Generator`` methods the package
    needs. Draws are taken in order, so the same sequence of calls always
    yields the same values.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self._offset = 0

    def _raw(self, n: int) -> np.ndarray:
        out = raw_stream(self.seed, n, self._offset)
        self._offset += n
        return out

    def random(self, size: int | None = None):
        n = 1 if size is None else int(size)
        u = (self._raw(n) >> np.uint64(11)).astype(np.float64) * _U53
        return float(u[0]) if size is None else u

    def normal(self, loc=0.0, scale=1.0, size: int | None = None):
        n = 1 if size is None else int(size)
        m = (n + 1) // 2
        u1 = 1.0 - self.random(m)  # (0, 1]
        u2 = self.random(m)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.concatenate([r * np.cos(2 * np.pi * u2), r * np.sin(2 * np.pi * u2)])[:n]
        z = loc + scale * z
        return float(z[0]) if size is None else z

    def exponential(self, scale=1.0, size: int | None = None):
        n = 1 if size is None else int(size)
        e = -np.log(1.0 - self.random(n)) * scale
        return float(e[0]) if size is None else e

    def integers(self, high: int, size: int | None = None):
        """Uniform integers in ``[0, high)``."""
        n = 1 if size is None else int(size)
        v = np.floor(self.random(n) * high).astype(np.int64)
        np.minimum(v, high - 1, out=v)
        return int(v[0]) if size is None else v

    def bits(self, size: int) -> np.ndarray:
        """Fair bits taken from the top bit of each draw."""
        return (self._raw(size) >> np.uint64(63)).astype(np.int8)

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of ``arange(n)``."""
        perm = np.arange(n)
        if n < 2:
            return perm
        u = self.random(n - 1)
        for k, i in enumerate(range(n - 1, 0, -1)):
            j = min(int(u[k] * (i + 1)), i)
            perm[i], perm[j] = perm[j], perm[i]
        return perm
