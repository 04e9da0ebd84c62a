"""Seeded, platform-portable random streams.

Only PCG64's raw 64-bit output is consumed; doubles and normals are derived
here (53-bit mantissa construction, Box-Muller), so draws do not depend on
numpy's distribution code and are stable across platforms and versions.
"""

import numpy as np

_INV_2_53 = 1.0 / 9007199254740992.0


class Stream:
    """A PCG64 stream; ``substream(i)`` derives independent child streams."""

    def __init__(self, seed, key=()):
        self.seed = int(seed)
        self.key = tuple(key)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self._bits = np.random.PCG64(ss)

    def substream(self, i):
        return Stream(self.seed, self.key + (int(i),))

    def uniform(self, size):
        """Doubles in [0, 1)."""
        raw = self._bits.random_raw(int(np.prod(size)))
        return ((raw >> np.uint64(11)).astype(np.float64) * _INV_2_53).reshape(size)

    def normal(self, size):
        """Standard normals by Box-Muller, consuming two uniforms per pair."""
        n = int(np.prod(size))
        half = (n + 1) // 2
        u1 = 1.0 - self.uniform(half)       # (0, 1]: log is finite
        u2 = self.uniform(half)
        r = np.sqrt(-2.0 * np.log(u1))
        z = np.empty(2 * half)
        z[0::2] = r * np.cos(2.0 * np.pi * u2)
        z[1::2] = r * np.sin(2.0 * np.pi * u2)
        return z[:n].reshape(size)
