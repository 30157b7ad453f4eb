"""Deterministic, portable random number generation.

Experiments must reproduce bit-identically across runs and across language
ports, so this module pins a concrete generator algorithm rather than
delegating to library defaults: xoshiro256** (Blackman & Vigna), seeded
through splitmix64. Both are public-domain algorithms; reimplementing
them from the published reference takes ~40 lines and removes any
dependence on interpreter version or numpy's Generator internals.

Independent experiment streams are derived by hashing a human-readable
key (experiment id, seed, purpose) with SHA-256 and using the first
8 bytes as the generator seed. Streams for different purposes are
therefore decoupled: drawing more numbers in one never shifts another.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1
_INV_2_53 = 2.0 ** -53


def _splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (output, next_state)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)), state


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** generator with splitmix64 state expansion.

    Reference update (Blackman & Vigna, 2018): output is
    rotl(s1 * 5, 7) * 9 computed before the state transition. The
    64-bit seed is expanded to the four state words by four splitmix64
    steps, which also guarantees a nonzero state.
    """

    __slots__ = ("_s0", "_s1", "_s2", "_s3", "_gauss")

    def __init__(self, seed: int):
        state = seed & _MASK64
        words = []
        for _ in range(4):
            w, state = _splitmix64(state)
            words.append(w)
        self._s0, self._s1, self._s2, self._s3 = words
        self._gauss: float | None = None

    @classmethod
    def from_state(cls, s0: int, s1: int, s2: int, s3: int) -> "Xoshiro256StarStar":
        gen = cls(0)
        gen._s0, gen._s1, gen._s2, gen._s3 = (
            s0 & _MASK64, s1 & _MASK64, s2 & _MASK64, s3 & _MASK64)
        gen._gauss = None
        return gen

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def random(self) -> float:
        """Uniform float64 in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def uniforms(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        return np.array([self.uniform(lo, hi) for _ in range(n)], dtype=np.float64)

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Gaussian draw via Box-Muller; caches the paired deviate."""
        if self._gauss is not None:
            z = self._gauss
            self._gauss = None
        else:
            u1 = 1.0 - self.random()  # (0, 1]: keeps log() finite
            u2 = self.random()
            r = np.sqrt(-2.0 * np.log(u1))
            z = r * np.cos(2.0 * np.pi * u2)
            self._gauss = r * np.sin(2.0 * np.pi * u2)
        return mu + sigma * z

    def normals(self, n: int, mu: float = 0.0, sigma: float = 1.0) -> np.ndarray:
        return np.array([self.normal(mu, sigma) for _ in range(n)], dtype=np.float64)

    def integers(self, lo: int, hi: int) -> int:
        """Unbiased integer in [lo, hi) by rejection sampling."""
        if hi <= lo:
            raise ValueError(f"empty integer range [{lo}, {hi})")
        span = hi - lo
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            v = self.next_u64()
            if v < limit:
                return lo + (v % span)

    def shuffle(self, items) -> None:
        """In-place Fisher-Yates shuffle of a list or 1-d array."""
        for i in range(len(items) - 1, 0, -1):
            j = self.integers(0, i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> np.ndarray:
        out = np.arange(n)
        self.shuffle(out)
        return out


def substream_seed(experiment_id: str, seed: int, purpose: str) -> int:
    """64-bit seed for an independent named stream.

    SHA-256 over "<experiment_id>|<seed>|<purpose>", big-endian first
    8 bytes. Stable across platforms and languages by construction.
    """
    key = f"{experiment_id}|{seed}|{purpose}".encode("utf-8")
    digest = hashlib.sha256(key).digest()
    return int.from_bytes(digest[:8], "big")


def substream(experiment_id: str, seed: int, purpose: str) -> Xoshiro256StarStar:
    return Xoshiro256StarStar(substream_seed(experiment_id, seed, purpose))
