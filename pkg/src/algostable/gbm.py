"""Exact-scheme geometric Brownian motion with per-path counter-based seeding.

Every path owns its own random stream, derived from ``(master_seed,
path_index)``. The stream is a SplitMix64 sequence: the k-th 64-bit word of a
stream with key ``K`` is ``mix64(K + (k + 1) * GAMMA)``. The path key itself is
the ``path_index``-th word of the SplitMix64 sequence seeded at
``mix64(master_seed)``. Normals come from Box-Muller on consecutive word pairs,
cosine branch first, so normal ``j`` uses words ``2*(j//2)`` and ``2*(j//2)+1``.

Because a path depends on nothing but its own key, generating paths one at a
time, in blocks, or across processes yields bit-identical numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import MarketParams

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB
_INV53 = 2.0**-53
_TWO_PI = 2.0 * np.pi


def _check_u64(name: str, value) -> int:
    value = int(value)
    if not 0 <= value <= MASK64:
        raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
    return value


@dataclass(frozen=True)
class PathSeed:
    master_seed: int
    path_index: int

    def __post_init__(self):
        object.__setattr__(self, "master_seed", _check_u64("master_seed", self.master_seed))
        object.__setattr__(self, "path_index", _check_u64("path_index", self.path_index))

    @property
    def key(self) -> int:
        return path_key(self.master_seed, self.path_index)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _C1) & MASK64
    z = ((z ^ (z >> 27)) * _C2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps modulo 2**64
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_C1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_C2)
    return z ^ (z >> np.uint64(31))


def path_key(master_seed: int, path_index: int) -> int:
    base = mix64(master_seed)
    return mix64(base + (path_index + 1) * GAMMA)


def _path_keys(master_seed: int, start: int, count: int) -> np.ndarray:
    base = np.uint64(mix64(master_seed))
    idx = np.arange(start, start + count, dtype=np.uint64) + np.uint64(1)
    return _mix64_array(base + idx * np.uint64(GAMMA))


def _words(keys: np.ndarray, count: int) -> np.ndarray:
    """First ``count`` stream words for each key, shape ``(len(keys), count)``."""
    k = np.arange(1, count + 1, dtype=np.uint64)
    return _mix64_array(keys[:, None] + k[None, :] * np.uint64(GAMMA))


def _normals_from_words(words: np.ndarray, count: int) -> np.ndarray:
    u1 = 1.0 - (words[:, 0::2] >> np.uint64(11)).astype(np.float64) * _INV53  # (0, 1]
    u2 = (words[:, 1::2] >> np.uint64(11)).astype(np.float64) * _INV53
    r = np.sqrt(-2.0 * np.log(u1))
    theta = _TWO_PI * u2
    out = np.empty((words.shape[0], 2 * u1.shape[1]))
    out[:, 0::2] = r * np.cos(theta)
    out[:, 1::2] = r * np.sin(theta)
    return out[:, :count]


def standard_normals(master_seed: int, start: int, n_paths: int, count: int) -> np.ndarray:
    """Normals for paths ``start .. start+n_paths-1``, ``count`` per path."""
    _check_u64("master_seed", master_seed)
    keys = _path_keys(master_seed, start, n_paths)
    n_words = 2 * ((count + 1) // 2)
    return _normals_from_words(_words(keys, n_words), count)


class PathStream:
    """Random stream of one path. Each call restarts from the stream origin."""

    def __init__(self, master_seed: int, path_index: int):
        self.seed = PathSeed(master_seed, path_index)
        self._key = np.array([self.seed.key], dtype=np.uint64)

    def words(self, count: int) -> np.ndarray:
        return _words(self._key, count)[0]

    def uniforms(self, count: int) -> np.ndarray:
        return (self.words(count) >> np.uint64(11)).astype(np.float64) * _INV53

    def normals(self, count: int) -> np.ndarray:
        n_words = 2 * ((count + 1) // 2)
        return _normals_from_words(_words(self._key, n_words), count)[0]


def derive_stream(master_seed: int, path_index: int) -> PathStream:
    return PathStream(master_seed, path_index)


def caps_from_normals(m: MarketParams, z: np.ndarray) -> np.ndarray:
    """Apply Y[t+1] = Y[t] * exp(mu - sigma^2/2 + sigma*Z[t]) along the last axis."""
    z = np.atleast_2d(z)
    growth = np.exp((m.mu - 0.5 * m.sigma**2) + m.sigma * z)
    steps = np.empty((z.shape[0], z.shape[1] + 1))
    steps[:, 0] = m.y0
    steps[:, 1:] = growth
    # cumprod is a left-to-right running product, i.e. the recursion itself
    return np.cumprod(steps, axis=1)


def generate_cap_paths(m: MarketParams, master_seed: int, start: int, count: int) -> np.ndarray:
    """Market-cap paths for path indices ``start .. start+count-1``.

    Returns an array of shape ``(count, m.n + 1)``; row ``i`` is identical to
    ``generate_cap_path(m, PathSeed(master_seed, start + i))``.
    """
    z = standard_normals(master_seed, start, count, m.n)
    return caps_from_normals(m, z)


def generate_cap_path(m: MarketParams, seed: PathSeed) -> np.ndarray:
    return generate_cap_paths(m, seed.master_seed, seed.path_index, 1)[0]
