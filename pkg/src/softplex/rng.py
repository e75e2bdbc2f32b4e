"""Deterministic seeding, stream derivation, and stateless per-item coins.

Every random quantity in the package is pinned to explicit 64-bit seeds.
Derived streams come from a splitmix64-style mixer, so replications can be
executed in any order (or concurrently) and still reproduce bit-identical
results.  Per-face retention coins are *stateless*: the uniform attached to
a face depends only on (seed, dimension, vertex tuple), never on enumeration
order, which gives monotone coupling of thinned complexes across retention
vectors that share a seed.
"""

from __future__ import annotations

import numpy as np

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB
_INV_2_53 = 2.0 ** -53

# stream tags, kept distinct so sub-streams of one seed never collide
POINT_STREAM = 1
COUNT_STREAM = 2
EDGE_COIN_STREAM = 3
FACE_COIN_STREAM = 4
REPLICATION_STREAM = 5
MC_OUTER_STREAM = 6
MC_INNER_STREAM = 7


def _mix(x: int) -> int:
    """splitmix64 finalizer on a python int, masked to 64 bits."""
    x &= _MASK
    x = (x ^ (x >> 30)) * _MULT1 & _MASK
    x = (x ^ (x >> 27)) * _MULT2 & _MASK
    return x ^ (x >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Hash (seed, *path) into a single 64-bit stream key."""
    h = _mix(int(seed) & _MASK)
    for part in path:
        h = _mix((h + _GOLDEN + _mix(int(part) & _MASK)) & _MASK)
    return h


def generator(seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator for the derived stream (Philox keyed by hash)."""
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, *path)))


def standard_normals(rng: np.random.Generator, count: int) -> np.ndarray:
    """Box-Muller normals driven by the uniform stream of ``rng``."""
    pairs = (count + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log1p(-u1))  # 1-u1 in (0,1], log finite
    angle = 2.0 * np.pi * u2
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
    return z[:count]


def _vector_mix(h: np.ndarray) -> np.ndarray:
    h = (h ^ (h >> np.uint64(30))) * np.uint64(_MULT1)
    h = (h ^ (h >> np.uint64(27))) * np.uint64(_MULT2)
    return h ^ (h >> np.uint64(31))


def uniform_coins(seed: int, items: np.ndarray) -> np.ndarray:
    """One uniform in [0, 1) per row of ``items``, a function of values only.

    ``items`` is an integer array of shape (m,) or (m, w); rows with equal
    values always map to equal uniforms for a fixed seed.
    """
    items = np.asarray(items)
    if items.ndim == 1:
        items = items[:, None]
    h = np.full(items.shape[0], derive_seed(seed), dtype=np.uint64)
    golden = np.uint64(_GOLDEN)
    for col in range(items.shape[1]):
        h = _vector_mix(h + golden + _vector_mix(items[:, col].astype(np.uint64)))
    return (h >> np.uint64(11)).astype(np.float64) * _INV_2_53
