"""Index arithmetic for generating pairs out of grouped, sorted arrays.

These helpers are the vectorized core of the grid neighbor search and the
clique join: given group boundaries inside a sorted array they emit all
within-group index pairs (i < j) or all cross-group index pairs without a
Python-level loop over elements.
"""

from __future__ import annotations

import numpy as np

_EMPTY_PAIR = (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))


def pairs_within_groups(starts: np.ndarray, counts: np.ndarray):
    """All position pairs (i, j), i < j, inside each contiguous group.

    ``starts[g]`` is the first position of group g and ``counts[g]`` its
    size; positions are returned relative to the underlying sorted array.
    """
    starts = np.asarray(starts, dtype=np.int64)
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if total == 0:
        return _EMPTY_PAIR
    ends = np.repeat(starts + counts, counts)  # per-element group end
    positions = _concatenated_ranges(starts, counts)
    rights_per_left = ends - positions - 1
    if rights_per_left.sum() == 0:
        return _EMPTY_PAIR
    lefts = np.repeat(positions, rights_per_left)
    offsets = np.concatenate([[0], np.cumsum(rights_per_left)])
    block = np.repeat(np.arange(positions.size, dtype=np.int64), rights_per_left)
    rights = np.arange(offsets[-1], dtype=np.int64) - offsets[block] + lefts + 1
    return lefts, rights


def pairs_across_groups(starts_a, counts_a, starts_b, counts_b):
    """All cross pairs (i in group a_g, j in group b_g) for matched groups."""
    starts_a = np.asarray(starts_a, dtype=np.int64)
    counts_a = np.asarray(counts_a, dtype=np.int64)
    starts_b = np.asarray(starts_b, dtype=np.int64)
    counts_b = np.asarray(counts_b, dtype=np.int64)
    sizes = counts_a * counts_b
    total = int(sizes.sum())
    if total == 0:
        return _EMPTY_PAIR
    group = np.repeat(np.arange(sizes.size, dtype=np.int64), sizes)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    local = np.arange(total, dtype=np.int64) - offsets[group]
    lefts = starts_a[group] + local // counts_b[group]
    rights = starts_b[group] + local % counts_b[group]
    return lefts, rights


def _concatenated_ranges(starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Concatenation of arange(start, start+count) for every group."""
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    group = np.repeat(np.arange(starts.size, dtype=np.int64), counts)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    return starts[group] + np.arange(total, dtype=np.int64) - offsets[group]


def group_boundaries(sorted_keys: np.ndarray):
    """Start offsets, sizes, and representative keys of equal-value runs."""
    n = sorted_keys.shape[0]
    if n == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, sorted_keys
    change = np.flatnonzero(sorted_keys[1:] != sorted_keys[:-1]) + 1
    starts = np.concatenate([[0], change]).astype(np.int64)
    sizes = np.diff(np.concatenate([starts, [n]])).astype(np.int64)
    return starts, sizes, sorted_keys[starts]
