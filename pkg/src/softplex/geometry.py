"""Distance-threshold graphs, grid-accelerated neighbor search, regions.

The geometric graph joins two points whenever their distance is at most r
(closed threshold).  Neighbor search bins points into a uniform grid of
cell side r, so only same-cell and adjacent-cell pairs are examined; in the
sparse regime this costs O(n + candidate pairs).  A quadratic reference
implementation is kept alongside as the correctness oracle.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from ._grouping import group_boundaries, pairs_across_groups, pairs_within_groups
from .errors import ConfigurationError, InputError
from .point_process import PointCloud
from .rng import EDGE_COIN_STREAM, derive_seed, uniform_coins

_NO_EDGES = np.empty((0, 2), dtype=np.int64)


@dataclass(frozen=True)
class GeometricGraph:
    cloud: PointCloud
    r: float
    edges: np.ndarray = field(repr=False)  # (m, 2) int64, i < j, lex-sorted
    edge_retention: float | None = None
    seed: int = 0

    def __post_init__(self):
        edges = np.ascontiguousarray(self.edges, dtype=np.int64)
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)

    @property
    def vertex_count(self) -> int:
        return len(self.cloud)

    @property
    def edge_count(self) -> int:
        return self.edges.shape[0]


def _sort_pairs(ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
    lo = np.minimum(ii, jj)
    hi = np.maximum(ii, jj)
    order = np.lexsort((hi, lo))
    return np.stack([lo[order], hi[order]], axis=1)


def threshold_pairs_bruteforce(points: np.ndarray, r: float) -> np.ndarray:
    """All pairs at distance <= r by full pairwise comparison (oracle)."""
    n = points.shape[0]
    if n < 2:
        return _NO_EDGES.copy()
    sq = cdist(points, points, "sqeuclidean")
    ii, jj = np.nonzero(np.triu(sq <= r * r, k=1))
    return _sort_pairs(ii.astype(np.int64), jj.astype(np.int64))


def _positive_offsets(d: int):
    """Nonzero offsets in {-1,0,1}^d whose first nonzero entry is +1."""
    out = []
    for delta in itertools.product((-1, 0, 1), repeat=d):
        nonzero = [v for v in delta if v != 0]
        if nonzero and nonzero[0] == 1:
            out.append(delta)
    return out


def threshold_pairs_grid(points: np.ndarray, r: float) -> np.ndarray:
    """All pairs at distance <= r using uniform-grid binning at cell side r."""
    n, d = points.shape
    if n < 2:
        return _NO_EDGES.copy()
    lo = points.min(axis=0)
    cells = np.floor((points - lo) / r).astype(np.int64) + 1  # pad for -1 offsets
    extents = cells.max(axis=0) + 2
    strides = np.ones(d, dtype=object)
    for axis in range(d - 2, -1, -1):
        strides[axis] = strides[axis + 1] * int(extents[axis + 1])
    if int(strides[0]) * int(extents[0]) >= 2**62:
        raise ConfigurationError("grid too fine for 64-bit cell keys; reduce 1/r or d")
    strides = strides.astype(np.int64)
    keys = cells[:, 0] if d == 1 else cells @ strides

    order = np.argsort(keys)
    sorted_keys = keys[order]
    starts, sizes, group_keys = group_boundaries(sorted_keys)

    left_parts = []
    right_parts = []
    li, ri = pairs_within_groups(starts, sizes)
    left_parts.append(li)
    right_parts.append(ri)
    for delta in _positive_offsets(d):
        shift = int(np.dot(delta, strides))
        target = group_keys + shift
        pos = np.searchsorted(group_keys, target)
        pos_clipped = np.minimum(pos, len(group_keys) - 1)
        hit = group_keys[pos_clipped] == target
        if not hit.any():
            continue
        li, ri = pairs_across_groups(
            starts[hit], sizes[hit], starts[pos_clipped[hit]], sizes[pos_clipped[hit]]
        )
        left_parts.append(li)
        right_parts.append(ri)

    cand_i = order[np.concatenate(left_parts)]
    cand_j = order[np.concatenate(right_parts)]
    if cand_i.size == 0:
        return _NO_EDGES.copy()
    diff = points[cand_i] - points[cand_j]
    close = np.einsum("ij,ij->i", diff, diff) <= r * r
    return _sort_pairs(cand_i[close], cand_j[close])


def build_graph(
    cloud: PointCloud, r: float, p1: float | None = None, seed: int = 0
) -> GeometricGraph:
    """Threshold graph on the cloud; optional independent edge retention p1."""
    if not r > 0:
        raise InputError(f"threshold radius must be positive, got {r}")
    if p1 is not None and not 0.0 <= p1 <= 1.0:
        raise InputError(f"edge retention probability must lie in [0, 1], got {p1}")
    edges = threshold_pairs_grid(cloud.points, float(r))
    if p1 is not None and edges.shape[0] > 0:
        coins = uniform_coins(derive_seed(seed, EDGE_COIN_STREAM), edges)
        edges = edges[coins < p1]
    return GeometricGraph(cloud=cloud, r=float(r), edges=edges, edge_retention=p1, seed=int(seed))


def leftmost_point(vertex_indices, cloud: PointCloud) -> int:
    """Index of the lexicographically smallest point among the given vertices.

    Coordinate ties (probability zero under continuous densities) resolve to
    the lowest vertex index, so the result is a pure function of the set.
    """
    idx = np.asarray(sorted(int(v) for v in set(np.asarray(vertex_indices).ravel().tolist())))
    if idx.size == 0:
        raise InputError("leftmost point of an empty vertex set is undefined")
    pts = cloud.points[idx]
    order = np.lexsort(pts.T[::-1])  # primary key: first coordinate
    return int(idx[order[0]])


@dataclass(frozen=True)
class RegionSpec:
    kind: str  # "all", "box", or "box-complement"
    lo: tuple | None = None
    hi: tuple | None = None

    def __post_init__(self):
        if self.kind == "all":
            if self.lo is not None or self.hi is not None:
                raise ConfigurationError("region 'all' takes no box bounds")
            return
        if self.kind not in ("box", "box-complement"):
            raise ConfigurationError(f"unsupported region kind: {self.kind!r}")
        if self.lo is None or self.hi is None:
            raise ConfigurationError(f"region {self.kind!r} requires lo and hi")
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not all(h > l for l, h in zip(lo, hi)):
            raise ConfigurationError("region box requires hi > lo in every coordinate")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def to_config(self) -> dict:
        if self.kind == "all":
            return {"kind": "all"}
        return {"kind": self.kind, "lo": list(self.lo), "hi": list(self.hi)}


ALL_SPACE = RegionSpec(kind="all")


def region_from_config(config: dict) -> RegionSpec:
    if not isinstance(config, dict) or "kind" not in config:
        raise ConfigurationError("region config must be an object with a 'kind'")
    extra = set(config) - {"kind", "lo", "hi"}
    if extra:
        raise ConfigurationError(f"unknown region fields: {sorted(extra)}")
    return RegionSpec(kind=config["kind"], lo=config.get("lo"), hi=config.get("hi"))


def region_mask(points: np.ndarray, region: RegionSpec) -> np.ndarray:
    """Vectorized membership; the box is open, its complement excludes the closed box."""
    points = np.asarray(points, dtype=np.float64)
    if region.kind == "all":
        return np.ones(points.shape[0], dtype=bool)
    lo = np.asarray(region.lo)
    hi = np.asarray(region.hi)
    if points.shape[1] != lo.shape[0]:
        raise InputError(f"points of dimension {points.shape[1]} vs region of dimension {lo.shape[0]}")
    if region.kind == "box":
        return np.all((points > lo) & (points < hi), axis=1)
    return np.any((points < lo) | (points > hi), axis=1)


def in_region(point, region: RegionSpec) -> bool:
    """Open-box membership test for one point."""
    return bool(region_mask(np.asarray(point, dtype=np.float64)[None, :], region)[0])
