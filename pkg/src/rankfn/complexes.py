"""Filtered simplicial complexes built from point clouds and time series.

Simplices are stored as sorted vertex tuples. A :class:`Filtration` keeps them
ordered by ``(value, dimension, vertices)`` so that every face precedes its
cofaces, which is the order the boundary-matrix reduction relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial.distance import cdist

Simplex = tuple[int, ...]

_CHUNK_CELLS = 1 << 24


class FiltrationError(ValueError):
    """Raised when a simplex enters before one of its faces."""


def as_point_cloud(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
        raise ValueError("point cloud must be a non-empty (n, d) array")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point cloud has non-finite coordinates")
    return pts


def distance_matrix(points) -> np.ndarray:
    """Pairwise Euclidean distances of a point cloud."""
    pts = as_point_cloud(points)
    dm = cdist(pts, pts)
    np.fill_diagonal(dm, 0.0)
    return dm


def check_distance_matrix(dm) -> np.ndarray:
    dm = np.asarray(dm, dtype=float)
    if dm.ndim != 2 or dm.shape[0] != dm.shape[1] or dm.shape[0] == 0:
        raise ValueError("distance matrix must be square and non-empty")
    if not np.all(np.isfinite(dm)) or np.any(dm < 0):
        raise ValueError("distance matrix entries must be finite and non-negative")
    if np.any(np.diag(dm) != 0) or not np.array_equal(dm, dm.T):
        raise ValueError("distance matrix must be symmetric with zero diagonal")
    return dm


@dataclass(frozen=True, eq=False)
class Filtration:
    """Simplices in filtration order with their entrance values.

    ``vertices`` is an ``(n, max_dim + 1)`` integer array of sorted vertex
    indices padded with ``-1``. ``exact_degree`` is the highest homology degree
    the filtration determines completely: a Rips filtration cut at simplex
    dimension ``k`` only knows homology up to degree ``k - 1``.
    """

    vertices: np.ndarray
    values: np.ndarray
    exact_degree: int

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.int64)
        if verts.ndim != 2:
            raise ValueError("vertices must be a 2-D padded array")
        vals = np.asarray(self.values, dtype=float)
        if len(vals) != len(verts):
            raise ValueError("one value per simplex required")
        if not np.all(np.isfinite(vals)):
            raise ValueError("filtration values must be finite")
        verts.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "values", vals)
        dims = (verts >= 0).sum(axis=1) - 1
        dims.setflags(write=False)
        object.__setattr__(self, "dims", dims)

    def __len__(self) -> int:
        return len(self.values)

    @cached_property
    def simplices(self) -> tuple[Simplex, ...]:
        return tuple(tuple(row[:d + 1]) for row, d in zip(self.vertices.tolist(), self.dims.tolist()))

    @property
    def max_dim(self) -> int:
        return int(self.dims.max()) if len(self.dims) else -1

    @property
    def max_value(self) -> float:
        return float(self.values.max()) if len(self.values) else 0.0

    def index(self) -> dict[Simplex, int]:
        return {s: i for i, s in enumerate(self.simplices)}

    def check_face_closure(self) -> None:
        """Raise :class:`FiltrationError` unless every face precedes its coface."""
        from .persistence import boundary_arrays

        boundary_arrays(self)

    @classmethod
    def from_simplices(cls, simplices: Iterable[Sequence[int]], values: Iterable[float],
                       exact_degree: int | None = None) -> "Filtration":
        """Sort arbitrary (simplex, value) data into filtration order."""
        simp = [tuple(sorted(int(x) for x in s)) for s in simplices]
        vals = np.asarray(list(values), dtype=float)
        if len(simp) != len(vals):
            raise ValueError("one value per simplex required")
        width = max((len(s) for s in simp), default=1)
        padded = np.full((len(simp), width), -1, dtype=np.int64)
        for row, s in zip(padded, simp):
            row[:len(s)] = s
        filt = _sorted_filtration(padded, vals, 0)
        top = filt.max_dim if exact_degree is None else exact_degree
        return cls(filt.vertices, filt.values, max(top, 0))

    def to_rows(self) -> list[list]:
        """Rows ``[value, dim, v0, v1, ...]`` of the debug dump format."""
        return [[float(v), len(s) - 1, *s] for s, v in zip(self.simplices, self.values)]


def _faces(simplex: Simplex) -> list[Simplex]:
    return [simplex[:i] + simplex[i + 1:] for i in range(len(simplex))]


def _clique_arrays(adj: np.ndarray, max_dim: int) -> list[np.ndarray]:
    """All cliques of ``adj`` up to ``max_dim``, one sorted (m, k+1) array per dim."""
    n = adj.shape[0]
    upper = np.triu(adj, k=1)
    out = [np.arange(n, dtype=np.int64)[:, None]]
    if max_dim >= 1:
        i, j = np.nonzero(upper)
        out.append(np.stack([i, j], axis=1).astype(np.int64))
    step = max(1, _CHUNK_CELLS // max(n, 1))
    for dim in range(2, max_dim + 1):
        prev = out[-1]
        chunks = [np.empty((0, dim + 1), dtype=np.int64)]
        for start in range(0, len(prev), step):
            block = prev[start:start + step]
            # candidates must be adjacent to every vertex and larger than the last
            mask = upper[block[:, 0]]
            for col in range(1, block.shape[1]):
                mask &= upper[block[:, col]]
            rows, cand = np.nonzero(mask)
            chunks.append(np.concatenate([block[rows], cand[:, None]], axis=1))
        out.append(np.concatenate(chunks))
    return out


def _diameters(dm: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    k = simplices.shape[1]
    if k == 1:
        return np.zeros(len(simplices))
    vals = np.zeros(len(simplices))
    for a in range(k):
        for b in range(a + 1, k):
            np.maximum(vals, dm[simplices[:, a], simplices[:, b]], out=vals)
    return vals


def _sorted_filtration(padded: np.ndarray, vals: np.ndarray, exact_degree: int) -> Filtration:
    dims = (padded >= 0).sum(axis=1)
    keys = [padded[:, c] for c in range(padded.shape[1] - 1, -1, -1)] + [dims, vals]
    order = np.lexsort(keys)
    return Filtration(padded[order], vals[order], exact_degree)


def _assemble(arrays: list[np.ndarray], values: list[np.ndarray], exact_degree: int) -> Filtration:
    width = len(arrays)
    total = sum(len(a) for a in arrays)
    padded = np.full((total, width), -1, dtype=np.int64)
    vals = np.empty(total)
    pos = 0
    for d, (arr, v) in enumerate(zip(arrays, values)):
        padded[pos:pos + len(arr), :d + 1] = arr
        vals[pos:pos + len(arr)] = v
        pos += len(arr)
    return _sorted_filtration(padded, vals, exact_degree)


def vietoris_rips(dm, max_dim: int = 2, max_scale: float = np.inf) -> Filtration:
    """Vietoris-Rips filtration of a distance matrix.

    A simplex enters at its diameter; vertices enter at 0. Only simplices of
    dimension ``<= max_dim`` and diameter ``<= max_scale`` are kept.
    """
    dm = check_distance_matrix(dm)
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    if not max_scale > 0:
        raise ValueError("max_scale must be positive")
    arrays = _clique_arrays(dm <= max_scale, max_dim)
    values = [_diameters(dm, a) for a in arrays]
    return _assemble(arrays, values, exact_degree=max(max_dim - 1, 0))


def sublevel_filtration(series) -> Filtration:
    """Lower-star filtration of the piecewise-linear interpolation of a series."""
    ts = np.asarray(series, dtype=float).ravel()
    if len(ts) < 2:
        raise ValueError("time series needs at least two values")
    if not np.all(np.isfinite(ts)):
        raise ValueError("time series values must be finite")
    n = len(ts)
    verts = np.arange(n, dtype=np.int64)[:, None]
    edges = np.stack([np.arange(n - 1), np.arange(1, n)], axis=1).astype(np.int64)
    return _assemble([verts, edges], [ts, np.maximum(ts[:-1], ts[1:])], exact_degree=0)


def rips_complex(dm: np.ndarray, scale: float, max_dim: int,
                 vertices: np.ndarray | None = None) -> frozenset[Simplex]:
    """Simplex set of the Rips complex at one scale, optionally on a vertex subset."""
    n = dm.shape[0]
    keep = np.arange(n) if vertices is None else np.asarray(vertices, dtype=np.int64)
    if len(keep) == 0:
        return frozenset()
    sub = dm[np.ix_(keep, keep)] <= scale
    simplices = set()
    for arr in _clique_arrays(sub, max_dim):
        for row in keep[arr]:
            simplices.add(tuple(int(x) for x in row))
    return frozenset(simplices)


def degree_rips_complex(dm, scale: float, degree: int, max_dim: int = 2) -> frozenset[Simplex]:
    """Rips complex at ``scale`` on the vertices of degree ``>= degree`` in the scale graph."""
    dm = check_distance_matrix(dm)
    if scale < 0 or degree < 0:
        raise ValueError("scale and degree must be non-negative")
    adj = dm <= scale
    np.fill_diagonal(adj, False)
    deg = adj.sum(axis=1)
    return rips_complex(dm, scale, max_dim, np.flatnonzero(deg >= degree))


def height_rips_complex(points, scale: float, height: float, max_dim: int = 2) -> frozenset[Simplex]:
    """Rips complex at ``scale`` on the points whose z-coordinate is ``<= height``."""
    pts = as_point_cloud(points)
    if pts.shape[1] != 3:
        raise ValueError("height-Rips needs a 3-D point cloud")
    if scale < 0:
        raise ValueError("scale must be non-negative")
    dm = distance_matrix(pts)
    return rips_complex(dm, scale, max_dim, np.flatnonzero(pts[:, 2] <= height))


@dataclass(frozen=True)
class BifiltrationGrid:
    """Simplicial complexes on a 2-D grid, monotone in the product order.

    ``axis2`` is stored in the order where a larger index means a larger
    complex. For degree-Rips that is *descending* degree threshold.
    """

    axis1: np.ndarray
    axis2: np.ndarray
    kind: str
    complexes: dict[tuple[int, int], frozenset[Simplex]]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.axis1), len(self.axis2)

    def complex_at(self, i: int, j: int) -> frozenset[Simplex]:
        return self.complexes[(i, j)]

    def cells(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(len(self.axis1)) for j in range(len(self.axis2))]

    def check_monotone(self) -> None:
        n1, n2 = self.shape
        for i in range(n1):
            for j in range(n2):
                here = self.complexes[(i, j)]
                if i + 1 < n1:
                    assert here <= self.complexes[(i + 1, j)], f"not monotone at {(i, j)} along axis1"
                if j + 1 < n2:
                    assert here <= self.complexes[(i, j + 1)], f"not monotone at {(i, j)} along axis2"


BIFILTRATION_KINDS = ("degree-rips", "height-rips")


def bifiltration_grid(data, kind: str, axis1: Sequence[float], axis2: Sequence[float],
                      max_dim: int = 2) -> BifiltrationGrid:
    """Evaluate a degree-Rips or height-Rips bifiltration on a grid.

    Parameters
    ----------
    data : array
        Distance matrix for ``degree-rips``; 3-D point cloud for ``height-rips``.
    axis1 : sequence of float
        Ascending scale values.
    axis2 : sequence of float
        Ascending degree thresholds or heights.
    """
    a1 = np.asarray(axis1, dtype=float)
    a2 = np.asarray(axis2, dtype=float)
    if np.any(np.diff(a1) < 0) or np.any(np.diff(a2) < 0):
        raise ValueError("grid axes must be sorted ascending")
    if kind == "degree-rips":
        dm = check_distance_matrix(data)
        a2 = a2[::-1].copy()
        build = lambda s, k: degree_rips_complex(dm, s, int(k), max_dim)
    elif kind == "height-rips":
        pts = as_point_cloud(data)
        if pts.shape[1] != 3:
            raise ValueError("height-Rips needs a 3-D point cloud")
        dm = distance_matrix(pts)
        z = pts[:, 2]
        build = lambda s, h: rips_complex(dm, s, max_dim, np.flatnonzero(z <= h))
    else:
        raise ValueError(f"unknown bifiltration kind {kind!r}")
    cells = {(i, j): build(s, t) for i, s in enumerate(a1) for j, t in enumerate(a2)}
    grid = BifiltrationGrid(a1, a2, kind, cells)
    grid.check_monotone()
    return grid


def simplex_keys(simplices: np.ndarray) -> np.ndarray:
    """Combinatorial-number-system rank of each row of sorted vertex indices.

    Rows of equal length map to distinct keys, so faces can be located with
    ``np.searchsorted``.
    """
    simplices = np.asarray(simplices, dtype=np.int64)
    n, k = simplices.shape
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    top = int(simplices.max()) + 1
    if comb(top, k) >= 1 << 62:
        raise OverflowError("too many vertices to key simplices in int64")
    table = np.array([[comb(v, i + 1) for i in range(k)] for v in range(top)], dtype=np.int64)
    return table[simplices, np.arange(k)].sum(axis=1)
