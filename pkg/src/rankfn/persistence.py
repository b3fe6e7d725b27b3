"""Persistent homology over Z/2 by boundary-matrix column reduction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._reduce import reduce_columns
from .complexes import Filtration, FiltrationError, Simplex, simplex_keys


@dataclass(frozen=True)
class Barcode:
    """Half-open bars ``[birth, death)`` per homology degree.

    Essential classes are capped at ``cap``, the largest filtration value.
    """

    bars: Mapping[int, tuple[tuple[float, float], ...]]
    cap: float

    def __post_init__(self):
        clean = {}
        for q, bars in self.bars.items():
            rows = tuple(sorted((float(b), float(d)) for b, d in bars))
            for b, d in rows:
                if not b < d:
                    raise ValueError(f"bar [{b}, {d}) has non-positive length")
            clean[int(q)] = rows
        object.__setattr__(self, "bars", clean)

    def __getitem__(self, degree: int) -> tuple[tuple[float, float], ...]:
        return self.bars.get(degree, ())

    @property
    def degrees(self) -> list[int]:
        return sorted(self.bars)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of off-diagonal ``(birth, death)`` points per homology degree.

    The diagonal is implicit. Multiplicity is repetition of rows.
    """

    pairs: Mapping[int, np.ndarray]
    cap: float = field(default=0.0)

    def __post_init__(self):
        clean = {}
        for q, pts in self.pairs.items():
            arr = np.asarray(pts, dtype=float).reshape(-1, 2)
            if not np.all(np.isfinite(arr)):
                raise ValueError("diagram points must be finite")
            if np.any(arr[:, 0] >= arr[:, 1]):
                raise ValueError("diagram points must satisfy birth < death")
            arr = arr[np.lexsort((arr[:, 1], arr[:, 0]))]
            arr.setflags(write=False)
            clean[int(q)] = arr
        object.__setattr__(self, "pairs", clean)
        object.__setattr__(self, "cap", float(self.cap))

    @classmethod
    def from_points(cls, points, degree: int = 0, cap: float | None = None) -> "PersistenceDiagram":
        arr = np.asarray(points, dtype=float).reshape(-1, 2)
        if cap is None:
            cap = float(arr[:, 1].max()) if len(arr) else 0.0
        return cls({degree: arr}, cap)

    def __getitem__(self, degree: int) -> np.ndarray:
        return self.pairs.get(degree, np.empty((0, 2)))

    @property
    def degrees(self) -> list[int]:
        return sorted(self.pairs)

    def persistence(self, degree: int) -> np.ndarray:
        pts = self[degree]
        return pts[:, 1] - pts[:, 0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PersistenceDiagram):
            return NotImplemented
        degs = set(self.degrees) | set(other.degrees)
        return self.cap == other.cap and all(np.array_equal(self[q], other[q]) for q in degs)

    __hash__ = None


def barcode_to_diagram(barcode: Barcode) -> PersistenceDiagram:
    return PersistenceDiagram({q: np.array(bars, dtype=float).reshape(-1, 2)
                               for q, bars in barcode.bars.items()}, barcode.cap)


def diagram_to_barcode(diagram: PersistenceDiagram) -> Barcode:
    return Barcode({q: tuple(map(tuple, pts.tolist())) for q, pts in diagram.pairs.items()},
                   diagram.cap)


def boundary_arrays(filtration: Filtration) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Boundary of every simplex of dimension ``d >= 1`` as filtration positions.

    Returns ``{d: (positions, faces)}`` where ``faces[r]`` holds the sorted
    positions of the ``d + 1`` faces of the simplex at ``positions[r]``.
    Raises :class:`FiltrationError` if a face is missing or enters later.
    """
    verts, dims = filtration.vertices, filtration.dims
    out: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    prev = None
    for d in range(filtration.max_dim + 1):
        pos = np.flatnonzero(dims == d)
        rows = verts[pos, :d + 1]
        keys = simplex_keys(rows)
        order = np.argsort(keys, kind="stable")
        sorted_keys = keys[order]
        if np.any(sorted_keys[1:] == sorted_keys[:-1]):
            raise FiltrationError(f"duplicate {d}-simplex")
        if d > 0:
            face_keys, face_pos = prev
            faces = np.empty((len(pos), d + 1), dtype=np.int64)
            for k in range(d + 1):
                fk = simplex_keys(np.delete(rows, k, axis=1))
                idx = np.minimum(np.searchsorted(face_keys, fk), max(len(face_keys) - 1, 0))
                if len(face_keys) == 0 or np.any(face_keys[idx] != fk):
                    raise FiltrationError(f"a face of some {d}-simplex is missing")
                faces[:, k] = face_pos[idx]
            if np.any(faces > pos[:, None]):
                raise FiltrationError(f"a face of some {d}-simplex enters after it")
            faces.sort(axis=1)
            out[d] = (pos, faces)
        prev = (sorted_keys, pos[order])
    return out


def boundary_columns(filtration: Filtration) -> list[list[int]]:
    """Face positions of every simplex, in filtration order."""
    columns: list[list[int]] = [[] for _ in range(len(filtration))]
    for pos, faces in boundary_arrays(filtration).values():
        for p, row in zip(pos.tolist(), faces.tolist()):
            columns[p] = row
    return columns


def _coboundary(pos: np.ndarray, faces: np.ndarray, lower: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """CSR cofaces of the simplices at ``lower`` (descending), each row ascending."""
    flat = faces.ravel()
    # rows of ``faces`` follow filtration order, so a stable sort keeps cofaces ascending
    order = np.argsort(-flat, kind="stable")
    cofaces = pos[order // faces.shape[1]]
    counts = np.bincount(flat, minlength=int(lower.max()) + 1 if len(lower) else 0)[lower]
    indptr = np.zeros(len(lower) + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, cofaces


def _reduce_homology(filtration, bnd, max_degree, clearing):
    n = len(filtration)
    top = min(max_degree + 1, filtration.max_dim)
    pairs: list[tuple[int, int]] = []
    paired = np.zeros(n, dtype=bool)
    for d in range(top, 0, -1):
        pos, faces = bnd[d]
        # flip row order so the pivot (largest face) becomes the smallest row
        rows = (n - 1 - faces[:, ::-1]).ravel()
        indptr = np.arange(0, len(rows) + 1, d + 1, dtype=np.int64)
        skip = paired[pos] if clearing else np.zeros(len(pos), dtype=bool)
        cols, lows = reduce_columns(indptr, rows, skip, n)
        births, deaths = n - 1 - lows, pos[cols]
        paired[births] = paired[deaths] = True
        pairs.extend(zip(births.tolist(), deaths.tolist()))
    return pairs, paired, min(max_degree, top)


def _reduce_cohomology(filtration, bnd, max_degree, clearing):
    n = len(filtration)
    dims = filtration.dims
    top = min(max_degree, filtration.max_dim)
    pairs: list[tuple[int, int]] = []
    paired = np.zeros(n, dtype=bool)
    for q in range(top + 1):
        if q + 1 not in bnd:
            break
        lower = np.flatnonzero(dims == q)[::-1]
        indptr, cofaces = _coboundary(*bnd[q + 1], lower)
        skip = paired[lower] if clearing else np.zeros(len(lower), dtype=bool)
        cols, lows = reduce_columns(indptr, cofaces, skip, n)
        births = lower[cols]
        paired[births] = paired[lows] = True
        pairs.extend(zip(births.tolist(), lows.tolist()))
    return pairs, paired, top


REDUCTION_METHODS = ("cohomology", "homology")


def reduce_boundary(filtration: Filtration, max_degree: int | None = None,
                    clearing: bool = True, method: str = "cohomology"
                    ) -> tuple[list[tuple[int, int]], list[int]]:
    """Column reduction of the Z/2 boundary matrix.

    Returns ``(pairs, essential)``: index pairs ``(birth, death)`` and the
    indices of unpaired simplices of degree ``<= max_degree``.

    ``method="homology"`` reduces the boundary matrix itself, dimensions from
    the top down so that with ``clearing`` the columns of simplices already
    known to create a class are skipped. ``method="cohomology"`` reduces the
    anti-transposed matrix (columns are coboundaries, processed in reverse
    filtration order, dimensions bottom up), which yields the same pairs and is
    much cheaper on Rips filtrations where most top-dimensional simplices
    would otherwise have to be reduced to zero.
    """
    if max_degree is None:
        max_degree = filtration.exact_degree
    if method not in REDUCTION_METHODS:
        raise ValueError(f"unknown reduction method {method!r}")
    bnd = boundary_arrays(filtration)
    reducer = _reduce_homology if method == "homology" else _reduce_cohomology
    pairs, paired, top = reducer(filtration, bnd, max_degree, clearing)
    dims = filtration.dims
    candidates = np.flatnonzero(dims <= top)
    essential = candidates[~paired[candidates]].tolist()
    pairs.sort()
    return pairs, essential


def compute_persistence(filtration: Filtration, max_degree: int | None = None,
                        clearing: bool = True, method: str = "cohomology") -> Barcode:
    """Barcode of a filtration; zero-length bars dropped, essential bars capped."""
    if max_degree is None:
        max_degree = filtration.exact_degree
    pairs, essential = reduce_boundary(filtration, max_degree, clearing, method)
    vals, dims = filtration.values, filtration.dims
    cap = filtration.max_value
    bars: dict[int, list[tuple[float, float]]] = {q: [] for q in range(max_degree + 1)}
    for b, d in pairs:
        q = int(dims[b])
        if q <= max_degree and vals[b] < vals[d]:
            bars[q].append((float(vals[b]), float(vals[d])))
    for e in essential:
        if vals[e] < cap:
            bars[int(dims[e])].append((float(vals[e]), cap))
    return Barcode(bars, cap)


def persistence_diagram(filtration: Filtration, max_degree: int | None = None) -> PersistenceDiagram:
    return barcode_to_diagram(compute_persistence(filtration, max_degree))


def _closed(simplices: Iterable[Simplex]) -> bool:
    s = set(simplices)
    return all(f in s for t in s if len(t) > 1 for f in
               (t[:k] + t[k + 1:] for k in range(len(t))))


def persistent_betti(a: Iterable[Sequence[int]], b: Iterable[Sequence[int]], degree: int) -> int:
    """Rank of ``H_q(A) -> H_q(B)`` for simplicial complexes ``A ⊆ B``.

    Builds the two-step filtration (A at 0, the rest of B at 1) and counts the
    degree-q classes born at step 0 that survive step 1.
    """
    a_set = {tuple(sorted(s)) for s in a}
    b_set = {tuple(sorted(s)) for s in b}
    if not a_set <= b_set:
        raise ValueError("persistent_betti needs A to be a subcomplex of B")
    if not (_closed(a_set) and _closed(b_set)):
        raise FiltrationError("complexes must be closed under faces")
    if not a_set:
        return 0
    simplices = list(b_set)
    values = [0.0 if s in a_set else 1.0 for s in simplices]
    filt = Filtration.from_simplices(simplices, values)
    if degree > filt.max_dim:
        return 0
    _, essential = reduce_boundary(filt, max_degree=degree)
    return sum(1 for e in essential if filt.dims[e] == degree and filt.values[e] == 0.0)


def betti_number(complex_: Iterable[Sequence[int]], degree: int) -> int:
    simplices = list(complex_)
    return persistent_betti(simplices, simplices, degree)


def diagram_from_rank(values, nodes: Sequence[float], degree: int = 0, *,
                      upper: float = np.inf, cap: float | None = None,
                      jump_values: Sequence[float] | None = None) -> PersistenceDiagram:
    """Recover a diagram from rank values by inclusion-exclusion.

    ``values[i, j]`` is the rank at ``(nodes[i], nodes[j])`` for ``i <= j``.
    A point with birth in ``(nodes[i-1], nodes[i]]`` and death in
    ``(nodes[j-1], nodes[j]]`` is reported at ``(nodes[i], nodes[j])``, or, if
    ``jump_values`` is given, at the unique jump value inside each bin. Deaths
    beyond the last node are placed at ``upper``.
    """
    vals = np.asarray(values)
    s = np.asarray(nodes, dtype=float)
    g = len(s)
    if vals.shape != (g, g):
        raise ValueError("values must be a square array matching the nodes")
    # padded[i + 1, j] = rank(s_i, s_j); row 0 is x = -inf, column g is y = +inf
    padded = np.zeros((g + 1, g + 1), dtype=np.int64)
    padded[1:, :g] = np.triu(vals)
    i = np.arange(g)[:, None]
    j = np.arange(1, g + 1)[None, :]
    mu = (padded[i, j] - padded[i + 1, j] + padded[i + 1, j - 1] - padded[i, j - 1])
    mu = np.where(i <= j - 1, mu, 0)
    if np.any(mu < 0):
        raise ValueError("negative multiplicity: grid does not resolve a rank function")
    bins_b, bins_d = np.nonzero(mu)
    coords = np.append(s, upper)
    if jump_values is not None:
        coords = _snap_bins(np.asarray(sorted(set(jump_values)), dtype=float), s, upper)
    pts = []
    for bi, di in zip(bins_b, bins_d):
        pts.extend([(coords[bi], coords[di + 1])] * int(mu[bi, di]))
    pts_arr = np.array(pts, dtype=float).reshape(-1, 2)
    if cap is None:
        cap = float(pts_arr[:, 1].max()) if len(pts_arr) else float(s[-1])
    return PersistenceDiagram({degree: pts_arr}, cap)


def _snap_bins(jumps: np.ndarray, nodes: np.ndarray, upper: float) -> np.ndarray:
    """Jump value inside each bin ``(nodes[k-1], nodes[k]]``; last bin is ``(nodes[-1], upper]``."""
    edges = np.concatenate([[-np.inf], nodes, [upper]])
    coords = np.full(len(nodes) + 1, np.nan)
    for k in range(len(nodes) + 1):
        inside = jumps[(jumps > edges[k]) & (jumps <= edges[k + 1])]
        if len(inside) > 1:
            raise ValueError("sequence does not interleave the jump values")
        coords[k] = inside[0] if len(inside) else edges[k + 1]
    return coords
