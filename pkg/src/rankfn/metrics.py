"""Distances between rank grids, persistence diagrams and landscapes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .persistence import PersistenceDiagram
from .rank import Landscape, RankGrid

DIAGONAL = -1


def lp_distance(r1: RankGrid, r2: RankGrid, p: float = 1.0) -> float:
    """Weighted ``L^p`` distance of two rank grids on the same geometry."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if not r1.same_geometry(r2) or r1.delta != r2.delta:
        raise ValueError("rank grids have different geometry")
    diff = np.abs(r1.values - r2.values).astype(float)
    return float(np.sum(diff ** p * r1.weights) ** (1.0 / p))


@dataclass(frozen=True, eq=False)
class MatchingCertificate:
    """A partial matching between two diagrams; unmatched points go to the diagonal.

    ``pairs`` holds ``(i, j)`` with ``i`` indexing ``points1`` and ``j``
    indexing ``points2``; ``DIAGONAL`` (-1) on either side means the other
    point is sent to its nearest diagonal point. ``p`` is ``inf`` for the
    bottleneck cost and the Wasserstein exponent otherwise.
    """

    points1: np.ndarray
    points2: np.ndarray
    pairs: tuple[tuple[int, int], ...]
    p: float
    cost: float

    def recompute(self) -> float:
        return _certificate_cost(self.points1, self.points2, self.pairs, self.p)

    def is_valid(self) -> bool:
        left = sorted(i for i, _ in self.pairs if i != DIAGONAL)
        right = sorted(j for _, j in self.pairs if j != DIAGONAL)
        return (left == list(range(len(self.points1))) and right == list(range(len(self.points2)))
                and self.recompute() == self.cost)


def _diag_cost(pts: np.ndarray, p: float) -> np.ndarray:
    half = (pts[:, 1] - pts[:, 0]) / 2.0
    if np.isinf(p):
        return half
    # nearest diagonal point under the l^p norm is the midpoint projection
    return 2.0 * half ** p


def _pair_cost(a: np.ndarray, b: np.ndarray, p: float) -> np.ndarray:
    diff = np.abs(a[:, None, :] - b[None, :, :])
    if np.isinf(p):
        return diff.max(axis=2)
    return (diff ** p).sum(axis=2)


def _certificate_cost(a, b, pairs, p) -> float:
    terms = []
    for i, j in pairs:
        if i == DIAGONAL:
            terms.append(_diag_cost(b[j:j + 1], p)[0])
        elif j == DIAGONAL:
            terms.append(_diag_cost(a[i:i + 1], p)[0])
        else:
            terms.append(_pair_cost(a[i:i + 1], b[j:j + 1], p)[0, 0])
    if np.isinf(p):
        return float(max(terms, default=0.0))
    # exactly rounded sum, so the value does not depend on the matching's order
    return float(math.fsum(terms) ** (1.0 / p))


def augmented_cost(a: np.ndarray, b: np.ndarray, p: float) -> np.ndarray:
    """``(n+m) x (n+m)`` cost matrix with diagonal copies on both sides.

    Rows are the points of ``a`` then ``m`` diagonal slots; columns are the
    points of ``b`` then ``n`` diagonal slots. Slot-to-slot costs are 0.
    """
    n, m = len(a), len(b)
    cost = np.zeros((n + m, n + m))
    cost[:n, :m] = _pair_cost(a, b, p)
    cost[:n, m:] = _diag_cost(a, p)[:, None]
    cost[n:, :m] = _diag_cost(b, p)[None, :]
    return cost


def _pairs_from_assignment(rows, cols, n, m) -> tuple[tuple[int, int], ...]:
    out = []
    for r, c in zip(rows, cols):
        i = int(r) if r < n else DIAGONAL
        j = int(c) if c < m else DIAGONAL
        if i != DIAGONAL or j != DIAGONAL:
            out.append((i, j))
    return tuple(sorted(out))


def bottleneck(d1: PersistenceDiagram, d2: PersistenceDiagram, degree: int = 0
               ) -> tuple[float, MatchingCertificate]:
    """Exact bottleneck distance under the ``l^inf`` ground metric.

    Binary search over the distinct entries of the augmented cost matrix; each
    threshold is tested for a perfect matching on the edges it admits.
    """
    a, b = d1[degree], d2[degree]
    n, m = len(a), len(b)
    if n + m == 0:
        return 0.0, MatchingCertificate(a, b, (), np.inf, 0.0)
    cost = augmented_cost(a, b, np.inf)
    candidates = np.unique(cost)

    def match(t):
        graph = csr_matrix((cost <= t).astype(np.int8))
        perm = maximum_bipartite_matching(graph, perm_type="column")
        return perm if np.all(perm >= 0) else None

    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if match(candidates[mid]) is not None:
            hi = mid
        else:
            lo = mid + 1
    perm = match(candidates[lo])
    pairs = _pairs_from_assignment(np.arange(n + m), perm, n, m)
    value = _certificate_cost(a, b, pairs, np.inf)
    return value, MatchingCertificate(a, b, pairs, np.inf, value)


def wasserstein(d1: PersistenceDiagram, d2: PersistenceDiagram, degree: int = 0,
                p: float = 1.0) -> tuple[float, MatchingCertificate]:
    """Exact p-Wasserstein distance with the ``l^p`` ground metric (q = p)."""
    if not p >= 1 or np.isinf(p):
        raise ValueError("p must be a finite real >= 1")
    a, b = d1[degree], d2[degree]
    n, m = len(a), len(b)
    if n + m == 0:
        return 0.0, MatchingCertificate(a, b, (), p, 0.0)
    rows, cols = linear_sum_assignment(augmented_cost(a, b, p))
    pairs = _pairs_from_assignment(rows, cols, n, m)
    value = _certificate_cost(a, b, pairs, p)
    return value, MatchingCertificate(a, b, pairs, p, value)


def combined_distance(d1: PersistenceDiagram, d2: PersistenceDiagram, metric: str = "bottleneck",
                      degrees: Sequence[int] | None = None, p: float = 1.0) -> float:
    """Unweighted sum of a diagram distance over homology degrees."""
    if degrees is None:
        degrees = sorted(set(d1.degrees) | set(d2.degrees))
    if metric == "bottleneck":
        return float(sum(bottleneck(d1, d2, q)[0] for q in degrees))
    if metric == "wasserstein":
        return float(sum(wasserstein(d1, d2, q, p)[0] for q in degrees))
    raise ValueError(f"unknown metric {metric!r}")


def landscape_distance(l1: Sequence[Landscape], l2: Sequence[Landscape], p: float = 1.0) -> float:
    """``sum_k ||λ_k - λ'_k||_p^p`` over the stored levels, by trapezoid quadrature."""
    if len(l1) != len(l2):
        raise ValueError("landscape lists have different k_max")
    total = 0.0
    for a, b in zip(l1, l2):
        if a.k != b.k or not np.array_equal(a.t, b.t):
            raise ValueError("landscapes sampled on different grids")
        total += float(np.trapezoid(np.abs(a.values - b.values) ** p, a.t))
    return total
