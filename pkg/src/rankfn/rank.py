"""Rank functions, truncated rank functions, rank invariants and landscapes."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .complexes import BifiltrationGrid
from .persistence import PersistenceDiagram, persistent_betti


def rank_matrix(points, xs, ys) -> np.ndarray:
    """``out[a, b]`` = number of points with ``birth <= xs[a]`` and ``death > ys[b]``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    born = (pts[:, 0][:, None] <= xs[None, :]).astype(np.int64)
    alive = (pts[:, 1][:, None] > ys[None, :]).astype(np.int64)
    return born.T @ alive


def rank_at(diagram: PersistenceDiagram, degree: int, x: float, y: float) -> int:
    """β(x, y): points of the diagram in ``(-inf, x] x (y, inf)``."""
    if x > y:
        raise ValueError("rank function is defined for x <= y only")
    return int(rank_matrix(diagram[degree], [x], [y])[0, 0])


def halfplane_area(x0, x1, y0, y1, c) -> np.ndarray:
    """Area of ``[x0, x1] x [y0, y1]`` intersected with ``{y - x > c}``; broadcasts."""
    x0, x1, y0, y1, c = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x0, x1, y0, y1, c)))
    height = np.clip(y1 - y0, 0.0, None)

    def g(x):
        return np.clip(y1 - x - c, 0.0, height)

    # g is piecewise linear with kinks at y0 - c and y1 - c: integrate by trapezoids
    k0 = np.clip(y0 - c, x0, x1)
    k1 = np.clip(y1 - c, x0, x1)
    knots = [x0, k0, k1, x1]
    area = np.zeros(x0.shape)
    for a, b in zip(knots[:-1], knots[1:]):
        area += 0.5 * (b - a) * (g(a) + g(b))
    return area


def cell_weights(t_min: float, t_max: float, resolution: int, delta: float = 0.0) -> np.ndarray:
    """Exact area of each grid cell inside ``{(x, y): y - x > delta}``."""
    h = (t_max - t_min) / resolution
    edges = t_min + h * np.arange(resolution + 1)
    x0, x1 = edges[:-1, None], edges[1:, None]
    y0, y1 = edges[None, :-1], edges[None, 1:]
    return halfplane_area(x0, x1, y0, y1, delta)


@dataclass(frozen=True, eq=False)
class RankGrid:
    """Rank function sampled at cell midpoints of a uniform ``G x G`` grid.

    ``values[i, j]`` is β at ``(nodes[i], nodes[j])`` and is only meaningful
    where ``weights[i, j] > 0``; cells below the diagonal carry zero weight.
    ``delta`` records truncation (0 for a plain rank function).
    """

    t_min: float
    t_max: float
    resolution: int
    values: np.ndarray
    weights: np.ndarray
    degree: int = 0
    cap: float | None = None
    delta: float = 0.0

    def __post_init__(self):
        g = self.resolution
        if self.values.shape != (g, g) or self.weights.shape != (g, g):
            raise ValueError("values and weights must be G x G")
        for arr in (self.values, self.weights):
            arr.setflags(write=False)

    @property
    def step(self) -> float:
        return (self.t_max - self.t_min) / self.resolution

    @property
    def nodes(self) -> np.ndarray:
        return self.t_min + self.step * (np.arange(self.resolution) + 0.5)

    def same_geometry(self, other: "RankGrid") -> bool:
        return (self.t_min == other.t_min and self.t_max == other.t_max
                and self.resolution == other.resolution
                and np.array_equal(self.weights, other.weights))

    def norm(self, p: float = 1.0) -> float:
        return float(np.sum(np.abs(self.values) ** p * self.weights) ** (1.0 / p))

    def header(self) -> dict:
        return {"t_min": self.t_min, "t_max": self.t_max, "G": self.resolution,
                "degree": self.degree, "cap": self.cap, "delta": self.delta}


def rank_from_diagram(diagram: PersistenceDiagram, degree: int = 0, t_min: float = 0.0,
                      t_max: float | None = None, resolution: int = 100) -> RankGrid:
    """Sample β of one homology degree on the default midpoint grid.

    ``t_max`` defaults to the diagram cap. Essential classes were capped when
    the diagram was built, so every bar is finite and the grid covers it.
    """
    pts = diagram[degree]
    cap = diagram.cap
    if t_max is None:
        t_max = cap if cap > t_min else (float(pts[:, 1].max()) if len(pts) else t_min + 1.0)
    if not t_min < t_max:
        raise ValueError("need t_min < t_max")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if len(pts) and pts[:, 1].max() > t_max + 1e-12:
        raise ValueError("diagram extends beyond t_max")
    grid = RankGrid(t_min, t_max, resolution, np.zeros((resolution, resolution), np.int64),
                    cell_weights(t_min, t_max, resolution), degree, cap)
    nodes = grid.nodes
    values = np.triu(rank_matrix(pts, nodes, nodes))
    return replace(grid, values=values)


def truncate(grid: RankGrid, delta: float) -> RankGrid:
    """β_δ: keep only the part of the grid strictly above the line ``y = x + delta``.

    Cells cut by the line keep their midpoint value and their weight becomes
    the exact surviving area.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    weights = cell_weights(grid.t_min, grid.t_max, grid.resolution, delta)
    values = np.where(weights > 0, grid.values, 0)
    return replace(grid, values=values, weights=weights, delta=float(delta))


def grid_for(diagrams: Sequence[PersistenceDiagram], degree: int = 0, resolution: int = 100):
    """Common grid bounds ``(t_min, t_max)`` covering several diagrams."""
    lo, hi = 0.0, 0.0
    for d in diagrams:
        pts = d[degree]
        hi = max(hi, d.cap, float(pts[:, 1].max()) if len(pts) else 0.0)
        lo = min(lo, float(pts[:, 0].min()) if len(pts) else 0.0)
    if hi <= lo:
        hi = lo + 1.0
    return lo, hi


def interleaving_nodes(diagram: PersistenceDiagram, degree: int = 0,
                       rng: np.random.Generator | None = None) -> np.ndarray:
    """A sequence whose bins ``(s_{i-1}, s_i]`` each hold exactly one jump value.

    Without ``rng`` the jump values themselves are returned; otherwise each
    ``s_i`` is drawn uniformly in ``[t_i, t_{i+1})``.
    """
    pts = diagram[degree]
    jumps = np.unique(pts.ravel())
    if rng is None or len(jumps) == 0:
        return jumps
    upper = np.append(jumps[1:], jumps[-1] + 1.0)
    return jumps + rng.uniform(0.0, 1.0, len(jumps)) * (upper - jumps)


def exact_lp_distance(d1: PersistenceDiagram, d2: PersistenceDiagram, degree: int = 0,
                      p: float = 1.0, delta: float = 0.0) -> float:
    """Continuum ``||β_δ^1 - β_δ^2||_p`` with no discretization.

    The difference of two rank functions is constant on the rectangles cut out
    by the births (in x) and deaths (in y) of both diagrams, so the integral is
    a finite sum of rectangle areas clipped to ``{y - x > delta}``.
    """
    a, b = d1[degree], d2[degree]
    both = np.vstack([a, b])
    if len(both) == 0:
        return 0.0
    xs = np.unique(both[:, 0])
    ys = np.unique(both[:, 1])
    x_hi = np.append(xs[1:], max(xs[-1], ys[-1]))
    y_lo = np.concatenate([[xs[0]], ys[:-1]])
    y_hi = ys
    # β is constant on [xs[k], x_hi[k]) x [y_lo[l], y_hi[l]) and zero for y >= max death
    diff = np.abs(rank_matrix(a, xs, y_lo) - rank_matrix(b, xs, y_lo)).astype(float)
    area = halfplane_area(xs[:, None], x_hi[:, None], y_lo[None, :], y_hi[None, :], max(delta, 0.0))
    return float(np.sum(diff ** p * area) ** (1.0 / p))


@dataclass(frozen=True, eq=False)
class BiRankGrid:
    """Rank invariant on a bifiltration grid.

    ``values[i, j, k, l]`` is the rank of ``H_q(K[i, j]) -> H_q(K[k, l])`` when
    ``(i, j) <= (k, l)``; other entries are zero and masked by ``comparable``.
    """

    axis1: np.ndarray
    axis2: np.ndarray
    kind: str
    degree: int
    values: np.ndarray

    @property
    def comparable(self) -> np.ndarray:
        n1, n2 = len(self.axis1), len(self.axis2)
        i = np.arange(n1)
        j = np.arange(n2)
        le1 = i[:, None] <= i[None, :]
        le2 = j[:, None] <= j[None, :]
        return le1[:, None, :, None] & le2[None, :, None, :]

    def vector(self) -> np.ndarray:
        """Ranks at comparable pairs in a fixed order, for use as features."""
        return self.values[self.comparable].astype(float)

    def pairs(self):
        for idx in zip(*np.nonzero(self.comparable)):
            yield tuple(int(v) for v in idx), int(self.values[idx])


def worker_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("RANKFN_THREADS", "1") or 1)
    return max(1, int(threads))


def rank_invariant(grid: BifiltrationGrid, degree: int, threads: int | None = None) -> BiRankGrid:
    """Evaluate the rank invariant at every comparable pair of grid cells."""
    n1, n2 = grid.shape
    todo = [(i, j, k, l) for i in range(n1) for j in range(n2)
            for k in range(i, n1) for l in range(j, n2)]

    def one(idx):
        i, j, k, l = idx
        return persistent_betti(grid.complex_at(i, j), grid.complex_at(k, l), degree)

    workers = worker_count(threads)
    if workers == 1:
        ranks = [one(t) for t in todo]
    else:
        with ThreadPoolExecutor(workers) as pool:
            ranks = list(pool.map(one, todo))
    values = np.zeros((n1, n2, n1, n2), dtype=np.int64)
    for idx, r in zip(todo, ranks):
        values[idx] = r
    values.setflags(write=False)
    return BiRankGrid(grid.axis1, grid.axis2, grid.kind, degree, values)


@dataclass(frozen=True, eq=False)
class Landscape:
    k: int
    t: np.ndarray
    values: np.ndarray


def landscape(diagram: PersistenceDiagram, degree: int = 0, k_max: int = 5,
              t=None) -> list[Landscape]:
    """Persistence landscapes λ_1..λ_kmax sampled on ``t``.

    λ_k(t) is the k-th largest tent ``max(0, min(t - b, d - t))`` over the
    bars, which is the largest ``m`` with ``β(t - m, t + m) >= k``.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    pts = diagram[degree]
    if t is None:
        hi = diagram.cap if diagram.cap > 0 else (float(pts[:, 1].max()) if len(pts) else 1.0)
        t = np.linspace(0.0, hi, 201)
    t = np.asarray(t, dtype=float)
    tents = np.maximum(0.0, np.minimum(t[None, :] - pts[:, :1], pts[:, 1:] - t[None, :]))
    tents = -np.sort(-tents, axis=0)
    out = []
    for k in range(1, k_max + 1):
        vals = tents[k - 1] if k <= len(tents) else np.zeros_like(t)
        out.append(Landscape(k, t, vals.copy()))
    return out
