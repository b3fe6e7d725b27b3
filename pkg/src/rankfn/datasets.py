"""Synthetic point clouds with known topology."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .complexes import distance_matrix, vietoris_rips
from .learn import from_rank_grids
from .persistence import PersistenceDiagram, persistence_diagram
from .rank import grid_for, rank_from_diagram, worker_count


def torus(n: int, rng: np.random.Generator, R: float = 2.0, r: float = 1.0) -> np.ndarray:
    """Uniform sample of the surface area of a torus in R^3 (rejection on the tube angle)."""
    out = np.empty((0, 3))
    while len(out) < n:
        m = 2 * (n - len(out)) + 16
        u = rng.uniform(0, 2 * np.pi, m)
        v = rng.uniform(0, 2 * np.pi, m)
        keep = rng.uniform(0, 1, m) <= (R + r * np.cos(u)) / (R + r)
        u, v = u[keep], v[keep]
        ring = R + r * np.cos(u)
        out = np.vstack([out, np.column_stack([ring * np.cos(v), ring * np.sin(v), r * np.sin(u)])])
    return out[:n]


def sphere(n: int, rng: np.random.Generator, radius: float = 1.0) -> np.ndarray:
    x = rng.normal(size=(n, 3))
    return radius * x / np.linalg.norm(x, axis=1, keepdims=True)


def noisy_circle(n: int, rng: np.random.Generator, radius: float = 1.0,
                 noise: float = 0.1) -> np.ndarray:
    t = rng.uniform(0, 2 * np.pi, n)
    pts = radius * np.column_stack([np.cos(t), np.sin(t)])
    return pts + rng.normal(0, noise, pts.shape)


def noisy_disc(n: int, rng: np.random.Generator, radius: float = 1.0,
               noise: float = 0.1) -> np.ndarray:
    t = rng.uniform(0, 2 * np.pi, n)
    rad = radius * np.sqrt(rng.uniform(0, 1, n))
    pts = np.column_stack([rad * np.cos(t), rad * np.sin(t)])
    return pts + rng.normal(0, noise, pts.shape)


def circles_and_discs(per_class: int, rng: np.random.Generator, n_points: int = 60,
                      noise: float = 0.1, radius_range: tuple[float, float] = (0.6, 1.4)
                      ) -> tuple[list[np.ndarray], np.ndarray]:
    """Point clouds labelled +1 (noisy circle) and -1 (noisy disc), random radii."""
    clouds, labels = [], []
    for label, make in ((1, noisy_circle), (-1, noisy_disc)):
        for _ in range(per_class):
            radius = rng.uniform(*radius_range)
            clouds.append(make(n_points, rng, radius, noise))
            labels.append(label)
    return clouds, np.array(labels)


def cloud_diagrams(clouds, max_dim: int = 2, max_scale: float = np.inf, threads: int | None = None):
    """Rips persistence diagram of each point cloud."""
    def one(c):
        return persistence_diagram(vietoris_rips(distance_matrix(c), max_dim, max_scale))

    workers = worker_count(threads)
    if workers == 1:
        return [one(c) for c in clouds]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(one, clouds))


def rank_dataset(diagrams, labels, degree: int = 1, resolution: int = 50,
                 bounds: tuple[float, float] | None = None):
    """FunctionalDataset of rank grids on one common grid covering all diagrams."""
    lo, hi = bounds if bounds is not None else grid_for(diagrams, degree)
    grids = [rank_from_diagram(PersistenceDiagram({degree: d[degree]}, hi), degree, lo, hi, resolution)
             for d in diagrams]
    return from_rank_grids(grids, labels)


def circles_and_discs_dataset(per_class: int = 40, seed: int = 0, resolution: int = 50,
                              max_scale: float = 2.0, threads: int | None = None):
    """H1 rank functions of noisy circles (+1) and noisy discs (-1)."""
    clouds, labels = circles_and_discs(per_class, np.random.default_rng(seed))
    dgms = cloud_diagrams(clouds, 2, max_scale, threads)
    return rank_dataset(dgms, labels, 1, resolution, (0.0, max_scale))
