"""Discretized functions with labels and quadrature weights."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class FunctionalDataset:
    """Rows are discretized functions on a shared grid.

    ``weights`` are the quadrature weights of the grid cells, so that
    ``(a * weights) @ b`` approximates the L2 inner product. Cells outside the
    domain carry weight zero.
    """

    samples: np.ndarray
    labels: np.ndarray
    weights: np.ndarray
    grid_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.samples, dtype=float)
        if X.ndim != 2:
            raise ValueError("samples must be an (N, D) array")
        y = np.asarray(self.labels).astype(int).ravel()
        w = np.asarray(self.weights, dtype=float).ravel()
        if len(y) != len(X):
            raise ValueError("one label per sample required")
        if not np.all(np.isin(y, (-1, 1))):
            raise ValueError("labels must be -1 or +1")
        if len(w) != X.shape[1]:
            raise ValueError("one weight per column required")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        object.__setattr__(self, "samples", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def subset(self, idx) -> "FunctionalDataset":
        idx = np.asarray(idx)
        return replace(self, samples=self.samples[idx], labels=self.labels[idx])

    def class_counts(self) -> dict[int, int]:
        return {c: int(np.sum(self.labels == c)) for c in (-1, 1)}


def from_rank_grids(grids: Sequence, labels: Sequence[int]) -> FunctionalDataset:
    """Flatten rank grids sharing one geometry into a dataset."""
    if not grids:
        raise ValueError("no rank grids given")
    first = grids[0]
    for g in grids[1:]:
        if not first.same_geometry(g) or g.delta != first.delta:
            raise ValueError("rank grids have different geometry")
    X = np.stack([g.values.ravel() for g in grids]).astype(float)
    meta = first.header() | {"shape": [first.resolution, first.resolution]}
    return FunctionalDataset(X, np.asarray(labels), first.weights.ravel(), meta)


def weighted_gram(A: np.ndarray, B: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Matrix of weighted inner products ``sum_k w_k a_k b_k``."""
    return (A * weights) @ B.T


def weighted_sqdist(A: np.ndarray, B: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Squared weighted L2 distances between the rows of ``A`` and ``B``."""
    root = np.sqrt(weights)
    a, b = A * root, B * root
    d2 = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2 * a @ b.T
    return np.maximum(d2, 0.0)
