"""Functional principal components under the weighted inner product."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FunctionalDataset


@dataclass(frozen=True, eq=False)
class FpcaBasis:
    """Mean function plus components orthonormal in ``<f, g> = sum w f g``.

    ``eigenvalues`` covers every component of the sample covariance;
    ``count`` is how many are retained.
    """

    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    weights: np.ndarray
    count: int
    threshold_reached: bool

    @property
    def explained(self) -> np.ndarray:
        total = self.eigenvalues.sum()
        return np.cumsum(self.eigenvalues) / total if total > 0 else np.ones_like(self.eigenvalues)

    def project(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return ((X - self.mean) * self.weights) @ self.components[:self.count].T

    def reconstruct(self, scores) -> np.ndarray:
        scores = np.atleast_2d(scores)
        k = scores.shape[1]
        return self.mean + scores @ self.components[:k]


def fit_fpca(ds: FunctionalDataset, var_threshold: float = 0.95,
             max_components: int = 30) -> FpcaBasis:
    if len(ds) < 2:
        raise ValueError("FPCA needs at least two samples")
    if not 0 < var_threshold <= 1:
        raise ValueError("var_threshold must lie in (0, 1]")
    w = ds.weights
    active = w > 0
    mean = ds.samples.mean(axis=0)
    Z = (ds.samples - mean)[:, active] * np.sqrt(w[active])
    _, s, vt = np.linalg.svd(Z, full_matrices=False)
    eig = s ** 2 / (len(ds) - 1)
    rank = int(np.sum(eig > eig.max(initial=0.0) * 1e-12)) if len(eig) else 0
    eig, vt = eig[:rank], vt[:rank]
    comps = np.zeros((rank, ds.dim))
    comps[:, active] = vt / np.sqrt(w[active])
    total = eig.sum()
    cum = np.cumsum(eig) / total if total > 0 else np.ones(rank)
    need = int(np.searchsorted(cum, var_threshold - 1e-12) + 1) if rank else 0
    reached = need <= max_components
    count = min(need, max_components, rank)
    return FpcaBasis(mean, comps, eig, w, count, reached)


def fpca(ds: FunctionalDataset, var_threshold: float = 0.95,
         max_components: int = 30) -> tuple[FpcaBasis, FunctionalDataset]:
    """Fit the basis and return the scores as a new dataset."""
    basis = fit_fpca(ds, var_threshold, max_components)
    scores = basis.project(ds.samples)
    meta = {"projection": "fpca", "components": basis.count,
            "threshold_reached": basis.threshold_reached}
    return basis, FunctionalDataset(scores, ds.labels, np.ones(basis.count), meta)
