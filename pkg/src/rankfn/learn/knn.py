"""k-nearest-neighbour classification in the weighted L2 metric."""

from __future__ import annotations

import numpy as np

from .dataset import FunctionalDataset, weighted_sqdist


def knn_scores(train: FunctionalDataset, X, k: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """Labels and the fraction of the k neighbours voting +1.

    A tied vote goes to the class of the single nearest neighbour.
    """
    if not 1 <= k <= len(train):
        raise ValueError("k must lie in [1, N]")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d2 = weighted_sqdist(X, train.samples, train.weights)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    votes = train.labels[order]
    plus = (votes == 1).sum(axis=1)
    minus = k - plus
    labels = np.where(plus > minus, 1, -1)
    tie = plus == minus
    labels[tie] = votes[tie, 0]
    return labels, plus / k


def knn_classify(train: FunctionalDataset, X, k: int = 5) -> np.ndarray:
    return knn_scores(train, X, k)[0]
