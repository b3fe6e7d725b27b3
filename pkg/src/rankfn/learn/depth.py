"""Modified band depth of discretized functions."""

from __future__ import annotations

from math import comb

import numpy as np

from .dataset import FunctionalDataset


def _band_counts(f: np.ndarray, curves: np.ndarray, j: int) -> np.ndarray:
    # subsets of size j whose pointwise band contains f (inclusive)
    n = len(curves)
    below = (curves < f).sum(axis=0)
    above = (curves > f).sum(axis=0)
    return np.array([comb(n, j) - comb(int(b), j) - comb(int(a), j) for b, a in zip(below, above)],
                    dtype=float)


def mbd_terms(f, curves, weights, J: int = 2) -> np.ndarray:
    """``MBD^(j)`` for ``j = 2..J``: the weighted domain fraction inside the band,
    averaged over all size-j subsets of ``curves``."""
    curves = np.atleast_2d(np.asarray(curves, dtype=float))
    f = np.asarray(f, dtype=float).ravel()
    n = len(curves)
    if J < 2:
        raise ValueError("J must be >= 2")
    if n < J:
        raise ValueError(f"collection has {n} functions, fewer than J = {J}")
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must have positive total")
    return np.array([np.dot(w, _band_counts(f, curves, j)) / (comb(n, j) * total)
                     for j in range(2, J + 1)])


def mbd(f, collection: FunctionalDataset, J: int = 2) -> float:
    """Modified band depth of ``f`` with respect to ``collection``."""
    return float(mbd_terms(f, collection.samples, collection.weights, J).sum())


def mbd_scores(train: FunctionalDataset, X, J: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Labels by deepest class and the score depth(+) - depth(-).

    Ties go to the larger class, then to +1.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    plus = train.subset(train.labels == 1)
    minus = train.subset(train.labels == -1)
    if len(plus) == 0 or len(minus) == 0:
        raise ValueError("both classes must be present")
    dp = np.array([mbd(x, plus, J) for x in X])
    dm = np.array([mbd(x, minus, J) for x in X])
    labels = np.where(dp > dm, 1, -1)
    tie_label = 1 if len(plus) >= len(minus) else -1
    labels[dp == dm] = tie_label
    return labels, dp - dm


def mbd_classify(train: FunctionalDataset, X, J: int = 2) -> np.ndarray:
    return mbd_scores(train, X, J)[0]
