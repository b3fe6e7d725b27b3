"""AUC, stratified cross-validation and classification pipelines."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import rankdata

from .dataset import FunctionalDataset
from .depth import mbd_scores
from .fpca import fit_fpca
from .haar import haar_project
from .kernels import KernelSpec
from .knn import knn_scores
from .svm import svm_train


def auc_roc(scores, labels) -> float:
    """Mann-Whitney estimate of P(score+ > score-), ties counted as one half."""
    scores = np.asarray(scores, dtype=float).ravel()
    labels = np.asarray(labels).ravel()
    pos = labels == 1
    n_pos, n_neg = int(pos.sum()), int((labels == -1).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes")
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def stratified_folds(labels, folds: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Disjoint test-index sets covering all samples, each holding both classes."""
    labels = np.asarray(labels)
    if folds < 2:
        raise ValueError("need at least two folds")
    buckets = [[] for _ in range(folds)]
    for c in (-1, 1):
        idx = np.flatnonzero(labels == c)
        if len(idx) < folds:
            raise ValueError(f"class {c:+d} has {len(idx)} samples, fewer than {folds} folds")
        idx = rng.permutation(idx)
        for k, part in enumerate(np.array_split(idx, folds)):
            buckets[k].extend(part.tolist())
    return [np.sort(np.array(b, dtype=int)) for b in buckets]


@dataclass(frozen=True)
class Pipeline:
    """Projection then classifier, refit on every training fold.

    ``kind``: ``svm``, ``knn`` or ``mbd``. ``proj``: ``none``, ``pca`` or
    ``haar``. Rows are centred by the training-fold mean before SVM or FPCA.
    """

    kind: str = "svm"
    kernel: KernelSpec = field(default_factory=KernelSpec)
    C: float = 1.0
    proj: str = "none"
    var_threshold: float = 0.95
    max_components: int = 30
    levels: int = 4
    k: int = 5
    J: int = 2
    tol: float = 1e-3

    def __post_init__(self):
        if self.kind not in ("svm", "knn", "mbd"):
            raise ValueError(f"unknown pipeline {self.kind!r}")
        if self.proj not in ("none", "pca", "haar"):
            raise ValueError(f"unknown projection {self.proj!r}")

    def _project(self, train: FunctionalDataset, X: np.ndarray):
        if self.proj == "pca":
            basis = fit_fpca(train, self.var_threshold, self.max_components)
            tr = FunctionalDataset(basis.project(train.samples), train.labels, np.ones(basis.count))
            return tr, basis.project(X)
        if self.proj == "haar":
            tr = haar_project(train, self.levels)
            te = haar_project(FunctionalDataset(X, np.ones(len(X)), train.weights, train.grid_meta),
                              self.levels)
            return tr, te.samples
        return train, X

    def __call__(self, train: FunctionalDataset, X) -> tuple[np.ndarray, np.ndarray]:
        """Predicted labels and real-valued scores for the rows of ``X``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.kind == "svm" or self.proj == "pca":
            mean = train.samples.mean(axis=0)
            train = FunctionalDataset(train.samples - mean, train.labels, train.weights, train.grid_meta)
            X = X - mean
        train, X = self._project(train, X)
        if self.kind == "svm":
            model = svm_train(train, self.kernel, self.C, self.tol)
            scores = model.decision(X)
            return np.where(scores >= 0, 1, -1), scores
        if self.kind == "knn":
            labels, frac = knn_scores(train, X, self.k)
            return labels, frac
        return mbd_scores(train, X, self.J)


@dataclass
class EvalReport:
    accuracy: float
    auc_roc: float
    folds: int
    iterations: int
    fold_accuracy: list[float]
    fold_auc: list[float]
    runtime_seconds: float

    def to_dict(self) -> dict:
        return asdict(self)


def cross_validate(ds: FunctionalDataset, pipeline: Callable, folds: int = 5,
                   iterations: int = 10, seed: int = 0) -> EvalReport:
    """Repeated stratified k-fold; accuracy in percent and AUC from scores."""
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    accs, aucs = [], []
    for _ in range(iterations):
        for test in stratified_folds(ds.labels, folds, rng):
            train = np.setdiff1d(np.arange(len(ds)), test)
            labels, scores = pipeline(ds.subset(train), ds.samples[test])
            truth = ds.labels[test]
            accs.append(100.0 * float(np.mean(labels == truth)))
            aucs.append(auc_roc(scores, truth))
    return EvalReport(float(np.mean(accs)), float(np.mean(aucs)), folds, iterations,
                      accs, aucs, time.perf_counter() - start)
