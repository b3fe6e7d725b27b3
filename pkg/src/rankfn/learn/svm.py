"""Soft-margin SVM trained by sequential minimal optimization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FunctionalDataset
from .kernels import KernelSpec

_TAU = 1e-12


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (KKT residual {residual:.3g})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class SvmModel:
    """Trained classifier; decision(f) = sum_i alpha_i y_i K(x_i, f) + bias."""

    alpha: np.ndarray
    labels: np.ndarray
    rows: np.ndarray
    bias: float
    C: float
    kernel: KernelSpec
    weights: np.ndarray
    slack: np.ndarray
    kkt_residual: float
    iterations: int

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.alpha > 0)

    def decision(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.rows.shape[1]:
            raise ValueError("sample dimension does not match the model")
        sv = self.support
        K = self.kernel(X, self.rows[sv], self.weights)
        return K @ (self.alpha[sv] * self.labels[sv]) + self.bias

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision(X) >= 0, 1, -1)


def dual_objective(alpha: np.ndarray, Q: np.ndarray) -> float:
    return float(alpha.sum() - 0.5 * alpha @ Q @ alpha)


def _masks(alpha, y, C):
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    return up, low


def _violating_pair(alpha, grad, y, C, Q=None):
    # minimization form: f(a) = a'Qa/2 - e'a, with -y*grad the KKT score
    score = -y * grad
    up, low = _masks(alpha, y, C)
    if not up.any() or not low.any():
        return -1, -1, 0.0
    i = int(np.flatnonzero(up)[np.argmax(score[up])])
    j = int(np.flatnonzero(low)[np.argmin(score[low])])
    gap = float(score[i] - score[j])
    if Q is not None:
        # second-order choice of j: largest guaranteed decrease of the objective
        cand = np.flatnonzero(low & (score < score[i]))
        if len(cand):
            b = score[i] - score[cand]
            a = Q[i, i] + np.diag(Q)[cand] - 2 * y[i] * y[cand] * Q[i, cand]
            j = int(cand[np.argmax(b * b / np.maximum(a, _TAU))])
    return i, j, gap


def smo(Q: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3, max_iter: int = 100000,
        trace: list | None = None) -> tuple[np.ndarray, float, float, int]:
    """Solve ``max sum(a) - a'Qa/2`` s.t. ``0 <= a <= C``, ``y'a = 0``.

    ``i`` is the maximal violator and ``j`` the second-order partner. Returns
    ``(alpha, bias, kkt_residual, iterations)``.
    """
    n = len(y)
    y = y.astype(float)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    diag = np.diag(Q)
    for it in range(max_iter):
        i, j, gap = _violating_pair(alpha, grad, y, C, Q)
        if i < 0 or gap < tol:
            break
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(diag[i] + diag[j] + 2 * Q[i, j], _TAU)
            delta = (-grad[i] - grad[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = max(diag[i] + diag[j] - 2 * Q[i, j], _TAU)
            delta = (grad[i] - grad[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        grad += Q[:, i] * (ni - ai) + Q[:, j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj
        if trace is not None:
            trace.append(dual_objective(alpha, Q))
    else:
        _, _, gap = _violating_pair(alpha, grad, y, C)
        raise ConvergenceError("SMO did not converge", gap)
    _, _, gap = _violating_pair(alpha, grad, y, C)
    score = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(score[free].mean())
    else:
        up, low = _masks(alpha, y, C)
        bias = float((score[up].max(initial=-np.inf) + score[low].min(initial=np.inf)) / 2)
        if not np.isfinite(bias):
            bias = 0.0
    return alpha, bias, max(gap, 0.0), it


def svm_train(ds: FunctionalDataset, kernel: KernelSpec | None = None, C: float = 1.0,
              tol: float = 1e-3, max_iter: int | None = None) -> SvmModel:
    """Fit a soft-margin SVM with the weighted inner product of ``ds``."""
    if not C > 0:
        raise ValueError("C must be positive")
    counts = ds.class_counts()
    if min(counts.values()) < 1:
        raise ValueError("training data must contain both classes")
    if min(counts.values()) < 2:
        raise ValueError("need at least two samples per class")
    kernel = (kernel or KernelSpec()).resolve(ds.samples, ds.weights)
    X, y = ds.samples, ds.labels
    K = kernel(X, X, ds.weights)
    Q = (y[:, None] * y[None, :]) * K
    if max_iter is None:
        max_iter = max(10 * len(y) * ds.dim, 1000)
    alpha, bias, resid, iters = smo(Q, y, C, tol, max_iter)
    alpha = np.where(alpha < 1e-12 * C, 0.0, alpha)
    f = K @ (alpha * y) + bias
    slack = np.maximum(0.0, 1 - y * f)
    return SvmModel(alpha, y.copy(), X.copy(), bias, C, kernel, ds.weights, slack, resid, iters)


def svm_decision(model: SvmModel, X) -> np.ndarray:
    return model.decision(X)


def svm_predict(model: SvmModel, X) -> np.ndarray:
    return model.predict(X)
