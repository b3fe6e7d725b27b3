"""Kernels on weighted function spaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import weighted_gram, weighted_sqdist

KINDS = ("linear", "polynomial", "grbf")


@dataclass(frozen=True)
class KernelSpec:
    """``linear``: <f,g>; ``polynomial``: (<f,g> + 1)^degree; ``grbf``: exp(-gamma ||f-g||^2).

    ``gamma=None`` is resolved at training time to ``1 / (D * var)`` where
    ``var`` is the variance of the weighted training features.
    """

    kind: str = "linear"
    degree: int = 2
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind == "polynomial" and self.degree < 1:
            raise ValueError("polynomial degree must be >= 1")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be positive")

    def resolve(self, X: np.ndarray, weights: np.ndarray) -> "KernelSpec":
        if self.kind != "grbf" or self.gamma is not None:
            return self
        active = weights > 0
        feats = X[:, active] * np.sqrt(weights[active])
        var = float(feats.var())
        gamma = 1.0 / (max(active.sum(), 1) * var) if var > 0 else 1.0
        return KernelSpec(self.kind, self.degree, gamma)

    def __call__(self, A: np.ndarray, B: np.ndarray, weights: np.ndarray) -> np.ndarray:
        if self.kind == "linear":
            return weighted_gram(A, B, weights)
        if self.kind == "polynomial":
            return (weighted_gram(A, B, weights) + 1.0) ** self.degree
        if self.gamma is None:
            raise ValueError("grbf kernel needs gamma; call resolve() first")
        return np.exp(-self.gamma * weighted_sqdist(A, B, weights))
