"""Orthonormal two-dimensional Haar transform of grid functions."""

from __future__ import annotations

import numpy as np

from .dataset import FunctionalDataset

_R2 = np.sqrt(2.0)


def _step(a: np.ndarray, axis: int) -> np.ndarray:
    a = np.moveaxis(a, axis, -1)
    even, odd = a[..., 0::2], a[..., 1::2]
    out = np.concatenate([(even + odd) / _R2, (even - odd) / _R2], axis=-1)
    return np.moveaxis(out, -1, axis)


def _unstep(c: np.ndarray, axis: int) -> np.ndarray:
    c = np.moveaxis(c, axis, -1)
    half = c.shape[-1] // 2
    s, d = c[..., :half], c[..., half:]
    out = np.empty_like(c)
    out[..., 0::2] = (s + d) / _R2
    out[..., 1::2] = (s - d) / _R2
    return np.moveaxis(out, -1, axis)


def haar2d(arr: np.ndarray, depth: int | None = None) -> np.ndarray:
    """Mallat decomposition of a square power-of-two array (last two axes)."""
    out = np.array(arr, dtype=float)
    n = out.shape[-1]
    if out.shape[-2] != n or n & (n - 1):
        raise ValueError("haar2d needs a square power-of-two array")
    full = int(np.log2(n))
    depth = full if depth is None else min(depth, full)
    size = n
    for _ in range(depth):
        block = out[..., :size, :size]
        out[..., :size, :size] = _step(_step(block, -1), -2)
        size //= 2
    return out


def ihaar2d(coeffs: np.ndarray, depth: int | None = None) -> np.ndarray:
    out = np.array(coeffs, dtype=float)
    n = out.shape[-1]
    full = int(np.log2(n))
    depth = full if depth is None else min(depth, full)
    size = n >> (depth - 1) if depth else n
    for _ in range(depth):
        block = out[..., :size, :size]
        out[..., :size, :size] = _unstep(_unstep(block, -2), -1)
        size *= 2
    return out


def pad_to_pow2(grids: np.ndarray) -> np.ndarray:
    g = grids.shape[-1]
    n = 1 << max(0, int(np.ceil(np.log2(g))))
    out = np.zeros(grids.shape[:-2] + (n, n))
    out[..., :g, :g] = grids
    return out


def haar_project(ds: FunctionalDataset, levels: int = 4) -> FunctionalDataset:
    """Keep the coarsest ``levels`` scales of the 2-D Haar transform.

    Rows are reshaped to the ``G x G`` grid recorded in ``grid_meta``, cells
    with zero weight are zeroed, and the grid is zero-padded to a power of
    two. The retained block is the top-left ``2^levels`` square.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    shape = ds.grid_meta.get("shape")
    if shape is None:
        g = int(round(np.sqrt(ds.dim)))
        shape = [g, g]
    g = shape[0]
    if g * g != ds.dim:
        raise ValueError("samples are not square grids")
    grids = np.where(ds.weights > 0, ds.samples, 0.0).reshape(len(ds), g, g)
    coeffs = haar2d(pad_to_pow2(grids))
    keep = min(1 << levels, coeffs.shape[-1])
    flat = coeffs[:, :keep, :keep].reshape(len(ds), -1)
    meta = {"projection": "haar", "levels": levels, "shape": [keep, keep]}
    return FunctionalDataset(flat, ds.labels, np.ones(flat.shape[1]), meta)
