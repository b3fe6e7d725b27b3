"""Slow, independent reference implementations used only by the tests.

Nothing here calls the reduction, matching or SMO code under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import minimize_scalar


# ---- linear algebra over Z/2 ------------------------------------------------

def gf2_rank(M) -> int:
    A = np.array(M, dtype=bool)
    if A.size == 0:
        return 0
    r = 0
    for c in range(A.shape[1]):
        hits = np.flatnonzero(A[r:, c])
        if len(hits) == 0:
            continue
        p = r + hits[0]
        A[[r, p]] = A[[p, r]]
        others = A[:, c].copy()
        others[r] = False
        A[others] ^= A[r]
        r += 1
        if r == A.shape[0]:
            break
    return r


def gf2_nullspace(M) -> np.ndarray:
    """Columns spanning ``{x : M x = 0}`` over Z/2."""
    A = np.array(M, dtype=bool)
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hits = np.flatnonzero(A[r:, c])
        if len(hits) == 0:
            continue
        p = r + hits[0]
        A[[r, p]] = A[[p, r]]
        others = A[:, c].copy()
        others[r] = False
        A[others] ^= A[r]
        pivots.append(c)
        r += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((cols, len(free)), dtype=bool)
    for k, f in enumerate(free):
        basis[f, k] = True
        for row, pc in enumerate(pivots):
            basis[pc, k] = A[row, f]
    return basis


def boundary_matrix(rows: list[tuple], cols: list[tuple]) -> np.ndarray:
    index = {s: i for i, s in enumerate(rows)}
    M = np.zeros((len(rows), len(cols)), dtype=bool)
    for j, s in enumerate(cols):
        if len(s) == 1:
            continue
        for k in range(len(s)):
            M[index[s[:k] + s[k + 1:]], j] = True
    return M


def image_rank(small: list[tuple], big: list[tuple], q: int) -> int:
    """Rank of ``H_q(small) -> H_q(big)`` by explicit cycle and boundary spaces."""
    cq_big = sorted(s for s in big if len(s) == q + 1)
    cq_small = [s for s in cq_big if s in set(small)]
    faces = sorted(s for s in big if len(s) == q)
    cofaces = sorted(s for s in big if len(s) == q + 2)
    if not cq_small:
        return 0
    if q == 0:
        Z = np.eye(len(cq_small), dtype=bool)
    else:
        Z = gf2_nullspace(boundary_matrix(faces, cq_small))
    pos = {s: i for i, s in enumerate(cq_big)}
    Zbig = np.zeros((len(cq_big), Z.shape[1]), dtype=bool)
    for i, s in enumerate(cq_small):
        Zbig[pos[s]] = Z[i]
    B = boundary_matrix(cq_big, cofaces) if cofaces else np.zeros((len(cq_big), 0), dtype=bool)
    return gf2_rank(np.hstack([Zbig, B])) - gf2_rank(B)


def brute_diagram(simplices, values, max_degree: int) -> dict[int, list[tuple[float, float]]]:
    """Diagram from persistent Betti numbers of every pair of sublevel sets.

    Bars are half-open; essential classes are capped at the largest value and
    zero-length bars are dropped.
    """
    simplices = [tuple(sorted(s)) for s in simplices]
    levels = sorted(set(values))
    T = len(levels)
    sub = [[s for s, v in zip(simplices, values) if v <= t] for t in levels]
    out = {}
    for q in range(max_degree + 1):
        beta = np.zeros((T + 1, T + 1), dtype=int)  # index 0 means "before everything"
        for a in range(1, T + 1):
            for b in range(a, T + 1):
                beta[a, b] = image_rank(sub[a - 1], sub[b - 1], q)
        pts = []
        for a in range(1, T + 1):
            for b in range(a + 1, T + 1):
                mu = beta[a, b - 1] - beta[a - 1, b - 1] - beta[a, b] + beta[a - 1, b]
                pts += [(levels[a - 1], levels[b - 1])] * mu
            essential = beta[a, T] - beta[a - 1, T]
            if a < T:
                pts += [(levels[a - 1], levels[-1])] * essential
        out[q] = sorted(pts)
    return out


# ---- diagram matchings ------------------------------------------------------

def _diag_cost(pt, p) -> float:
    b, d = pt
    if math.isinf(p):
        return (d - b) / 2
    # nearest point (t, t) under the l^p norm, found numerically
    res = minimize_scalar(lambda t: abs(b - t) ** p + abs(d - t) ** p, bounds=(b, d),
                          method="bounded", options={"xatol": 1e-12})
    return min(res.fun, abs(b - (b + d) / 2) ** p + abs(d - (b + d) / 2) ** p)


def _pair_cost(x, y, p) -> float:
    if math.isinf(p):
        return max(abs(x[0] - y[0]), abs(x[1] - y[1]))
    return abs(x[0] - y[0]) ** p + abs(x[1] - y[1]) ** p


def brute_matching_distance(a, b, p: float) -> float:
    """Exhaustive search over partial injections; ``p = inf`` is the bottleneck."""
    a = [tuple(map(float, x)) for x in a]
    b = [tuple(map(float, x)) for x in b]
    da = [_diag_cost(x, p) for x in a]
    db = [_diag_cost(y, p) for y in b]
    best = math.inf
    for k in range(min(len(a), len(b)) + 1):
        for rows in itertools.combinations(range(len(a)), k):
            for cols in itertools.permutations(range(len(b)), k):
                costs = [_pair_cost(a[i], b[j], p) for i, j in zip(rows, cols)]
                costs += [da[i] for i in range(len(a)) if i not in rows]
                costs += [db[j] for j in range(len(b)) if j not in cols]
                total = max(costs, default=0.0) if math.isinf(p) else sum(costs)
                best = min(best, total)
    return best if math.isinf(p) else best ** (1.0 / p)


# ---- learning ---------------------------------------------------------------

def brute_dual(Q: np.ndarray, y: np.ndarray, C: float) -> float:
    """Max of ``sum(a) - a'Qa/2`` on ``0 <= a <= C``, ``y'a = 0`` by active-set enumeration.

    Every optimum is the maximiser of the objective on the affine face fixed
    by which coordinates sit at 0, at C, or are free; each face is solved with
    its KKT linear system and kept if feasible.
    """
    n = len(y)
    y = y.astype(float)
    best = -math.inf
    for state in itertools.product((0, 1, 2), repeat=n):
        state = np.array(state)
        free = np.flatnonzero(state == 2)
        alpha = np.where(state == 1, C, 0.0)
        if len(free):
            F = free
            fixed = np.flatnonzero(state != 2)
            k = len(F)
            A = np.zeros((k + 1, k + 1))
            A[:k, :k] = Q[np.ix_(F, F)]
            A[:k, k] = y[F]
            A[k, :k] = y[F]
            rhs = np.zeros(k + 1)
            rhs[:k] = 1.0 - Q[np.ix_(F, fixed)] @ alpha[fixed]
            rhs[k] = -y[fixed] @ alpha[fixed]
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if np.abs(A @ sol - rhs).max() > 1e-8:
                continue
            alpha[F] = sol[:k]
        if abs(y @ alpha) > 1e-9 or alpha.min() < -1e-9 or alpha.max() > C + 1e-9:
            continue
        best = max(best, float(alpha.sum() - 0.5 * alpha @ Q @ alpha))
    return best


def brute_mbd(f, curves, weights, J: int) -> float:
    """Sum over j = 2..J of the mean weighted fraction inside each j-band."""
    f = np.asarray(f, dtype=float)
    curves = np.asarray(curves, dtype=float)
    w = np.asarray(weights, dtype=float)
    total = 0.0
    for j in range(2, J + 1):
        fracs = []
        for idx in itertools.combinations(range(len(curves)), j):
            band = curves[list(idx)]
            inside = (band.min(axis=0) <= f) & (f <= band.max(axis=0))
            fracs.append(float(w[inside].sum() / w.sum()))
        total += sum(fracs) / len(fracs)
    return total


def pair_auc(scores, labels) -> float:
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == -1]
    wins = 0.0
    for sp in pos:
        for sn in neg:
            wins += 1.0 if sp > sn else 0.5 if sp == sn else 0.0
    return wins / (len(pos) * len(neg))


def loop_distance_matrix(points) -> np.ndarray:
    n = len(points)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = math.sqrt(sum((a - b) ** 2 for a, b in zip(points[i], points[j])))
    return out
