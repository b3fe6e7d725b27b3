"""Empirical checks of the rank-function stability bounds.

Each check compares a grid estimate of ``||β^M - β^N||_p`` (optionally
truncated) against a constant times a diagram distance. Grid quadrature moves
the left side by a discretization error, so apparent violations are re-run on
a finer grid before being reported.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .complexes import Filtration
from .metrics import bottleneck, lp_distance, wasserstein
from .persistence import PersistenceDiagram, reduce_boundary
from .rank import exact_lp_distance, grid_for, rank_from_diagram, truncate

TOLERANCE = 0.02
COARSE_G = 100
FINE_G = 400

HOLDS = "holds"
VIOLATED = "violated"
PRECONDITION_FAILED = "precondition-failed"


@dataclass(frozen=True)
class StabilityReport:
    """One side-by-side evaluation of a stability inequality.

    ``m`` and ``R`` are the point count and maximum persistence of ``M``;
    ``constant_tag`` is ``remark`` for the published closed-form constant and
    ``proof`` for the larger constant the derivation supports.
    """

    bound: str
    lhs: float
    rhs: float
    constant: float
    constant_tag: str
    m: int
    R: float
    metric_value: float
    p: float
    status: str
    resolution: int
    delta: float | None = None
    escalated: bool = False
    exact_lhs: float | None = None

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs

    def to_dict(self) -> dict:
        out = asdict(self)
        # NaN marks an unevaluated side; JSON has no NaN
        out = {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in out.items()}
        out["holds"] = self.holds
        return out


def _summary(diagram: PersistenceDiagram, degree: int) -> tuple[int, float]:
    pers = diagram.persistence(degree)
    return len(pers), float(pers.max()) if len(pers) else 0.0


def _grid_lhs(M, N, degree, p, delta, resolution) -> float:
    lo, hi = grid_for([M, N], degree)
    a = rank_from_diagram(M, degree, lo, hi, resolution)
    b = rank_from_diagram(N, degree, lo, hi, resolution)
    if delta:
        a, b = truncate(a, delta), truncate(b, delta)
    return lp_distance(a, b, p)


def _verdict(M, N, degree, p, delta, rhs):
    """Evaluate lhs on the coarse grid, refining once if it exceeds rhs."""
    lhs = _grid_lhs(M, N, degree, p, delta, COARSE_G)
    if lhs <= rhs:
        return lhs, HOLDS, COARSE_G, False
    lhs = _grid_lhs(M, N, degree, p, delta, FINE_G)
    status = HOLDS if lhs <= rhs * (1 + TOLERANCE) else VIOLATED
    return lhs, status, FINE_G, True


def truncated_constant(M: PersistenceDiagram, p: float, degree: int = 0) -> float:
    m, R = _summary(M, degree)
    return m * (2 * R + 2) ** (1.0 / p)


def eta(M: PersistenceDiagram, delta: float, degree: int = 0) -> float:
    """Radius of the bottleneck ball in which the truncated bound applies."""
    pers = M.persistence(degree)
    return float(min([delta / 2, 1.0, *(pers / 2)]))


def check_truncated_bound(M: PersistenceDiagram, N: PersistenceDiagram, delta: float,
                          p: float = 1.0, degree: int = 0, exact: bool = False) -> StabilityReport:
    """``||β_δ^M - β_δ^N||_p <= m (2R + 2)^{1/p} d_B^{1/p}`` for ``d_B < η``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    m, R = _summary(M, degree)
    d_b = bottleneck(M, N, degree)[0]
    K = truncated_constant(M, p, degree)
    rhs = K * d_b ** (1.0 / p)
    exact_lhs = exact_lp_distance(M, N, degree, p, delta) if exact else None
    if not d_b < eta(M, delta, degree):
        return StabilityReport("truncated", math.nan, rhs, K, "remark", m, R, d_b, p,
                               PRECONDITION_FAILED, 0, delta, exact_lhs=exact_lhs)
    lhs, status, g, esc = _verdict(M, N, degree, p, delta, rhs)
    return StabilityReport("truncated", lhs, rhs, K, "remark", m, R, d_b, p, status, g,
                           delta, esc, exact_lhs)


def wasserstein_constants(M: PersistenceDiagram, p: int, degree: int = 0) -> dict[str, float]:
    """Constants for the W_1 bound, keyed by tag.

    For ``p = 1`` the closed form is ``2R + 2`` but the derivation only
    supports ``2(R + 2)``; both are returned. For ``p = 2`` only one constant exists.
    """
    m, R = _summary(M, degree)
    if p == 1:
        return {"remark": 2 * R + 2, "proof": 2 * (R + 2)}
    if p == 2:
        c2 = 2 * max(math.sqrt(2 * (R + 1) * m), 1 / math.sqrt(2))
        return {"remark": c2, "proof": c2}
    raise ValueError("the W_1 bound covers p = 1 or 2 only")


def check_wasserstein_bound(M: PersistenceDiagram, N: PersistenceDiagram, p: int = 1,
                            degree: int = 0, constant: str = "proof",
                            exact: bool = False) -> StabilityReport:
    """``||β^M - β^N||_p <= C_{M,p} W_1^{1/p}`` for ``W_1 <= 1``."""
    consts = wasserstein_constants(M, p, degree)
    if constant not in consts:
        raise ValueError("constant must be 'remark' or 'proof'")
    C = consts[constant]
    tag = "remark" if p == 2 else constant
    m, R = _summary(M, degree)
    w1 = wasserstein(M, N, degree, 1)[0]
    rhs = C * w1 ** (1.0 / p)
    exact_lhs = exact_lp_distance(M, N, degree, p) if exact else None
    if not w1 <= 1:
        return StabilityReport("wasserstein", math.nan, rhs, C, tag, m, R, w1, p,
                               PRECONDITION_FAILED, 0, exact_lhs=exact_lhs)
    lhs, status, g, esc = _verdict(M, N, degree, p, 0.0, rhs)
    return StabilityReport("wasserstein", lhs, rhs, C, tag, m, R, w1, p, status, g,
                           escalated=esc, exact_lhs=exact_lhs)


def omega_closed_form(b: float, d: float, eps: float) -> float:
    """Area of the symmetric difference of the support triangles of [b,d) and [b-ε,d+ε)."""
    return 2 * (d - b) * eps + 2 * eps ** 2


def default_eps(b: float = 0.0, d: float = 1.0, resolution: int = 200) -> list[float]:
    """Sweep values whose sweep grid puts both bars' endpoints on cell edges.

    With the grid spanning ``[b - ε, d + ε]`` in ``G`` cells, the inner
    endpoints are on edges when ``ε = k (d - b) / (G - 2k)``.
    """
    ks = (1, 2, 5, 10, 20, 25, 40, 50, 60, 66)
    return [k * (d - b) / (resolution - 2 * k) for k in ks]


@dataclass(frozen=True)
class SweepRow:
    eps: float
    p: float
    omega: float
    quadrature: float
    relative_error: float
    C: float
    rhs: float
    violates: bool
    ratio: float


def counterexample_sweep(b: float, d: float, eps_list: Iterable[float] | None = None,
                         p: float = 2.0, resolution: int = 200) -> list[SweepRow]:
    """Tabulate ``ω(D_ε)`` against ``C(b, d) ε^p`` for the widened bar ``[b-ε, d+ε)``."""
    if not b < d:
        raise ValueError("need b < d")
    if eps_list is None:
        eps_list = default_eps(b, d, resolution)
    C = 2 * (d - b + 1)
    rows = []
    for eps in eps_list:
        if not 0 < eps < 1:
            raise ValueError("each eps must lie in (0, 1)")
        omega = omega_closed_form(b, d, eps)
        inner = PersistenceDiagram.from_points([(b, d)], cap=d + eps)
        outer = PersistenceDiagram.from_points([(b - eps, d + eps)], cap=d + eps)
        ga = rank_from_diagram(inner, 0, b - eps, d + eps, resolution)
        gb = rank_from_diagram(outer, 0, b - eps, d + eps, resolution)
        quad = lp_distance(ga, gb, 1.0)
        rhs = C * eps ** p
        rows.append(SweepRow(eps, p, omega, quad, abs(quad - omega) / omega, C, rhs,
                             omega > rhs, omega / eps ** p))
    return rows


def random_diagram(rng: np.random.Generator, max_points: int = 20, birth_max: float = 5.0,
                   pers_max: float = 3.0, min_pers: float = 0.2, degree: int = 0) -> PersistenceDiagram:
    """Sampler for the suites: m ~ U{1..max_points}, births U[0, birth_max],
    persistence U[min_pers, pers_max]."""
    m = int(rng.integers(1, max_points + 1))
    births = rng.uniform(0.0, birth_max, m)
    pers = rng.uniform(min_pers, pers_max, m)
    pts = np.column_stack([births, births + pers])
    return PersistenceDiagram({degree: pts}, float(pts[:, 1].max()))


def perturb_diagram(diagram: PersistenceDiagram, budget: float, mode: str = "bottleneck",
                    seed=None, degree: int = 0, inject: int | None = None) -> PersistenceDiagram:
    """Random diagram within ``budget`` of ``diagram``.

    ``bottleneck``: every coordinate moves by at most ``budget`` and injected
    points have persistence below ``2 * budget``. ``wasserstein1``: the total
    l1 movement plus the persistence of injected points (their l1 cost to the
    diagonal) stays within ``budget``. Points never reach the diagonal.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    pts = diagram[degree].copy()
    if budget == 0:
        return diagram
    rng = np.random.default_rng(seed)
    n = len(pts)
    if inject is None:
        inject = int(rng.integers(0, 4))
    lo = float(pts[:, 0].min()) if n else 0.0
    hi = float(pts[:, 1].max()) if n else 1.0
    if mode == "bottleneck":
        shift = rng.uniform(-budget, budget, (n, 2))
        new = _keep_off_diagonal(pts, pts + shift)
        centers = rng.uniform(lo, hi, inject)
        pers = rng.uniform(0.0, 2 * budget, inject) * (1 - 1e-9)
    elif mode == "wasserstein1":
        shares = rng.dirichlet(np.ones(2 * n + inject + 1)) * budget * (1 - 1e-9)
        move = shares[:2 * n].reshape(n, 2) * rng.choice([-1.0, 1.0], (n, 2))
        new = _keep_off_diagonal(pts, pts + move)
        centers = rng.uniform(lo, hi, inject)
        pers = shares[2 * n:2 * n + inject]
    else:
        raise ValueError("mode must be 'bottleneck' or 'wasserstein1'")
    keep = pers > 0
    extra = np.column_stack([centers - pers / 2, centers + pers / 2])[keep]
    out = np.vstack([new, extra])
    cap = max(diagram.cap, float(out[:, 1].max()) if len(out) else 0.0)
    pairs = dict(diagram.pairs)
    pairs[degree] = out
    return PersistenceDiagram(pairs, cap)


def _keep_off_diagonal(old: np.ndarray, new: np.ndarray) -> np.ndarray:
    # shrink any move that would close a bar, toward the original point
    new = new.copy()
    bad = new[:, 1] <= new[:, 0]
    while np.any(bad):
        new[bad] = (old[bad] + new[bad]) / 2
        bad = new[:, 1] <= new[:, 0]
    return new


@dataclass
class SuiteResult:
    reports: list[StabilityReport] = field(default_factory=list)

    @property
    def admissible(self) -> list[StabilityReport]:
        return [r for r in self.reports if r.status != PRECONDITION_FAILED]

    @property
    def violations(self) -> list[StabilityReport]:
        return [r for r in self.reports if r.status == VIOLATED]

    @property
    def max_ratio(self) -> float:
        return max((r.ratio for r in self.admissible), default=0.0)


def truncated_suite(trials: int = 200, ps: Sequence[float] = (1.0, 2.0),
                    deltas: Sequence[float] = (0.25, 0.5, 1.0), seed: int = 0) -> SuiteResult:
    """Random admissible triples ``(M, N, δ)`` with ``d_B(M, N) < η``."""
    rng = np.random.default_rng(seed)
    out = SuiteResult()
    for t in range(trials):
        M = random_diagram(rng)
        delta = deltas[t % len(deltas)]
        e = eta(M, delta)
        N = perturb_diagram(M, rng.uniform(e / 2, e) * (1 - 1e-9), "bottleneck", rng)
        for p in ps:
            out.reports.append(check_truncated_bound(M, N, delta, p))
    return out


def wasserstein_suite(trials: int = 200, ps: Sequence[int] = (1, 2), seed: int = 0,
                      constant: str = "proof") -> SuiteResult:
    """Random admissible pairs with ``W_1(M, N) <= 1``."""
    rng = np.random.default_rng(seed)
    out = SuiteResult()
    for _ in range(trials):
        M = random_diagram(rng)
        N = perturb_diagram(M, rng.uniform(0.05, 1.0), "wasserstein1", rng)
        for p in ps:
            out.reports.append(check_wasserstein_bound(M, N, p, constant=constant))
    return out


def cellular_diagrams(simplices: Sequence[Sequence[int]], values: Sequence[float]
                      ) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Finite pairs and essential births per degree of a monotone function on a complex.

    Nothing is capped here: essential classes keep an infinite death and are
    returned separately as birth values.
    """
    filt = Filtration.from_simplices(simplices, values)
    pairs, essential = reduce_boundary(filt, filt.max_dim, method="homology")
    vals, dims = filt.values, filt.dims
    out: dict[int, tuple[list, list]] = {q: ([], []) for q in range(filt.max_dim + 1)}
    for b, d in pairs:
        if vals[b] < vals[d]:
            out[int(dims[b])][0].append((vals[b], vals[d]))
    for e in essential:
        out[int(dims[e])][1].append(vals[e])
    return {q: (np.array(f, dtype=float).reshape(-1, 2), np.sort(np.array(e, dtype=float)))
            for q, (f, e) in out.items()}


def cellular_wasserstein(f_dgms, g_dgms, p: float) -> float:
    """Total W_p over all degrees, essential classes matched by sorted birth."""
    total = 0.0
    for q in f_dgms:
        fa, fe = f_dgms[q]
        ga, ge = g_dgms[q]
        if len(fe) != len(ge):
            raise ValueError("essential classes differ in number")
        w = wasserstein(PersistenceDiagram({0: fa}), PersistenceDiagram({0: ga}), 0, p)[0]
        total += w ** p + float(np.sum(np.abs(fe - ge) ** p))
    return total ** (1.0 / p)


def random_monotone(simplices: Sequence[Sequence[int]], rng: np.random.Generator,
                    scale: float = 1.0) -> np.ndarray:
    """Values with every simplex at or above its faces: face max plus a random increment."""
    order = sorted(range(len(simplices)), key=lambda i: len(simplices[i]))
    index = {tuple(simplices[i]): i for i in range(len(simplices))}
    vals = np.zeros(len(simplices))
    for i in order:
        s = tuple(simplices[i])
        base = max((vals[index[s[:k] + s[k + 1:]]] for k in range(len(s))), default=0.0) if len(s) > 1 else 0.0
        vals[i] = base + rng.exponential(scale)
    return vals
