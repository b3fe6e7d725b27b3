import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_matching_distance
from rankfn.metrics import (
    DIAGONAL,
    MatchingCertificate,
    augmented_cost,
    bottleneck,
    combined_distance,
    landscape_distance,
    lp_distance,
    wasserstein,
)
from rankfn.persistence import PersistenceDiagram
from rankfn.rank import landscape, rank_from_diagram, truncate

BAR = PersistenceDiagram.from_points([(0.0, 2.0)])
EMPTY = PersistenceDiagram({}, 2.0)


def dgm(points):
    return PersistenceDiagram({0: np.asarray(points, dtype=float).reshape(-1, 2)})


def random_dgm(rng, m_max=6):
    m = int(rng.integers(0, m_max + 1))
    b = rng.uniform(0, 5, m)
    return dgm(np.column_stack([b, b + rng.uniform(0.05, 3, m)]))


class TestLpDistance:
    def test_identical(self):
        g = rank_from_diagram(BAR, 0)
        assert lp_distance(g, g, 1) == 0.0

    def test_bar_against_empty(self):
        a = rank_from_diagram(BAR, 0)
        b = rank_from_diagram(EMPTY, 0, 0, 2.0)
        assert abs(lp_distance(a, b, 1) - 2.0) < 1e-12
        assert abs(lp_distance(a, b, 2) - np.sqrt(2.0)) < 1e-12

    def test_geometry_mismatch(self):
        with pytest.raises(ValueError):
            lp_distance(rank_from_diagram(BAR, 0), rank_from_diagram(BAR, 0, resolution=50))
        g = rank_from_diagram(BAR, 0)
        with pytest.raises(ValueError):
            lp_distance(g, truncate(g, 0.5))

    def test_p_below_one(self):
        g = rank_from_diagram(BAR, 0)
        with pytest.raises(ValueError):
            lp_distance(g, g, 0.5)


class TestBottleneck:
    def test_direct_match(self):
        assert bottleneck(BAR, dgm([(0, 2.5)]))[0] == 0.5

    def test_against_empty(self):
        assert bottleneck(BAR, EMPTY)[0] == 1.0

    def test_identical(self):
        d = dgm([(0, 1), (0.5, 3), (2, 2.2)])
        assert bottleneck(d, d)[0] == 0.0

    def test_both_empty(self):
        assert bottleneck(EMPTY, EMPTY)[0] == 0.0

    def test_certificate_for_diagonal(self):
        value, cert = bottleneck(dgm([(0, 4), (1, 1.2)]), dgm([(0, 4)]))
        assert value == pytest.approx(0.1)
        assert (1, DIAGONAL) in cert.pairs and cert.is_valid()


class TestWasserstein:
    def test_direct_match(self):
        assert wasserstein(BAR, dgm([(0, 2.5)]), 0, 1)[0] == 0.5

    def test_against_empty_l1_ground_norm(self):
        # ℓ¹ distance from (0, 2) to its nearest diagonal point (1, 1) is 2
        assert wasserstein(BAR, EMPTY, 0, 1)[0] == 2.0
        assert wasserstein(dgm([(0, 1)]), EMPTY, 0, 1)[0] == 1.0

    def test_against_empty_l2(self):
        assert wasserstein(BAR, EMPTY, 0, 2)[0] == pytest.approx(np.sqrt(2.0), abs=1e-15)

    def test_bad_p(self):
        with pytest.raises(ValueError):
            wasserstein(BAR, BAR, 0, 0.5)
        with pytest.raises(ValueError):
            wasserstein(BAR, BAR, 0, np.inf)

    def test_augmented_cost_shape(self):
        cost = augmented_cost(np.array([[0.0, 2.0]]), np.empty((0, 2)), 1.0)
        assert cost.shape == (1, 1) and cost[0, 0] == 2.0


class TestAgainstExhaustiveSearch:
    @given(st.integers(0, 100_000))
    def test_small_pairs(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_dgm(rng, 4), random_dgm(rng, 4)
        assert abs(bottleneck(a, b)[0] - brute_matching_distance(a[0], b[0], np.inf)) < 1e-9
        for p in (1, 2):
            assert abs(wasserstein(a, b, 0, p)[0] - brute_matching_distance(a[0], b[0], p)) < 1e-9


class TestMetricProperties:
    @given(st.integers(0, 100_000))
    def test_symmetry_and_triangle(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (random_dgm(rng, 8) for _ in range(3))
        for f in (lambda x, y: bottleneck(x, y)[0], lambda x, y: wasserstein(x, y, 0, 1)[0],
                  lambda x, y: wasserstein(x, y, 0, 2)[0]):
            assert f(a, b) == f(b, a)
            assert f(a, c) <= f(a, b) + f(b, c) + 1e-9

    @given(st.integers(0, 100_000))
    def test_bottleneck_below_wasserstein(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_dgm(rng, 8), random_dgm(rng, 8)
        db = bottleneck(a, b)[0]
        for p in (1, 2, 3):
            assert db <= wasserstein(a, b, 0, p)[0] + 1e-12

    @given(st.integers(0, 100_000))
    def test_certificates_recompute_exactly(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_dgm(rng, 8), random_dgm(rng, 8)
        for value, cert in (bottleneck(a, b), wasserstein(a, b, 0, 1), wasserstein(a, b, 0, 2)):
            assert cert.is_valid()
            assert cert.recompute() == value

    def test_invalid_certificate_detected(self):
        _, cert = wasserstein(BAR, dgm([(0, 2.5)]), 0, 1)
        forged = MatchingCertificate(cert.points1, cert.points2, ((0, DIAGONAL),), 1.0, cert.cost)
        assert not forged.is_valid()

    def test_combined_distance(self):
        a = PersistenceDiagram({0: [[0, 1]], 1: [[1, 3]]})
        b = PersistenceDiagram({0: [[0, 1.5]], 1: [[1, 2]]})
        assert combined_distance(a, b) == pytest.approx(0.5 + 1.0)
        assert combined_distance(a, b, "wasserstein", p=1) == pytest.approx(0.5 + 1.0)
        with pytest.raises(ValueError):
            combined_distance(a, b, "sliced")


class TestLandscapeDistance:
    def test_identical(self):
        lam = landscape(BAR, 0)
        assert landscape_distance(lam, lam) == 0.0

    def test_bar_against_empty(self):
        t = np.linspace(0, 2, 201)
        assert landscape_distance(landscape(BAR, 0, 5, t), landscape(EMPTY, 0, 5, t), 1) == pytest.approx(1.0)

    def test_more_levels_never_decrease(self):
        rng = np.random.default_rng(0)
        a, b = random_dgm(rng, 8), random_dgm(rng, 8)
        t = np.linspace(0, 8, 401)
        d1 = landscape_distance(landscape(a, 0, 1, t), landscape(b, 0, 1, t))
        d2 = landscape_distance(landscape(a, 0, 2, t), landscape(b, 0, 2, t))
        assert d2 >= d1

    def test_mismatched_grids(self):
        with pytest.raises(ValueError):
            landscape_distance(landscape(BAR, 0, 2), landscape(BAR, 0, 3))
        with pytest.raises(ValueError):
            landscape_distance(landscape(BAR, 0, 2, np.linspace(0, 2, 5)),
                               landscape(BAR, 0, 2, np.linspace(0, 2, 6)))
