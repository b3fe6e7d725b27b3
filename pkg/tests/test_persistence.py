import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_diagram, image_rank
from rankfn.complexes import Filtration, FiltrationError, distance_matrix, vietoris_rips
from rankfn.persistence import (
    Barcode,
    PersistenceDiagram,
    barcode_to_diagram,
    betti_number,
    compute_persistence,
    diagram_from_rank,
    diagram_to_barcode,
    persistence_diagram,
    persistent_betti,
    reduce_boundary,
)
from rankfn.rank import interleaving_nodes, rank_matrix
from rankfn.stability import random_monotone

TRIANGLE = [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)]
FILLED = TRIANGLE + [(0, 1, 2)]


def random_complex(rng, n_max=5):
    n = int(rng.integers(3, n_max + 1))
    S = {(v,) for v in range(n)}
    for t in itertools.combinations(range(n), 3):
        if rng.random() < 0.3:
            for k in (1, 2, 3):
                S.update(itertools.combinations(t, k))
    for e in itertools.combinations(range(n), 2):
        if rng.random() < 0.5:
            S.add(e)
    return sorted(S, key=lambda s: (len(s), s))


def random_filtration(seed):
    rng = np.random.default_rng(seed)
    S = random_complex(rng)
    vals = random_monotone(S, rng)
    if seed % 2:
        vals = np.round(vals * 2) / 2  # force ties
    return S, vals, Filtration.from_simplices(S, vals, 2)


class TestReductionAgainstBruteForce:
    @given(st.integers(0, 100_000))
    def test_matches_gaussian_elimination(self, seed):
        S, vals, filt = random_filtration(seed)
        bars = compute_persistence(filt)
        expected = brute_diagram(S, list(vals), 2)
        for q in range(3):
            assert sorted(bars[q]) == expected[q]

    def test_twelve_simplex_instances(self):
        hits = 0
        for seed in range(400):
            S, vals, filt = random_filtration(seed)
            if len(S) > 12:
                continue
            hits += 1
            bars = compute_persistence(filt)
            expected = brute_diagram(S, list(vals), 2)
            assert all(sorted(bars[q]) == expected[q] for q in range(3))
        assert hits > 50

    def test_oracle_rank_of_triangle_maps(self):
        assert image_rank(TRIANGLE, TRIANGLE, 1) == 1
        assert image_rank(TRIANGLE, FILLED, 1) == 0


class TestReductionVariants:
    @pytest.mark.parametrize("seed", range(5))
    def test_all_variants_agree_on_rips(self, seed):
        pts = np.random.default_rng(seed).normal(size=(25, 3))
        filt = vietoris_rips(distance_matrix(pts), 3)
        results = {(m, c): reduce_boundary(filt, 2, clearing=c, method=m)
                   for m in ("cohomology", "homology") for c in (True, False)}
        first = next(iter(results.values()))
        for pairs, essential in results.values():
            assert pairs == first[0]
            assert sorted(essential) == sorted(first[1])

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            reduce_boundary(vietoris_rips(np.zeros((1, 1)), 1), method="matrix")

    def test_face_closure_error(self):
        filt = Filtration.from_simplices([(0,), (0, 1)], [0.0, 1.0])
        with pytest.raises(FiltrationError):
            compute_persistence(filt)


class TestDiagramTypes:
    def test_square_barcode(self):
        pts = [[0, 0], [1, 0], [1, 1], [0, 1]]
        bars = compute_persistence(vietoris_rips(distance_matrix(pts), 2))
        assert bars[0] == ((0.0, 1.0),) * 3 + ((0.0, np.sqrt(2)),)
        assert bars[1] == ((1.0, np.sqrt(2)),)
        assert bars.cap == np.sqrt(2)

    def test_bar_to_point(self):
        dgm = barcode_to_diagram(Barcode({0: ((1.0, 3.0),)}, 3.0))
        assert dgm[0].tolist() == [[1.0, 3.0]]

    def test_empty_barcode(self):
        assert barcode_to_diagram(Barcode({}, 0.0)).degrees == []

    @given(st.lists(st.tuples(st.floats(0, 10), st.floats(0.01, 5)), max_size=20))
    def test_barcode_round_trip(self, raw):
        bars = tuple((b, b + p) for b, p in raw if b + p > b)
        bc = Barcode({1: bars}, 20.0)
        assert diagram_to_barcode(barcode_to_diagram(bc)) == bc

    def test_rejects_diagonal_points(self):
        with pytest.raises(ValueError):
            PersistenceDiagram({0: [[1.0, 1.0]]})

    def test_rejects_infinite_points(self):
        with pytest.raises(ValueError):
            PersistenceDiagram({0: [[0.0, np.inf]]})

    def test_points_are_sorted_and_read_only(self):
        dgm = PersistenceDiagram({0: [[2.0, 3.0], [1.0, 5.0], [1.0, 2.0]]})
        assert dgm[0].tolist() == [[1.0, 2.0], [1.0, 5.0], [2.0, 3.0]]
        with pytest.raises(ValueError):
            dgm[0][0, 0] = 9.0

    def test_zero_length_bars_dropped(self):
        filt = Filtration.from_simplices([(0,), (1,), (0, 1)], [0.0, 0.0, 0.0])
        assert len(persistence_diagram(filt)[0]) == 0


class TestPersistentBetti:
    def test_identity_on_loop(self):
        assert persistent_betti(TRIANGLE, TRIANGLE, 1) == 1

    def test_loop_dies_when_filled(self):
        assert persistent_betti(TRIANGLE, FILLED, 1) == 0

    def test_components_merge(self):
        assert persistent_betti([(0,), (1,)], [(0,), (1,), (0, 1)], 0) == 1

    def test_inclusion_required(self):
        with pytest.raises(ValueError):
            persistent_betti([(0,), (1,)], [(0,)], 0)

    def test_closure_required(self):
        with pytest.raises(FiltrationError):
            persistent_betti([(0, 1)], [(0, 1)], 0)

    @given(st.integers(0, 100_000))
    def test_matches_oracle(self, seed):
        rng = np.random.default_rng(seed)
        B = random_complex(rng)
        keep = {s for s in B if len(s) == 1 or rng.random() < 0.5}
        A = [s for s in B if all(f in keep for k in range(1, len(s) + 1)
                                 for f in itertools.combinations(s, k))]
        for q in range(3):
            assert persistent_betti(A, B, q) == image_rank(A, B, q)

    def test_betti_numbers(self):
        assert betti_number(TRIANGLE, 0) == 1
        assert betti_number(TRIANGLE, 1) == 1
        assert betti_number(FILLED, 1) == 0


class TestDiagramFromRank:
    def test_single_point_three_nodes(self):
        nodes = [0.5, 2.0, 3.5]
        values = rank_matrix([[1.0, 3.0]], nodes, nodes)
        dgm = diagram_from_rank(values, nodes, upper=4.0)
        # birth bin (0.5, 2], death bin (2, 3.5]
        assert dgm[0].tolist() == [[2.0, 3.5]]

    def test_empty(self):
        assert len(diagram_from_rank(np.zeros((3, 3), int), [0, 1, 2])[0]) == 0

    def test_negative_multiplicity_rejected(self):
        values = np.array([[1, 0], [0, 0]])
        bad = values.copy()
        bad[0, 1] = 2
        with pytest.raises(ValueError):
            diagram_from_rank(bad, [0.0, 1.0])

    @given(st.integers(0, 100_000))
    def test_exact_round_trip_on_jump_values(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(1, 21))
        b = np.round(rng.uniform(0, 5, m), 3)
        d = b + np.round(rng.uniform(0.2, 3, m), 3)
        dgm = PersistenceDiagram({0: np.column_stack([b, d])})
        nodes = interleaving_nodes(dgm)
        back = diagram_from_rank(rank_matrix(dgm[0], nodes, nodes), nodes, upper=np.inf)
        assert np.array_equal(back[0], dgm[0])

    @given(st.integers(0, 100_000))
    def test_independent_of_interleaved_sequence(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(1, 15))
        b = rng.uniform(0, 5, m)
        dgm = PersistenceDiagram({0: np.column_stack([b, b + rng.uniform(0.2, 3, m)])})
        jumps = np.unique(dgm[0].ravel())
        outs = []
        for k in range(3):
            nodes = interleaving_nodes(dgm, rng=np.random.default_rng(seed + k))
            vals = rank_matrix(dgm[0], nodes, nodes)
            outs.append(diagram_from_rank(vals, nodes, upper=jumps[-1] + 1.0, jump_values=jumps))
        assert all(np.array_equal(o[0], dgm[0]) for o in outs)

    def test_betti_on_the_diagonal(self):
        pts = np.random.default_rng(0).normal(size=(12, 2))
        filt = vietoris_rips(distance_matrix(pts), 2)
        dgm = persistence_diagram(filt)
        for t in np.linspace(0.05, dgm.cap - 1e-9, 7):
            cx = [s for s, v in zip(filt.simplices, filt.values) if v <= t]
            for q in (0, 1):
                assert rank_matrix(dgm[q], [t], [t])[0, 0] == betti_number(cx, q)
