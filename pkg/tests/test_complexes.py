import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import loop_distance_matrix
from rankfn.complexes import (
    BIFILTRATION_KINDS,
    Filtration,
    FiltrationError,
    as_point_cloud,
    bifiltration_grid,
    degree_rips_complex,
    distance_matrix,
    height_rips_complex,
    rips_complex,
    simplex_keys,
    sublevel_filtration,
    vietoris_rips,
)
from rankfn.persistence import persistence_diagram

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
TRIANGLE_DM = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])


class TestDistanceMatrix:
    def test_identical_points_give_zeros(self):
        assert np.array_equal(distance_matrix([[1.0, 2.0], [1.0, 2.0]]), np.zeros((2, 2)))

    def test_three_four_five(self):
        assert distance_matrix([[0, 0], [3, 4]])[0, 1] == 5.0

    def test_matches_double_loop(self):
        pts = np.random.default_rng(0).normal(size=(10, 3))
        assert np.abs(distance_matrix(pts) - loop_distance_matrix(pts.tolist())).max() < 1e-12

    def test_empty_cloud_rejected(self):
        with pytest.raises(ValueError):
            distance_matrix(np.empty((0, 2)))

    def test_ragged_or_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            as_point_cloud([[0.0, np.nan]])


class TestVietorisRips:
    def test_edge_enters_at_distance(self):
        filt = vietoris_rips(distance_matrix([[0.0], [2.5]]), 1)
        assert filt.simplices[-1] == (0, 1)
        assert filt.values[-1] == 2.5

    def test_vertices_enter_at_zero(self):
        filt = vietoris_rips(distance_matrix(SQUARE), 2)
        assert np.all(filt.values[filt.dims == 0] == 0.0)

    def test_square_loop(self):
        dgm = persistence_diagram(vietoris_rips(distance_matrix(SQUARE), 2))
        assert dgm[1].tolist() == [[1.0, np.sqrt(2.0)]]
        assert dgm[0].tolist() == [[0.0, 1.0]] * 3 + [[0.0, np.sqrt(2.0)]]

    def test_simplex_counts(self):
        filt = vietoris_rips(distance_matrix(SQUARE), 2)
        assert np.bincount(filt.dims).tolist() == [4, 6, 4]

    def test_max_scale_cut(self):
        filt = vietoris_rips(distance_matrix(SQUARE), 2, max_scale=1.0)
        assert np.bincount(filt.dims).tolist() == [4, 4]

    def test_order_is_value_dim_lex(self):
        filt = vietoris_rips(distance_matrix(np.random.default_rng(1).normal(size=(8, 2))), 3)
        keys = [(v, len(s), s) for v, s in zip(filt.values.tolist(), filt.simplices)]
        assert keys == sorted(keys)
        filt.check_face_closure()

    def test_noisy_circle_has_dominant_loop(self):
        rng = np.random.default_rng(3)
        t = rng.uniform(0, 2 * np.pi, 30)
        pts = np.column_stack([np.cos(t), np.sin(t)]) + rng.normal(0, 0.1, (30, 2))
        pers = np.sort(persistence_diagram(vietoris_rips(distance_matrix(pts), 2)).persistence(1))
        assert len(pers) >= 1 and pers[-1] > 3 * (pers[-2] if len(pers) > 1 else 0.0)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            vietoris_rips(TRIANGLE_DM, -1)
        with pytest.raises(ValueError):
            vietoris_rips(TRIANGLE_DM, 1, max_scale=0.0)

    def test_exact_degree(self):
        assert vietoris_rips(TRIANGLE_DM, 2).exact_degree == 1
        assert vietoris_rips(TRIANGLE_DM, 3).exact_degree == 2

    @given(st.integers(0, 10_000))
    def test_one_point_move_changes_values_by_at_most_twice(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(7, 2))
        moved = pts.copy()
        step = rng.normal(size=2)
        eps = 0.1
        moved[0] += eps * step / np.linalg.norm(step)
        a = vietoris_rips(distance_matrix(pts), 2)
        b = vietoris_rips(distance_matrix(moved), 2)
        va = dict(zip(a.simplices, a.values))
        vb = dict(zip(b.simplices, b.values))
        assert max(abs(va[s] - vb[s]) for s in va) <= 2 * eps + 1e-12


class TestSublevel:
    def test_hand_example(self):
        dgm = persistence_diagram(sublevel_filtration([1, 3, 2, 4]))
        assert dgm[0].tolist() == [[1.0, 4.0], [2.0, 3.0]]

    def test_monotone_series(self):
        assert persistence_diagram(sublevel_filtration([1, 2, 3]))[0].tolist() == [[1.0, 3.0]]

    def test_constant_series_is_empty(self):
        assert len(persistence_diagram(sublevel_filtration([5, 5, 5]))[0]) == 0

    def test_edge_values_are_max_of_endpoints(self):
        filt = sublevel_filtration([0.5, -1.0, 2.0])
        values = dict(zip(filt.simplices, filt.values))
        assert values[(0, 1)] == 0.5 and values[(1, 2)] == 2.0

    def test_too_short(self):
        with pytest.raises(ValueError):
            sublevel_filtration([1.0])


class TestFiltrationValidation:
    def test_from_simplices_sorts(self):
        filt = Filtration.from_simplices([(0, 1), (1,), (0,)], [1.0, 0.0, 0.0])
        assert filt.simplices == ((0,), (1,), (0, 1))

    def test_missing_face(self):
        with pytest.raises(FiltrationError):
            Filtration.from_simplices([(0,), (0, 1)], [0.0, 1.0]).check_face_closure()

    def test_late_face(self):
        with pytest.raises(FiltrationError):
            Filtration.from_simplices([(0,), (1,), (0, 1)], [0.0, 2.0, 1.0]).check_face_closure()

    def test_duplicate_simplex(self):
        with pytest.raises(FiltrationError):
            Filtration.from_simplices([(0,), (0,)], [0.0, 0.0]).check_face_closure()

    def test_nonfinite_value(self):
        with pytest.raises(ValueError):
            Filtration.from_simplices([(0,)], [np.inf])

    def test_simplex_keys_are_injective(self):
        rows = np.array(list(itertools.combinations(range(9), 3)))
        keys = simplex_keys(rows)
        # a bijection onto 0..C(9,3)-1
        assert sorted(keys.tolist()) == list(range(len(rows)))


class TestBifiltrationComplexes:
    def test_degree_rips_full_triangle(self):
        cx = degree_rips_complex(TRIANGLE_DM, 1.0, 2)
        assert (0, 1, 2) in cx and len(cx) == 7

    def test_degree_rips_too_high_degree_is_empty(self):
        assert degree_rips_complex(TRIANGLE_DM, 1.0, 3) == frozenset()

    def test_degree_zero_is_plain_rips(self):
        dm = distance_matrix(np.random.default_rng(2).normal(size=(7, 2)))
        assert degree_rips_complex(dm, 1.0, 0) == rips_complex(dm, 1.0, 2)

    def test_height_rips(self):
        pts = np.column_stack([np.zeros(4), np.zeros(4), np.arange(4.0)])
        assert height_rips_complex(pts, np.inf, -1.0) == frozenset()
        assert height_rips_complex(pts, 2.0, 10.0) == rips_complex(distance_matrix(pts), 2.0, 2)
        assert height_rips_complex(pts, np.inf, 1.5) == frozenset({(0,), (1,), (0, 1)})

    def test_height_rips_needs_3d(self):
        with pytest.raises(ValueError):
            height_rips_complex(np.zeros((3, 2)), 1.0, 1.0)

    def test_degree_rips_grid_chain(self):
        grid = bifiltration_grid(TRIANGLE_DM, "degree-rips", [1.0], [0, 2, 3])
        # stored descending in degree, so complexes grow with the index
        assert grid.axis2.tolist() == [3.0, 2.0, 0.0]
        chain = [grid.complex_at(0, j) for j in range(3)]
        assert chain[0] == frozenset() and chain[1] == chain[2] and len(chain[2]) == 7

    def test_degree_axis_zero_column(self):
        dm = distance_matrix(np.random.default_rng(4).normal(size=(6, 2)))
        grid = bifiltration_grid(dm, "degree-rips", [0.5, 1.0, 1.5], [0])
        for i, s in enumerate([0.5, 1.0, 1.5]):
            assert grid.complex_at(i, 0) == rips_complex(dm, s, 2)

    def test_height_grid_single_cell(self):
        pts = np.random.default_rng(5).normal(size=(6, 3))
        grid = bifiltration_grid(pts, "height-rips", [1.0], [100.0])
        assert grid.complex_at(0, 0) == rips_complex(distance_matrix(pts), 1.0, 2)

    @pytest.mark.parametrize("kind", BIFILTRATION_KINDS)
    def test_grids_are_monotone(self, kind):
        pts = np.random.default_rng(6).normal(size=(8, 3))
        data = distance_matrix(pts) if kind == "degree-rips" else pts
        grid = bifiltration_grid(data, kind, [0.5, 1.0, 2.0], [0.0, 1.0, 2.0])
        grid.check_monotone()
        for i, j in grid.cells():
            cx = grid.complex_at(i, j)
            assert all(s[:k] + s[k + 1:] in cx for s in cx if len(s) > 1 for k in range(len(s)))

    def test_unsorted_axis_rejected(self):
        with pytest.raises(ValueError):
            bifiltration_grid(TRIANGLE_DM, "degree-rips", [1.0, 0.5], [0])

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            bifiltration_grid(TRIANGLE_DM, "flag", [1.0], [0])
