import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import csgraph_distance, path_enumeration_distance, random_graph, value_iteration
from peikonal.errors import NoUpwindDataError, ParameterError, UnreachableError
from peikonal.graph import Graph, max_unweighted_in_degree
from peikonal.solver import (
    SolverParams,
    apply_operator,
    extract_descent_path,
    local_update,
    residual,
    solve_graph_eikonal,
    solve_peikonal,
)


def path3():
    return Graph.from_edges(3, [0, 1, 1, 2], [1, 0, 2, 1], np.ones(4))


def triangle():
    return Graph(np.ones((3, 3)) - np.eye(3))


seeds = st.integers(0, 2**32 - 1)
exponents = st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.0])


class TestExamples:
    def test_path(self):
        u = solve_peikonal(path3(), [0], 1.0)
        assert np.array_equal(u.values, [0, 1, 2])
        assert list(u.visit_order) == [0, 1, 2]

    def test_triangle(self):
        assert np.array_equal(solve_peikonal(triangle(), [0], 1.0).values, [0, 1, 1])

    def test_dijkstra_path(self):
        assert np.array_equal(solve_graph_eikonal(path3(), [0], [1, 1, 3]).values, [0, 1, 4])

    def test_two_equal_upwind_neighbors(self):
        # node 2 sees two finalized neighbors at 0: 2 t = 1
        G = Graph.from_edges(3, [0, 1], [2, 2], [1.0, 1.0])
        assert solve_peikonal(G, [0, 1], 1.0).values[2] == 0.5

    def test_p2_local(self):
        assert local_update([1.0], [0.0], 4.0, SolverParams(p=2)) == pytest.approx(2.0, rel=1e-12)

    def test_p1_local_prefix(self):
        # candidates: 1 + 1 = 2 > s_2 = 0.5, then (1 + 0.5) / 2 = 0.75 <= s_3 = inf
        assert local_update([1.0, 1.0], [0.0, 0.5], 1.0) == 0.75

    def test_local_ignores_infinite(self):
        assert local_update([1.0, 5.0], [0.0, np.inf], 1.0) == 1.0

    def test_local_without_data(self):
        with pytest.raises(NoUpwindDataError):
            local_update([1.0], [np.inf], 1.0)

    def test_unreached(self):
        G = Graph.from_edges(4, [0, 1], [1, 0], [1.0, 1.0])
        u = solve_peikonal(G, [0], 1.0)
        assert u.unreached_count == 2
        assert np.isinf(u.values[2:]).all()
        assert np.isnan(residual(G, u, 1.0, [0])[2:]).all()
        assert np.isinf(solve_graph_eikonal(G, [0]).values[2:]).all()

    def test_direction_matters(self):
        # only 0 -> 1 exists: 1 is reachable from 0 but not the other way
        G = Graph.from_edges(2, [0], [1], [2.0])
        assert np.array_equal(solve_peikonal(G, [0], 1.0).values, [0, 0.5])
        assert np.isinf(solve_peikonal(G, [1], 1.0).values[0])


class TestValidation:
    def test_p_below_one(self):
        with pytest.raises(ParameterError):
            SolverParams(p=0.5)

    @pytest.mark.parametrize("f", [0.0, -1.0, np.nan, np.inf])
    def test_bad_rhs(self, f):
        with pytest.raises(ParameterError):
            solve_peikonal(path3(), [0], f)

    def test_bad_boundary(self):
        with pytest.raises(ParameterError):
            solve_peikonal(path3(), [], 1.0)
        with pytest.raises(ParameterError):
            solve_peikonal(path3(), [3], 1.0)

    def test_rhs_length(self):
        with pytest.raises(ParameterError):
            solve_peikonal(path3(), [0], [1.0, 1.0])


class TestAgainstOracles:
    def test_dijkstra_equals_path_enumeration(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 9))
            G = random_graph(rng, n, density=rng.uniform(0.1, 0.7), symmetric=bool(rng.integers(2)),
                             connected=bool(rng.integers(2)))
            bnd = rng.choice(n, size=int(rng.integers(1, 3)), replace=False)
            f = rng.uniform(0.1, 3.0, n)
            got = solve_graph_eikonal(G, bnd, f).values
            ref = path_enumeration_distance(G, bnd, f)
            assert np.array_equal(np.isinf(got), np.isinf(ref))
            fin = np.isfinite(ref)
            assert np.allclose(got[fin], ref[fin], rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 4.0])
    def test_fast_marching_equals_value_iteration(self, rng, p):
        for _ in range(8):
            n = int(rng.integers(3, 25))
            G = random_graph(rng, n, density=rng.uniform(0.1, 0.5), symmetric=bool(rng.integers(2)))
            bnd = rng.choice(n, size=int(rng.integers(1, 3)), replace=False)
            f = rng.uniform(0.2, 2.0, n)
            got = solve_peikonal(G, bnd, f, SolverParams(p=p, bisection_tol=1e-13)).values
            ref = value_iteration(G, bnd, f, p)
            fin = np.isfinite(ref)
            assert np.array_equal(np.isfinite(got), fin)
            assert np.allclose(got[fin], ref[fin], rtol=1e-9, atol=1e-12)


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(seeds, exponents)
    def test_residual_vanishes(self, seed, p):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 60))
        G = random_graph(rng, n, density=rng.uniform(0.05, 0.5), symmetric=bool(rng.integers(2)))
        f = rng.uniform(0.1, 5.0, n)
        bnd = rng.choice(n, size=int(rng.integers(1, min(n, 3) + 1)), replace=False)
        tol = 1e-10
        u = solve_peikonal(G, bnd, f, SolverParams(p=p, bisection_tol=tol))
        r = residual(G, u, f, bnd, p)
        fin = np.isfinite(r)
        bound = (1e-9 if p == 1 else 10 * tol) * f.max()
        assert np.all(np.abs(r[fin]) <= bound)

    @settings(max_examples=40, deadline=None)
    @given(seeds, exponents)
    def test_visit_order_sorted(self, seed, p):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 80))
        G = random_graph(rng, n, density=rng.uniform(0.02, 0.3))
        u = solve_peikonal(G, [0], rng.uniform(0.5, 2, n), SolverParams(p=p))
        vals = u.values[u.visit_order]
        assert np.all(np.diff(vals) >= 0)
        assert len(u.visit_order) == n - u.unreached_count

    @settings(max_examples=40, deadline=None)
    @given(seeds, exponents, st.floats(0.01, 100))
    def test_homogeneity(self, seed, p, lam):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 50))
        G = random_graph(rng, n, density=0.2)
        f = rng.uniform(0.5, 2, n)
        params = SolverParams(p=p, bisection_tol=1e-12)
        a = solve_peikonal(G, [0], f, params).values
        b = solve_peikonal(G, [0], lam * f, params).values
        assert np.allclose(b, lam ** (1 / p) * a, rtol=1e-9, atol=0)

    @settings(max_examples=40, deadline=None)
    @given(seeds, exponents)
    def test_monotone_in_rhs_and_weights(self, seed, p):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 40))
        G = random_graph(rng, n, density=0.25)
        f = rng.uniform(0.5, 2, n)
        params = SolverParams(p=p)
        base = solve_peikonal(G, [0], f, params).values
        bigger_f = solve_peikonal(G, [0], f * rng.uniform(1, 2, n), params).values
        assert np.all(bigger_f >= base * (1 - 1e-9))
        W = G.weights.copy()
        W.data = W.data * rng.uniform(1, 3, W.nnz)
        heavier = solve_peikonal(Graph(W), [0], f, params).values
        assert np.all(heavier <= base * (1 + 1e-9))

    @settings(max_examples=40, deadline=None)
    @given(seeds, exponents)
    def test_sandwich(self, seed, p):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 50))
        G = random_graph(rng, n, density=0.2, symmetric=bool(rng.integers(2)))
        f = rng.uniform(0.5, 2, n)
        u = solve_peikonal(G, [0], f, SolverParams(p=p)).values
        d = csgraph_distance(G, [0], p)
        K = max_unweighted_in_degree(G)
        fin = np.isfinite(d)
        lo = K ** (-1 / p) * f.min() ** (1 / p) * d[fin]
        hi = f.max() ** (1 / p) * d[fin]
        assert np.all(u[fin] >= lo * (1 - 1e-9))
        assert np.all(u[fin] <= hi * (1 + 1e-9))

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_dijkstra_matches_csgraph(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 200))
        G = random_graph(rng, n, density=min(1.0, 5 / n), symmetric=bool(rng.integers(2)), connected=False)
        got = solve_graph_eikonal(G, [0]).values
        ref = csgraph_distance(G, [0])
        assert np.array_equal(np.isinf(got), np.isinf(ref))
        assert np.allclose(got[np.isfinite(ref)], ref[np.isfinite(ref)], rtol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(seeds)
    def test_graph_eikonal_equation(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 60))
        G = random_graph(rng, n, density=0.2)
        f = rng.uniform(0.5, 2, n)
        u = solve_graph_eikonal(G, [0], f).values
        src, dst, w = G.edges()
        lhs = np.full(n, -np.inf)
        np.maximum.at(lhs, dst, w * (u[dst] - u[src]))
        assert np.allclose(lhs[1:], f[1:], rtol=1e-12)


class TestOperatorAndPaths:
    def test_operator_by_hand(self):
        G = Graph.from_edges(3, [0, 1], [2, 2], [2.0, 3.0])
        u = np.array([0.0, 1.0, 1.5])
        # node 2: 2 * 1.5^2 + 3 * 0.5^2
        assert apply_operator(G, u, 2)[2] == pytest.approx(2 * 2.25 + 3 * 0.25)

    def test_descent_path_reaches_boundary(self, rng):
        G = random_graph(rng, 80, density=0.06)
        bnd = [3, 17]
        u = solve_peikonal(G, bnd, 1.0)
        for start in range(G.n):
            path = extract_descent_path(G, u, start)
            assert path[-1] in bnd
            assert np.all(np.diff(u.values[path]) < 0)

    def test_descent_path_on_path_graph(self):
        u = solve_peikonal(path3(), [0], 1.0)
        assert extract_descent_path(path3(), u, 2) == [2, 1, 0]

    def test_descent_from_unreached(self):
        G = Graph(sp.csr_matrix((2, 2)))
        with pytest.raises(UnreachableError):
            extract_descent_path(G, solve_peikonal(G, [0], 1.0), 1)
