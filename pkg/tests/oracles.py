"""Slow reference implementations used only by the tests."""

import itertools
import math

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq
from scipy.sparse.csgraph import shortest_path

from peikonal.graph import Graph


def random_graph(rng, n, density=0.3, symmetric=True, connected=True, wmin=0.1, wmax=2.0):
    """Random weighted graph; with ``connected`` a random spanning path is added."""
    A = (rng.random((n, n)) < density).astype(float)
    np.fill_diagonal(A, 0)
    if connected and n > 1:
        perm = rng.permutation(n)
        A[perm[:-1], perm[1:]] = 1
        A[perm[1:], perm[:-1]] = 1
    W = A * rng.uniform(wmin, wmax, size=(n, n))
    if symmetric:
        W = np.triu(W, 1)
        W = W + W.T
    return Graph(sp.csr_matrix(W))


def path_enumeration_distance(graph, boundary, f):
    """min over simple paths x_0 in boundary -> ... -> x_m = i of sum f(x_k) / w(x_{k-1}, x_k)."""
    n = graph.n
    W = graph.weights.toarray()
    best = np.full(n, np.inf)
    bset = set(int(b) for b in boundary)

    def walk(node, cost, seen):
        if cost < best[node]:
            best[node] = cost
        for nxt in np.flatnonzero(W[node]):
            nxt = int(nxt)
            if nxt in seen or nxt in bset:
                continue
            seen.add(nxt)
            walk(nxt, cost + f[nxt] / W[node, nxt], seen)
            seen.discard(nxt)

    for b in bset:
        walk(b, 0.0, {b})
    return best


def value_iteration(graph, boundary, f, p, sweeps=10000):
    """Monotone Jacobi iteration from a supersolution, local solves by brentq.

    Independent of the fast marching code path: starts from the upper bound
    (max f)^(1/p) * graph distance on G^(1/p) (scipy csgraph) and decreases
    to the unique solution.
    """
    n = graph.n
    W = graph.weights.toarray()
    u = np.max(f) ** (1.0 / p) * csgraph_distance(graph, boundary, p)
    bset = set(int(b) for b in boundary)
    for _ in range(sweeps):
        new = u.copy()
        for i in range(n):
            if i in bset or not np.isfinite(u[i]):
                continue
            nb = np.flatnonzero(W[:, i])
            s = u[nb]
            w = W[nb, i]
            ok = np.isfinite(s)
            s, w = s[ok], w[ok]

            def g(t):
                return np.sum(w * np.clip(t - s, 0, None) ** p) - f[i]

            lo = s.min()
            hi = lo + (f[i] / w.sum()) ** (1.0 / p)
            while g(hi) < 0:
                hi = lo + 2 * (hi - lo)
            new[i] = brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
        if np.allclose(new, u, rtol=1e-14, atol=0, equal_nan=True):
            return new
        u = new
    return u


def brute_force_knn(X, k):
    D = np.linalg.norm(X[:, None, :] - X[None, :, :], axis=2)
    np.fill_diagonal(D, np.inf)
    idx = np.argsort(D, axis=1, kind="stable")[:, :k]
    return idx, np.take_along_axis(D, idx, axis=1)


def simple_cycle_beta_star(B):
    k = len(B)
    best = -math.inf
    for r in range(2, k + 1):
        for nodes in itertools.permutations(range(k), r):
            if nodes[0] != min(nodes):
                continue
            cyc = nodes + (nodes[0],)
            best = max(best, sum(math.log(B[a][b]) for a, b in zip(cyc, cyc[1:])) / r)
    return math.exp(best)


def csgraph_distance(graph, boundary, p=1.0):
    """Shortest path with edge cost w^(-1/p), via scipy."""
    C = graph.weights.copy()
    C.data = C.data ** (-1.0 / p)
    d = shortest_path(C, directed=True, indices=np.asarray(boundary))
    return np.atleast_2d(d).min(axis=0)


def hop_distance(graph, boundary):
    C = graph.weights.copy()
    C.data[:] = 1.0
    d = shortest_path(C, directed=True, unweighted=True, indices=np.asarray(boundary))
    return np.atleast_2d(d).min(axis=0)
