"""Graph p-eikonal and eikonal solvers.

The p-eikonal operator is

    A_{G,p} u(x_i) = sum_j w_ji (u(x_i) - u(x_j))_+^p

and :func:`solve_peikonal` computes the solution of ``A_{G,p} u = f`` off the
boundary set with ``u = 0`` on it, by fast marching. :func:`solve_graph_eikonal`
computes the density weighted shortest path distance, i.e. the solution of
``max_j w_ji (u_i - u_j) = f_i``, with Dijkstra's algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NoUpwindDataError, ParameterError, SolverError, UnreachableError

__all__ = [
    "SolverParams",
    "SolutionField",
    "apply_operator",
    "as_boundary",
    "as_rhs",
    "extract_descent_path",
    "local_update",
    "residual",
    "solve_graph_eikonal",
    "solve_peikonal",
]


@dataclass(frozen=True)
class SolverParams:
    p: float = 1.0
    bisection_tol: float = 1e-9
    max_bracket_doublings: int = 64

    def __post_init__(self):
        if not self.p >= 1:
            raise ParameterError(f"p must be >= 1, got {self.p}")
        if not self.bisection_tol > 0:
            raise ParameterError("bisection_tol must be positive")
        if self.max_bracket_doublings < 1:
            raise ParameterError("max_bracket_doublings must be >= 1")


@dataclass
class SolutionField:
    """Per-node solution values; ``inf`` marks nodes not reached from the boundary."""

    values: np.ndarray
    visit_order: np.ndarray

    @property
    def unreached_count(self):
        return int(np.count_nonzero(np.isinf(self.values)))

    @property
    def reached(self):
        return np.isfinite(self.values)

    def __len__(self):
        return len(self.values)


def as_boundary(boundary, n):
    idx = np.unique(np.atleast_1d(np.asarray(boundary, dtype=np.int64)))
    if idx.size == 0:
        raise ParameterError("boundary set must be nonempty")
    if idx[0] < 0 or idx[-1] >= n:
        raise ParameterError("boundary index out of range")
    return idx


def as_rhs(f, n):
    f = np.asarray(f, dtype=np.float64)
    if f.ndim == 0:
        f = np.full(n, float(f))
    if f.shape != (n,):
        raise ParameterError(f"right-hand side must have length {n}, got {f.shape}")
    if not (np.all(np.isfinite(f)) and np.all(f > 0)):
        raise ParameterError("right-hand side must be strictly positive and finite")
    return f


def _values(u):
    return u.values if isinstance(u, SolutionField) else np.asarray(u, dtype=np.float64)


def local_update(weights, values, a, params=None):
    """Solve ``sum_j w_j (t - s_j)_+^p = a`` for t.

    Neighbors with infinite ``s_j`` are ignored. For p = 1 the solution is
    found exactly among the sorted-prefix candidates
    ``t_m = (a + sum_{j<=m} w_j s_j) / sum_{j<=m} w_j``; otherwise by bracket
    doubling followed by a bracketed Newton iteration.
    """
    params = params or SolverParams()
    w = np.asarray(weights, dtype=np.float64)
    s = np.asarray(values, dtype=np.float64)
    ok = np.isfinite(s)
    w, s = w[ok], s[ok]
    if s.size == 0:
        raise NoUpwindDataError("no neighbor with a finite value")
    if not a > 0 or np.any(w <= 0):
        raise ParameterError("rhs and weights must be positive")

    if params.p == 1:
        order = np.argsort(s, kind="stable")
        w, s = w[order], s[order]
        cw = np.cumsum(w)
        t = (a + np.cumsum(w * s)) / cw
        nxt = np.append(s[1:], np.inf)
        m = int(np.argmax(t <= nxt))
        return float(t[m])

    t = _kernels.solve_scheme(
        w, s, s.size, float(a), float(params.p), params.bisection_tol,
        params.max_bracket_doublings, np.inf,
    )
    if np.isnan(t):
        raise SolverError("could not bracket the local solution")
    return float(t)


def solve_peikonal(graph, boundary, f=1.0, params=None):
    """Fast marching solution of the graph p-eikonal equation.

    Parameters
    ----------
    graph : Graph
    boundary : array_like of int
        Nodes where ``u = 0``.
    f : float or array_like
        Strictly positive right-hand side.
    params : SolverParams, optional

    Returns
    -------
    SolutionField
        Nodes that cannot be reached from the boundary carry ``inf``.
    """
    params = params or SolverParams()
    n = graph.n
    bnd = as_boundary(boundary, n)
    f = as_rhs(f, n)
    W, T = graph.weights, graph.incoming
    u, order, count = _kernels.fast_marching(
        W.indptr, W.indices, W.data, T.indptr, T.indices, T.data,
        f, bnd, float(params.p), float(params.bisection_tol), int(params.max_bracket_doublings),
    )
    if count < 0:
        raise SolverError("bracket expansion failed; increase max_bracket_doublings")
    return SolutionField(u, order[:count].copy())


def solve_graph_eikonal(graph, boundary, f=1.0):
    """Density weighted graph distance to the boundary (Dijkstra).

    Edge ``j -> i`` costs ``f_i / w_ji``, so the result solves
    ``max_j w_ji (u_i - u_j) = f_i`` with ``u = 0`` on the boundary.
    """
    n = graph.n
    bnd = as_boundary(boundary, n)
    f = as_rhs(f, n)
    W = graph.weights
    u, order, count = _kernels.dijkstra(W.indptr, W.indices, W.data, f, bnd)
    return SolutionField(u, order[:count].copy())


def apply_operator(graph, u, p=1.0):
    """Evaluate A_{G,p} u at every node (``(u_i - u_j)_+`` with inf handled as no-contribution)."""
    u = _values(u)
    src, dst, w = graph.edges()
    diff = u[dst] - u[src]
    diff = np.where(np.isfinite(diff) & (diff > 0), diff, 0.0)
    out = np.zeros(graph.n)
    np.add.at(out, dst, w * diff**p)
    return out


def residual(graph, u, f, boundary, p=1.0):
    """A_{G,p} u - f at reached non-boundary nodes, 0 on the boundary.

    Unreached nodes (``u = inf``) are reported as nan.
    """
    u = _values(u)
    n = graph.n
    f = as_rhs(f, n)
    res = apply_operator(graph, u, p) - f
    res[~np.isfinite(u)] = np.nan
    res[as_boundary(boundary, n)] = 0.0
    return res


def extract_descent_path(graph, u, start):
    """Steepest descent path on ``u`` from ``start`` down to the boundary.

    Each step moves to the in-neighbor (``w_ji > 0``) with the smallest value,
    ties going to the lowest node index. Stops at a node whose upwind
    neighbors are all no smaller than itself, which for a solution with
    positive right-hand side happens exactly on the boundary.
    """
    vals = _values(u)
    start = int(start)
    if not 0 <= start < graph.n:
        raise ParameterError("start node out of range")
    if not np.isfinite(vals[start]):
        raise UnreachableError(f"node {start} was not reached by the solve")
    path = [start]
    i = start
    while vals[i] > 0:
        nbrs, _ = graph.in_neighbors(i)
        if nbrs.size == 0:
            break
        nv = vals[nbrs]
        j = int(nbrs[np.argmin(nv)])  # nbrs is sorted, so argmin picks the lowest index on ties
        if not vals[j] < vals[i]:
            break
        path.append(j)
        i = j
    return path
