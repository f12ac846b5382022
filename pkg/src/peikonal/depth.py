"""p-eikonal medians and the induced data depth."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .solver import SolverParams, as_rhs, solve_peikonal

__all__ = [
    "DepthResult",
    "MedianSearch",
    "compute_depth",
    "compute_median",
    "depth_analysis",
    "extremal_points",
    "median_objective",
    "median_search",
]


@dataclass
class DepthResult:
    median: int
    depth: np.ndarray
    objective: float
    candidates_evaluated: int


@dataclass
class MedianSearch:
    median: int
    objective: float
    candidates: np.ndarray
    objectives: np.ndarray
    flagged: np.ndarray  # candidates whose solve left nodes unreached


def median_objective(values):
    """Sum of distances; unreached nodes count twice the largest finite one.

    Returns ``(objective, flagged)``.
    """
    finite = np.isfinite(values)
    if finite.all():
        return float(values.sum()), False
    dmax = values[finite].max()
    return float(values[finite].sum() + 2.0 * dmax * np.count_nonzero(~finite)), True


def _choose_candidates(n, fraction, seed):
    if not 0 < fraction <= 1:
        raise ParameterError("subsample_fraction must lie in (0, 1]")
    m = max(1, math.ceil(fraction * n))
    if m >= n:
        return np.arange(n)
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=m, replace=False))


def median_search(graph, f=1.0, params=None, subsample_fraction=0.05, seed=None,
                  candidates=None, threads=1):
    """Evaluate the summed-distance objective over candidate nodes.

    ``candidates`` overrides the seeded random subset of
    ``ceil(subsample_fraction * n)`` nodes.
    """
    params = params or SolverParams()
    n = graph.n
    if n == 0:
        raise ParameterError("graph is empty")
    f = as_rhs(f, n)
    if candidates is None:
        cand = _choose_candidates(n, subsample_fraction, seed)
    else:
        cand = np.unique(np.asarray(candidates, dtype=np.int64))
        if cand.size == 0 or cand[0] < 0 or cand[-1] >= n:
            raise ParameterError("invalid candidate set")

    def evaluate(c):
        return median_objective(solve_peikonal(graph, [c], f, params).values)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(evaluate, cand.tolist()))
    else:
        results = [evaluate(c) for c in cand.tolist()]
    obj = np.array([r[0] for r in results])
    flagged = np.array([r[1] for r in results], dtype=bool)
    best = int(np.argmin(obj))  # cand is sorted: first minimum has the lowest node id
    return MedianSearch(int(cand[best]), float(obj[best]), cand, obj, flagged)


def compute_median(graph, f=1.0, params=None, subsample_fraction=0.05, seed=None,
                   candidates=None, threads=1):
    """Node minimizing the summed p-eikonal distance from it to all nodes."""
    return median_search(graph, f, params, subsample_fraction, seed, candidates, threads).median


def compute_depth(graph, f, params, median, candidates_evaluated=1):
    """depth(x) = max D - D(x), with D the solution with boundary ``{median}``.

    Unreached nodes get depth 0.
    """
    params = params or SolverParams()
    if not 0 <= int(median) < graph.n:
        raise ParameterError("median node out of range")
    D = solve_peikonal(graph, [int(median)], f, params).values
    finite = np.isfinite(D)
    depth = np.zeros(graph.n)
    depth[finite] = D[finite].max() - D[finite]
    objective, _ = median_objective(D)
    return DepthResult(int(median), depth, objective, int(candidates_evaluated))


def depth_analysis(graph, f=1.0, params=None, subsample_fraction=0.05, seed=None,
                   candidates=None, threads=1):
    """Median search followed by the depth field around the winner."""
    search = median_search(graph, f, params, subsample_fraction, seed, candidates, threads)
    return compute_depth(graph, f, params, search.median, len(search.candidates))


def extremal_points(result):
    """(shallowest, deepest) node ids."""
    depth = result.depth if isinstance(result, DepthResult) else np.asarray(result)
    return int(np.argmin(depth)), int(np.argmax(depth))
