"""One-vs-rest semi-supervised classification from p-eikonal distances."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, ParameterError, UnreachableError
from .solver import SolverParams, as_rhs, solve_peikonal

__all__ = [
    "LabelResult",
    "PriorWeights",
    "accuracy",
    "as_labeled_sets",
    "class_distances",
    "class_fractions",
    "fit_class_priors",
    "labeled_sets_from_labels",
    "predict_labels",
]


@dataclass
class PriorWeights:
    s: np.ndarray
    target_priors: np.ndarray
    iterations_used: int
    achieved_fractions: np.ndarray
    converged: bool


@dataclass
class LabelResult:
    labels: np.ndarray
    margins: np.ndarray


def as_labeled_sets(labeled, n=None):
    sets = [np.unique(np.atleast_1d(np.asarray(g, dtype=np.int64))) for g in labeled]
    if not sets:
        raise ParameterError("need at least one labeled set")
    for g in sets:
        if g.size == 0:
            raise ParameterError("labeled sets must be nonempty")
        if g[0] < 0 or (n is not None and g[-1] >= n):
            raise ParameterError("labeled node out of range")
    allnodes = np.concatenate(sets)
    if np.unique(allnodes).size != allnodes.size:
        raise ParameterError("labeled sets must be pairwise disjoint")
    return sets


def labeled_sets_from_labels(labels, train_ind, num_classes=None):
    """Group training node ids by their class label."""
    labels = np.asarray(labels)
    train_ind = np.asarray(train_ind, dtype=np.int64)
    k = num_classes or int(labels.max()) + 1
    return [train_ind[labels[train_ind] == j] for j in range(k)]


def class_distances(graph, labeled, f=1.0, params=None, threads=1):
    """n x k matrix whose column j solves the p-eikonal equation with boundary Gamma_j."""
    params = params or SolverParams()
    sets = as_labeled_sets(labeled, graph.n)
    f = as_rhs(f, graph.n)

    def solve(g):
        return solve_peikonal(graph, g, f, params).values

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            cols = list(ex.map(solve, sets))
    else:
        cols = [solve(g) for g in sets]
    return np.column_stack(cols)


def _weighted(D, s):
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2:
        raise ParameterError("distances must be an (n, k) matrix")
    if s is None:
        return D
    s = np.asarray(s.s if isinstance(s, PriorWeights) else s, dtype=np.float64)
    if s.shape != (D.shape[1],) or np.any(s <= 0):
        raise ParameterError("weights must be k positive numbers")
    return D * s


def predict_labels(distances, weights=None, labeled=None):
    """l_i = argmin_j s_j D_ij (s = 1 if ``weights`` is None), lowest class on ties.

    If ``labeled`` sets are given, their nodes keep their given class.
    """
    S = _weighted(distances, weights)
    dead = ~np.isfinite(S).any(axis=1)
    if dead.any():
        bad = np.flatnonzero(dead)
        raise UnreachableError(f"{bad.size} nodes unreachable from every labeled set: {bad[:20].tolist()}")
    labels = np.argmin(S, axis=1)
    if S.shape[1] > 1:
        part = np.sort(S, axis=1)
        with np.errstate(invalid="ignore"):
            margins = part[:, 1] - part[:, 0]
    else:
        margins = np.full(S.shape[0], np.inf)
    if labeled is not None:
        for j, g in enumerate(as_labeled_sets(labeled, S.shape[0])):
            labels[g] = j
    return LabelResult(labels, margins)


def class_fractions(distances, s=None):
    """Fraction of (reachable) nodes predicted in each class."""
    S = _weighted(distances, s)
    alive = np.isfinite(S).any(axis=1)
    labels = np.argmin(S[alive], axis=1)
    return np.bincount(labels, minlength=S.shape[1]) / max(labels.size, 1)


def fit_class_priors(distances, priors, tol=0.01, max_iters=100, step=0.5, floor=1e-6):
    """Find class weights s so predicted class fractions match ``priors``.

    Damped multiplicative fixed point
    ``s_j <- s_j ((frac_j + floor) / (prior_j + floor))^step_j``: a class
    predicted too often gets a larger weight and loses nodes. Predicted
    fractions jump discretely, so ``step_j`` is halved whenever the error of
    class j changes sign. The best iterate is returned if ``tol`` is not met
    within ``max_iters``; ``s`` is normalized so that ``s[0] = 1``.
    """
    D = np.asarray(distances, dtype=np.float64)
    n, k = D.shape
    priors = np.asarray(priors, dtype=np.float64)
    if priors.shape != (k,) or np.any(priors < 0) or not np.isclose(priors.sum(), 1.0):
        raise ParameterError("priors must be k nonnegative numbers summing to 1")
    if not 0 < tol < 0.5:
        raise ParameterError("tol must lie in (0, 0.5)")
    dead_cols = ~np.isfinite(D).any(axis=0)
    if np.any(dead_cols & (priors > 0)):
        raise InfeasibleError(f"classes {np.flatnonzero(dead_cols).tolist()} reach no node")

    s = np.ones(k)
    frac = class_fractions(D, s)
    err = frac - priors
    best = (np.abs(err).max(), s.copy(), frac)
    if best[0] <= tol:
        return PriorWeights(s, priors, 0, frac, True)

    steps = np.full(k, float(step))
    sign = np.sign(err)
    for it in range(1, max_iters + 1):
        s = s * ((frac + floor) / (priors + floor)) ** steps
        s = s / s[0]
        frac = class_fractions(D, s)
        err = frac - priors
        e = np.abs(err).max()
        if e < best[0]:
            best = (e, s.copy(), frac)
        if e <= tol:
            return PriorWeights(s, priors, it, frac, True)
        new_sign = np.sign(err)
        steps[new_sign * sign < 0] *= 0.5
        sign = np.where(new_sign != 0, new_sign, sign)
    return PriorWeights(best[1], priors, max_iters, best[2], False)


def accuracy(result, truth, exclude=None):
    """Fraction of correct predictions over nodes not in ``exclude``."""
    pred = result.labels if isinstance(result, LabelResult) else np.asarray(result)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ParameterError(f"length mismatch: {pred.shape} vs {truth.shape}")
    mask = np.ones(pred.size, dtype=bool)
    if exclude is not None:
        for g in exclude:
            mask[np.asarray(g, dtype=np.int64)] = False
    if not mask.any():
        raise ParameterError("accuracy undefined: every node is excluded")
    return float(np.mean(pred[mask] == truth[mask]))
