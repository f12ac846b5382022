"""Numerical checks on p-eikonal solutions.

Covers the perturbation bound, the two-sided bound against graph distances,
discrete-to-continuum convergence on random geometric graphs and the
clusterability index [beta]*.
"""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

from .datasets import sample_ball
from .errors import InfeasibleError, ParameterError, UnsupportedError
from .graph import (
    KernelSpec,
    add_perturbation,
    build_proximity_graph,
    max_unweighted_in_degree,
    power_graph,
    unit_ball_volume,
)
from .solver import (
    SolverParams,
    apply_operator,
    as_boundary,
    as_rhs,
    solve_graph_eikonal,
    solve_peikonal,
)

__all__ = [
    "BetaMatrix",
    "ConvergenceRow",
    "RobustnessReport",
    "SandwichReport",
    "beta_matrix",
    "beta_star_cycles",
    "beta_star_enumerate",
    "beta_star_minmax",
    "continuum_distance_oracle",
    "convergence_experiment",
    "feasible_window",
    "max_mean_cycle",
    "robustness_bound",
    "sandwich_check",
    "spike_ratio",
    "verify_robustness",
]

VIOLATION_TOL = 1e-9


# -- robustness ---------------------------------------------------------------

@dataclass
class RobustnessReport:
    relative_error: np.ndarray  # (u - u_tilde) / u, nan where u is 0 or inf
    bound: float
    violations: int
    max_relative_error: float
    u: np.ndarray = field(repr=False)
    u_perturbed: np.ndarray = field(repr=False)

    @property
    def median_relative_error(self):
        r = self.relative_error[np.isfinite(self.relative_error)]
        return float(np.median(r)) if r.size else 0.0


def robustness_bound(graph, perturbation, u, f, p=1.0):
    """(max over nodes with u > 0 of A_{dG,p} u / f)^(1/p), dG the perturbation edges only."""
    u = np.asarray(getattr(u, "values", u), dtype=np.float64)
    n = graph.n
    f = as_rhs(f, n)
    if len(perturbation) == 0:
        return 0.0
    a = apply_operator(perturbation.as_graph(n), u, p)
    live = np.isfinite(u) & (u > 0)
    if not live.any():
        return 0.0
    return float(np.max(a[live] / f[live]) ** (1.0 / p))


def verify_robustness(graph, perturbation, boundary, f=1.0, params=None):
    """Solve on G and on G + dG and compare against the bound.

    A node is a violation when its relative error is negative (the perturbed
    solution got larger) or exceeds the bound, both up to 1e-9.
    """
    params = params or SolverParams()
    u = solve_peikonal(graph, boundary, f, params).values
    ut = solve_peikonal(add_perturbation(graph, perturbation), boundary, f, params).values
    bound = robustness_bound(graph, perturbation, u, f, params.p)
    live = np.isfinite(u) & (u > 0)
    rel = np.full(graph.n, np.nan)
    rel[live] = (u[live] - ut[live]) / u[live]
    bad = (rel[live] < -VIOLATION_TOL) | (rel[live] > bound + VIOLATION_TOL)
    # unreached before, reached after: allowed; reached before, lost after: impossible
    lost = np.isfinite(u) & ~np.isfinite(ut)
    violations = int(np.count_nonzero(bad) + np.count_nonzero(lost))
    max_rel = float(np.nanmax(rel)) if live.any() else 0.0
    return RobustnessReport(rel, bound, violations, max_rel, u, ut)


# -- sandwich bound -----------------------------------------------------------

@dataclass
class SandwichReport:
    lower: np.ndarray
    upper: np.ndarray
    u: np.ndarray
    K: int
    violations: int
    lower_violations: int
    upper_violations: int


def sandwich_check(graph, boundary, f=1.0, params=None):
    """Check K^(-1/p) (min f)^(1/p) d <= u <= (max f)^(1/p) d with d the graph distance on G^(1/p)."""
    params = params or SolverParams()
    p = params.p
    n = graph.n
    f = as_rhs(f, n)
    bnd = as_boundary(boundary, n)
    u = solve_peikonal(graph, bnd, f, params).values
    d = solve_graph_eikonal(power_graph(graph, 1.0 / p), bnd, 1.0).values
    K = max(max_unweighted_in_degree(graph), 1)
    lower = K ** (-1.0 / p) * f.min() ** (1.0 / p) * d
    upper = f.max() ** (1.0 / p) * d
    finite = np.isfinite(d)
    tol = VIOLATION_TOL * np.maximum(1.0, np.where(finite, upper, 0.0))
    lo_bad = finite & (u < lower - tol)
    hi_bad = finite & (u > upper + tol)
    # reachability must agree as well
    reach_bad = np.isfinite(u) != finite
    lo, hi = int(lo_bad.sum()), int(hi_bad.sum())
    return SandwichReport(lower, upper, u, K, lo + hi + int(reach_bad.sum()), lo, hi)


# -- continuum reference ------------------------------------------------------

def continuum_distance_oracle(points, gamma_points, domain="ball", g=1.0):
    """g * min over Gamma of |x - y|, valid on convex domains only."""
    if domain not in ("ball", "box"):
        raise UnsupportedError(f"no closed-form distance on domain {domain!r}; only 'ball' and 'box' are convex")
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    G = np.atleast_2d(np.asarray(gamma_points, dtype=np.float64))
    if G.size == 0:
        raise ParameterError("gamma_points must be nonempty")
    out = np.empty(len(X))
    for start in range(0, len(X), 4096):
        out[start:start + 4096] = cdist(X[start:start + 4096], G).min(axis=1)
    return g * out


# -- discrete to continuum ----------------------------------------------------

@dataclass
class ConvergenceRow:
    n: int
    eps: float
    p: float
    sup_error: float
    runtime: float
    seed: int = 0
    in_window: bool = True
    spike_ratio: float = float("nan")

    def as_dict(self):
        return asdict(self)


def feasible_window(n, d, p):
    """Bare-formula bounds (log n / n)^(1/d) and n^(-1/(p+d)) on eps."""
    return (math.log(n) / n) ** (1.0 / d), n ** (-1.0 / (p + d))


def _eps_for(rule, n, d):
    if callable(rule):
        return float(rule(n))
    if isinstance(rule, (int, float)):
        return float(rule)
    if isinstance(rule, str):
        kind, _, arg = rule.partition(":")
        if kind == "const":
            return float(arg)
        if kind == "log-power":
            a = 1.0 / (d + 1) if arg == "" else float(arg)
            return (math.log(n) / n) ** a
    raise ParameterError(f"unrecognized eps_rule {rule!r}")


def spike_ratio(points, u, gamma):
    """u at the node nearest to Gamma divided by the cone value there."""
    X = np.asarray(points)
    d = np.linalg.norm(X - X[gamma], axis=1)
    d[gamma] = np.inf
    j = int(np.argmin(d))
    return float(u[j] / d[j])


def _convergence_row(n, d, p, kernel, rule, seed):
    cloud = sample_ball(n, d, seed=seed)
    X = cloud.points
    eps = _eps_for(rule, n, d)
    t0 = time.perf_counter()
    G = build_proximity_graph(X, eps, kernel, p=p, normalization="rgg")
    gamma = int(np.argmin(np.linalg.norm(X, axis=1)))
    # density of the uniform ball; the graph operator tends to rho |grad u|^p / 2,
    # so f = rho / 2 makes the continuum solution the unit cone
    rho = 1.0 / unit_ball_volume(d)
    u = solve_peikonal(G, [gamma], rho / 2.0, SolverParams(p=p)).values
    runtime = time.perf_counter() - t0
    oracle = continuum_distance_oracle(X, X[gamma], "ball")
    err = float(np.max(np.abs(u - oracle)))
    lo, hi = feasible_window(n, d, p)
    return ConvergenceRow(n, eps, p, err, runtime, seed, bool(lo <= eps <= hi), spike_ratio(X, u, gamma))


def convergence_experiment(config, threads=1):
    """Sup-norm error against the unit cone on uniform ball samples.

    ``config`` keys: ``d``, ``p``, ``kernel`` ("constant" or "bump"),
    ``n_list``, ``eps_rule`` (number, callable, ``"const:<eps>"`` or
    ``"log-power[:<a>]"`` meaning ``(log n / n)^a`` with ``a = 1/(d+1)`` by
    default), ``seed`` and optionally ``seeds`` (repetitions per n).
    Row seeds are spawned from the master seed, one per (n, repetition).
    """
    known = {"d", "p", "kernel", "n_list", "eps_rule", "seed", "seeds"}
    extra = set(config) - known
    if extra:
        raise ParameterError(f"unknown convergence config keys: {sorted(extra)}")
    d = int(config.get("d", 2))
    p = float(config.get("p", 1.0))
    kernel = KernelSpec(config.get("kernel", "constant"))
    n_list = [int(n) for n in config.get("n_list", [2000, 5000])]
    rule = config.get("eps_rule", "log-power")
    reps = int(config.get("seeds", 1))
    master = np.random.SeedSequence(config.get("seed", 0))
    children = master.spawn(len(n_list) * reps)
    jobs = []
    for a, n in enumerate(n_list):
        for r in range(reps):
            seed = int(children[a * reps + r].generate_state(1)[0])
            jobs.append((n, d, p, kernel, rule, seed))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(lambda j: _convergence_row(*j), jobs))
    return [_convergence_row(*j) for j in jobs]


# -- clusterability index -----------------------------------------------------

@dataclass
class BetaMatrix:
    values: np.ndarray

    def __post_init__(self):
        B = np.array(self.values, dtype=np.float64)
        if B.ndim != 2 or B.shape[0] != B.shape[1] or B.shape[0] < 2:
            raise ParameterError("beta must be a k x k matrix with k >= 2")
        off = ~np.eye(len(B), dtype=bool)
        if not (np.all(np.isfinite(B[off])) and np.all(B[off] > 0)):
            raise ParameterError("off-diagonal beta entries must be positive and finite")
        np.fill_diagonal(B, np.nan)
        self.values = B

    @property
    def k(self):
        return len(self.values)

    @property
    def beta_star(self):
        return beta_star_cycles(self)


def _as_beta(beta):
    return beta if isinstance(beta, BetaMatrix) else BetaMatrix(beta)


def beta_matrix(delta, rho, hausdorff, separation, alpha=1.0):
    """beta_ij = delta^alpha H_j / (rho_j^alpha S_ij)."""
    rho = np.asarray(rho, dtype=np.float64)
    H = np.asarray(hausdorff, dtype=np.float64)
    S = np.asarray(separation, dtype=np.float64)
    k = rho.size
    if H.shape != (k,) or S.shape != (k, k):
        raise ParameterError("shape mismatch among rho, hausdorff and separation")
    off = ~np.eye(k, dtype=bool)
    if not delta > 0 or np.any(rho <= 0) or np.any(H <= 0) or np.any(S[off] <= 0):
        raise ParameterError("delta, rho, hausdorff and off-diagonal separation must be positive")
    B = np.full((k, k), np.nan)
    num = (delta / rho) ** alpha * H
    B[off] = (num[None, :] / np.where(off, S, 1.0))[off]
    return BetaMatrix(B)


def max_mean_cycle(C):
    """Maximum mean weight of a cycle in the complete digraph with weights C[i, j].

    Karp's recurrence with every node as a start: D_0 = 0,
    D_m(v) = max_u D_{m-1}(u) + C[u, v]; the answer is
    max_v min_{m<k} (D_k(v) - D_m(v)) / (k - m).
    """
    C = np.asarray(C, dtype=np.float64).copy()
    k = len(C)
    np.fill_diagonal(C, -np.inf)
    D = np.empty((k + 1, k))
    D[0] = 0.0
    for m in range(1, k + 1):
        D[m] = np.max(D[m - 1][:, None] + C, axis=0)
    ratios = (D[k][None, :] - D[:k]) / (k - np.arange(k))[:, None]
    return float(np.max(np.min(ratios, axis=0)))


def beta_star_cycles(beta):
    """Largest geometric mean of beta over directed cycles."""
    B = _as_beta(beta).values
    with np.errstate(invalid="ignore"):
        return math.exp(max_mean_cycle(np.log(B)))


def beta_star_enumerate(beta):
    """Same quantity by listing every simple cycle; exponential, for small k."""
    B = _as_beta(beta).values
    k = len(B)
    best = -np.inf
    for r in range(2, k + 1):
        for nodes in itertools.combinations(range(k), r):
            first, rest = nodes[0], nodes[1:]
            for perm in itertools.permutations(rest):
                cyc = (first, *perm, first)
                logsum = sum(math.log(B[a, b]) for a, b in zip(cyc, cyc[1:]))
                best = max(best, logsum / r)
    return math.exp(best)


def beta_star_minmax(beta):
    """min over s > 0 of max_{i != j} beta_ij s_j / s_i, with s_0 = 1.

    In x = log s this is the linear program: minimize t subject to
    x_j - x_i - t <= -log beta_ij and x_0 = 0. Returns ``(value, s)``.
    """
    B = _as_beta(beta).values
    k = len(B)
    pairs = [(i, j) for i in range(k) for j in range(k) if i != j]
    A = np.zeros((len(pairs), k + 1))
    b = np.empty(len(pairs))
    for r, (i, j) in enumerate(pairs):
        A[r, j] += 1.0
        A[r, i] -= 1.0
        A[r, k] = -1.0
        b[r] = -math.log(B[i, j])
    c = np.zeros(k + 1)
    c[k] = 1.0
    bounds = [(0.0, 0.0)] + [(None, None)] * (k - 1) + [(None, None)]
    res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    if res.status != 0:
        raise InfeasibleError(f"linear program failed: {res.message}")
    s = np.exp(res.x[:k])
    # report F at the returned s rather than the solver's t, which carries its tolerance
    value = float(np.nanmax(B * s[None, :] / s[:, None]))
    return value, s
