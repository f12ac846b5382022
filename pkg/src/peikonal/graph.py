"""Sparse weighted graphs: construction, weighting schemes and perturbation.

A :class:`Graph` stores ``w_ij`` (weight of the directed edge ``i -> j``) as a
CSR matrix together with its transpose, so that both the outgoing view (used to
propagate fast marching fronts) and the incoming view (used to evaluate the
operator at a node) are available without conversion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree
from scipy.special import gammaln

from .errors import DegenerateScaleError, ParameterError

__all__ = [
    "Graph",
    "KernelSpec",
    "Perturbation",
    "add_perturbation",
    "build_knn_graph",
    "build_proximity_graph",
    "compute_sigma_p",
    "inject_corrupted_edges",
    "max_unweighted_in_degree",
    "power_graph",
    "sphere_moment",
    "unit_ball_volume",
]


def _readonly(a):
    a.flags.writeable = False
    return a


class Graph:
    """Directed graph with strictly positive, finite edge weights.

    Parameters
    ----------
    weights : array_like or scipy sparse matrix, shape (n, n)
        ``weights[i, j]`` is the weight of the edge ``i -> j``. Zero entries
        mean "no edge". Self-loops and negative weights are rejected.
    """

    def __init__(self, weights):
        W = sp.csr_matrix(weights, dtype=np.float64, copy=True)
        if W.shape[0] != W.shape[1]:
            raise ParameterError(f"weight matrix must be square, got {W.shape}")
        W.sum_duplicates()
        W.eliminate_zeros()
        W.sort_indices()
        if not np.all(np.isfinite(W.data)):
            raise ParameterError("edge weights must be finite")
        if np.any(W.data < 0):
            raise ParameterError("edge weights must be nonnegative")
        if np.any(W.diagonal() != 0):
            raise ParameterError("self-loops are not allowed")

        self.weights = W
        self.incoming = W.T.tocsr()
        self.incoming.sort_indices()
        for M in (self.weights, self.incoming):
            _readonly(M.data)
            _readonly(M.indices)
            _readonly(M.indptr)

    @classmethod
    def from_edges(cls, n, src, dst, w):
        """Build from edge arrays. Repeated ``(src, dst)`` pairs are summed."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        w = np.asarray(w, dtype=np.float64)
        if src.size and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n):
            raise ParameterError("edge endpoint out of range")
        return cls(sp.coo_matrix((w, (src, dst)), shape=(n, n)))

    @property
    def n(self):
        return self.weights.shape[0]

    @property
    def num_edges(self):
        return self.weights.nnz

    def edges(self):
        """Return ``(src, dst, w)`` arrays of all directed edges."""
        coo = self.weights.tocoo()
        return coo.row.astype(np.int64), coo.col.astype(np.int64), coo.data.copy()

    def in_neighbors(self, i):
        """Nodes ``j`` with ``w_ji > 0`` and the corresponding weights."""
        a, b = self.incoming.indptr[i], self.incoming.indptr[i + 1]
        return self.incoming.indices[a:b], self.incoming.data[a:b]

    def out_neighbors(self, i):
        a, b = self.weights.indptr[i], self.weights.indptr[i + 1]
        return self.weights.indices[a:b], self.weights.data[a:b]

    def is_symmetric(self):
        D = self.weights - self.weights.T
        return D.nnz == 0 or np.all(D.data == 0)

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


@dataclass(frozen=True)
class Perturbation:
    """Nonnegative additive weight changes ``dW``, stored as directed entries."""

    src: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    dst: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    weight: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if np.any(np.asarray(self.weight) < 0):
            raise ParameterError("perturbation weights must be nonnegative")

    def __len__(self):
        return len(self.src)

    def matrix(self, n):
        return sp.csr_matrix((self.weight, (self.src, self.dst)), shape=(n, n))

    def as_graph(self, n):
        return Graph(self.matrix(n))


def add_perturbation(graph, perturbation):
    if len(perturbation) == 0:
        return graph
    if max(perturbation.src.max(), perturbation.dst.max()) >= graph.n:
        raise ParameterError("perturbation endpoint out of range")
    return Graph(graph.weights + perturbation.matrix(graph.n))


# ---------------------------------------------------------------------------
# kernels

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL_R = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def unit_ball_volume(d):
    return float(np.exp(0.5 * d * np.log(np.pi) - gammaln(0.5 * d + 1.0)))


def sphere_moment(p, d):
    """Integral of ``|theta_1|^p`` over the unit sphere in R^d."""
    return float(
        2.0 * np.exp(0.5 * (d - 1) * np.log(np.pi) + gammaln(0.5 * (p + 1)) - gammaln(0.5 * (p + d)))
    )


def _raw_profile(profile, t):
    t = np.asarray(t, dtype=np.float64)
    if profile == "constant":
        return np.where(t <= 1.0, 1.0, 0.0)
    out = np.zeros_like(t)
    inside = t < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def _radial_moment(profile, q):
    """int_0^1 raw(r) r^q dr by 64-point Gauss-Legendre."""
    return float(np.sum(_GL_W * _raw_profile(profile, _GL_R) * _GL_R**q))


@dataclass(frozen=True)
class KernelSpec:
    """Radial kernel profile ``eta`` supported on [0, 1].

    ``profile`` is ``"constant"`` (indicator of [0, 1]) or ``"bump"``
    (``exp(-1/(1-t^2))``). Values returned by :meth:`eta` are normalized to
    unit mass over the unit ball of the requested dimension.
    """

    profile: str = "constant"

    def __post_init__(self):
        if self.profile not in ("constant", "bump"):
            raise ParameterError(f"unknown kernel profile {self.profile!r}")

    def normalization(self, d):
        return 1.0 / (sphere_moment(0.0, d) * _radial_moment(self.profile, d - 1))

    def eta(self, t, d):
        return self.normalization(d) * _raw_profile(self.profile, t)


def compute_sigma_p(kernel, p, d):
    """Return sigma_p = int_{B(0,1)} eta(|z|) |z_1|^p dz.

    Factored into a radial integral (Gauss-Legendre) times the closed-form
    sphere moment of ``|theta_1|^p``.
    """
    if d < 1:
        raise ParameterError("dimension must be >= 1")
    radial = kernel.normalization(d) * _radial_moment(kernel.profile, p + d - 1)
    return radial * sphere_moment(p, d)


# ---------------------------------------------------------------------------
# constructions

def _as_points(points):
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ParameterError("points must be an (n, d) array")
    if not np.all(np.isfinite(X)):
        raise ParameterError("points must be finite")
    return X


def knn_search(X, k):
    """Exact k nearest neighbors of every point, excluding the point itself.

    Returns ``(idx, dist)`` of shape (n, k), sorted by distance.
    """
    n = X.shape[0]
    dist, idx = cKDTree(X).query(X, k=k + 1)
    dist = np.atleast_2d(dist)
    idx = np.atleast_2d(idx)
    # drop self; with duplicate points self need not be in column 0
    is_self = idx == np.arange(n)[:, None]
    no_self = ~is_self.any(axis=1)
    is_self[no_self, -1] = True
    keep = ~is_self
    return idx[keep].reshape(n, k), dist[keep].reshape(n, k)


def build_knn_graph(points, k, symmetrize=True):
    """k-nearest neighbor graph with self-tuning Gaussian weights.

    ``w_ij = exp(-4 |x_i - x_j|^2 / d_k(x_i)^2)`` for the k nearest neighbors
    ``j`` of ``i``, where ``d_k(x_i)`` is the distance to the k-th neighbor.
    With ``symmetrize`` the weight matrix is replaced by ``W + W^T``.
    """
    X = _as_points(points)
    n = X.shape[0]
    k = int(k)
    if k < 1 or k >= n:
        raise ParameterError(f"need 1 <= k < n, got k={k}, n={n}")
    idx, dist = knn_search(X, k)
    dk = dist[:, -1]
    if np.any(dk == 0):
        bad = np.flatnonzero(dk == 0)
        raise DegenerateScaleError(
            f"{bad.size} points have zero distance to their k-th neighbor (duplicates), e.g. node {bad[0]}"
        )
    w = np.exp(-4.0 * dist**2 / dk[:, None] ** 2)
    rows = np.repeat(np.arange(n), k)
    W = sp.csr_matrix((w.ravel(), (rows, idx.ravel())), shape=(n, n))
    if symmetrize:
        W = W + W.T
    return Graph(W)


def build_proximity_graph(points, eps, kernel=None, p=1.0, normalization="rgg"):
    """Random geometric graph connecting points within distance ``eps``.

    normalization="rgg" gives ``w_ij = eta_eps(|x_i-x_j|) / (n sigma_p eps^p)``
    with ``eta_eps(t) = eps^-d eta(t/eps)``. normalization="raw" gives
    ``w_ij = eta(|x_i-x_j|/eps) / eta(0)``, i.e. unit weights for the
    constant profile. With the bump profile, pairs within about 7e-4 * eps of
    the cutoff get a weight that underflows to zero and carry no edge.
    """
    X = _as_points(points)
    n, d = X.shape
    if not eps > 0:
        raise ParameterError("eps must be positive")
    if normalization not in ("rgg", "raw"):
        raise ParameterError(f"unknown normalization {normalization!r}")
    kernel = kernel or KernelSpec()

    pairs = cKDTree(X).query_pairs(eps, output_type="ndarray")
    if pairs.size == 0:
        return Graph(sp.csr_matrix((n, n)))
    i, j = pairs[:, 0], pairs[:, 1]
    r = np.linalg.norm(X[i] - X[j], axis=1)
    ok = (r > 0) & (r <= eps)
    i, j, r = i[ok], j[ok], r[ok]

    eta = kernel.eta(r / eps, d)
    if normalization == "rgg":
        sigma = compute_sigma_p(kernel, p, d)
        w = eta / (eps**d * n * sigma * eps**p)
    else:
        w = eta / kernel.eta(0.0, d)
    pos = w > 0
    i, j, w = i[pos], j[pos], w[pos]
    src = np.concatenate([i, j])
    dst = np.concatenate([j, i])
    return Graph(sp.csr_matrix((np.concatenate([w, w]), (src, dst)), shape=(n, n)))


def inject_corrupted_edges(graph, m, weight=1.0, seed=None):
    """Add ``m`` random new undirected edges of the given weight.

    Pairs are drawn uniformly without replacement among unordered pairs that
    are not connected in either direction. Returns the perturbed graph and the
    :class:`Perturbation` describing the change.
    """
    n = graph.n
    m = int(m)
    if m < 0:
        raise ParameterError("m must be nonnegative")
    if not weight > 0:
        raise ParameterError("corrupted edge weight must be positive")
    S = (graph.weights + graph.weights.T).tocoo()
    upper = S.row < S.col
    existing = np.unique(S.row[upper].astype(np.int64) * n + S.col[upper])
    free = n * (n - 1) // 2 - existing.size
    if m > free:
        raise ParameterError(f"cannot add {m} edges: only {free} free pairs")
    if m == 0:
        return graph, Perturbation()

    rng = np.random.default_rng(seed)
    if n <= 3000 or m > free // 4:
        iu, ju = np.triu_indices(n, k=1)
        keys = iu.astype(np.int64) * n + ju
        keys = keys[~np.isin(keys, existing, assume_unique=True)]
        chosen = rng.choice(keys, size=m, replace=False)
    else:
        taken = set(existing.tolist())
        chosen = []
        while len(chosen) < m:
            a = rng.integers(0, n, size=2 * (m - len(chosen)))
            b = rng.integers(0, n, size=a.size)
            for x, y in zip(a.tolist(), b.tolist()):
                if x == y:
                    continue
                key = min(x, y) * n + max(x, y)
                if key in taken:
                    continue
                taken.add(key)
                chosen.append(key)
                if len(chosen) == m:
                    break
        chosen = np.asarray(chosen, dtype=np.int64)

    i, j = np.divmod(chosen, n)
    pert = Perturbation(
        src=np.concatenate([i, j]),
        dst=np.concatenate([j, i]),
        weight=np.full(2 * m, float(weight)),
    )
    return add_perturbation(graph, pert), pert


def max_unweighted_in_degree(graph):
    """K = max_i #{j : w_ji > 0}."""
    if graph.n == 0:
        return 0
    return int(np.diff(graph.incoming.indptr).max(initial=0))


def power_graph(graph, exponent):
    """Graph with every weight raised to ``exponent`` (edge set unchanged)."""
    if not exponent > 0:
        raise ParameterError("exponent must be positive")
    W = graph.weights.copy()
    W.data = np.power(W.data, exponent)
    return Graph(W)
