"""Compiled inner loops: indexed binary heap, fast marching, Dijkstra.

All kernels take the graph as two CSR triplets: the outgoing view
(``out_ptr, out_idx, out_w``, row i lists edges i -> j) and the incoming view
(``in_ptr, in_idx, in_w``, row i lists j with w_ji > 0).
"""

import numpy as np
from numba import njit

FAR, TRIAL, DONE = 0, 1, 2


# -- indexed min-heap keyed on key[node], ties broken by node index ----------

@njit(cache=True, inline="always")
def _less(key, a, b):
    ka = key[a]
    kb = key[b]
    return ka < kb or (ka == kb and a < b)


@njit(cache=True)
def _sift_up(heap, pos, key, s):
    node = heap[s]
    while s > 0:
        parent = (s - 1) >> 1
        pn = heap[parent]
        if _less(key, node, pn):
            heap[s] = pn
            pos[pn] = s
            s = parent
        else:
            break
    heap[s] = node
    pos[node] = s


@njit(cache=True)
def _sift_down(heap, pos, key, size, s):
    node = heap[s]
    while True:
        c = 2 * s + 1
        if c >= size:
            break
        if c + 1 < size and _less(key, heap[c + 1], heap[c]):
            c += 1
        cn = heap[c]
        if _less(key, cn, node):
            heap[s] = cn
            pos[cn] = s
            s = c
        else:
            break
    heap[s] = node
    pos[node] = s


@njit(cache=True)
def heap_push_or_decrease(heap, pos, key, size, node):
    """Insert ``node`` or restore order after key[node] decreased. Returns new size."""
    if pos[node] < 0:
        heap[size] = node
        pos[node] = size
        _sift_up(heap, pos, key, size)
        return size + 1
    _sift_up(heap, pos, key, pos[node])
    return size


@njit(cache=True)
def heap_pop(heap, pos, key, size):
    top = heap[0]
    pos[top] = -1
    size -= 1
    if size > 0:
        heap[0] = heap[size]
        pos[heap[0]] = 0
        _sift_down(heap, pos, key, size, 0)
    return top, size


# -- local scheme -------------------------------------------------------------

@njit(cache=True)
def scheme_lhs(t, ws, ss, m, p):
    total = 0.0
    for k in range(m):
        d = t - ss[k]
        if d > 0.0:
            total += ws[k] * d**p
    return total


@njit(cache=True)
def solve_scheme(ws, ss, m, a, p, tol, max_doublings, hi_hint):
    """Solve sum_k ws[k] (t - ss[k])_+^p = a for t, p >= 1.

    The left side is convex and increasing past min(ss), so Newton's method
    started from an upper bracket decreases monotonically to the root; the
    bracket [lo, hi] is maintained and a bisection step is taken whenever a
    Newton step would leave it. ``hi_hint`` is a known upper bound (or inf).
    Stops once the last step is below ``tol`` relative to t and the residual
    is below ``tol`` relative to a. Returns nan if no bracket was found within
    ``max_doublings`` doublings.
    """
    lo = np.inf
    wsum = 0.0
    for k in range(m):
        if ss[k] < lo:
            lo = ss[k]
        wsum += ws[k]
    if hi_hint < np.inf and scheme_lhs(hi_hint, ws, ss, m, p) >= a:
        hi = hi_hint
    else:
        step = (a / wsum) ** (1.0 / p)
        hi = lo + step
        doublings = 0
        while scheme_lhs(hi, ws, ss, m, p) < a:
            if doublings >= max_doublings:
                return np.nan
            step *= 2.0
            hi = lo + step
            doublings += 1
    t = hi
    for _ in range(500):
        val = 0.0
        der = 0.0
        for k in range(m):
            d = t - ss[k]
            if d > 0.0:
                dp1 = d ** (p - 1.0)
                val += ws[k] * dp1 * d
                der += ws[k] * dp1
        der *= p
        if val < a:
            lo = t
        else:
            hi = t
        if abs(val - a) <= tol * a and hi - lo <= tol * abs(t) + 1e-300:
            break
        if der > 0.0:
            t_new = t - (val - a) / der
        else:
            t_new = 0.5 * (lo + hi)
        if not (lo <= t_new <= hi):
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= tol * abs(t) + 1e-300 and abs(val - a) <= tol * a:
            t = t_new
            break
        if t_new == t:
            break
        t = t_new
    return t


# -- fast marching ------------------------------------------------------------

@njit(cache=True, nogil=True)
def fast_marching(out_ptr, out_idx, out_w, in_ptr, in_idx, in_w, f, boundary, p, tol, max_doublings):
    """Fast marching for sum_j w_ji (u_i - u_j)_+^p = f_i, u = 0 on boundary.

    Returns (u, order, status) where order[:count] is the visit order and
    status flags nan-failure (-1) or success (count).
    """
    n = out_ptr.shape[0] - 1
    u = np.full(n, np.inf)
    state = np.zeros(n, dtype=np.int8)
    is_bnd = np.zeros(n, dtype=np.bool_)
    heap = np.empty(n, dtype=np.int64)
    pos = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    # p = 1: running sums over active finalized upwind neighbors
    wsum = np.zeros(n)
    wssum = np.zeros(n)
    maxdeg = 0
    for i in range(n):
        dg = in_ptr[i + 1] - in_ptr[i]
        if dg > maxdeg:
            maxdeg = dg
    ws = np.empty(maxdeg)
    ss = np.empty(maxdeg)
    exact = p == 1.0

    size = 0
    for b in boundary:
        if not is_bnd[b]:
            is_bnd[b] = True
            u[b] = 0.0
            state[b] = TRIAL
            size = heap_push_or_decrease(heap, pos, u, size, b)

    count = 0
    while size > 0:
        i, size = heap_pop(heap, pos, u, size)
        state[i] = DONE
        order[count] = i
        count += 1
        s = u[i]
        for e in range(out_ptr[i], out_ptr[i + 1]):
            j = out_idx[e]
            if state[j] == DONE or is_bnd[j] or s >= u[j]:
                continue
            if exact:
                wsum[j] += out_w[e]
                wssum[j] += out_w[e] * s
                t = (f[j] + wssum[j]) / wsum[j]
                if t < s:
                    t = s
            else:
                m = 0
                for q in range(in_ptr[j], in_ptr[j + 1]):
                    k = in_idx[q]
                    if state[k] == DONE:
                        ws[m] = in_w[q]
                        ss[m] = u[k]
                        m += 1
                t = solve_scheme(ws, ss, m, f[j], p, tol, max_doublings, u[j])
                if t != t:
                    return u, order, -1
            if t < u[j]:
                u[j] = t
                state[j] = TRIAL
                size = heap_push_or_decrease(heap, pos, u, size, j)
    return u, order, count


@njit(cache=True, nogil=True)
def dijkstra(out_ptr, out_idx, out_w, f, boundary):
    """u_i = min_j (u_j + f_i / w_ji), u = 0 on boundary."""
    n = out_ptr.shape[0] - 1
    u = np.full(n, np.inf)
    done = np.zeros(n, dtype=np.bool_)
    heap = np.empty(n, dtype=np.int64)
    pos = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    size = 0
    for b in boundary:
        if u[b] != 0.0:
            u[b] = 0.0
            size = heap_push_or_decrease(heap, pos, u, size, b)
    count = 0
    while size > 0:
        i, size = heap_pop(heap, pos, u, size)
        done[i] = True
        order[count] = i
        count += 1
        for e in range(out_ptr[i], out_ptr[i + 1]):
            j = out_idx[e]
            if done[j]:
                continue
            t = u[i] + f[j] / out_w[e]
            if t < u[j]:
                u[j] = t
                size = heap_push_or_decrease(heap, pos, u, size, j)
    return u, order, count
