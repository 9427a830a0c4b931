# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled witness search; same contract as ``_pykernels.witness_search``."""
import numpy as np
from libc.stdlib cimport malloc, free


def witness_search(adj_in, dist_in, exc_in, int src, int dst, long long A, long long B,
                   long long C, int T, long long best, long long stop_above,
                   long long node_budget):
    cdef long long[:, ::1] adj = np.ascontiguousarray(adj_in, dtype=np.int64)
    cdef int[:, ::1] dist = np.ascontiguousarray(dist_in, dtype=np.int32)
    cdef int[::1] exc = np.ascontiguousarray(exc_in, dtype=np.int32)
    cdef int nl = adj.shape[1]
    cdef int *path = <int *> malloc((T + 1) * sizeof(int))
    cdef int *it = <int *> malloc((T + 1) * sizeof(int))
    cdef long long *emax = <long long *> malloc((T + 1) * sizeof(long long))
    cdef long long *slack = <long long *> malloc((T + 1) * sizeof(long long))
    cdef int *found = <int *> malloc((T + 1) * sizeof(int))
    cdef int found_len = 0
    cdef long long nodes = 0
    cdef bint exhaustive = True
    cdef int k, l, w, i, r, dw
    cdef long long e, bound, s
    cdef bint ok
    if path == NULL or it == NULL or emax == NULL or slack == NULL or found == NULL:
        free(path); free(it); free(emax); free(slack); free(found)
        raise MemoryError()
    try:
        with nogil:
            path[0] = src
            it[0] = 0
            emax[0] = exc[src]
            slack[0] = B * dist[src, dst] + C
            k = 0
            if src == dst and exc[src] > best:
                best = exc[src]
                found[0] = src
                found_len = 1
            while k >= 0:
                if best > stop_above:
                    exhaustive = False
                    break
                l = it[k]
                if l == nl:
                    k -= 1
                    continue
                it[k] = l + 1
                w = <int> adj[path[k], l]
                if w < 0:
                    continue
                nodes += 1
                if nodes > node_budget:
                    exhaustive = False
                    break
                r = T - k - 1
                dw = dist[w, dst]
                if dw > r or A * (k + 1 + dw) > slack[k]:
                    continue
                ok = True
                for i in range(k + 1):
                    if A * (k + 1 - i) > B * dist[w, path[i]] + C:
                        ok = False
                        break
                if not ok:
                    continue
                e = emax[k]
                if exc[w] > e:
                    e = exc[w]
                bound = (exc[w] + r) // 2
                if bound < e:
                    bound = e
                if bound <= best:
                    continue
                k += 1
                path[k] = w
                it[k] = 0
                emax[k] = e
                s = B * dw + C + A * k
                slack[k] = s if s < slack[k - 1] else slack[k - 1]
                if w == dst and e > best:
                    best = e
                    for i in range(k + 1):
                        found[i] = path[i]
                    found_len = k + 1
        out = [found[i] for i in range(found_len)]
    finally:
        free(path); free(it); free(emax); free(slack); free(found)
    return best, out, nodes, exhaustive
