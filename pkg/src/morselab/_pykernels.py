"""Pure-Python witness search; reference implementation of ``_kernels``."""


def witness_search(adj, dist, exc, src, dst, A, B, C, T, best, stop_above, node_budget):
    """Branch-and-bound DFS over (Q,q)-quasi-geodesic edge paths ``src -> dst``.

    Maximizes the largest ``exc`` value along a path that ends at ``dst``.
    ``adj`` is a region adjacency table (-1 marks a missing neighbour),
    ``dist`` exact region distances, ``exc`` the distance of each region
    vertex to the tested subpath.  The quasi-geodesic condition in scaled
    form is ``A*(j-i) <= B*d + C`` and ``T`` bounds the path length.

    Returns ``(best, path, nodes, exhaustive)``; ``path`` is the witness that
    first reached ``best`` (empty if nothing beat the incoming ``best``).
    """
    adj = [list(map(int, row)) for row in adj]
    dist = [list(map(int, row)) for row in dist]
    exc = [int(x) for x in exc]
    nl = len(adj[0]) if adj else 0
    T = int(T)
    path = [0] * (T + 1)
    it = [0] * (T + 1)
    emax = [0] * (T + 1)
    slack = [0] * (T + 1)
    found = []
    nodes = 0
    exhaustive = True
    ddst = [row[dst] for row in dist]

    path[0] = src
    emax[0] = exc[src]
    slack[0] = B * ddst[src] + C
    k = 0
    if src == dst and exc[src] > best:
        best = exc[src]
        found = [src]
    while k >= 0:
        if best > stop_above:
            exhaustive = False
            break
        l = it[k]
        if l == nl:
            k -= 1
            continue
        it[k] = l + 1
        w = adj[path[k]][l]
        if w < 0:
            continue
        nodes += 1
        if nodes > node_budget:
            exhaustive = False
            break
        r = T - k - 1
        dw = ddst[w]
        if dw > r or A * (k + 1 + dw) > slack[k]:
            continue
        row = dist[w]
        ok = True
        for i in range(k + 1):
            if A * (k + 1 - i) > B * row[path[i]] + C:
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
            found = path[: k + 1]
    return best, found, nodes, exhaustive
