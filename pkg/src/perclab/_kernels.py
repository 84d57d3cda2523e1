"""Numba kernels: union-find, incremental cluster growth and BFS on CSR graphs."""

import numba as nb
import numpy as np


@nb.njit(cache=True, nogil=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@nb.njit(cache=True, nogil=True)
def label_components(n, eu, ev, mask):
    """Union-find over edges with ``mask`` set. Returns compact labels and sizes."""
    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    for i in range(eu.shape[0]):
        if not mask[i]:
            continue
        a = _find(parent, eu[i])
        b = _find(parent, ev[i])
        if a == b:
            continue
        if size[a] < size[b]:
            a, b = b, a
        parent[b] = a
        size[a] += size[b]
    labels = np.empty(n, dtype=np.int64)
    compact = np.full(n, -1, dtype=np.int64)
    count = 0
    for v in range(n):
        r = _find(parent, v)
        if compact[r] < 0:
            compact[r] = count
            count += 1
        labels[v] = compact[r]
    sizes = np.zeros(count, dtype=np.int64)
    for v in range(n):
        sizes[labels[v]] += 1
    return labels, sizes


@nb.njit(cache=True, nogil=True)
def grow_clusters(n, eu, ev, order):
    """Insert edges in ``order``; record the two largest cluster sizes after each step."""
    m = order.shape[0]
    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    hist = np.zeros(n + 1, dtype=np.int64)
    hist[1] = n
    k1 = np.empty(m + 1, dtype=np.int64)
    k2 = np.empty(m + 1, dtype=np.int64)
    big = 1
    second = 1 if n > 1 else 0
    k1[0] = big
    k2[0] = second
    for step in range(m):
        e = order[step]
        a = _find(parent, eu[e])
        b = _find(parent, ev[e])
        if a != b:
            sa = size[a]
            sb = size[b]
            if sa < sb:
                a, b = b, a
            parent[b] = a
            s = sa + sb
            size[a] = s
            hist[sa] -= 1
            hist[sb] -= 1
            hist[s] += 1
            old_big = big
            if s > big:
                big = s
            # second largest: either a tie at the top or the next occupied size
            if hist[big] >= 2:
                second = big
            else:
                if s > old_big:
                    second = old_big
                elif s < big and s > second:
                    second = s
                if second >= big:
                    second = big - 1
                while second > 0 and hist[second] == 0:
                    second -= 1
        k1[step + 1] = big
        k2[step + 1] = second
    return k1, k2


@nb.njit(cache=True, nogil=True)
def bfs(indptr, indices, sources, blocked, max_radius):
    """Multi-source BFS avoiding ``blocked`` vertices; -1 marks unreached.

    Sources are entered even if blocked. ``max_radius < 0`` means unbounded.
    """
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    head = 0
    tail = 0
    for s in sources:
        if dist[s] < 0:
            dist[s] = 0
            queue[tail] = s
            tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        d = dist[v]
        if max_radius >= 0 and d >= max_radius:
            continue
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if dist[w] < 0 and not blocked[w]:
                dist[w] = d + 1
                queue[tail] = w
                tail += 1
    return dist


@nb.njit(cache=True, nogil=True)
def bfs_parents(indptr, indices, source):
    """BFS tree from ``source``; each vertex's parent is its smallest-id predecessor."""
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[source] = 0
    parent[source] = source
    queue[0] = source
    head = 0
    tail = 1
    while head < tail:
        v = queue[head]
        head += 1
        for k in range(indptr[v], indptr[v + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                parent[w] = v
                queue[tail] = w
                tail += 1
    return dist, parent
