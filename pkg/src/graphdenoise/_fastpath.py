"""Compiled single-source shortest paths and edge betweenness.

Both kernels operate on a symmetric CSR adjacency: ``indptr`` and
``indices`` describe directed slots (each undirected edge appears twice),
``weights`` holds the slot costs, and ``eid`` maps each slot back to the
undirected edge index so per-edge accumulators can be shared between the
two directions.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def dijkstra_csr(indptr, indices, weights, source):
    """Distances, predecessor tree, and settle order from one source.

    Returns
    -------
    dist : (n,) float64, +inf for unreachable nodes
    pred : (n,) int64, -1 for the source and unreachable nodes
    order : (n,) int64, settled nodes in extraction order; trailing
        entries are -1 when the graph is disconnected
    """
    n = indptr.shape[0] - 1
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    order = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=np.uint8)

    # binary heap with lazy deletion; capacity bounded by directed slots
    cap = indices.shape[0] + 1
    heap_d = np.empty(cap, dtype=np.float64)
    heap_v = np.empty(cap, dtype=np.int64)
    size = 0

    dist[source] = 0.0
    heap_d[0] = 0.0
    heap_v[0] = source
    size = 1
    settled = 0

    while size > 0:
        top_d = heap_d[0]
        top_v = heap_v[0]
        size -= 1
        heap_d[0] = heap_d[size]
        heap_v[0] = heap_v[size]
        i = 0
        while True:
            left = 2 * i + 1
            if left >= size:
                break
            child = left
            right = left + 1
            if right < size and heap_d[right] < heap_d[left]:
                child = right
            if heap_d[child] < heap_d[i]:
                heap_d[i], heap_d[child] = heap_d[child], heap_d[i]
                heap_v[i], heap_v[child] = heap_v[child], heap_v[i]
                i = child
            else:
                break
        if done[top_v] or top_d > dist[top_v]:
            continue
        done[top_v] = 1
        order[settled] = top_v
        settled += 1
        for idx in range(indptr[top_v], indptr[top_v + 1]):
            v = indices[idx]
            nd = top_d + weights[idx]
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = top_v
                heap_d[size] = nd
                heap_v[size] = v
                size += 1
                j = size - 1
                while j > 0:
                    parent = (j - 1) // 2
                    if heap_d[j] < heap_d[parent]:
                        heap_d[j], heap_d[parent] = heap_d[parent], heap_d[j]
                        heap_v[j], heap_v[parent] = heap_v[parent], heap_v[j]
                        j = parent
                    else:
                        break
    return dist, pred, order


@njit(cache=True, nogil=True)
def brandes_edge_betweenness(indptr, indices, weights, eid, n_edges):
    """Weighted edge betweenness over ordered node pairs.

    Shortest-path counts split credit fractionally among ties.  Path
    multiplicity ties are detected by exact float equality, which is the
    convention any independent reimplementation must share for the
    counts to agree.
    """
    n = indptr.shape[0] - 1
    bc = np.zeros(n_edges)
    cap = indices.shape[0] + 1
    heap_d = np.empty(cap, dtype=np.float64)
    heap_v = np.empty(cap, dtype=np.int64)

    dist = np.empty(n)
    sigma = np.empty(n)
    delta = np.empty(n)
    done = np.zeros(n, dtype=np.uint8)
    order = np.empty(n, dtype=np.int64)

    for s in range(n):
        for i in range(n):
            dist[i] = np.inf
            sigma[i] = 0.0
            delta[i] = 0.0
            done[i] = 0
        dist[s] = 0.0
        sigma[s] = 1.0
        heap_d[0] = 0.0
        heap_v[0] = s
        size = 1
        settled = 0

        while size > 0:
            top_d = heap_d[0]
            top_v = heap_v[0]
            size -= 1
            heap_d[0] = heap_d[size]
            heap_v[0] = heap_v[size]
            i = 0
            while True:
                left = 2 * i + 1
                if left >= size:
                    break
                child = left
                right = left + 1
                if right < size and heap_d[right] < heap_d[left]:
                    child = right
                if heap_d[child] < heap_d[i]:
                    heap_d[i], heap_d[child] = heap_d[child], heap_d[i]
                    heap_v[i], heap_v[child] = heap_v[child], heap_v[i]
                    i = child
                else:
                    break
            if done[top_v] or top_d > dist[top_v]:
                continue
            done[top_v] = 1
            order[settled] = top_v
            settled += 1
            for idx in range(indptr[top_v], indptr[top_v + 1]):
                v = indices[idx]
                nd = top_d + weights[idx]
                if nd < dist[v]:
                    dist[v] = nd
                    sigma[v] = sigma[top_v]
                    heap_d[size] = nd
                    heap_v[size] = v
                    size += 1
                    j = size - 1
                    while j > 0:
                        parent = (j - 1) // 2
                        if heap_d[j] < heap_d[parent]:
                            heap_d[j], heap_d[parent] = heap_d[parent], heap_d[j]
                            heap_v[j], heap_v[parent] = heap_v[parent], heap_v[j]
                            j = parent
                        else:
                            break
                elif nd == dist[v] and not done[v]:
                    sigma[v] += sigma[top_v]

        # accumulate pair dependencies in reverse settle order
        for k in range(settled - 1, 0, -1):
            w = order[k]
            coeff = (1.0 + delta[w]) / sigma[w]
            for idx in range(indptr[w], indptr[w + 1]):
                v = indices[idx]
                if dist[v] + weights[idx] == dist[w]:
                    contrib = sigma[v] * coeff
                    delta[v] += contrib
                    bc[eid[idx]] += contrib
    return bc
