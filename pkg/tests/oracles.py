"""Brute-force reference implementations the tests compare the package
against.  Everything here trades speed for obviousness: dense matrices,
exhaustive enumeration, adaptive quadrature from scipy.  None of it
shares code with the package.
"""

import math

import numpy as np
import scipy.integrate


def floyd_warshall(n, edges):
    """All-pairs shortest path matrix by min-plus iteration.

    edges is a list of (i, j, cost) triples for an undirected graph.
    """
    D = np.full((n, n), np.inf)
    np.fill_diagonal(D, 0.0)
    for i, j, c in edges:
        c = float(c)
        if c < D[i, j]:
            D[i, j] = c
            D[j, i] = c
    for k in range(n):
        D = np.minimum(D, D[:, k, None] + D[None, k, :])
    return D


def shortest_path_enumeration(n, edges, s, t):
    """Minimum cost from s to t and the list of all minimum-cost simple
    paths, each as a list of edge indices.

    Uses exact float comparison for ties, so callers must supply costs
    whose partial sums are exact in binary (small dyadic rationals).
    """
    adj = [[] for _ in range(n)]
    for e, (i, j, c) in enumerate(edges):
        adj[i].append((j, e, float(c)))
        adj[j].append((i, e, float(c)))
    best = [math.inf]
    paths = []

    def dfs(v, cost, used, path):
        if v == t:
            if cost < best[0]:
                best[0] = cost
                paths.clear()
            if cost == best[0]:
                paths.append(list(path))
            return
        for w, e, c in adj[v]:
            if w in used:
                continue
            nxt = cost + c
            # positive costs: anything already above the best cannot
            # come back down, and a tie cannot extend further
            if nxt > best[0]:
                continue
            used.add(w)
            path.append(e)
            dfs(w, nxt, used, path)
            path.pop()
            used.remove(w)

    dfs(s, 0.0, {s}, [])
    return best[0], paths


def brute_edge_betweenness(n, edges):
    """Edge betweenness by exhaustive path enumeration over ordered
    pairs, splitting credit equally among tied shortest paths."""
    be = np.zeros(len(edges))
    for s in range(n):
        for t in range(n):
            if s == t:
                continue
            cost, paths = shortest_path_enumeration(n, edges, s, t)
            if not paths:
                continue
            w = 1.0 / len(paths)
            for p in paths:
                for e in p:
                    be[e] += w
    return be


def brute_knn_pairs(points, k):
    """Union-symmetrized k-nearest-neighbor pairs with ties broken by
    node index, as a set of (i, j) tuples with i < j."""
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    pairs = set()
    for i in range(n):
        cand = sorted(
            (float(np.sqrt(((pts[i] - pts[j]) ** 2).sum())), j)
            for j in range(n) if j != i
        )
        for _, j in cand[:k]:
            pairs.add((min(i, j), max(i, j)))
    return pairs


def brute_ball_pairs(points, delta):
    """All pairs at Euclidean distance <= delta, as (i, j) with i < j."""
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    pairs = set()
    for i in range(n):
        for j in range(i + 1, n):
            if math.sqrt(((pts[i] - pts[j]) ** 2).sum()) <= delta:
                pairs.add((i, j))
    return pairs


def spiral_arclength_quad(a):
    """Arc length of the plane spiral r = t from 0 to a by adaptive
    quadrature, independent of the package's fixed-rule integrator."""
    val, _ = scipy.integrate.quad(
        lambda t: math.sqrt(1.0 + t * t), 0.0, float(a),
        epsabs=1e-12, epsrel=1e-12,
    )
    return val


def spiral_arclength_closed(a):
    """Closed form of the same arc length."""
    return 0.5 * (a * math.sqrt(1.0 + a * a) + math.asinh(a))


def unrolled_distance(p, q):
    """Euclidean distance between two (a, b) surface parameters after
    unrolling the surface to the flat plane.  The unrolled strip is
    convex, so this is the length of the shortest on-surface path and
    a lower bound for any other curve between the points."""
    sa = spiral_arclength_quad(p[0])
    sb = spiral_arclength_quad(q[0])
    return math.hypot(sa - sb, float(p[1]) - float(q[1]))


def segment_length_quad(p, q):
    """On-surface length of the straight parameter-space segment from
    p to q, by adaptive quadrature of the pulled-back metric
    sqrt((1 + a(t)^2) da^2 + db^2)."""
    da = float(q[0]) - float(p[0])
    db = float(q[1]) - float(p[1])
    val, _ = scipy.integrate.quad(
        lambda t: math.sqrt((1.0 + (p[0] + t * da) ** 2) * da * da
                            + db * db),
        0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=200,
    )
    return val


def neumann_partial_sum(P, p, terms):
    """Direct partial sum p * sum_{t<terms} (1-p)^t P^t by repeated
    dense multiplication."""
    P = np.asarray(P, dtype=np.float64)
    acc = np.zeros_like(P)
    term = np.eye(P.shape[0])
    for _ in range(terms):
        acc += term
        term = (1.0 - p) * (term @ P)
    return p * acc


def brute_jaccard(n, edges):
    """Per-edge Jaccard overlap of endpoint neighborhoods.  Each
    endpoint's set is its neighbors plus the opposite endpoint, with
    the endpoint itself excluded."""
    nbrs = [set() for _ in range(n)]
    for i, j, _ in edges:
        nbrs[i].add(j)
        nbrs[j].add(i)
    out = []
    for i, j, _ in edges:
        fi = (nbrs[i] | {j}) - {i}
        fj = (nbrs[j] | {i}) - {j}
        out.append(len(fi & fj) / len(fi | fj))
    return np.array(out)


def brute_normalized_lengths(n, edges):
    """Per-edge cost divided by the geometric mean of the endpoint
    incident-cost sums."""
    sums = np.zeros(n)
    for i, j, c in edges:
        sums[i] += c
        sums[j] += c
    return np.array([c / math.sqrt(sums[i] * sums[j]) for i, j, c in edges])


def random_connected_edges(rng, n, extra_frac=0.5,
                           costs=(0.5, 1.0, 1.5, 2.0, 2.5, 3.0)):
    """Random connected graph: a random spanning tree plus extra
    chords.  Costs come from a dyadic menu so path sums are exact."""
    perm = rng.permutation(n)
    pairs = set()
    for idx in range(1, n):
        a = int(perm[rng.integers(0, idx)])
        b = int(perm[idx])
        pairs.add((min(a, b), max(a, b)))
    target = min(n * (n - 1) // 2, (n - 1) + int(extra_frac * n))
    while len(pairs) < target:
        a, b = (int(v) for v in rng.integers(0, n, 2))
        if a != b:
            pairs.add((min(a, b), max(a, b)))
    return [(i, j, float(rng.choice(costs))) for i, j in sorted(pairs)]
