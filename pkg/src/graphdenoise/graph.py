"""Point clouds, neighborhood graphs, shortest paths, and the penalty
re-weighting used to route geodesic estimates around flagged edges."""

import numpy as np
from scipy.spatial.distance import cdist

from ._fastpath import dijkstra_csr
from .errors import InvalidGraphError, InvalidParameterError

RULE_NAMES = ("ldr", "jdr", "ecdr", "npdr")


class PointCloud:
    """Finite points in ambient space, optionally carrying the latent
    parameters each point was generated from.

    Parameters
    ----------
    points : (n, r) array
        Ambient coordinates; every entry must be finite.
    latent : (n, d) array, optional
        Generating parameters, kept alongside for ground-truth queries.
    """

    __slots__ = ("points", "latent")

    def __init__(self, points, latent=None):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2:
            raise InvalidParameterError("points must be a 2-d array")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidParameterError("point cloud must be nonempty")
        if not np.isfinite(pts).all():
            raise InvalidParameterError("points must be finite")
        if latent is not None:
            latent = np.ascontiguousarray(latent, dtype=np.float64)
            if latent.ndim != 2 or latent.shape[0] != pts.shape[0]:
                raise InvalidParameterError(
                    "latent must have one row per point"
                )
        self.points = pts
        self.latent = latent

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]


class NNGraph:
    """Undirected weighted graph stored as canonical edge lists.

    Edges are kept once each with ``i < j``, sorted lexicographically.
    Costs are nonnegative and finite.  Self-loops and duplicates are
    rejected.
    """

    __slots__ = ("n", "edge_i", "edge_j", "edge_cost", "_csr", "_nbrs", "_eid_map")

    def __init__(self, n, edge_i, edge_j, edge_cost):
        n = int(n)
        if n < 1:
            raise InvalidGraphError("graph needs at least one node")
        ei = np.asarray(edge_i, dtype=np.int64)
        ej = np.asarray(edge_j, dtype=np.int64)
        w = np.asarray(edge_cost, dtype=np.float64)
        if not (ei.shape == ej.shape == w.shape) or ei.ndim != 1:
            raise InvalidGraphError("edge arrays must be 1-d and equal length")
        if ei.size:
            if min(ei.min(), ej.min()) < 0 or max(ei.max(), ej.max()) >= n:
                raise InvalidGraphError("edge endpoint out of range")
            if np.any(ei == ej):
                raise InvalidGraphError("self-loops are not allowed")
            if not np.isfinite(w).all() or np.any(w < 0):
                raise InvalidGraphError("edge costs must be finite and nonnegative")
            lo = np.minimum(ei, ej)
            hi = np.maximum(ei, ej)
            order = np.lexsort((hi, lo))
            lo, hi, w = lo[order], hi[order], w[order]
            key = lo * np.int64(n) + hi
            if np.any(np.diff(key) == 0):
                raise InvalidGraphError("duplicate edges are not allowed")
            ei, ej = lo, hi
        self.n = n
        self.edge_i = ei
        self.edge_j = ej
        self.edge_cost = w
        for arr in (self.edge_i, self.edge_j, self.edge_cost):
            arr.flags.writeable = False
        self._csr = None
        self._nbrs = None
        self._eid_map = None

    @property
    def m(self):
        return int(self.edge_i.size)

    def csr(self, weights=None):
        """Symmetric CSR view ``(indptr, indices, w, eid)``.

        ``weights`` optionally replaces the per-edge costs (same length
        as the edge list); the structure is cached and shared.
        """
        if self._csr is None:
            m = self.m
            src = np.concatenate([self.edge_i, self.edge_j])
            dst = np.concatenate([self.edge_j, self.edge_i])
            eid = np.concatenate([np.arange(m), np.arange(m)]).astype(np.int64)
            order = np.lexsort((dst, src))
            src, dst, eid = src[order], dst[order], eid[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.add.at(indptr, src + 1, 1)
            np.cumsum(indptr, out=indptr)
            self._csr = (indptr, dst, eid)
        indptr, dst, eid = self._csr
        if weights is None:
            w = self.edge_cost
        else:
            w = np.asarray(weights, dtype=np.float64)
            if w.shape != (self.m,):
                raise InvalidParameterError("weights must have one entry per edge")
        return indptr, dst, w[eid], eid

    def neighbor_sets(self):
        """List of sorted neighbor-index arrays, one per node."""
        if self._nbrs is None:
            indptr, dst, _, _ = self.csr()
            self._nbrs = [dst[indptr[i]:indptr[i + 1]] for i in range(self.n)]
        return self._nbrs

    def edge_index(self, i, j):
        """Position of the undirected edge ``{i, j}`` in the edge list,
        or -1 when absent."""
        if self._eid_map is None:
            self._eid_map = {
                (int(a), int(b)): k
                for k, (a, b) in enumerate(zip(self.edge_i, self.edge_j))
            }
        lo, hi = (i, j) if i < j else (j, i)
        return self._eid_map.get((int(lo), int(hi)), -1)

    def degrees(self):
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self.edge_i, 1)
        np.add.at(deg, self.edge_j, 1)
        return deg


def build_knn_graph(cloud, k):
    """Symmetrized k-nearest-neighbor graph.

    Each node contributes edges to its ``k`` nearest other nodes by
    Euclidean distance; the union over directions is kept, so degrees
    are at least ``k`` but can be larger.  Distance ties are broken
    toward the lower node index.
    """
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise InvalidParameterError("k must be an integer")
    if k < 1 or k >= cloud.n:
        raise InvalidParameterError("k must satisfy 1 <= k < n")
    D = cdist(cloud.points, cloud.points)
    Dm = D.copy()
    np.fill_diagonal(Dm, np.inf)
    nearest = np.argsort(Dm, axis=1, kind="stable")[:, :k]
    ei = np.repeat(np.arange(cloud.n, dtype=np.int64), k)
    ej = nearest.ravel().astype(np.int64)
    lo = np.minimum(ei, ej)
    hi = np.maximum(ei, ej)
    key = lo * np.int64(cloud.n) + hi
    _, first = np.unique(key, return_index=True)
    lo, hi = lo[first], hi[first]
    return NNGraph(cloud.n, lo, hi, D[lo, hi])


def build_ball_graph(cloud, delta):
    """Graph connecting every pair at Euclidean distance at most
    ``delta``."""
    if not (np.isfinite(delta) and delta > 0):
        raise InvalidParameterError("delta must be positive and finite")
    D = cdist(cloud.points, cloud.points)
    iu, ju = np.triu_indices(cloud.n, k=1)
    keep = D[iu, ju] <= delta
    return NNGraph(cloud.n, iu[keep], ju[keep], D[iu[keep], ju[keep]])


class BridgeSet:
    """Edges flagged by a decision rule.

    Attributes
    ----------
    edges : frozenset of (i, j) tuples with i < j
    rule : str, one of ``"ldr"``, ``"jdr"``, ``"ecdr"``, ``"npdr"``
    q : float in (0, 1), the quantile the rule was run at
    """

    __slots__ = ("edges", "rule", "q")

    def __init__(self, edges, rule, q):
        if rule not in RULE_NAMES:
            raise InvalidParameterError("unknown rule %r" % (rule,))
        if not (0.0 < q < 1.0):
            raise InvalidParameterError("q must lie strictly between 0 and 1")
        canon = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if i == j or i < 0 or j < 0:
                raise InvalidGraphError("bridge endpoints must be distinct and nonnegative")
            canon.add((i, j) if i < j else (j, i))
        self.edges = frozenset(canon)
        self.rule = rule
        self.q = float(q)

    def __len__(self):
        return len(self.edges)

    def __contains__(self, pair):
        i, j = pair
        return ((i, j) if i < j else (j, i)) in self.edges

    def __eq__(self, other):
        return (
            isinstance(other, BridgeSet)
            and self.edges == other.edges
            and self.rule == other.rule
            and self.q == other.q
        )

    def __hash__(self):
        return hash((self.edges, self.rule, self.q))

    def sorted_pairs(self):
        return sorted(self.edges)


class PenalizedGraph:
    """Graph with flagged edges made additively expensive.

    The penalty ``M = n * max_e d_e`` exceeds the cost of any simple
    path in the original graph (at most ``(n - 1) * max_e d_e``), so a
    shortest path under the penalized costs avoids flagged edges
    whenever an unflagged route exists.
    """

    __slots__ = ("base", "bridges", "penalty", "flag")

    def __init__(self, base, bridges=None):
        flag = np.zeros(base.m, dtype=bool)
        if bridges is not None:
            for i, j in bridges.edges:
                idx = base.edge_index(i, j)
                if idx < 0:
                    raise InvalidGraphError(
                        "bridge (%d, %d) is not an edge of the graph" % (i, j)
                    )
                flag[idx] = True
        self.base = base
        self.bridges = bridges
        self.penalty = float(base.n * base.edge_cost.max()) if base.m else 0.0
        self.flag = flag

    @property
    def n(self):
        return self.base.n

    @property
    def m(self):
        return self.base.m

    def effective_costs(self):
        w = self.base.edge_cost.copy()
        w[self.flag] += self.penalty
        return w

    def csr(self):
        return self.base.csr(self.effective_costs())


def _as_csr(graph):
    if isinstance(graph, (NNGraph, PenalizedGraph)):
        return graph.csr()
    raise InvalidParameterError("expected NNGraph or PenalizedGraph")


def shortest_path_tree(graph, source):
    """Distances plus predecessor tree and settle order from ``source``."""
    indptr, dst, w, _ = _as_csr(graph)
    n = indptr.shape[0] - 1
    if not isinstance(source, (int, np.integer)) or isinstance(source, bool):
        raise InvalidParameterError("source must be an integer node index")
    if source < 0 or source >= n:
        raise InvalidParameterError("source %d out of range" % source)
    if w.size and w.min() < 0:
        raise InvalidGraphError("negative edge weight")
    return dijkstra_csr(indptr, dst, w, int(source))


def dijkstra_sssp(graph, source):
    """Single-source shortest-path distances; unreachable nodes get
    ``+inf``."""
    dist, _, _ = shortest_path_tree(graph, source)
    return dist


def adjusted_geodesics(penalized, sources):
    """Original-cost length of the penalized-optimal path to every node.

    For each source, shortest paths are computed under the penalized
    costs, then the returned entry is the sum of the *original* costs
    along that path.  Unreachable nodes get ``+inf``.

    Returns
    -------
    (len(sources), n) float array
    """
    if not isinstance(penalized, PenalizedGraph):
        raise InvalidParameterError("expected a PenalizedGraph")
    sources = list(sources)
    if not sources:
        raise InvalidParameterError("need at least one source")
    indptr, dst, wpen, eid = penalized.csr()
    worig = penalized.base.edge_cost
    n = penalized.n
    out = np.empty((len(sources), n))
    for row, s in enumerate(sources):
        if not (0 <= s < n):
            raise InvalidParameterError("source %d out of range" % s)
        _, pred, order = dijkstra_csr(indptr, dst, wpen, int(s))
        g = np.full(n, np.inf)
        g[s] = 0.0
        # settle order guarantees each predecessor is finalized first
        for v in order:
            if v < 0:
                break
            p = pred[v]
            if p < 0:
                continue
            sl = slice(indptr[p], indptr[p + 1])
            pos = int(np.searchsorted(dst[sl], v))
            g[v] = g[p] + worig[eid[sl][pos]]
        out[row] = g
    return out


def write_graph(path, graph):
    """Write the plain-text edge-list format: a header line ``n m``
    followed by ``m`` lines ``i j d`` with full-precision costs."""
    lines = ["%d %d" % (graph.n, graph.m)]
    for i, j, d in zip(graph.edge_i, graph.edge_j, graph.edge_cost):
        lines.append("%d %d %.17g" % (i, j, d))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_graph(path):
    """Parse the plain-text edge-list format written by
    :func:`write_graph`.

    Raises
    ------
    InvalidGraphError
        On any malformed content; the message names the offending
        1-based line number.
    """
    with open(path) as fh:
        raw = fh.readlines()
    rows = [(k + 1, line.strip()) for k, line in enumerate(raw) if line.strip()]
    if not rows:
        raise InvalidGraphError("line 1: missing header")
    lineno, header = rows[0]
    parts = header.split()
    if len(parts) != 2:
        raise InvalidGraphError("line %d: header must be 'n m'" % lineno)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise InvalidGraphError("line %d: header must hold two integers" % lineno)
    if n < 1 or m < 0:
        raise InvalidGraphError("line %d: need n >= 1 and m >= 0" % lineno)
    if len(rows) - 1 != m:
        raise InvalidGraphError(
            "line %d: header promises %d edges, file holds %d"
            % (lineno, m, len(rows) - 1)
        )
    ei = np.empty(m, dtype=np.int64)
    ej = np.empty(m, dtype=np.int64)
    w = np.empty(m)
    seen = set()
    for k, (lineno, line) in enumerate(rows[1:]):
        parts = line.split()
        if len(parts) != 3:
            raise InvalidGraphError("line %d: expected 'i j d'" % lineno)
        try:
            i, j = int(parts[0]), int(parts[1])
            d = float(parts[2])
        except ValueError:
            raise InvalidGraphError("line %d: malformed edge entry" % lineno)
        if i == j:
            raise InvalidGraphError("line %d: self-loop" % lineno)
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidGraphError("line %d: endpoint out of range" % lineno)
        if not (np.isfinite(d) and d >= 0):
            raise InvalidGraphError("line %d: cost must be finite and nonnegative" % lineno)
        pair = (i, j) if i < j else (j, i)
        if pair in seen:
            raise InvalidGraphError("line %d: duplicate edge" % lineno)
        seen.add(pair)
        ei[k], ej[k], w[k] = i, j, d
    return NNGraph(n, ei, ej, w)
