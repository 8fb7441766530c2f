"""Bridge decision rules.

All four rules reduce to the same template: compute one scalar score
per edge, place a nearest-rank quantile threshold on the empirical
score distribution, and flag the extreme tail.  Length and centrality
flag the *high* tail (long or heavily-trafficked edges); overlap and
neighbor-probability flag the *low* tail (edges whose endpoints share
little structure).
"""

import math
import warnings

import numpy as np

from ._fastpath import brandes_edge_betweenness
from .errors import InvalidGraphError, InvalidParameterError
from .graph import BridgeSet
from .kernels import (
    DENSE_LIMIT,
    diffusion_kernel,
    edge_scores_lowrank,
    median_half_epsilon,
    neighbor_probability_dense,
)


def quantile(values, q):
    """Nearest-rank quantile: the element at index ``ceil(q m) - 1`` of
    the ascending sort, clamped to the array bounds.

    The product ``q * m`` is rounded to 9 decimals before the ceiling so
    that binary float representation error cannot push an exact integer
    rank up by one.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise InvalidParameterError("values must be a nonempty 1-d array")
    if not np.isfinite(v).all():
        raise InvalidParameterError("values must be finite")
    if not (0.0 <= q <= 1.0):
        raise InvalidParameterError("q must lie in [0, 1]")
    idx = math.ceil(round(q * v.size, 9)) - 1
    idx = min(max(idx, 0), v.size - 1)
    return float(np.sort(v)[idx])


def _check_q(q):
    if not (0.0 < q < 1.0):
        raise InvalidParameterError("q must lie strictly between 0 and 1")


def normalized_lengths(graph):
    """Edge costs scaled by the incident cost mass:
    ``d_ij / sqrt(sum_k d_ik * sum_k d_jk)``.

    Edges whose endpoints carry zero total cost get 0 by convention.
    """
    mass = np.zeros(graph.n)
    np.add.at(mass, graph.edge_i, graph.edge_cost)
    np.add.at(mass, graph.edge_j, graph.edge_cost)
    denom = np.sqrt(mass[graph.edge_i] * mass[graph.edge_j])
    with np.errstate(invalid="ignore", divide="ignore"):
        nl = np.where(denom > 0, graph.edge_cost / denom, 0.0)
    return nl, denom


def ldr(graph, q):
    """Length decision rule: flag edges whose normalized length reaches
    the ``q`` quantile.  Edges with a zero normalizer are never
    flagged."""
    _check_q(q)
    if graph.m == 0:
        return BridgeSet((), "ldr", q)
    nl, denom = normalized_lengths(graph)
    thr = quantile(nl, q)
    keep = (nl >= thr) & (denom > 0)
    return _bridge_set_from_mask(graph, keep, "ldr", q)


def jaccard_overlaps(graph):
    """Neighbor-set Jaccard index per edge; each endpoint's set excludes
    itself but contains the other endpoint."""
    nbrs = graph.neighbor_sets()
    out = np.empty(graph.m)
    for e, (i, j) in enumerate(zip(graph.edge_i, graph.edge_j)):
        a, b = nbrs[i], nbrs[j]
        inter = np.intersect1d(a, b, assume_unique=True).size
        union = a.size + b.size - inter
        out[e] = inter / union if union else 0.0
    return out


def jdr(graph, q):
    """Jaccard decision rule: flag edges whose endpoint neighborhoods
    overlap strictly less than the ``1 - q`` quantile."""
    _check_q(q)
    if graph.m == 0:
        return BridgeSet((), "jdr", q)
    ov = jaccard_overlaps(graph)
    thr = quantile(ov, 1.0 - q)
    return _bridge_set_from_mask(graph, ov < thr, "jdr", q)


def edge_betweenness(graph, weights=None):
    """Weighted shortest-path edge betweenness over ordered node pairs,
    with fractional credit among equal-length ties."""
    if graph.m == 0:
        return np.zeros(0)
    indptr, dst, w, eid = graph.csr(weights)
    if not np.isfinite(w).all() or w.min() < 0:
        raise InvalidGraphError("betweenness needs finite nonnegative weights")
    return brandes_edge_betweenness(indptr, dst, w, eid, graph.m)


def ecdr(graph, q, K=15, count_basis="edges"):
    """Edge-centrality decision rule.

    Runs ``K`` rounds; each round computes betweenness under the
    current costs, moves the top ``ceil((1 - q) |E| / K)`` not yet
    flagged edges into the bridge set, and re-penalizes so the next
    round's traffic reroutes.  ``count_basis="nodes"`` restores the
    per-round count ``ceil((1 - q) n / K)`` instead.

    Ties in centrality break toward the lower edge index.  If the pool
    of unflagged edges runs out the rule stops early with a warning.
    """
    _check_q(q)
    if not isinstance(K, (int, np.integer)) or isinstance(K, bool) or K < 1:
        raise InvalidParameterError("K must be a positive integer")
    if count_basis not in ("edges", "nodes"):
        raise InvalidParameterError("count_basis must be 'edges' or 'nodes'")
    if graph.m == 0:
        return BridgeSet((), "ecdr", q)
    base = graph.m if count_basis == "edges" else graph.n
    per_round = max(1, math.ceil(round((1.0 - q) * base / K, 9)))
    penalty = graph.n * float(graph.edge_cost.max())
    weights = graph.edge_cost.copy()
    flagged = np.zeros(graph.m, dtype=bool)
    for _ in range(K):
        pool = np.flatnonzero(~flagged)
        if pool.size == 0:
            warnings.warn("edge pool exhausted; stopping early", stacklevel=2)
            break
        bc = edge_betweenness(graph, weights)
        take = min(per_round, pool.size)
        top = pool[np.argsort(-bc[pool], kind="stable")[:take]]
        flagged[top] = True
        weights[top] = graph.edge_cost[top] + penalty
        if take < per_round:
            warnings.warn("edge pool exhausted; stopping early", stacklevel=2)
            break
    return _bridge_set_from_mask(graph, flagged, "ecdr", q)


def npdr(graph, q, p=0.01, epsilon=None, J=None, mode="auto"):
    """Neighbor-probability decision rule.

    Builds the diffusion kernel (bandwidth ``epsilon``, default half the
    median edge cost), forms restart-walk neighbor probabilities at
    restart ``p``, scores each edge by the symmetrized probability of
    its endpoints, and flags scores strictly below the ``1 - q``
    quantile.

    ``mode`` picks the probability computation: ``"dense"`` solves the
    full linear system, ``"lowrank"`` reconstructs scores from ``J``
    leading eigenpairs (default ``min(n, 50)``), ``"auto"`` uses dense
    up to the dense limit and low-rank beyond.
    """
    _check_q(q)
    if mode not in ("auto", "dense", "lowrank"):
        raise InvalidParameterError("mode must be 'auto', 'dense', or 'lowrank'")
    if graph.m == 0:
        return BridgeSet((), "npdr", q)
    eps = median_half_epsilon(graph) if epsilon is None else epsilon
    kernel = diffusion_kernel(graph, eps)
    if mode == "auto":
        mode = "dense" if graph.n <= DENSE_LIMIT else "lowrank"
    if mode == "dense":
        rec = neighbor_probability_dense(kernel, p)
        scores = rec.scores_for_edges(graph.edge_i, graph.edge_j)
    else:
        scores = edge_scores_lowrank(kernel, p, J if J else min(graph.n, 50))
    thr = quantile(scores, 1.0 - q)
    return _bridge_set_from_mask(graph, scores < thr, "npdr", q)


def _bridge_set_from_mask(graph, mask, rule, q):
    pairs = zip(graph.edge_i[mask], graph.edge_j[mask])
    return BridgeSet(((int(i), int(j)) for i, j in pairs), rule, q)


def run_rule(graph, rule, q, **kwargs):
    """Dispatch a rule by name.  ``kwargs`` are forwarded to the rule's
    extra parameters (``K`` for ecdr; ``p``, ``epsilon``, ``J``,
    ``mode`` for npdr)."""
    if rule == "ldr":
        return ldr(graph, q)
    if rule == "jdr":
        return jdr(graph, q)
    if rule == "ecdr":
        allowed = {k: v for k, v in kwargs.items() if k in ("K", "count_basis")}
        return ecdr(graph, q, **allowed)
    if rule == "npdr":
        allowed = {
            k: v for k, v in kwargs.items() if k in ("p", "epsilon", "J", "mode")
        }
        return npdr(graph, q, **allowed)
    raise InvalidParameterError("unknown rule %r" % (rule,))


def write_bridge_set(path, bridges, extra=None):
    """Write a bridge set: ``#`` header lines recording the rule and
    parameters, then one ``i j`` pair per line in lexicographic order."""
    lines = ["# rule=%s" % bridges.rule, "# q=%.17g" % bridges.q]
    for key in sorted(extra or {}):
        lines.append("# %s=%s" % (key, extra[key]))
    for i, j in bridges.sorted_pairs():
        lines.append("%d %d" % (i, j))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_bridge_set(path):
    """Parse a bridge-set file written by :func:`write_bridge_set`."""
    rule = None
    q = None
    pairs = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("rule="):
                    rule = body[5:].strip()
                elif body.startswith("q="):
                    try:
                        q = float(body[2:])
                    except ValueError:
                        raise InvalidGraphError("line %d: malformed q header" % lineno)
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InvalidGraphError("line %d: expected 'i j'" % lineno)
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise InvalidGraphError("line %d: malformed pair" % lineno)
            pairs.append((i, j))
    if rule is None or q is None:
        raise InvalidGraphError("missing rule or q header")
    return BridgeSet(pairs, rule, q)
