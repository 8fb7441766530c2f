"""Four ways to spot a spurious edge.

Two tight clusters joined by a single edge make the smallest instance
of the problem this package solves: the joining edge looks like any
other locally, but every path between the clusters runs over it.  Each
decision rule scores edges differently, yet all of them should single
out that edge once the quantile is tight enough.
"""

import numpy as np

import graphdenoise as gd

# two 4-cliques with unit costs, bridged by the edge (3, 4)
edges = []
for base in (0, 4):
    for a in range(base, base + 4):
        for b in range(a + 1, base + 4):
            edges.append((a, b))
edges.append((3, 4))
ei = np.array([e[0] for e in edges])
ej = np.array([e[1] for e in edges])
costs = np.ones(len(edges))
graph = gd.NNGraph(8, ei, ej, costs)
print("graph: %d nodes, %d edges, bridge is (3, 4)" % (graph.n, graph.m))

# normalized length: the bridge is no longer than its neighbors here,
# so this rule has nothing to grab onto in the toy instance
nl, _ = gd.normalized_lengths(graph)
print("\nnormalized lengths: min %.3f max %.3f (all comparable)"
      % (nl.min(), nl.max()))

# neighborhood overlap: the bridge endpoints share no other neighbors,
# so its overlap is exactly zero and the rule isolates it
overlaps = gd.jaccard_overlaps(graph)
bridge_idx = graph.edge_index(3, 4)
others = np.delete(overlaps, bridge_idx)
flagged = gd.jdr(graph, 0.9)
print("jaccard overlaps: bridge scores %.3f, clique edges score >= %.3f"
      % (overlaps[bridge_idx], others.min()))
print("jdr(q=0.9) flags:", sorted(flagged.edges))

# centrality: all 16 cross-cluster shortest paths use the bridge, so
# one removal round at a tight quantile takes exactly that edge
flagged = gd.ecdr(graph, 0.93, K=1)
print("ecdr(q=0.93, K=1) flags:", sorted(flagged.edges))

# neighbor probability: a random walk started at node 3 rarely stops
# at node 4 because only one route crosses, so the edge scores low
flagged = gd.npdr(graph, 0.9, p=0.1)
print("npdr(q=0.9, p=0.1) flags:", sorted(flagged.edges))

# flagging does not delete the edge: it adds a surcharge so shortest
# paths avoid it, but a graph with no detour stays connected
bridges = gd.npdr(graph, 0.9, p=0.1)
plain = gd.adjusted_geodesics(
    gd.PenalizedGraph(graph, gd.BridgeSet([], "npdr", 0.9)), [0])[0]
repaired = gd.adjusted_geodesics(gd.PenalizedGraph(graph, bridges), [0])[0]
print("\ndistance 0 -> 7 before flagging: %.0f" % plain[7])
print("distance 0 -> 7 after flagging:  %.0f (same path, no detour exists)"
      % repaired[7])
