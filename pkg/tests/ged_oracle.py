"""Independent brute-force GED oracle for verifying the production search.

Enumerates every injective partial node mapping and computes its cost from
first principles (per-edge optimal pairing via permutation search). Exponential
and only usable on tiny graphs; intentionally shares no code with the
production implementation.
"""
from __future__ import annotations

import itertools


def _node_cost(n1, n2) -> int:
    return 0 if (n1.labels == n2.labels and n1.props == n2.props) else 1


def _edge_cost(e1, e2, mapping) -> int:
    cost = 0 if (e1.rel_types == e2.rel_types and e1.props == e2.props) else 1
    if e1.directed != e2.directed:
        cost += 1
    elif e1.directed and (mapping[e1.src], mapping[e1.dst]) != (e2.src, e2.dst):
        cost += 1
    return cost


def _edges_between(graph, a, b):
    out = []
    for e in graph.edges:
        if {e.src, e.dst} == {a, b} or (a == b and e.src == e.dst == a):
            out.append(e)
    return out


def _group_cost(g1_edges, g2_edges, mapping) -> int:
    k, m = len(g1_edges), len(g2_edges)
    if k == 0 or m == 0:
        return k + m
    best = None
    small, large = (g1_edges, g2_edges) if k <= m else (g2_edges, g1_edges)
    for perm in itertools.permutations(range(len(large)), len(small)):
        total = abs(k - m)
        for s_idx, l_idx in enumerate(perm):
            if k <= m:
                total += _edge_cost(g1_edges[s_idx], g2_edges[l_idx], mapping)
            else:
                total += _edge_cost(g1_edges[l_idx], g2_edges[s_idx], mapping)
        if best is None or total < best:
            best = total
    return best


def _mapping_cost(g1, g2, mapping: dict) -> int:
    n1, n2 = len(g1.nodes), len(g2.nodes)
    cost = 0
    for i in range(n1):
        if i in mapping:
            cost += _node_cost(g1.nodes[i], g2.nodes[mapping[i]])
        else:
            cost += 1
    image = set(mapping.values())
    cost += n2 - len(image)

    pairs1 = set()
    for e in g1.edges:
        pairs1.add((min(e.src, e.dst), max(e.src, e.dst)))
    handled2 = set()
    for a, b in sorted(pairs1):
        g1_edges = _edges_between(g1, a, b)
        if a in mapping and b in mapping:
            ta, tb = mapping[a], mapping[b]
            key2 = (min(ta, tb), max(ta, tb))
            g2_edges = _edges_between(g2, *key2)
            cost += _group_cost(g1_edges, g2_edges, mapping)
            handled2.add(key2)
        else:
            cost += len(g1_edges)
    for e_idx, e in enumerate(g2.edges):
        key2 = (min(e.src, e.dst), max(e.src, e.dst))
        if key2 not in handled2:
            cost += 1
    return cost


def exhaustive_ged(g1, g2) -> int:
    """Minimum edit cost over all injective (partial) node mappings."""
    n1, n2 = len(g1.nodes), len(g2.nodes)
    best = None
    g1_indices = list(range(n1))
    for k in range(0, min(n1, n2) + 1):
        for kept in itertools.combinations(g1_indices, k):
            for targets in itertools.permutations(range(n2), k):
                mapping = dict(zip(kept, targets))
                cost = _mapping_cost(g1, g2, mapping)
                if best is None or cost < best:
                    best = cost
    return best
