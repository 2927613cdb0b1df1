"""Shortest-path heuristic (SPH)."""
from __future__ import annotations

import heapq
from typing import Collection, Sequence

from .core import INF, Instance, SteinerTree, mst_on_induced
from .core.graph import ArcFilter


def sph(instance: Instance, costs: Sequence[int] | None = None, root: int | None = None,
        arc_ok: ArcFilter | None = None,
        terminals: Collection[int] | None = None) -> SteinerTree | None:
    """Grow a tree from ``root`` by attaching the nearest uncovered terminal
    through its whole shortest path, until every terminal is covered.

    ``costs`` is the working cost view (perturbed, merge-biased, ...);
    ``arc_ok(tail, head, e)`` restricts which arcs may be traversed away from
    the tree.  The final tree is replaced by the MST of its vertex set (on
    the working costs) with non-terminal leaves pruned, and is costed on the
    instance's original costs.  Returns None if a terminal is unreachable.
    """
    cs = instance.costs if costs is None else costs
    terms = set(instance.terminals if terminals is None else terminals)
    if root is None:
        root = min(terms)
    if len(terms) == 1 and root in terms:
        return SteinerTree(frozenset(), 0)

    n = instance.n
    adj = instance.adj
    in_tree = [False] * n
    dist: list[float] = [INF] * n
    pred = [-1] * n
    in_tree[root] = True
    dist[root] = 0
    uncovered = len(terms) - (1 if root in terms else 0)
    tree_edges: list[int] = []
    heap = [(0, root)]
    # One frontier for the whole construction: newly attached vertices are
    # pushed back at distance 0 and the search simply continues.
    while uncovered:
        if not heap:
            return None
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if not in_tree[u] and u in terms:
            v = u
            new_vertices = []
            while not in_tree[v]:
                e = pred[v]
                tree_edges.append(e)
                in_tree[v] = True
                new_vertices.append(v)
                v = instance.other(e, v)
            uncovered -= 1
            for v in new_vertices:
                dist[v] = 0
                pred[v] = -1
                heapq.heappush(heap, (0, v))
            continue
        for w, e in adj[u]:
            if in_tree[w]:
                continue
            if arc_ok is not None and not arc_ok(u, w, e):
                continue
            nd = d + cs[e]
            if nd < dist[w]:
                dist[w] = nd
                pred[w] = e
                heapq.heappush(heap, (nd, w))

    vertex_set = {root}
    for e in tree_edges:
        vertex_set.add(instance.tails[e])
        vertex_set.add(instance.heads[e])
    tree = mst_on_induced(instance, vertex_set, cs, terms)
    if tree is None:  # cannot happen: the grown tree spans vertex_set
        tree = SteinerTree.from_edges(instance, tree_edges)
    return tree
