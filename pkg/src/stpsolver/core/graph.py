"""Shared graph algorithms: union-find, Dijkstra, Voronoi regions and MSTs."""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, Collection, Iterable, NamedTuple, Sequence

from .instance import Instance, SteinerTree

INF = float("inf")

# arc_ok(tail, head, edge_id) -> bool
ArcFilter = Callable[[int, int, int], bool]


class InfeasibleError(Exception):
    """Raised when the terminals cannot be connected."""


class DisjointSets:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the classes of ``a`` and ``b``; False if already merged."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


class ShortestPaths(NamedTuple):
    dist: list[float]
    pred: list[int]   # parent edge id, -1 for sources and unreached vertices
    base: list[int]   # source whose tree contains v, -1 if unreached


def multi_source_dijkstra(instance: Instance, sources: Iterable[int],
                          costs: Sequence[int] | None = None,
                          arc_ok: ArcFilter | None = None) -> ShortestPaths:
    """Shortest distance from the nearest source, ties broken on (dist, vertex id)."""
    cs = instance.costs if costs is None else costs
    n = instance.n
    dist: list[float] = [INF] * n
    pred = [-1] * n
    base = [-1] * n
    heap: list[tuple[float, int]] = []
    for s in sorted(set(sources)):
        dist[s] = 0
        base[s] = s
        heap.append((0, s))
    heapq.heapify(heap)
    adj = instance.adj
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        bu = base[u]
        for w, e in adj[u]:
            if done[w]:
                continue
            if arc_ok is not None and not arc_ok(u, w, e):
                continue
            nd = d + cs[e]
            if nd < dist[w]:
                dist[w] = nd
                pred[w] = e
                base[w] = bu
                heapq.heappush(heap, (nd, w))
    return ShortestPaths(dist, pred, base)


@dataclass(frozen=True)
class VoronoiDiagram:
    vb: list[int]      # nearest terminal
    vd: list[float]    # distance to it
    vp: list[int]      # parent edge toward it


def voronoi(instance: Instance, costs: Sequence[int] | None = None,
            sources: Iterable[int] | None = None) -> VoronoiDiagram:
    sp = multi_source_dijkstra(instance, instance.terminals if sources is None else sources, costs)
    return VoronoiDiagram(sp.base, sp.dist, sp.pred)


def path_to_base(instance: Instance, pred: Sequence[int], v: int) -> list[int]:
    """Edge ids along the parent links from ``v`` back to its source."""
    path = []
    e = pred[v]
    while e >= 0:
        path.append(e)
        v = instance.other(e, v)
        e = pred[v]
    return path


class DistanceLink(NamedTuple):
    weight: float
    edge: int        # boundary edge realizing the link
    s: int           # terminal on one side
    t: int           # terminal on the other side


def distance_network_mst(instance: Instance, vor: VoronoiDiagram,
                         costs: Sequence[int] | None = None) -> list[DistanceLink]:
    """MST of the terminal distance network via Voronoi boundary edges.

    Each returned link stands for the path vb(u) ~ u - v ~ vb(v).  Raises
    :class:`InfeasibleError` when the terminals are not mutually reachable.
    """
    cs = instance.costs if costs is None else costs
    terms = instance.terminals
    if len(terms) <= 1:
        return []
    vb, vd = vor.vb, vor.vd
    candidates = []
    for e, (u, v) in enumerate(zip(instance.tails, instance.heads)):
        bu, bv = vb[u], vb[v]
        if bu < 0 or bv < 0 or bu == bv:
            continue
        candidates.append((vd[u] + cs[e] + vd[v], e, bu, bv))
    candidates.sort()
    dsu = DisjointSets(instance.n)
    links: list[DistanceLink] = []
    for w, e, bu, bv in candidates:
        if dsu.union(bu, bv):
            links.append(DistanceLink(w, e, bu, bv))
            if len(links) == len(terms) - 1:
                break
    if len(links) != len(terms) - 1:
        raise InfeasibleError("terminals are not mutually reachable")
    return links


def distance_network_edges(instance: Instance, vor: VoronoiDiagram,
                           links: Iterable[DistanceLink]) -> set[int]:
    """Original edges on the paths realizing the given distance links."""
    out: set[int] = set()
    for link in links:
        out.add(link.edge)
        out.update(path_to_base(instance, vor.vp, instance.tails[link.edge]))
        out.update(path_to_base(instance, vor.vp, instance.heads[link.edge]))
    return out


def prune_leaves(instance: Instance, edges: Iterable[int],
                 terminals: Collection[int] | None = None) -> set[int]:
    """Repeatedly drop non-terminal leaves."""
    terms = instance.terminals if terminals is None else terminals
    es = set(edges)
    inc: dict[int, list[int]] = {}
    for e in es:
        inc.setdefault(instance.tails[e], []).append(e)
        inc.setdefault(instance.heads[e], []).append(e)
    deg = {v: len(l) for v, l in inc.items()}
    stack = [v for v, d in deg.items() if d == 1 and v not in terms]
    while stack:
        v = stack.pop()
        if deg[v] != 1:
            continue
        for e in inc[v]:
            if e in es:
                es.discard(e)
                deg[v] = 0
                w = instance.other(e, v)
                deg[w] -= 1
                if deg[w] == 1 and w not in terms:
                    stack.append(w)
                break
    return es


def mst_edges(instance: Instance, vertex_set: Collection[int],
              costs: Sequence[int] | None = None) -> list[int]:
    """Kruskal forest of the subgraph induced by ``vertex_set``."""
    cs = instance.costs if costs is None else costs
    inside = vertex_set if isinstance(vertex_set, (set, frozenset)) else set(vertex_set)
    cand = []
    for u in inside:
        for w, e in instance.adj[u]:
            if u < w and w in inside:
                cand.append((cs[e], e))
    cand.sort()
    dsu = DisjointSets(instance.n)
    forest = []
    for _, e in cand:
        if dsu.union(instance.tails[e], instance.heads[e]):
            forest.append(e)
    return forest


def mst_on_induced(instance: Instance, vertex_set: Collection[int],
                   costs: Sequence[int] | None = None,
                   terminals: Collection[int] | None = None) -> SteinerTree | None:
    """MST of G[vertex_set] on the terminals' component, with leaves pruned.

    Returns None when the terminals are disconnected inside the induced
    subgraph.  ``costs`` steers the MST; the returned tree is costed on the
    instance's own costs.
    """
    terms = instance.terminals if terminals is None else terminals
    inside = set(vertex_set)
    if not set(terms) <= inside:
        raise ValueError("vertex_set must contain every terminal")
    if len(terms) <= 1:
        return SteinerTree(frozenset(), 0)
    forest = mst_edges(instance, inside, costs)
    keep = _component_edges(instance, forest, next(iter(terms)))
    covered = {instance.tails[e] for e in keep} | {instance.heads[e] for e in keep}
    if not set(terms) <= covered:
        return None
    return SteinerTree.from_edges(instance, prune_leaves(instance, keep, terms))


def _component_edges(instance: Instance, edges: Iterable[int], start: int) -> list[int]:
    inc: dict[int, list[int]] = {}
    for e in edges:
        inc.setdefault(instance.tails[e], []).append(e)
        inc.setdefault(instance.heads[e], []).append(e)
    seen = {start}
    stack = [start]
    out = []
    while stack:
        u = stack.pop()
        for e in inc.get(u, ()):
            w = instance.other(e, u)
            if w not in seen:
                seen.add(w)
                out.append(e)
                stack.append(w)
    return out


class InvalidTreeError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


def check_tree(instance: Instance, edges: Iterable[int], cost: int | None = None,
               terminals: Collection[int] | None = None) -> list[str]:
    """List every violated solution invariant (empty when valid)."""
    terms = instance.terminals if terminals is None else terminals
    problems: list[str] = []
    es = list(edges)
    if len(set(es)) != len(es):
        problems.append("duplicate edge")
    es = [e for e in set(es)]
    bad = [e for e in es if not 0 <= e < instance.m]
    if bad:
        problems.append(f"unknown edge ids {sorted(bad)}")
        es = [e for e in es if 0 <= e < instance.m]
    verts: set[int] = set()
    deg: dict[int, int] = {}
    dsu = DisjointSets(instance.n)
    cyclic = False
    for e in es:
        u, v = instance.tails[e], instance.heads[e]
        verts.update((u, v))
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
        if not dsu.union(u, v):
            cyclic = True
    if not es:
        verts = set(terms) if len(terms) == 1 else set()
    if cyclic:
        problems.append("not acyclic")
    if len({dsu.find(v) for v in verts}) > 1:
        problems.append("not connected")
    missing = [t for t in terms if t not in verts]
    if missing and not (len(terms) == 1 and not es):
        problems.append(f"terminal uncovered: {sorted(t + 1 for t in missing)}")
    leaves = [v for v, d in deg.items() if d == 1 and v not in terms]
    if leaves:
        problems.append(f"non-terminal leaf: {sorted(v + 1 for v in leaves)}")
    if cost is not None:
        actual = instance.tree_cost(es)
        if actual != cost:
            problems.append(f"cost mismatch: stored {cost}, recomputed {actual}")
    return problems


def validate(instance: Instance, tree: SteinerTree | Iterable[int]) -> int:
    """Return the tree cost, or raise :class:`InvalidTreeError`."""
    if isinstance(tree, SteinerTree):
        problems = check_tree(instance, tree.edges, tree.cost)
        edges = tree.edges
    else:
        edges = list(tree)
        problems = check_tree(instance, edges)
    if problems:
        raise InvalidTreeError(problems)
    return instance.tree_cost(edges)
