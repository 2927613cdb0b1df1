"""Pass-based local search over the classic Steiner neighborhoods.

Every pass takes a valid tree and returns a valid tree that is no more
expensive on the working costs.  ``costs`` is the working cost view (the
instance's own costs by default); returned trees always carry their cost on
the original instance costs.
"""
from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Callable, Collection, Iterable, Sequence

from .construct import sph
from .core import INF, DisjointSets, Instance, SteinerTree, mst_on_induced, prune_leaves
from .perturb import DecaySchedule, decay

MAX_PASSES = 64


@dataclass(frozen=True)
class PassResult:
    tree: SteinerTree
    improved: bool
    moves_applied: int
    working_cost: int


@dataclass(frozen=True)
class KeyPath:
    ends: tuple[int, int]
    edges: tuple[int, ...]
    interior: tuple[int, ...]


@dataclass
class KeyDecomposition:
    key_vertices: list[int]
    key_paths: list[KeyPath] = field(default_factory=list)


def _incidence(instance: Instance, edges: Iterable[int]) -> dict[int, list[int]]:
    inc: dict[int, list[int]] = {}
    for e in edges:
        inc.setdefault(instance.tails[e], []).append(e)
        inc.setdefault(instance.heads[e], []).append(e)
    return inc


def _wcost(edges: Iterable[int], cs: Sequence[int]) -> int:
    return sum(cs[e] for e in edges)


def _vertices(instance: Instance, edges: Collection[int]) -> set[int]:
    if not edges:
        return set(instance.terminals)
    vs = set()
    for e in edges:
        vs.add(instance.tails[e])
        vs.add(instance.heads[e])
    return vs


def _normalize(instance: Instance, edges: set[int], cs: Sequence[int]) -> set[int]:
    """MST of the induced subgraph on the tree's vertices, if it is cheaper."""
    if not edges:
        return edges
    mst = mst_on_induced(instance, _vertices(instance, edges), cs)
    if mst is not None and _wcost(mst.edges, cs) < _wcost(edges, cs):
        return set(mst.edges)
    return edges


def key_decomposition(instance: Instance, edges: Collection[int]) -> KeyDecomposition:
    inc = _incidence(instance, edges)
    terms = instance.terminals
    key = sorted(v for v, l in inc.items() if len(l) >= 3 and v not in terms)
    crucial = set(key) | (set(inc) & terms)
    dec = KeyDecomposition(key)
    seen: set[int] = set()
    for start in sorted(crucial):
        for e0 in inc[start]:
            if e0 in seen:
                continue
            path, interior = [e0], []
            v = instance.other(e0, start)
            while v not in crucial:
                interior.append(v)
                e_next = inc[v][0] if inc[v][1] == path[-1] else inc[v][1]
                path.append(e_next)
                v = instance.other(e_next, v)
            seen.update(path)
            dec.key_paths.append(KeyPath((start, v), tuple(path), tuple(interior)))
    return dec


def _kruskal_tree(instance: Instance, cand: list[tuple[int, int]]) -> list[int]:
    cand.sort()
    dsu = DisjointSets(instance.n)
    return [e for _, e in cand if dsu.union(instance.tails[e], instance.heads[e])]


# ---------------------------------------------------------------------------
# Steiner-vertex insertion / elimination
# ---------------------------------------------------------------------------

def pass_v(instance: Instance, tree: SteinerTree, costs: Sequence[int] | None = None) -> PassResult:
    """One pass of Steiner-vertex insertion, ascending vertex id."""
    cs = instance.costs if costs is None else costs
    start = _wcost(tree.edges, cs)
    edges = _normalize(instance, set(tree.edges), cs)
    cur = _wcost(edges, cs)
    vs = _vertices(instance, edges)
    moves = 0
    sorted_tree = sorted((cs[e], e) for e in edges)
    for v in range(instance.n):
        if v in vs:
            continue
        links = [(cs[e], e) for w, e in instance.adj[v] if w in vs]
        if len(links) < 2:
            continue
        new = _kruskal_tree(instance, sorted_tree + links)
        new_set = prune_leaves(instance, new)
        new_cost = _wcost(new_set, cs)
        if new_cost < cur:
            edges, cur = new_set, new_cost
            vs = _vertices(instance, edges)
            sorted_tree = sorted((cs[e], e) for e in edges)
            moves += 1
    out = SteinerTree.from_edges(instance, edges)
    return PassResult(out, cur < start, moves, cur)


def pass_u(instance: Instance, tree: SteinerTree, costs: Sequence[int] | None = None) -> PassResult:
    """One pass of Steiner-vertex elimination, ascending vertex id."""
    cs = instance.costs if costs is None else costs
    start = _wcost(tree.edges, cs)
    edges = _normalize(instance, set(tree.edges), cs)
    cur = _wcost(edges, cs)
    vs = _vertices(instance, edges)
    moves = 0
    for v in sorted(vs - instance.terminals):
        if v not in vs:
            continue
        cand = mst_on_induced(instance, vs - {v}, cs)
        if cand is None:
            continue
        c = _wcost(cand.edges, cs)
        if c < cur:
            edges, cur = set(cand.edges), c
            vs = _vertices(instance, edges)
            moves += 1
    out = SteinerTree.from_edges(instance, edges)
    return PassResult(out, cur < start, moves, cur)


# ---------------------------------------------------------------------------
# Key-path exchange / key-vertex elimination
# ---------------------------------------------------------------------------

def _components(instance: Instance, edges: Collection[int], seeds: Iterable[int]) -> list[set[int]]:
    inc = _incidence(instance, edges)
    comps = []
    for s in seeds:
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for e in inc.get(u, ()):
                w = instance.other(e, u)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(seen)
    return comps


def reconnect(instance: Instance, comps: list[set[int]], cs: Sequence[int],
              budget: float = INF) -> tuple[int, set[int]] | None:
    """Cheapest way to join vertex-disjoint components with shortest paths.

    A single multi-source Dijkstra labels each vertex with its nearest
    component; the MST over the boundary edges is an MST of the components'
    distance network.  Returns ``(cost, edges)`` or None if the components
    cannot be joined for less than ``budget``.
    """
    n = instance.n
    label = [-1] * n
    dist: list[float] = [INF] * n
    pred = [-1] * n
    heap = []
    for i, comp in enumerate(comps):
        for v in comp:
            label[v] = i
            dist[v] = 0
            heap.append((0, v))
    heapq.heapify(heap)
    done = [False] * n
    adj = instance.adj
    while heap:
        d, u = heapq.heappop(heap)
        if done[u] or d >= budget:
            if d >= budget:
                break
            continue
        done[u] = True
        lu = label[u]
        for w, e in adj[u]:
            nd = d + cs[e]
            if nd < dist[w]:
                dist[w] = nd
                pred[w] = e
                label[w] = lu
                heapq.heappush(heap, (nd, w))
    cand = []
    for e, (u, v) in enumerate(zip(instance.tails, instance.heads)):
        lu, lv = label[u], label[v]
        if lu < 0 or lv < 0 or lu == lv or not (done[u] and done[v]):
            continue
        w = dist[u] + cs[e] + dist[v]
        if w < budget:
            cand.append((w, e, lu, lv))
    cand.sort()
    dsu = DisjointSets(len(comps))
    total = 0
    links = []
    for w, e, lu, lv in cand:
        if dsu.union(lu, lv):
            total += w
            links.append(e)
            if len(links) == len(comps) - 1:
                break
    if len(links) != len(comps) - 1 or total >= budget:
        return None
    out: set[int] = set()
    for e in links:
        out.add(e)
        for v in (instance.tails[e], instance.heads[e]):
            while pred[v] >= 0:
                out.add(pred[v])
                v = instance.other(pred[v], v)
    return int(total), out


def _paths_from(instance: Instance, edges: set[int], k: int) -> list[tuple[list[int], int]]:
    """Key paths of the current tree that start at ``k``: (edges, far end)."""
    inc = _incidence(instance, edges)
    terms = instance.terminals
    out = []
    for e0 in inc.get(k, ()):
        path = [e0]
        v = instance.other(e0, k)
        while v not in terms and len(inc[v]) == 2:
            e_next = inc[v][0] if inc[v][1] == path[-1] else inc[v][1]
            path.append(e_next)
            v = instance.other(e_next, v)
        out.append((path, v))
    return out


def pass_q(instance: Instance, tree: SteinerTree, costs: Sequence[int] | None = None) -> PassResult:
    """One pass of key-path exchange followed by key-vertex elimination.

    Moves are evaluated against the current tree; a move is skipped when it
    would touch edges already removed or added earlier in the same pass.
    """
    cs = instance.costs if costs is None else costs
    start = _wcost(tree.edges, cs)
    edges = set(tree.edges)
    cur = start
    moves = 0
    touched: set[int] = set()
    grown: set[int] = set()  # vertices that gained edges this pass
    dec = key_decomposition(instance, edges)

    for kp in dec.key_paths:
        if any(e in touched or e not in edges for e in kp.edges):
            continue
        if grown.intersection(kp.interior):
            continue
        path_cost = _wcost(kp.edges, cs)
        rem = edges.difference(kp.edges)
        comps = _components(instance, rem, kp.ends)
        found = reconnect(instance, comps, cs, path_cost)
        if found is None:
            continue
        new_cost, new_edges = found
        edges = rem | new_edges
        cur += new_cost - path_cost
        touched.update(kp.edges)
        touched.update(new_edges)
        for e in new_edges:
            grown.add(instance.tails[e])
            grown.add(instance.heads[e])
        moves += 1

    for k in dec.key_vertices:
        inc_k = [e for e in edges if instance.tails[e] == k or instance.heads[e] == k]
        if len(inc_k) < 3:
            continue
        paths = _paths_from(instance, edges, k)
        removed = {e for p, _ in paths for e in p}
        if removed & touched:
            continue
        removed_cost = _wcost(removed, cs)
        rem = edges - removed
        comps = _components(instance, rem, [end for _, end in paths])
        found = reconnect(instance, comps, cs, removed_cost)
        if found is None:
            continue
        _, new_edges = found
        cand = prune_leaves(instance, rem | new_edges)
        cand_cost = _wcost(cand, cs)
        if cand_cost < cur:
            edges, cur = cand, cand_cost
            touched.update(removed)
            touched.update(new_edges)
            moves += 1

    edges = prune_leaves(instance, edges)
    edges = _normalize(instance, edges, cs)
    cur = _wcost(edges, cs)
    out = SteinerTree.from_edges(instance, edges)
    return PassResult(out, cur < start, moves, cur)


# ---------------------------------------------------------------------------
# Drivers
# ---------------------------------------------------------------------------

PassFn = Callable[[Instance, SteinerTree, Sequence[int]], PassResult]


def vq(instance: Instance, tree: SteinerTree, schedule: DecaySchedule | None = None,
       extra_passes: Sequence[PassFn] = (), max_passes: int = MAX_PASSES,
       stats: dict | None = None) -> SteinerTree:
    """Alternate insertion (v) and key-path/key-vertex (q) passes to a local optimum.

    With a schedule, the first ``schedule.passes`` passes run on the
    perturbed view, decayed toward the original costs after each pass; the
    original costs are then restored and passes continue until a full
    round of passes brings no improvement.
    """
    cycle: list[PassFn] = [pass_v, pass_q, *extra_passes]
    orig = instance.costs
    view = schedule.view if schedule else None
    perturbed_left = schedule.passes if schedule else 0
    streak = 0
    passes = 0
    improving = 0
    while passes < max_passes:
        fn = cycle[passes % len(cycle)]
        cs = view if perturbed_left > 0 else orig
        res = fn(instance, tree, cs)
        tree = res.tree
        passes += 1
        if perturbed_left > 0:
            perturbed_left -= 1
            view = decay(view, instance, schedule.alpha)
            continue
        if res.improved:
            improving += 1
            streak = 0
        else:
            streak += 1
            if streak >= len(cycle):
                break
    if stats is not None:
        stats["passes"] = stats.get("passes", 0) + passes
        stats["improving_passes"] = stats.get("improving_passes", 0) + improving
    return tree


def key_vertex_insertion_pass(instance: Instance, tree: SteinerTree, rng: random.Random,
                              costs: Sequence[int] | None = None,
                              max_candidates: int | None = None) -> PassResult:
    """Try each vertex outside K_S and T as an extra terminal of a fresh SPH run."""
    cs = instance.costs if costs is None else costs
    start = _wcost(tree.edges, cs)
    edges = set(tree.edges)
    cur = start
    terms = instance.terminals
    key = set(key_decomposition(instance, edges).key_vertices)
    comp = instance.terminal_component()
    cands = [v for v in sorted(comp) if v not in key and v not in terms]
    rng.shuffle(cands)
    if max_candidates is not None:
        cands = cands[:max_candidates]
    moves = 0
    for v in cands:
        grown = sph(instance, cs, root=v, terminals=terms | {v})
        if grown is None:
            continue
        pruned = prune_leaves(instance, grown.edges)
        pruned = _normalize(instance, pruned, cs)
        c = _wcost(pruned, cs)
        if c < cur:
            edges, cur = set(pruned), c
            moves += 1
    out = SteinerTree.from_edges(instance, edges)
    return PassResult(out, cur < start, moves, cur)
