"""Preprocessing reductions with a trace for lifting solutions back.

Vertex ids never change: a deleted vertex simply becomes isolated.  Edges
are tracked by working keys; keys ``0..m-1`` are the original edges and
each contraction creates a fresh key.  The reduced instance lists the
surviving keys in ascending order.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

from .core import MAX_COST, Instance, SteinerTree
from .core.graph import (DisjointSets, InfeasibleError, distance_network_edges,
                         distance_network_mst, voronoi)

log = logging.getLogger(__name__)

FULL = "full"
EDGE_REMOVAL_ONLY = "edge-removal-only"
MAX_ROUNDS = 10
LOCAL_DEGREE_LIMIT = 20


@dataclass
class ReductionTrace:
    original: Instance
    mode: str = FULL
    events: list[tuple] = field(default_factory=list)
    # reduced edge id -> original edge ids it stands for
    edge_map: list[tuple[int, ...]] = field(default_factory=list)
    kept_keys: list[int] = field(default_factory=list)

    def lines(self) -> list[str]:
        out = []
        for ev in self.events:
            kind, *args = ev
            if kind == "contract":
                v, k1, k2, new = args
                out.append(f"contract {v + 1} {k1} {k2} -> {new}")
            elif kind == "delete-vertex":
                out.append(f"delete-vertex {args[0] + 1}")
            else:
                out.append(f"{kind} {args[0]}")
        for r, orig in enumerate(self.edge_map):
            out.append(f"map {r} " + " ".join(str(e) for e in orig))
        return out


class _Work:
    """Mutable multigraph-free view used while reducing."""

    def __init__(self, inst: Instance, trace: ReductionTrace):
        self.inst = inst
        self.trace = trace
        self.terms = inst.terminals
        self.ends: dict[int, tuple[int, int]] = {}
        self.cost: dict[int, int] = {}
        self.orig: dict[int, tuple[int, ...]] = {}
        self.adj: list[dict[int, int]] = [dict() for _ in range(inst.n)]  # v -> {w: key}
        for e in range(inst.m):
            u, v, c = inst.edge(e)
            self.ends[e] = (u, v)
            self.cost[e] = c
            self.orig[e] = (e,)
            self.adj[u][v] = e
            self.adj[v][u] = e
        self.next_key = inst.m

    def remove(self, k: int, record: bool = True) -> None:
        u, v = self.ends.pop(k)
        del self.cost[k]
        del self.orig[k]
        del self.adj[u][v]
        del self.adj[v][u]
        if record:
            self.trace.events.append(("delete-edge", k))

    def add(self, u: int, v: int, c: int, orig: tuple[int, ...]) -> int:
        k = self.next_key
        self.next_key += 1
        self.ends[k] = (u, v)
        self.cost[k] = c
        self.orig[k] = orig
        self.adj[u][v] = k
        self.adj[v][u] = k
        return k

    def snapshot(self) -> tuple[Instance, list[int]]:
        keys = sorted(self.ends)
        edges = [(*self.ends[k], self.cost[k]) for k in keys]
        inst = Instance(self.inst.n, edges, self.terms, self.inst.name)
        assert inst.m == len(keys)
        return inst, keys


def delete_degree_one(w: _Work) -> int:
    removed = 0
    stack = [v for v in range(w.inst.n) if len(w.adj[v]) == 1 and v not in w.terms]
    while stack:
        v = stack.pop()
        if v in w.terms or len(w.adj[v]) != 1:
            continue
        (x, k), = w.adj[v].items()
        w.remove(k)
        w.trace.events.append(("delete-vertex", v))
        removed += 1
        if len(w.adj[x]) == 1 and x not in w.terms:
            stack.append(x)
    return removed


def contract_degree_two(w: _Work) -> int:
    done = 0
    for v in range(w.inst.n):
        if v in w.terms or len(w.adj[v]) != 2:
            continue
        (a, ka), (b, kb) = w.adj[v].items()
        c = w.cost[ka] + w.cost[kb]
        if c > MAX_COST:
            continue
        orig = w.orig[ka] + w.orig[kb]
        existing = w.adj[a].get(b)
        w.remove(ka, record=False)
        w.remove(kb, record=False)
        if existing is not None and w.cost[existing] <= c:
            # the direct edge dominates the path through v
            w.trace.events.append(("delete-edge", ka))
            w.trace.events.append(("delete-edge", kb))
            w.trace.events.append(("delete-vertex", v))
        else:
            if existing is not None:
                w.remove(existing)
            new = w.add(a, b, c, orig)
            w.trace.events.append(("contract", v, ka, kb, new))
        done += 1
    return done


def bottleneck_local(w: _Work) -> int:
    """Drop (u, v) when a common neighbour x gives c(u,x) + c(x,v) <= c(u,v).

    Edges are tested one by one on the current graph; testing them all
    against the initial graph is unsound when ties let two edges justify
    each other's removal.
    """
    removed = 0
    for k in sorted(w.ends):
        if k not in w.ends:
            continue
        u, v = w.ends[k]
        au, av = w.adj[u], w.adj[v]
        if len(au) + len(av) > LOCAL_DEGREE_LIMIT:
            continue
        c = w.cost[k]
        small, big = (au, av) if len(au) <= len(av) else (av, au)
        for x, kx in small.items():
            ky = big.get(x)
            if ky is not None and w.cost[kx] + w.cost[ky] <= c:
                w.remove(k)
                removed += 1
                break
    return removed


def voronoi_bottleneck_candidates(inst: Instance) -> list[int]:
    """Edge ids of ``inst`` removable by the Voronoi/union-find sweep.

    Union-find runs over terminals.  Each link of the distance-network MST
    is swept at the length of its whole terminal-to-terminal path and joins
    its two terminals; a free edge (u, v) of cost c is removable when the
    bases of u and v are already joined and vd(u), vd(v) <= c.  Every
    segment of the resulting u-v path then has length <= c and avoids
    (u, v), so the edge's bottleneck Steiner distance is at most c.
    Justifying paths use only parent and link edges, which are never
    removed, so all candidates can go at once.
    """
    if len(inst.terminals) < 2:
        return []
    vor = voronoi(inst)
    try:
        links = distance_network_mst(inst, vor, inst.costs)
    except InfeasibleError:
        return []
    protected = {e for e in vor.vp if e >= 0} | distance_network_edges(inst, vor, links)
    items: list[tuple[int, int, int]] = []   # (weight, kind, index); links sort first on ties
    for i, link in enumerate(links):
        items.append((link.weight, 0, i))
    for e in range(inst.m):
        if e not in protected:
            items.append((inst.costs[e], 1, e))
    items.sort()
    uf = DisjointSets(inst.n)
    out = []
    vb, vd = vor.vb, vor.vd
    for weight, kind, i in items:
        if kind == 0:
            uf.union(links[i].s, links[i].t)
            continue
        u, v = inst.tails[i], inst.heads[i]
        if vb[u] < 0 or vb[v] < 0:
            continue
        if uf.find(vb[u]) == uf.find(vb[v]) and vd[u] <= weight and vd[v] <= weight:
            out.append(i)
    return out


def bottleneck_voronoi(w: _Work) -> int:
    inst, keys = w.snapshot()
    removed = voronoi_bottleneck_candidates(inst)
    for e in removed:
        w.remove(keys[e])
    return len(removed)


def preprocess(instance: Instance, mode: str = FULL,
               max_rounds: int = MAX_ROUNDS) -> tuple[Instance, ReductionTrace]:
    if mode not in (FULL, EDGE_REMOVAL_ONLY):
        raise ValueError(f"unknown reduction mode {mode!r}")
    trace = ReductionTrace(instance, mode)
    w = _Work(instance, trace)
    for rnd in range(max_rounds):
        changed = delete_degree_one(w)
        if mode == FULL:
            changed += contract_degree_two(w)
        changed += bottleneck_local(w)
        changed += bottleneck_voronoi(w)
        log.debug("reduction round %d: %d changes", rnd, changed)
        if not changed:
            break
    reduced, keys = w.snapshot()
    trace.kept_keys = keys
    trace.edge_map = [w.orig[k] for k in keys]
    return reduced, trace


def replay(trace: ReductionTrace) -> Instance:
    """Rebuild the reduced instance from the original and the event list."""
    inst = trace.original
    ends = {e: (inst.tails[e], inst.heads[e]) for e in range(inst.m)}
    cost = {e: inst.costs[e] for e in range(inst.m)}
    for ev in trace.events:
        if ev[0] == "delete-edge":
            ends.pop(ev[1], None)
            cost.pop(ev[1], None)
        elif ev[0] == "contract":
            v, k1, k2, new = ev[1:]
            ends_1, ends_2 = ends.pop(k1), ends.pop(k2)
            a = ends_1[0] if ends_1[1] == v else ends_1[1]
            b = ends_2[0] if ends_2[1] == v else ends_2[1]
            ends[new] = (a, b)
            cost[new] = cost.pop(k1) + cost.pop(k2)
    keys = sorted(ends)
    return Instance(inst.n, [(*ends[k], cost[k]) for k in keys], inst.terminals, inst.name)


def lift(trace: ReductionTrace, tree: SteinerTree | Iterable[int],
         original: Instance | None = None) -> SteinerTree:
    inst = trace.original if original is None else original
    edges = tree.edges if isinstance(tree, SteinerTree) else tree
    out: set[int] = set()
    for r in edges:
        if not 0 <= r < len(trace.edge_map):
            raise ValueError(f"edge {r} is not an edge of the reduced instance")
        out.update(trace.edge_map[r])
    return SteinerTree.from_edges(inst, out)
