"""Depth-first branch-and-bound on vertices with dual-ascent bounds."""
from __future__ import annotations

import heapq
import itertools
import logging
import math
import random
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .construct import sph
from .core import INF, Instance, SteinerTree, empty_tree, mst_on_induced
from .core.graph import InfeasibleError, prune_leaves
from .dualascent import DualState, dual_ascent, saturated_subgraph
from .incumbent import SharedIncumbent
from .localsearch import pass_u, pass_v

log = logging.getLogger(__name__)

DEFAULT, SCATTER = "default", "scatter"
SCATTER_MAX_DEPTH = 14
ZERO_PROBES, ZERO_BASE_SIZE = 1000, 32   # side 0 uses sets of 32 - depth
ONE_PROBES, ONE_SIZE = 2000, 10
SINGLE_CHILD_FRACTION = 5                # one child once |E|/5 edges are fixed
GMS_DEPTH_CAP = 100


@dataclass
class Limits:
    node_cap: int | None = None
    depth_cap: int | None = None
    deadline: float | None = None          # time.perf_counter() value
    should_stop: Callable[[], bool] | None = None

    @classmethod
    def with_time_limit(cls, seconds: float | None, **kw) -> "Limits":
        deadline = None if seconds is None else time.perf_counter() + seconds
        return cls(deadline=deadline, **kw)


@dataclass
class BnbResult:
    best_cost: float
    best_tree: SteinerTree | None
    proved_optimal: bool
    nodes_visited: int
    bound_at_stop: float
    max_depth: int = 0
    edges_fixed: int = 0
    stop_reason: str = "exhausted"
    root_bound: float = 0
    visits: list[tuple[int, int, int]] = field(default_factory=list)   # (depth, vertex, side)


class _Stop(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def scatter_score(side0: float, side1: float) -> float:
    """Combined strong-branching score, weighted 3:1 toward the zero side."""
    return (side0 ** 3 * side1) ** 0.25


def _probe_subsets(cands: Sequence[int], size: int, probes: int, rng: random.Random):
    size = min(size, len(cands))
    if size <= 0:
        return []
    if math.comb(len(cands), size) <= probes:
        return [list(c) for c in itertools.combinations(cands, size)]
    return [rng.sample(cands, size) for _ in range(probes)]


def _probe_bound(instance: Instance, rng: random.Random, cap: float) -> float:
    if not instance.terminals <= instance.terminal_component():
        return cap
    root = rng.choice(sorted(instance.terminals))
    return min(dual_ascent(instance, root).lower_bound, cap)


def scatter_scores(instance: Instance, candidates: Sequence[int], side: int, probes: int,
                   size: int, rng: random.Random, cap: float) -> dict[int, float]:
    """Mean dual bound over random ``size``-subsets fixed to ``side``, per vertex.

    Vertices never drawn get no score.  Infeasible probes count as ``cap``.
    """
    total: dict[int, float] = {}
    count: Counter[int] = Counter()
    for subset in _probe_subsets(sorted(candidates), size, probes, rng):
        chosen = set(subset)
        if side == 0:
            edges = [(u, v, c) for u, v, c in instance.edges() if u not in chosen and v not in chosen]
            probe = Instance(instance.n, edges, instance.terminals)
        else:
            probe = instance.with_terminals(instance.terminals | chosen)
        bound = _probe_bound(probe, rng, cap)
        for v in subset:
            total[v] = total.get(v, 0) + bound
            count[v] += 1
    return {v: total[v] / count[v] for v in total}


def select_branch_vertex(instance: Instance, primal: SteinerTree | None, dual: DualState,
                         free: Sequence[int], rng: random.Random) -> int | None:
    """Highest degree in the primal tree, then saturated in + out arcs + degree."""
    if not free:
        return None
    tree_deg: Counter[int] = Counter()
    if primal is not None:
        for e in primal.edges:
            tree_deg[instance.tails[e]] += 1
            tree_deg[instance.heads[e]] += 1
    cands = [v for v in free if tree_deg[v] > 0] or list(free)
    rc = dual.reduced
    tails = instance.tails

    def key(v: int) -> tuple[int, int]:
        sat = 0
        for w, e in instance.adj[v]:
            out_arc = 2 * e if tails[e] == v else 2 * e + 1
            sat += (rc[out_arc] == 0) + (rc[out_arc ^ 1] == 0)
        return tree_deg[v], sat + len(instance.adj[v])

    keys = {v: key(v) for v in cands}
    top = max(keys.values())
    return rng.choice(sorted(v for v, k in keys.items() if k == top))


def fixable_edges(instance: Instance, dual: DualState, incumbent_cost: float) -> list[int]:
    """Edges whose two arcs both have extended reduced cost >= incumbent - bound."""
    gap = incumbent_cost - dual.lower_bound
    if gap == INF:
        return []
    rc = dual.reduced
    dist = _reduced_distances(instance, rc, dual.root)
    out = []
    for e in range(instance.m):
        u, v = instance.tails[e], instance.heads[e]
        if dist[u] + rc[2 * e] >= gap and dist[v] + rc[2 * e + 1] >= gap:
            out.append(e)
    return out


def _reduced_distances(instance: Instance, rc: Sequence[int], root: int) -> list[float]:
    dist: list[float] = [INF] * instance.n
    dist[root] = 0
    heap = [(0, root)]
    tails = instance.tails
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for w, e in instance.adj[u]:
            nd = d + rc[2 * e if tails[e] == u else 2 * e + 1]
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


class _Search:
    def __init__(self, instance: Instance, incumbent: SharedIncumbent, limits: Limits,
                 strategy: str, rng: random.Random, log_visits: bool):
        self.inst = instance
        self.inc = incumbent
        self.limits = limits
        self.strategy = strategy
        self.rng = rng
        self.log_visits = log_visits
        self.alive = [True] * instance.m
        self.undo: list[int] = []
        self.promoted: set[int] = set()
        self.nodes = 0
        self.max_depth = 0
        self.fixed = 0
        self.root_bound: float = 0
        self.visits: list[tuple[int, int, int]] = []

    # overlay -----------------------------------------------------------
    def kill(self, e: int) -> bool:
        if not self.alive[e]:
            return False
        self.alive[e] = False
        self.undo.append(e)
        return True

    def rollback(self, mark: int) -> None:
        while len(self.undo) > mark:
            self.alive[self.undo.pop()] = True

    def materialize(self) -> tuple[Instance, list[int]]:
        inst = self.inst
        ids = [e for e in range(inst.m) if self.alive[e]]
        edges = [(inst.tails[e], inst.heads[e], inst.costs[e]) for e in ids]
        return Instance(inst.n, edges, inst.terminals | self.promoted, inst.name), ids

    def publish(self, local_tree: SteinerTree, ids: list[int]) -> None:
        edges = prune_leaves(self.inst, (ids[e] for e in local_tree.edges), self.inst.terminals)
        self.inc.offer(SteinerTree.from_edges(self.inst, edges), "bnb")

    def check(self, depth: int) -> None:
        lim = self.limits
        if self.inc.stopped or (lim.should_stop is not None and lim.should_stop()):
            raise _Stop("stopped")
        if lim.node_cap is not None and self.nodes >= lim.node_cap:
            raise _Stop("node-cap")
        if lim.depth_cap is not None and depth >= lim.depth_cap:
            raise _Stop("depth-cap")
        if lim.deadline is not None and time.perf_counter() >= lim.deadline:
            raise _Stop("deadline")

    # search ------------------------------------------------------------
    def run(self) -> tuple[bool, str, float]:
        stack: list[tuple] = [("node", 0, -INF, None)]
        while stack:
            item = stack.pop()
            kind = item[0]
            if kind == "undo":
                self.rollback(item[1])
            elif kind == "unpromote":
                self.promoted.discard(item[1])
            elif kind == "one":
                _, v, depth, lb = item
                self.promoted.add(v)
                stack.append(("unpromote", v))
                stack.append(("node", depth, lb, (v, 1)))
            elif kind == "zero":
                _, v, depth, lb = item
                mark = len(self.undo)
                for _w, e in self.inst.adj[v]:
                    self.kill(e)
                stack.append(("undo", mark))
                stack.append(("node", depth, lb, (v, 0)))
            else:
                _, depth, parent_lb, branch = item
                try:
                    self.check(depth)
                except _Stop as stop:
                    pending = [parent_lb] + [it[-1] if it[0] != "node" else it[2]
                                             for it in stack if it[0] in ("node", "one", "zero")]
                    return False, stop.reason, min(pending + [self.inc.cost])
                self.nodes += 1
                self.max_depth = max(self.max_depth, depth)
                if self.log_visits and branch is not None:
                    self.visits.append((depth, *branch))
                self.expand(depth, stack)
        return True, "exhausted", self.inc.cost

    def expand(self, depth: int, stack: list) -> None:
        local, ids = self.materialize()
        comp = local.terminal_component()
        if not local.terminals <= comp:
            return
        free = sorted(v for v in comp if v not in local.terminals)
        if not free:
            tree = mst_on_induced(local, comp)
            if tree is not None:
                self.publish(tree, ids)
            return
        root = self.rng.choice(sorted(local.terminals))
        dual = dual_ascent(local, root)
        lb = dual.lower_bound
        if depth == 0:
            self.root_bound = lb
        if lb >= self.inc.cost:
            return
        primal = sph(local, None, root, saturated_subgraph(dual))
        if primal is not None:
            primal = pass_u(local, pass_v(local, primal).tree).tree
            self.publish(primal, ids)
        if lb >= self.inc.cost:
            return
        mark = len(self.undo)
        fixed = [ids[e] for e in fixable_edges(local, dual, self.inc.cost)]
        for e in fixed:
            self.kill(e)
        self.fixed += len(fixed)
        stack.append(("undo", mark))
        if fixed and len(fixed) * SINGLE_CHILD_FRACTION >= local.m:
            stack.append(("node", depth + 1, lb, None))
            return
        v = None
        if self.strategy == SCATTER and depth <= SCATTER_MAX_DEPTH:
            v = self.scatter_choice(local, free, depth)
        if v is None:
            v = select_branch_vertex(local, primal, dual, free, self.rng)
        stack.append(("zero", v, depth + 1, lb))
        stack.append(("one", v, depth + 1, lb))

    def scatter_choice(self, local: Instance, free: list[int], depth: int) -> int | None:
        cap = self.inc.cost if self.inc.cost < INF else sum(local.costs) + 1
        s0 = scatter_scores(local, free, 0, ZERO_PROBES, ZERO_BASE_SIZE - depth, self.rng, cap)
        s1 = scatter_scores(local, free, 1, ONE_PROBES, ONE_SIZE, self.rng, cap)
        scored = {v: scatter_score(s0[v], s1[v]) for v in free if v in s0 and v in s1}
        if not scored:
            return None
        top = max(scored.values())
        return self.rng.choice([v for v in sorted(scored) if scored[v] == top])


def solve(instance: Instance, ub_hint: float | None = None, limits: Limits | None = None,
          strategy: str = DEFAULT, rng: random.Random | None = None,
          incumbent: SharedIncumbent | None = None, log_visits: bool = False) -> BnbResult:
    """Exact search; ``proved_optimal`` is set only if the tree was exhausted.

    Without ``ub_hint`` or a seeded ``incumbent`` one multistart solution is
    generated as the starting upper bound.
    """
    if strategy not in (DEFAULT, SCATTER):
        raise ValueError(f"unknown branching strategy {strategy!r}")
    rng = rng or random.Random(0)
    limits = limits or Limits()
    if not instance.is_connected_on_terminals():
        raise InfeasibleError("terminals are not mutually reachable")
    inc = incumbent if incumbent is not None else SharedIncumbent()
    if len(instance.terminals) == 1:
        inc.offer(empty_tree(), "bnb")
        return BnbResult(0, inc.tree, True, 0, 0)
    if ub_hint is not None:
        inc.tighten(ub_hint)
    if inc.cost == INF:
        from .multistart import generate_solution

        inc.offer(generate_solution(instance, rng), "bnb-start")

    search = _Search(instance, inc, limits, strategy, rng, log_visits)
    proved, reason, bound = search.run()
    log.debug("bnb: %s after %d nodes", reason, search.nodes)
    return BnbResult(inc.cost, inc.tree, proved, search.nodes, bound, search.max_depth,
                     search.fixed, reason, search.root_bound, search.visits)
