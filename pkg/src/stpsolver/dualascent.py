"""Dual ascent on the bidirected graph: lower bound and reduced costs.

Arc ``2e`` runs tails[e] -> heads[e], arc ``2e + 1`` the other way.  The
dual variables are never stored, only their sum and the residual arc costs.
"""
from __future__ import annotations

import enum
import heapq
import logging
from dataclasses import dataclass, field
from typing import Sequence

from .core import INF, Instance
from .core.graph import ArcFilter, InfeasibleError

log = logging.getLogger(__name__)

DEFAULT_SLACK = 0.25


class Outcome(enum.Enum):
    DEACTIVATED = "deactivated"
    AUGMENTED = "augmented"
    REINSERTED = "skipped-reinserted"


@dataclass
class ProcessResult:
    outcome: Outcome
    delta: int = 0


@dataclass
class DualState:
    instance: Instance
    root: int
    reduced: list[int]
    lower_bound: int = 0
    active: set[int] = field(default_factory=set)
    heap: list[tuple[int, int, int]] = field(default_factory=list)
    stamp: dict[int, int] = field(default_factory=dict)
    augmentations: int = 0
    deactivations: int = 0
    reinsertions: int = 0

    @property
    def done(self) -> bool:
        return not self.active

    def arc_cost(self, tail: int, head: int, e: int) -> int:
        return self.reduced[arc_id(self.instance, tail, e)]

    def summary(self) -> dict:
        return {"root": self.root, "lower_bound": self.lower_bound,
                "augmentations": self.augmentations, "deactivations": self.deactivations}


def arc_id(instance: Instance, tail: int, e: int) -> int:
    return 2 * e if instance.tails[e] == tail else 2 * e + 1


def arc_tail(instance: Instance, a: int) -> int:
    e = a >> 1
    return instance.heads[e] if a & 1 else instance.tails[e]


def score(instance: Instance, vertices) -> int:
    """Sum of in-degrees minus (size - 1); cheap proxy for the cut size."""
    vs = list(vertices)
    return sum(len(instance.adj[v]) for v in vs) - (len(vs) - 1)


def _push(state: DualState, v: int, priority: int) -> None:
    s = state.stamp.get(v, 0) + 1
    state.stamp[v] = s
    heapq.heappush(state.heap, (priority, v, s))


def _pop(state: DualState) -> tuple[int, int] | None:
    while state.heap:
        p, v, s = heapq.heappop(state.heap)
        if v in state.active and state.stamp.get(v) == s:
            return p, v
    return None


def _peek_priority(state: DualState) -> float:
    heap = state.heap
    while heap:
        p, v, s = heap[0]
        if v in state.active and state.stamp.get(v) == s:
            return p
        heapq.heappop(heap)
    return INF


def init(instance: Instance, root: int | None = None,
         costs: Sequence[int] | None = None) -> DualState:
    cs = instance.costs if costs is None else costs
    terms = instance.terminals
    if root is None:
        root = min(terms)
    if root not in terms:
        raise ValueError("root must be a terminal")
    reduced = [0] * (2 * instance.m)
    for e, c in enumerate(cs):
        reduced[2 * e] = c
        reduced[2 * e + 1] = c
    state = DualState(instance, root, reduced)
    for t in sorted(terms):
        if t != root:
            state.active.add(t)
            _push(state, t, len(instance.adj[t]))
    return state


def _cut(state: DualState, v: int) -> tuple[set[int], list[int]] | None:
    """Reverse search over saturated arcs; None if it meets the root or another active terminal."""
    inst = state.instance
    rc = state.reduced
    stop = state.active
    root = state.root
    seen = {v}
    stack = [v]
    boundary: list[int] = []
    while stack:
        w = stack.pop()
        for x, e in inst.adj[w]:
            a = 2 * e if inst.tails[e] == x else 2 * e + 1   # arc x -> w
            if rc[a]:
                boundary.append(a)
                continue
            if x in seen:
                continue
            if x == root or (x in stop and x != v):
                return None
            seen.add(x)
            stack.append(x)
    return seen, boundary


def process(state: DualState, v: int, eager_slack: float | None = None) -> ProcessResult:
    """Handle one popped active terminal.

    With ``eager_slack`` set, the component is only augmented if its true
    score does not exceed the next priority by more than that fraction;
    otherwise ``v`` is reinserted with the corrected priority.
    """
    inst = state.instance
    found = _cut(state, v)
    if found is None:
        state.active.discard(v)
        state.deactivations += 1
        return ProcessResult(Outcome.DEACTIVATED)
    comp, boundary = found
    if eager_slack is not None:
        actual = score(inst, comp)
        if actual > (1 + eager_slack) * _peek_priority(state):
            _push(state, v, actual)
            state.reinsertions += 1
            return ProcessResult(Outcome.REINSERTED)
    rc = state.reduced
    cut_arcs = [a for a in boundary if arc_tail(inst, a) not in comp]
    if not cut_arcs:
        raise InfeasibleError(f"terminal {v + 1} cannot be reached from the root")
    delta = min(rc[a] for a in cut_arcs)
    grown = set(comp)
    for a in cut_arcs:
        rc[a] -= delta
        if rc[a] == 0:
            grown.add(arc_tail(inst, a))
    state.lower_bound += delta
    state.augmentations += 1
    _push(state, v, score(inst, grown))
    return ProcessResult(Outcome.AUGMENTED, delta)


def _finish_last(state: DualState, v: int) -> None:
    """Close the last active component with one Dijkstra from the root.

    With D the reduced distance to ``v`` and d(x) capped at D (unreached
    vertices count as D), arc (a, b) loses max(0, d(b) - d(a)).  This is the
    sum of the cuts {x : d(x) > theta} for theta in [0, D), each of which
    holds ``v`` and not the root, so feasibility is preserved and the
    root-to-v shortest path becomes saturated.
    """
    inst = state.instance
    rc = state.reduced
    dist: list[float] = [INF] * inst.n
    dist[state.root] = 0
    heap = [(0, state.root)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if u == v:
            break
        for w, e in inst.adj[u]:
            nd = d + rc[2 * e if inst.tails[e] == u else 2 * e + 1]
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    D = dist[v]
    if D == INF:
        raise InfeasibleError(f"terminal {v + 1} cannot be reached from the root")
    if D > 0:
        capped = [min(d, D) for d in dist]
        for e in range(inst.m):
            a, b = inst.tails[e], inst.heads[e]
            da, db = capped[a], capped[b]
            if db > da:
                rc[2 * e] -= int(db - da)
            elif da > db:
                rc[2 * e + 1] -= int(da - db)
        state.lower_bound += int(D)
        state.augmentations += 1
    state.active.discard(v)


def run(state: DualState, eager_slack: float = DEFAULT_SLACK) -> DualState:
    while state.active:
        if len(state.active) == 1:
            (v,) = state.active
            _finish_last(state, v)
            break
        popped = _pop(state)
        if popped is None:  # defensive: every active terminal keeps one live entry
            raise RuntimeError("active terminal missing from the queue")
        process(state, popped[1], eager_slack)
    log.debug("dual ascent %s", state.summary())
    return state


def dual_ascent(instance: Instance, root: int | None = None, eager_slack: float = DEFAULT_SLACK,
                costs: Sequence[int] | None = None) -> DualState:
    # With a single terminal init leaves nothing active and the bound stays 0.
    return run(init(instance, root, costs), eager_slack)


def saturated_subgraph(state: DualState) -> ArcFilter:
    """Arc filter accepting exactly the arcs whose reduced cost is zero."""
    inst = state.instance
    rc = state.reduced
    tails = inst.tails

    def ok(tail: int, head: int, e: int) -> bool:
        return rc[2 * e if tails[e] == tail else 2 * e + 1] == 0

    return ok


def reachable_from_root(state: DualState) -> set[int]:
    """Vertices reachable from the root over zero-reduced-cost arcs."""
    ok = saturated_subgraph(state)
    inst = state.instance
    seen = {state.root}
    stack = [state.root]
    while stack:
        u = stack.pop()
        for w, e in inst.adj[u]:
            if w not in seen and ok(u, w, e):
                seen.add(w)
                stack.append(w)
    return seen
