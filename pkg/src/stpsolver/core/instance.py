"""Undirected Steiner instances and solution trees."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

MAX_COST = (1 << 63) - 1


class Instance:
    """Undirected graph with nonnegative integer edge costs and a terminal set.

    Vertices are ``0 .. n-1``.  Self-loops are dropped and parallel edges are
    collapsed to the cheapest one, so the graph is always simple.  Edge ids
    are positions in ``tails``/``heads``/``costs``.  Instances are treated as
    immutable once built.
    """

    __slots__ = ("n", "tails", "heads", "costs", "terminals", "adj", "name",
                 "_index", "_terminal_component")

    def __init__(self, n: int, edges: Iterable[tuple[int, int, int]],
                 terminals: Iterable[int], name: str = ""):
        self.n = n
        self.name = name
        tails: list[int] = []
        heads: list[int] = []
        costs: list[int] = []
        index: dict[tuple[int, int], int] = {}
        for u, v, c in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if c < 0:
                raise ValueError(f"edge ({u}, {v}) has negative cost {c}")
            if c > MAX_COST:
                raise ValueError(f"edge ({u}, {v}) cost {c} exceeds the 63-bit range")
            if u == v:
                continue
            key = (u, v) if u < v else (v, u)
            e = index.get(key)
            if e is None:
                index[key] = len(tails)
                tails.append(u)
                heads.append(v)
                costs.append(int(c))
            elif c < costs[e]:
                costs[e] = int(c)
        if sum(costs) > MAX_COST:
            raise ValueError("total edge cost exceeds the 63-bit range")
        self.tails = tails
        self.heads = heads
        self.costs = costs
        self._index = index
        self.terminals = frozenset(terminals)
        if not self.terminals:
            raise ValueError("instance needs at least one terminal")
        for t in self.terminals:
            if not 0 <= t < n:
                raise ValueError(f"terminal {t} outside 0..{n - 1}")
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for e, (u, v) in enumerate(zip(tails, heads)):
            adj[u].append((v, e))
            adj[v].append((u, e))
        self.adj = adj
        self._terminal_component: frozenset[int] | None = None

    @property
    def m(self) -> int:
        return len(self.costs)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<Instance{label} |V|={self.n} |E|={self.m} |T|={len(self.terminals)}>"

    def edge(self, e: int) -> tuple[int, int, int]:
        return self.tails[e], self.heads[e], self.costs[e]

    def edges(self) -> list[tuple[int, int, int]]:
        return list(zip(self.tails, self.heads, self.costs))

    def edge_id(self, u: int, v: int) -> int | None:
        return self._index.get((u, v) if u < v else (v, u))

    def other(self, e: int, u: int) -> int:
        t = self.tails[e]
        return self.heads[e] if t == u else t

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def terminal_component(self) -> frozenset[int]:
        """Vertices connected to the smallest terminal (cached)."""
        if self._terminal_component is None:
            start = min(self.terminals)
            seen = {start}
            stack = [start]
            while stack:
                u = stack.pop()
                for w, _ in self.adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            self._terminal_component = frozenset(seen)
        return self._terminal_component

    def is_connected_on_terminals(self) -> bool:
        return self.terminals <= self.terminal_component()

    def with_terminals(self, terminals: Iterable[int]) -> Instance:
        return Instance(self.n, self.edges(), terminals, self.name)

    def tree_cost(self, edges: Iterable[int], costs: Sequence[int] | None = None) -> int:
        cs = self.costs if costs is None else costs
        return sum(cs[e] for e in edges)


@dataclass(frozen=True)
class SteinerTree:
    """Feasible solution: a set of edge ids plus its cost on original costs."""

    edges: frozenset[int]
    cost: int

    @classmethod
    def from_edges(cls, instance: Instance, edges: Iterable[int]) -> SteinerTree:
        es = frozenset(edges)
        return cls(es, instance.tree_cost(es))

    def vertices(self, instance: Instance) -> set[int]:
        vs = set(instance.terminals) if not self.edges else set()
        for e in self.edges:
            vs.add(instance.tails[e])
            vs.add(instance.heads[e])
        return vs

    def signature(self) -> tuple[int, ...]:
        return tuple(sorted(self.edges))

    def __len__(self) -> int:
        return len(self.edges)


def empty_tree() -> SteinerTree:
    return SteinerTree(frozenset(), 0)
