"""Elite pool with duplicate rejection and similarity-biased eviction."""
from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass

from .core import SteinerTree


class AddOutcome(enum.Enum):
    ADDED = "added"
    DUPLICATE = "duplicate"
    REJECTED = "rejected-worse"
    REPLACED = "replaced"


@dataclass(frozen=True)
class AddResult:
    outcome: AddOutcome
    victim: SteinerTree | None = None


def pool_capacity(iterations: float) -> int:
    """ceil(sqrt(M/2)), at least one slot."""
    return max(1, math.ceil(math.sqrt(iterations / 2)))


class ElitePool:
    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("pool capacity must be positive")
        self.capacity = capacity
        self.members: list[SteinerTree] = []
        self._signatures: set[frozenset[int]] = set()

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(list(self.members))

    def best(self) -> SteinerTree | None:
        return min(self.members, key=lambda t: (t.cost, t.signature()), default=None)

    def worst_cost(self) -> int | None:
        return max((t.cost for t in self.members), default=None)

    def try_add(self, tree: SteinerTree, rng: random.Random) -> AddResult:
        if tree.edges in self._signatures:
            return AddResult(AddOutcome.DUPLICATE)
        if len(self.members) < self.capacity:
            self._insert(tree)
            return AddResult(AddOutcome.ADDED)
        if tree.cost >= self.worst_cost():
            return AddResult(AddOutcome.REJECTED)
        # Victims are members at least as bad as the newcomer; similar ones
        # (small symmetric difference) are preferred, weight 1/(1 + |A ^ B|).
        eligible = [i for i, m in enumerate(self.members) if m.cost >= tree.cost]
        weights = [1.0 / (1 + len(self.members[i].edges ^ tree.edges)) for i in eligible]
        idx = rng.choices(eligible, weights=weights, k=1)[0]
        victim = self.members[idx]
        self._signatures.discard(victim.edges)
        self.members[idx] = tree
        self._signatures.add(tree.edges)
        return AddResult(AddOutcome.REPLACED, victim)

    def _insert(self, tree: SteinerTree) -> None:
        self.members.append(tree)
        self._signatures.add(tree.edges)

    def sample(self, rng: random.Random) -> SteinerTree:
        if not self.members:
            raise IndexError("sample from an empty pool")
        return self.members[rng.randrange(len(self.members))]
