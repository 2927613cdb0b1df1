"""Thread-safe best-solution cell shared by concurrent workers."""
from __future__ import annotations

import math
import threading

from .core import SteinerTree


class SharedIncumbent:
    """Best known tree plus cooperative stop and optimality flags.

    The cost is replaced before the tree, under one lock, so a reader of
    ``cost`` never sees a value below the best tree actually found.
    """

    def __init__(self, cost: float = math.inf, tree: SteinerTree | None = None):
        self._lock = threading.Lock()
        self._cost = cost
        self._tree = tree
        self._stop = threading.Event()
        self.optimal = False
        self.history: list[tuple[str, int]] = []

    @property
    def cost(self) -> float:
        return self._cost

    @property
    def tree(self) -> SteinerTree | None:
        with self._lock:
            return self._tree

    def offer(self, tree: SteinerTree, source: str = "") -> bool:
        """Publish ``tree`` if it is strictly cheaper; True if accepted."""
        if tree.cost >= self._cost:
            return False
        with self._lock:
            if tree.cost >= self._cost:
                return False
            self._cost = tree.cost
            self._tree = tree
            self.history.append((source, tree.cost))
            return True

    def tighten(self, cost: float) -> None:
        """Lower the cost bar without a tree: only strictly cheaper trees are kept."""
        with self._lock:
            if cost < self._cost:
                self._cost = cost

    def mark_optimal(self) -> None:
        self.optimal = True
        self._stop.set()

    def request_stop(self) -> None:
        self._stop.set()

    @property
    def stopped(self) -> bool:
        return self._stop.is_set()

    def wait(self, timeout: float | None = None) -> bool:
        return self._stop.wait(timeout)
