"""Guarded multistart: multistart and branch-and-bound race on one incumbent."""
from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field

from . import bnb
from .core import Instance, SteinerTree, empty_tree
from .incumbent import SharedIncumbent
from .multistart import MsConfig, run_ms
from .seeding import stream

log = logging.getLogger(__name__)


@dataclass
class GmsResult:
    best_cost: float
    best_tree: SteinerTree | None
    optimal: bool
    terminated_by: str
    iterations: int = 0
    nodes: int = 0
    lower_bound: float = 0
    cpu_time: float = 0.0
    wall_time: float = 0.0
    history: list[tuple[str, int]] = field(default_factory=list)


def run_gms(instance: Instance, iterations: int, seed: int = 0, time_limit: float | None = None,
            depth_cap: int = bnb.GMS_DEPTH_CAP, incumbent: SharedIncumbent | None = None) -> GmsResult:
    """Run multistart (worker A) and branch-and-bound (worker B) in two threads.

    The run ends when A completes its iterations or B proves optimality.
    B gives up silently once its search reaches ``depth_cap``.
    """
    t0 = time.perf_counter()
    inc = incumbent or SharedIncumbent()
    if len(instance.terminals) == 1:
        inc.offer(empty_tree(), "trivial")
        inc.mark_optimal()
        return GmsResult(0, inc.tree, True, "bnb", history=list(inc.history))
    deadline = None if time_limit is None else t0 + time_limit
    out: dict = {"terminated_by": None, "errors": [], "cpu": [0.0, 0.0]}
    finish_lock = threading.Lock()

    def finish(who: str) -> None:
        with finish_lock:
            if out["terminated_by"] is None:
                out["terminated_by"] = who
        inc.request_stop()

    def worker_ms() -> None:
        c0 = time.thread_time()
        try:
            res = run_ms(instance, MsConfig(iterations, seed=seed),
                         on_improve=lambda t: inc.offer(t, "ms"),
                         should_stop=lambda: inc.stopped, deadline=deadline, keep_trace=False)
            inc.offer(res.tree, "ms")
            out["iterations"] = res.stats["iterations"]
            finish("deadline" if deadline and time.perf_counter() >= deadline else "ms")
        except BaseException as exc:  # surfaced by the coordinator
            out["errors"].append(exc)
            finish("error")
        finally:
            out["cpu"][0] = time.thread_time() - c0

    def worker_bnb() -> None:
        c0 = time.thread_time()
        try:
            limits = bnb.Limits(depth_cap=depth_cap, deadline=deadline)
            res = bnb.solve(instance, limits=limits, rng=stream(seed, "bnb"), incumbent=inc)
            out["nodes"] = res.nodes_visited
            out["bound"] = res.bound_at_stop
            if res.proved_optimal:
                inc.mark_optimal()
                finish("bnb")
        except BaseException as exc:
            out["errors"].append(exc)
            finish("error")
        finally:
            out["cpu"][1] = time.thread_time() - c0

    threads = [threading.Thread(target=worker_ms, name="gms-ms", daemon=True),
               threading.Thread(target=worker_bnb, name="gms-bnb", daemon=True)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if out["errors"]:
        raise out["errors"][0]
    lower = inc.cost if inc.optimal else out.get("bound", 0)
    return GmsResult(inc.cost, inc.tree, inc.optimal, out["terminated_by"] or "ms",
                     out.get("iterations", 0), out.get("nodes", 0), lower,
                     sum(out["cpu"]), time.perf_counter() - t0, list(inc.history))
