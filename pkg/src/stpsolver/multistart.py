"""Multistart with cascaded combination of elite solutions (MS, MS2, MSK, timed)."""
from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .construct import sph
from .core import MAX_COST, Instance, SteinerTree, empty_tree
from .localsearch import PassFn, key_vertex_insertion_pass, vq
from .perturb import DecaySchedule, apply, sample_profile
from .pool import ElitePool, pool_capacity
from .seeding import stream

log = logging.getLogger(__name__)

MS, MS2, MSK = "ms", "ms2", "msk"
TIMED_MAX_ITERATIONS = 65536
TIMED_ITERATION_FACTOR = 2.5

Callback = Callable[[SteinerTree], None]
StopCheck = Callable[[], bool]


@dataclass
class MsConfig:
    iterations: int
    phi: int = 3
    decay_alpha: float = 0.5
    variant: str = MS
    seed: int = 0
    time_budget: float | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.phi < 1:
            raise ValueError("phi must be at least 1")
        if self.variant not in (MS, MS2, MSK):
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass
class MsResult:
    tree: SteinerTree
    pool: ElitePool
    stats: dict = field(default_factory=dict)


def _root_candidates(instance: Instance) -> list[int]:
    return sorted(instance.terminal_component())


def generate_solution(instance: Instance, rng: random.Random, alpha: float = 0.5,
                      extra_passes: Sequence[PassFn] = (), stats: dict | None = None) -> SteinerTree:
    """Perturbed SPH from a random root, then vq with a decaying perturbation."""
    if len(instance.terminals) == 1:
        return empty_tree()
    profile = sample_profile(instance, rng)
    view = apply(profile, instance)
    root = rng.choice(_root_candidates(instance))
    tree = sph(instance, view, root)
    if tree is None:
        raise ValueError("instance is infeasible: terminals are disconnected")
    return vq(instance, tree, DecaySchedule(view, alpha), extra_passes, stats=stats)


def merge_view(instance: Instance, sa: SteinerTree, sb: SteinerTree, rng: random.Random) -> list[int]:
    """Edge in both trees: original cost; in one: x U[100, 500]; in neither: x 1000."""
    view = []
    a, b = sa.edges, sb.edges
    for e, c in enumerate(instance.costs):
        ina, inb = e in a, e in b
        if ina and inb:
            view.append(c)
        elif ina or inb:
            view.append(min(MAX_COST, round(c * rng.uniform(100, 500))))
        else:
            view.append(min(MAX_COST, c * 1000))
    return view


def randomized_merge(instance: Instance, sa: SteinerTree, sb: SteinerTree, rng: random.Random,
                     extra_passes: Sequence[PassFn] = (), stats: dict | None = None) -> SteinerTree:
    if len(instance.terminals) == 1:
        return empty_tree()
    view = merge_view(instance, sa, sb, rng)
    root = rng.choice(sorted(instance.terminals))
    tree = sph(instance, view, root)
    return vq(instance, tree, extra_passes=extra_passes, stats=stats)


def cascaded_combine(instance: Instance, s0: SteinerTree, pool: ElitePool, phi: int,
                     rng: random.Random, extra_passes: Sequence[PassFn] = (),
                     should_stop: StopCheck | None = None, stats: dict | None = None) -> SteinerTree:
    """Merge the incumbent with random pool members until ``phi`` merges fail."""
    best = s0
    failures = 0
    while len(pool) and failures < phi:
        if should_stop is not None and should_stop():
            break
        partner = pool.sample(rng)
        merged = randomized_merge(instance, best, partner, rng, extra_passes, stats)
        if stats is not None:
            stats["merges"] = stats.get("merges", 0) + 1
        if merged.cost < best.cost:
            best = merged
        else:
            failures += 1
    return best


def run_ms(instance: Instance, config: MsConfig, *, pool: ElitePool | None = None,
           tag: str = "ms", extra_passes: Sequence[PassFn] = (),
           on_improve: Callback | None = None, should_stop: StopCheck | None = None,
           deadline: float | None = None, keep_trace: bool = True) -> MsResult:
    """Plain multistart: fresh solution, cascaded combination, pool update."""
    M = config.iterations
    if pool is None:
        pool = ElitePool(pool_capacity(M))
    stats: dict = {"iterations": 0, "merges": 0, "passes": 0, "improving_passes": 0}
    trace: list[int] = []
    best: SteinerTree | None = pool.best()

    def stop() -> bool:
        if should_stop is not None and should_stop():
            return True
        return deadline is not None and time.perf_counter() >= deadline

    for k in range(M):
        if stop():
            break
        rng = stream(config.seed, tag, k)
        extra = [_bind(p, rng) for p in extra_passes]
        s = generate_solution(instance, rng, config.decay_alpha, extra, stats)
        s2 = cascaded_combine(instance, s, pool, config.phi, rng, extra, stop, stats)
        pool.try_add(s, rng)
        pool.try_add(s2, rng)
        for cand in (s, s2):
            if best is None or cand.cost < best.cost:
                best = cand
                if on_improve is not None:
                    on_improve(best)
        stats["iterations"] = k + 1
        if keep_trace:
            trace.append(best.cost)
    if best is None:
        raise RuntimeError("no iteration completed")
    top = pool.best()
    if top is not None and top.cost <= best.cost:
        best = top
    stats["best_cost"] = best.cost
    stats["pool_size"] = len(pool)
    stats["pool_capacity"] = pool.capacity
    if keep_trace:
        stats["trace"] = trace
    return MsResult(best, pool, stats)


def _bind(pass_fn, rng):
    if pass_fn is key_vertex_insertion_pass:
        return lambda inst, tree, cs: key_vertex_insertion_pass(inst, tree, rng, cs)
    return pass_fn


def run_ms2(instance: Instance, config: MsConfig, **kw) -> MsResult:
    """Four independent runs of M/8 iterations, then M/2 iterations from their pooled elites."""
    M = config.iterations
    if M < 8:
        return run_ms(instance, config, **kw)
    kw.pop("pool", None)
    per_run = M // 8
    phase1 = []
    for i in range(4):
        cfg = MsConfig(per_run, config.phi, config.decay_alpha, MS, config.seed)
        phase1.append(run_ms(instance, cfg, tag=f"ms2-p1-{i}", **kw))
    rng = stream(config.seed, "ms2-seed-pool")
    elites = [t for r in phase1 for t in r.pool]
    rng.shuffle(elites)
    pool = ElitePool(max(1, math.ceil(math.sqrt(M / 4))))
    for t in elites:
        pool.try_add(t, rng)
    rest = M - 4 * per_run
    cfg = MsConfig(rest, config.phi, config.decay_alpha, MS, config.seed)
    final = run_ms(instance, cfg, pool=pool, tag="ms2-p2", **kw)
    final.stats["iterations"] += sum(r.stats["iterations"] for r in phase1)
    final.stats["merges"] += sum(r.stats["merges"] for r in phase1)
    final.stats["phase1_best"] = [r.tree.cost for r in phase1]
    return final


def run_msk(instance: Instance, config: MsConfig, **kw) -> MsResult:
    """MS with key-vertex insertion appended to every local search."""
    return run_ms(instance, config, tag="msk", extra_passes=[key_vertex_insertion_pass], **kw)


def run(instance: Instance, config: MsConfig, **kw) -> MsResult:
    if config.variant == MS2:
        return run_ms2(instance, config, **kw)
    if config.variant == MSK:
        return run_msk(instance, config, **kw)
    return run_ms(instance, config, **kw)


def planned_iterations(budget: float, first_iteration_time: float) -> int:
    if first_iteration_time <= 0:
        return TIMED_MAX_ITERATIONS
    return min(TIMED_MAX_ITERATIONS, max(1, int(budget / (TIMED_ITERATION_FACTOR * first_iteration_time))))


def run_timed(instance: Instance, budget: float, sink: Callback, seed: int = 0) -> dict:
    """Time-budgeted run that reports every new incumbent through ``sink``.

    Phase 1 applies edge-removal-only reductions, phase 2 one unperturbed
    SPH + local search (timed as tau1), phase 3 a multistart with its pool
    sized from ``budget / (2.5 * tau1)`` that stops at the deadline.
    Incumbents are reported on ``instance`` and strictly decrease.
    """
    from .reduce import EDGE_REMOVAL_ONLY, lift, preprocess

    if budget <= 0:
        raise ValueError("time budget must be positive")
    t0 = time.perf_counter()
    deadline = t0 + budget
    reduced, trace = preprocess(instance, EDGE_REMOVAL_ONLY)
    best_cost = math.inf
    emitted: list[int] = []

    def emit(tree: SteinerTree, force: bool = False) -> None:
        nonlocal best_cost
        if not force and time.perf_counter() > deadline:
            return
        lifted = lift(trace, tree, instance)
        if lifted.cost < best_cost:
            best_cost = lifted.cost
            emitted.append(lifted.cost)
            sink(lifted)

    rng = stream(seed, "timed")
    t1 = time.perf_counter()
    root = rng.choice(_root_candidates(reduced))
    first = sph(reduced, None, root)
    if first is None:
        raise ValueError("instance is infeasible: terminals are disconnected")
    emit(first, force=True)
    improved = vq(reduced, first)
    emit(improved)
    tau1 = time.perf_counter() - t1
    m_hat = budget / (TIMED_ITERATION_FACTOR * tau1) if tau1 > 0 else TIMED_MAX_ITERATIONS
    stats = {"tau1": tau1, "planned_iterations": m_hat, "iterations": 0}
    if time.perf_counter() < deadline:
        pool = ElitePool(pool_capacity(min(m_hat, TIMED_MAX_ITERATIONS)))
        cfg = MsConfig(TIMED_MAX_ITERATIONS, seed=seed)
        res = run_ms(reduced, cfg, pool=pool, tag="timed", on_improve=emit,
                     deadline=deadline, keep_trace=False)
        stats["iterations"] = res.stats["iterations"]
        stats["merges"] = res.stats["merges"]
    stats["incumbents"] = emitted
    stats["best_cost"] = best_cost
    stats["wall_s"] = time.perf_counter() - t0
    return stats
