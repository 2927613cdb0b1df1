from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (brute_force_optimum, random_instance, shortest_path_cost, tiny_suite,
                     tree_edges_valid)
from stpsolver import Instance, SteinerTree, validate
from stpsolver import multistart as ms
from stpsolver.core import MAX_COST
from stpsolver.multistart import (MS, MS2, MSK, MsConfig, cascaded_combine, generate_solution,
                                  merge_view, planned_iterations, randomized_merge, run, run_ms,
                                  run_timed)
from stpsolver.pool import ElitePool
from stpsolver.seeding import stream


def tree_of(inst, pairs):
    return SteinerTree.from_edges(inst, [inst.edge_id(u, v) for u, v in pairs])


def subdivided_wye():
    edges = [(0, 1, 4), (1, 2, 4), (0, 2, 4)]
    for t, mid in ((0, 3), (1, 4), (2, 5)):
        edges += [(t, mid, 1), (mid, 6, 1)]
    return Instance(7, edges, [0, 1, 2])


def two_gadgets():
    """Two terminal triangles (sides 5) with hubs (spokes 2), joined by a cheap bridge
    and by a long detour through 8 and 9."""
    edges = []
    for a, b, c, hub in ((0, 1, 2, 3), (4, 5, 6, 7)):
        edges += [(a, b, 5), (b, c, 5), (a, c, 5), (hub, a, 2), (hub, b, 2), (hub, c, 2)]
    edges += [(2, 4, 1), (0, 8, 10), (8, 9, 10), (9, 6, 10)]
    return Instance(10, edges, [0, 1, 2, 4, 5, 6])


def test_config_validation():
    with pytest.raises(ValueError):
        MsConfig(0)
    with pytest.raises(ValueError):
        MsConfig(4, phi=0)
    with pytest.raises(ValueError):
        MsConfig(4, variant="bogus")


# -- generate_solution -------------------------------------------------------

def test_single_terminal_gives_empty_tree():
    inst = Instance(3, [(0, 1, 1), (1, 2, 1)], [1])
    tree = generate_solution(inst, random.Random(0))
    assert tree.cost == 0 and len(tree) == 0


@pytest.mark.parametrize("seed", range(10))
def test_two_terminals_give_shortest_path(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, n_min=6, n_max=20)
    a, b = rng.sample(range(inst.n), 2)
    inst = inst.with_terminals([a, b])
    assert generate_solution(inst, random.Random(seed)).cost == shortest_path_cost(inst, a, b)


def test_sixteen_seeds_reach_optimum_on_most_instances():
    suite = tiny_suite()
    hits = 0
    for i, inst in enumerate(suite):
        best = min(generate_solution(inst, stream(7, i, s)).cost for s in range(16))
        hits += best == brute_force_optimum(inst)
    assert hits >= 0.9 * len(suite)


# -- merge and cascaded combination ------------------------------------------

def test_merge_view_multipliers():
    inst = Instance(4, [(0, 1, 2), (1, 2, 3), (2, 3, 4), (0, 3, MAX_COST // 10)], [0, 3])
    sa = SteinerTree.from_edges(inst, [0, 1])
    sb = SteinerTree.from_edges(inst, [1, 2])
    view = merge_view(inst, sa, sb, random.Random(0))
    assert view[1] == 3
    assert 200 <= view[0] <= 1000
    assert 400 <= view[2] <= 2000
    assert view[3] == MAX_COST


def test_merge_of_identical_trees_is_no_worse():
    for seed in range(20):
        rng = random.Random(seed)
        inst = random_instance(rng, n_min=6)
        s = generate_solution(inst, rng)
        out = randomized_merge(inst, s, s, rng)
        assert out.cost <= s.cost
        assert validate(inst, out) == out.cost


def test_merge_of_complementary_halves_finds_optimum():
    inst = two_gadgets()
    opt = brute_force_optimum(inst)
    sa = tree_of(inst, [(3, 0), (3, 1), (3, 2), (2, 4), (4, 5), (5, 6)])
    sb = tree_of(inst, [(0, 1), (1, 2), (2, 4), (7, 4), (7, 5), (7, 6)])
    assert sa.cost > opt and sb.cost > opt
    for seed in range(10):
        out = randomized_merge(inst, sa, sb, random.Random(seed))
        assert out.cost == opt


def test_cascade_with_empty_pool_returns_start():
    inst = two_gadgets()
    s0 = tree_of(inst, [(0, 1), (1, 2), (2, 4), (4, 5), (5, 6)])
    assert cascaded_combine(inst, s0, ElitePool(3), 3, random.Random(0)) is s0


def scripted_merges(monkeypatch, costs):
    calls = []

    def fake(instance, sa, sb, rng, extra=(), stats=None):
        c = costs[len(calls)]
        calls.append(c)
        return SteinerTree(frozenset({len(calls)}), c)

    monkeypatch.setattr(ms, "randomized_merge", fake)
    return calls


def test_cascade_stops_after_phi_failures(monkeypatch):
    calls = scripted_merges(monkeypatch, [20, 30, 10, 40])
    pool = ElitePool(2)
    pool.try_add(SteinerTree(frozenset({99}), 5), random.Random(0))
    out = cascaded_combine(two_gadgets(), SteinerTree(frozenset({0}), 10), pool, 3, random.Random(0))
    assert len(calls) == 3 and out.cost == 10


def test_cascade_success_does_not_count_as_failure(monkeypatch):
    calls = scripted_merges(monkeypatch, [8, 9, 6, 6, 7, 1])
    pool = ElitePool(2)
    pool.try_add(SteinerTree(frozenset({99}), 5), random.Random(0))
    out = cascaded_combine(two_gadgets(), SteinerTree(frozenset({0}), 10), pool, 3, random.Random(0))
    # two successes (8, 6) plus three failures
    assert len(calls) == 5 and out.cost == 6


# -- run_ms and variants -----------------------------------------------------

def test_single_iteration_equals_generate_solution():
    inst = random_instance(random.Random(3), n_min=15, n_max=15)
    res = run_ms(inst, MsConfig(1, seed=42))
    ref = generate_solution(inst, stream(42, "ms", 0))
    assert res.tree.edges == ref.edges and res.stats["merges"] == 0


def test_pool_capacity_follows_iterations():
    inst = random_instance(random.Random(8), n_min=10, n_max=10)
    assert run_ms(inst, MsConfig(32, seed=1)).stats["pool_capacity"] == math.ceil(math.sqrt(16))


@pytest.mark.parametrize("variant", [MS, MS2, MSK])
def test_fixed_seed_is_reproducible(variant):
    inst = random_instance(random.Random(11), n_min=25, n_max=25, t_max=8)
    a = run(inst, MsConfig(16, variant=variant, seed=5))
    b = run(inst, MsConfig(16, variant=variant, seed=5))
    assert a.tree.edges == b.tree.edges and a.stats == b.stats
    assert tree_edges_valid(inst, a.tree.edges)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 12))
def test_best_so_far_is_nonincreasing(seed, iterations):
    inst = random_instance(random.Random(seed), n_min=6, n_max=20, t_max=6)
    res = run_ms(inst, MsConfig(iterations, seed=seed))
    trace = res.stats["trace"]
    assert len(trace) == iterations
    assert all(b <= a for a, b in zip(trace, trace[1:]))
    assert res.tree.cost <= trace[-1]
    assert validate(inst, res.tree) == res.tree.cost


@pytest.mark.parametrize("seed", range(12))
def test_merges_per_iteration_bounded_by_phi_plus_successes(monkeypatch, seed):
    real_merge, real_combine = ms.randomized_merge, ms.cascaded_combine
    log = []

    def merge(instance, sa, sb, rng, extra=(), stats=None):
        out = real_merge(instance, sa, sb, rng, extra, stats)
        log[-1][0] += 1
        log[-1][1] += out.cost < sa.cost
        return out

    def combine(instance, s0, pool, phi, *args, **kw):
        log.append([0, 0, phi])
        return real_combine(instance, s0, pool, phi, *args, **kw)

    monkeypatch.setattr(ms, "randomized_merge", merge)
    monkeypatch.setattr(ms, "cascaded_combine", combine)
    inst = random_instance(random.Random(seed), n_min=8, n_max=20)
    run_ms(inst, MsConfig(8, phi=1 + seed % 4, seed=seed))
    assert len(log) == 8
    for calls, successes, phi in log:
        assert calls <= phi + successes


@pytest.mark.parametrize("M", [8, 20, 64])
def test_ms2_runs_exactly_m_iterations(M):
    inst = random_instance(random.Random(M), n_min=12, n_max=12)
    res = run(inst, MsConfig(M, variant=MS2, seed=0))
    assert res.stats["iterations"] == M
    assert res.pool.capacity == math.ceil(math.sqrt(M / 4))
    assert len(res.stats["phase1_best"]) == 4


def test_ms2_falls_back_below_eight():
    inst = random_instance(random.Random(2), n_min=10, n_max=10)
    res = run(inst, MsConfig(5, variant=MS2, seed=3))
    assert res.stats["iterations"] == 5 and "phase1_best" not in res.stats


def test_msk_solves_the_wye():
    inst = subdivided_wye()
    res = run(inst, MsConfig(1, variant=MSK, seed=0))
    assert res.tree.cost == brute_force_optimum(inst) == 6


def test_ms_matches_optimum_on_most_small_instances():
    suite = tiny_suite()
    hits = sum(run_ms(inst, MsConfig(16, seed=i)).tree.cost == brute_force_optimum(inst)
               for i, inst in enumerate(suite))
    assert hits >= 90


# -- timed mode --------------------------------------------------------------

def test_planned_iterations_formula():
    assert planned_iterations(100.0, 1.0) == 40
    assert planned_iterations(1e9, 1e-6) == ms.TIMED_MAX_ITERATIONS


@pytest.mark.parametrize("budget", [1e-9, 0.3])
def test_timed_emits_strictly_decreasing_valid_incumbents(budget):
    inst = random_instance(random.Random(21), n_min=40, n_max=40, t_max=10)
    seen = []

    def sink(tree):
        assert tree_edges_valid(inst, tree.edges)
        seen.append(tree.cost)

    stats = run_timed(inst, budget, sink, seed=1)
    assert len(seen) >= 1
    assert all(b < a for a, b in zip(seen, seen[1:]))
    assert stats["incumbents"] == seen and stats["best_cost"] == seen[-1]


def test_timed_rejects_nonpositive_budget():
    with pytest.raises(ValueError):
        run_timed(two_gadgets(), 0, lambda t: None)


def test_ms2_no_worse_than_ms_on_most_paired_runs():
    wins = 0
    for i in range(20):
        rng = random.Random(f"paired/{i}")
        inst = random_instance(rng, n_min=40, n_max=40, t_max=12, density=2.5, cost_range=(1, 100))
        inst = inst.with_terminals(rng.sample(range(inst.n), 12))
        two = run(inst, MsConfig(64, variant=MS2, seed=i)).tree.cost
        one = run(inst, MsConfig(64, variant=MS, seed=i)).tree.cost
        wins += two <= one
    assert wins >= 10
