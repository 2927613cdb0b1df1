from __future__ import annotations

import math
import random
from collections import Counter

import pytest

from oracles import (brute_force_optimum, grid, hypercube, random_instance, shortest_path_cost,
                     tiny_suite, tree_edges_valid)
from stpsolver import Instance, SteinerTree
from stpsolver import bnb
from stpsolver.bnb import (SCATTER, Limits, fixable_edges, scatter_score, scatter_scores,
                           select_branch_vertex, solve)
from stpsolver.core.graph import InfeasibleError
from stpsolver.dualascent import dual_ascent, init
from stpsolver.incumbent import SharedIncumbent


def without_edges(inst, dead):
    dead = set(dead)
    return Instance(inst.n, [t for e, t in enumerate(inst.edges()) if e not in dead], inst.terminals)


# -- solve -------------------------------------------------------------------

def test_single_terminal():
    res = solve(Instance(2, [(0, 1, 3)], [0]))
    assert res.proved_optimal and res.best_cost == 0 and len(res.best_tree) == 0


def test_infeasible_raises():
    with pytest.raises(InfeasibleError):
        solve(Instance(4, [(0, 1, 1), (2, 3, 1)], [0, 3]))


@pytest.mark.parametrize("seed", range(10))
def test_two_terminals_solved_at_the_root(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, n_min=5, n_max=25)
    a, b = rng.sample(range(inst.n), 2)
    inst = inst.with_terminals([a, b])
    res = solve(inst, rng=random.Random(seed))
    assert res.proved_optimal and res.nodes_visited == 1
    assert res.best_cost == shortest_path_cost(inst, a, b)


@pytest.mark.parametrize("strategy", [bnb.DEFAULT, SCATTER])
def test_exact_on_small_suite(strategy):
    for i, inst in enumerate(tiny_suite(40, seed=77)):
        res = solve(inst, strategy=strategy, rng=random.Random(i))
        assert res.proved_optimal
        assert res.best_cost == brute_force_optimum(inst)
        assert tree_edges_valid(inst, res.best_tree.edges)


def test_exact_on_instances_that_need_branching():
    n, edges = hypercube(4)
    inst = Instance(n, edges, [v for v in range(n) if bin(v).count("1") % 2 == 0])
    res = solve(inst, rng=random.Random(1))
    assert res.proved_optimal and res.best_cost == brute_force_optimum(inst)
    n, edges = grid(4, 4, random.Random(3))
    inst = Instance(n, edges, [0, 3, 5, 10, 12, 15])
    res = solve(inst, rng=random.Random(2))
    assert res.proved_optimal and res.best_cost == brute_force_optimum(inst)


def test_every_node_bound_is_below_node_optimum(monkeypatch):
    real = bnb.dual_ascent
    checked = []

    def audited(instance, root=None, *a, **kw):
        state = real(instance, root, *a, **kw)
        checked.append(1)
        assert state.lower_bound <= brute_force_optimum(instance)
        return state

    monkeypatch.setattr(bnb, "dual_ascent", audited)
    for i, inst in enumerate(tiny_suite(15, seed=5)):
        solve(inst, rng=random.Random(i))
    assert checked


def test_one_side_is_visited_before_zero_side():
    n, edges = hypercube(4)
    inst = Instance(n, edges, [v for v in range(n) if bin(v).count("1") % 2 == 0])
    res = solve(inst, rng=random.Random(0), log_visits=True)
    assert any(side == 0 for _, _, side in res.visits)
    seen_one = set()
    for depth, v, side in res.visits:
        if side == 1:
            seen_one.add((depth, v))
        else:
            assert (depth, v) in seen_one


def test_node_cap_reports_an_unproved_valid_bound():
    n, edges = hypercube(5)
    inst = Instance(n, edges, [v for v in range(n) if bin(v).count("1") % 2 == 0])
    res = solve(inst, limits=Limits(node_cap=3), rng=random.Random(0))
    assert not res.proved_optimal and res.stop_reason == "node-cap"
    assert res.nodes_visited == 3
    assert res.bound_at_stop <= res.best_cost
    assert tree_edges_valid(inst, res.best_tree.edges)


def test_depth_cap_and_external_stop():
    n, edges = hypercube(5)
    inst = Instance(n, edges, [v for v in range(n) if bin(v).count("1") % 2 == 0])
    res = solve(inst, limits=Limits(depth_cap=1), rng=random.Random(0))
    assert not res.proved_optimal and res.stop_reason == "depth-cap"
    res = solve(inst, limits=Limits(should_stop=lambda: True), rng=random.Random(0))
    assert not res.proved_optimal and res.stop_reason == "stopped"


def test_ub_hint_and_shared_incumbent():
    inst = tiny_suite(1, seed=9)[0]
    opt = brute_force_optimum(inst)
    inc = SharedIncumbent()
    res = solve(inst, ub_hint=opt + 1, incumbent=inc, rng=random.Random(0))
    assert res.proved_optimal and res.best_cost == opt == inc.cost


# -- edge fixing --------------------------------------------------------------

def test_nothing_fixed_without_incumbent():
    inst = tiny_suite(1)[0]
    assert fixable_edges(inst, dual_ascent(inst), math.inf) == []


@pytest.mark.parametrize("seed", range(60))
def test_fixing_keeps_every_cheaper_solution(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, n_min=5, n_max=11, t_max=5)
    if len(inst.terminals) < 2:
        inst = inst.with_terminals(rng.sample(range(inst.n), 2))
    opt = brute_force_optimum(inst)
    dual = dual_ascent(inst, rng.choice(sorted(inst.terminals)))
    for incumbent in (opt + 1, opt + rng.randint(1, 20)):
        reduced = without_edges(inst, fixable_edges(inst, dual, incumbent))
        assert brute_force_optimum(reduced) == opt


def test_unit_gap_fixes_exactly_the_positive_extended_costs():
    inst = Instance(3, [(0, 1, 2), (1, 2, 3), (0, 2, 9)], [0, 2])
    dual = dual_ascent(inst, 0)
    assert dual.lower_bound == 5
    fixed = fixable_edges(inst, dual, dual.lower_bound + 1)
    assert fixed == [2]
    assert brute_force_optimum(without_edges(inst, fixed)) == 5
    assert len(fixable_edges(inst, dual, dual.lower_bound)) == inst.m


# -- branching vertex ---------------------------------------------------------

def tree_from(inst, pairs):
    return SteinerTree.from_edges(inst, [inst.edge_id(u, v) for u, v in pairs])


def test_unique_max_degree_vertex_is_chosen():
    edges = [(4, 0, 1), (4, 1, 1), (4, 2, 1), (2, 5, 1), (5, 3, 1)]
    inst = Instance(6, edges, [0, 1, 3])
    tree = tree_from(inst, [(4, 0), (4, 1), (4, 2), (2, 5), (5, 3)])
    dual = dual_ascent(inst, 0)
    for s in range(20):
        assert select_branch_vertex(inst, tree, dual, [2, 4, 5], random.Random(s)) == 4


def test_tie_break_on_saturation_and_degree():
    # 1 and 2 both have tree degree 2; 2 has an extra incident edge
    edges = [(0, 1, 1), (1, 3, 1), (3, 2, 1), (2, 4, 1), (2, 5, 7)]
    inst = Instance(6, edges, [0, 3, 4])
    tree = tree_from(inst, [(0, 1), (1, 3), (3, 2), (2, 4)])
    dual = init(inst, 0)
    assert select_branch_vertex(inst, tree, dual, [1, 2, 5], random.Random(0)) == 2


def test_full_ties_are_broken_uniformly():
    inst = Instance(5, [(0, k, 1) for k in (1, 2, 3)] + [(4, 0, 1)], [4])
    dual = init(inst, 4)
    draws = 30000
    freq = Counter(select_branch_vertex(inst, None, dual, [1, 2, 3], random.Random(s))
                   for s in range(draws))
    sigma = math.sqrt(draws * (1 / 3) * (2 / 3))
    assert set(freq) == {1, 2, 3}
    assert all(abs(c - draws / 3) <= 4 * sigma for c in freq.values())


def test_no_free_vertex_gives_none():
    inst = Instance(2, [(0, 1, 1)], [0, 1])
    assert select_branch_vertex(inst, None, init(inst, 0), [], random.Random(0)) is None


# -- scatter -----------------------------------------------------------------

@pytest.mark.parametrize("x", [0.0, 1.0, 7.5, 1234.0])
def test_scatter_score_identity(x):
    assert scatter_score(x, x) == pytest.approx(x)


def test_scatter_score_weighting():
    assert scatter_score(16, 1) == pytest.approx(8)


def test_scatter_scores_skip_unsampled_and_clamp_size():
    n, edges = hypercube(3)
    inst = Instance(n, edges, [0, 7])
    cands = [1, 2, 3, 4, 5, 6]
    rng = random.Random(0)
    scores = scatter_scores(inst, cands, 1, probes=2, size=2, rng=rng, cap=100)
    sampled = set(scores)
    assert 1 <= len(sampled) <= 4 and sampled <= set(cands)
    full = scatter_scores(inst, cands, 0, probes=50, size=20, rng=rng, cap=100)
    assert set(full) == set(cands)
    assert all(v == 100 for v in full.values())   # deleting every vertex disconnects 0 and 7
