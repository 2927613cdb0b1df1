from __future__ import annotations

import math
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stpsolver import SteinerTree
from stpsolver.pool import AddOutcome, ElitePool, pool_capacity


def tree(edges, cost):
    return SteinerTree(frozenset(edges), cost)


def test_capacity_formula():
    assert pool_capacity(128) == 8
    assert pool_capacity(1) == 1
    assert pool_capacity(100) == math.ceil(math.sqrt(50))


def test_add_duplicate_reject():
    rng = random.Random(0)
    pool = ElitePool(2)
    assert pool.try_add(tree({1, 2}, 10), rng).outcome is AddOutcome.ADDED
    assert pool.try_add(tree({1, 2}, 10), rng).outcome is AddOutcome.DUPLICATE
    assert pool.try_add(tree({3}, 10), rng).outcome is AddOutcome.ADDED
    assert pool.try_add(tree({4}, 12), rng).outcome is AddOutcome.REJECTED
    assert pool.try_add(tree({5}, 10), rng).outcome is AddOutcome.REJECTED


def test_replacement_victim_is_no_better_than_newcomer():
    rng = random.Random(1)
    pool = ElitePool(3)
    for es, c in (({1}, 5), ({2}, 9), ({3}, 12)):
        pool.try_add(tree(es, c), rng)
    res = pool.try_add(tree({4}, 8), rng)
    assert res.outcome is AddOutcome.REPLACED
    assert res.victim.cost >= 8
    assert pool.best().cost == 5


def test_similar_members_are_evicted_more_often():
    counts = Counter()
    near, far = tree({1, 2, 3, 4}, 20), tree({10, 11, 12, 13}, 20)
    for s in range(2000):
        pool = ElitePool(2)
        rng = random.Random(s)
        pool.try_add(near, rng)
        pool.try_add(far, rng)
        counts[pool.try_add(tree({1, 2, 3, 5}, 15), rng).victim.edges] += 1
    # weights 1/(1+2) and 1/(1+8): near is evicted with probability 0.75
    share = counts[near.edges] / 2000
    assert abs(share - 0.75) < 3 * math.sqrt(0.75 * 0.25 / 2000)


def test_sample():
    rng = random.Random(2)
    pool = ElitePool(4)
    with pytest.raises(IndexError):
        pool.sample(rng)
    only = tree({1}, 3)
    pool.try_add(only, rng)
    assert pool.sample(rng) == only
    for k in range(2, 5):
        pool.try_add(tree({k}, 3), rng)
    draws = 10 ** 5
    freq = Counter(pool.sample(rng).edges for _ in range(draws))
    sigma = math.sqrt(draws * 0.25 * 0.75)
    assert all(abs(c - draws / 4) <= 3 * sigma for c in freq.values())


@settings(max_examples=150)
@given(st.integers(1, 6),
       st.lists(st.tuples(st.frozensets(st.integers(0, 8), max_size=5), st.integers(0, 30)), max_size=40),
       st.integers(0, 2 ** 32))
def test_pool_invariants(capacity, offers, seed):
    rng = random.Random(seed)
    pool = ElitePool(capacity)
    best_added = math.inf
    for edges, cost in offers:
        res = pool.try_add(SteinerTree(edges, cost), rng)
        if res.outcome in (AddOutcome.ADDED, AddOutcome.REPLACED):
            best_added = min(best_added, cost)
        if res.victim is not None:
            assert res.victim.cost >= cost
        assert len(pool) <= capacity
        sigs = [m.edges for m in pool]
        assert len(sigs) == len(set(sigs))
        if len(pool):
            assert pool.best().cost == best_added
