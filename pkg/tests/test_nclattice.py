from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from crossfree.errors import DomainError
from crossfree.nclattice import (
    NCPartition,
    catalan,
    enumerate_nc,
    is_inner,
    leq,
    mobius,
    mobius_to_top,
    nesting_forest,
    one_partition,
    parse_partition,
    zero_partition,
)


def catalan_by_recurrence(n: int) -> int:
    c = [1]
    for k in range(n):
        c.append(sum(c[i] * c[k - i] for i in range(k + 1)))
    return c[n]


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first], *part]
        for i in range(len(part)):
            yield part[:i] + [[first, *part[i]]] + part[i + 1:]


def crosses(blocks) -> bool:
    for b, c in itertools.permutations(blocks, 2):
        for a1, a2 in itertools.combinations(b, 2):
            for c1, c2 in itertools.combinations(c, 2):
                if a1 < c1 < a2 < c2:
                    return True
    return False


@pytest.mark.parametrize("n", range(1, 9))
def test_counts_match_catalan_recurrence(n):
    assert len(enumerate_nc(n)) == catalan_by_recurrence(n) == catalan(n)


@pytest.mark.parametrize("n", range(1, 7))
def test_enumeration_matches_brute_force(n):
    brute = {
        NCPartition(n, [tuple(sorted(b)) for b in p])
        for p in set_partitions(list(range(1, n + 1)))
        if not crosses(p)
    }
    assert set(enumerate_nc(n)) == brute


def test_enumeration_is_sorted_and_distinct():
    parts = enumerate_nc(6)
    assert len(set(parts)) == len(parts)
    keys = [p.blocks for p in parts]
    assert keys == sorted(keys)


def test_crossing_partition_rejected():
    with pytest.raises(DomainError):
        NCPartition(4, [(1, 3), (2, 4)])
    with pytest.raises(DomainError):
        NCPartition(3, [(1, 2)])


@pytest.mark.parametrize("n", [0, 11])
def test_enumeration_bounds(n):
    with pytest.raises(DomainError):
        enumerate_nc(n)


def test_parse_and_format_round_trip():
    pi = parse_partition("{(1,4),(2,3),(5)}")
    assert str(pi) == "{(1,4),(2,3),(5)}"
    assert NCPartition.from_json(pi.to_json()) == pi
    assert pi.block_of(3) == (2, 3)


def refines(pi, sigma) -> bool:
    return all(any(set(b) <= set(c) for c in sigma.blocks) for b in pi.blocks)


@pytest.mark.parametrize("n", range(1, 6))
def test_order_is_refinement(n):
    parts = enumerate_nc(n)
    for a in parts:
        assert leq(zero_partition(n), a) and leq(a, one_partition(n))
        for b in parts:
            assert leq(a, b) == refines(a, b)


@pytest.mark.parametrize("n,expected", list(zip(range(1, 9), [1, -1, 2, -5, 14, -42, 132, -429])))
def test_mobius_bottom_to_top(n, expected):
    assert mobius(zero_partition(n), one_partition(n)) == expected
    assert expected == (-1) ** (n - 1) * catalan(n - 1)


@pytest.mark.parametrize("n", range(1, 6))
def test_mobius_inverts_zeta(n):
    parts = enumerate_nc(n)
    for a in parts:
        for c in parts:
            if not leq(a, c):
                with pytest.raises(DomainError):
                    mobius(a, c)
                continue
            total = sum(mobius(a, b) for b in parts if leq(a, b) and leq(b, c))
            assert total == (1 if a == c else 0)


def test_mobius_is_multiplicative_on_interval_factorization():
    # [0_4, {(1,2),(3,4)}] is a product of two 2-chains.
    top = parse_partition("{(1,2),(3,4)}")
    assert mobius(zero_partition(4), top) == 1


def test_mobius_to_top_is_complete():
    rows = mobius_to_top(4)
    assert len(rows) == 14
    assert dict(rows)[zero_partition(4)] == -5


def test_nesting_forest_example():
    pi = parse_partition("{(1,6),(2,5),(3,4),(7)}")
    f = nesting_forest(pi)
    idx = {b: i for i, b in enumerate(f.blocks)}
    assert f.parent[idx[(2, 5)]] == idx[(1, 6)]
    assert f.parent[idx[(3, 4)]] == idx[(2, 5)]
    assert f.parent[idx[(1, 6)]] is None and f.parent[idx[(7,)]] is None
    assert [f.blocks[r] for r in f.roots] == [(1, 6), (7,)]
    assert [f.blocks[v] for v in f.leaves()] == [(3, 4), (7,)]
    assert is_inner((2, 5), (1, 6)) and not is_inner((7,), (1, 6))


partitions = st.integers(1, 7).flatmap(lambda n: st.sampled_from(enumerate_nc(n)))


@given(partitions)
def test_forest_parent_is_tightest_enclosure(pi):
    f = nesting_forest(pi)
    for i, b in enumerate(f.blocks):
        enclosing = [j for j, c in enumerate(f.blocks) if j != i and is_inner(b, c)]
        if not enclosing:
            assert f.parent[i] is None
        else:
            tight = min(enclosing, key=lambda j: f.blocks[j][-1] - f.blocks[j][0])
            assert f.parent[i] == tight


@given(partitions)
def test_labels_and_json_round_trip(pi):
    labels = pi.labels()
    assert sorted(set(labels)) == list(range(len(pi.blocks)))
    assert parse_partition(str(pi)) == pi


@settings(max_examples=50)
@given(st.randoms(use_true_random=False))
def test_random_interval_sums_vanish(rnd: random.Random):
    n = rnd.randint(1, 5)
    parts = enumerate_nc(n)
    a, c = sorted(rnd.sample(parts, 2) if len(parts) > 1 else parts * 2, key=lambda p: -len(p.blocks))
    if not leq(a, c):
        a = c
    interval = [b for b in parts if leq(a, b) and leq(b, c)]
    assert sum(mobius(a, b) for b in interval) == (1 if a == c else 0)
