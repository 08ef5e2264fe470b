from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from crossfree.coeffalgebra import DIAG, EXACT, CoeffMatrix, sample_matrix
from crossfree.crossedalg import PERMUTATION, ActionSpec, CrossedProduct, center, cond_expect
from crossfree.errors import DomainError
from crossfree.freeprob import (
    MAX_CUMULANT_ORDER,
    MonomialElement,
    alternating_centered_oracle,
    as_monomials,
    check_freeness,
    check_freeness_families,
    cumulant,
    cumulant_factorized,
    moments_from_cumulants,
    partitioned_moment,
    sample_centered,
    sample_element,
    sample_monomial,
    scalar_cumulant,
    trace_partitioned,
    twisted_product,
)
from crossfree.groupwords import GroupSpec, make_rng, parse_word, sample_word
from crossfree.nclattice import enumerate_nc, one_partition, parse_partition, zero_partition

F2 = GroupSpec.free_group(2)
X = CrossedProduct(ActionSpec(F2, DIAG, 2, EXACT, PERMUTATION, [(1, 0), (0, 1)]))
seeds = st.integers(0, 2**32 - 1)


def u(text, alg=X):
    return alg.embed_u(parse_word(alg.group, text))


# independent oracle: interval-collapse evaluation of nested functionals


def _nc_partitions(n):
    """All noncrossing set partitions of 0..n-1 by brute force."""
    def parts(items):
        if not items:
            yield []
            return
        head, rest = items[0], items[1:]
        for p in parts(rest):
            yield [[head], *p]
            for i in range(len(p)):
                yield p[:i] + [[head, *p[i]]] + p[i + 1:]

    def crossing(p):
        return any(
            a < c < b < d
            for s, t in itertools.permutations(p, 2)
            for a, b in itertools.combinations(sorted(s), 2)
            for c, d in itertools.combinations(sorted(t), 2)
        )

    return [sorted(map(sorted, p)) for p in parts(list(range(n))) if not crossing(p)]


def _collapse(xs, blocks, fn):
    """Evaluate a nested functional by repeatedly folding an interval block into a neighbour."""
    xs, blocks = list(xs), [list(b) for b in blocks]
    alg = xs[0].algebra
    while len(blocks) > 1:
        alive = sorted(i for b in blocks for i in b)
        for b in blocks:
            lo, hi = alive.index(b[0]), alive.index(b[-1])
            if hi - lo + 1 == len(b):
                break
        v = alg.embed_m(fn([xs[i] for i in b]))
        if lo > 0:
            xs[alive[lo - 1]] = xs[alive[lo - 1]] * v
        else:
            xs[alive[hi + 1]] = v * xs[alive[hi + 1]]
        blocks.remove(b)
    return fn([xs[i] for i in blocks[0]])


def oracle_moment(xs):
    out = xs[0]
    for x in xs[1:]:
        out = out * x
    return cond_expect(out)


def oracle_cumulant(xs):
    """``k_n = E(x_1...x_n) - sum_{pi < 1_n} k_pi``."""
    n = len(xs)
    acc = oracle_moment(xs)
    for p in _nc_partitions(n):
        if len(p) > 1:
            acc = acc - _collapse(xs, p, oracle_cumulant)
    return acc


def _as_nc(p):
    from crossfree.nclattice import NCPartition
    return NCPartition(sum(map(len, p)), [tuple(i + 1 for i in b) for b in p])


# examples


def test_partitioned_moment_examples():
    rng = make_rng(1)
    xs = [sample_element(X, rng) for _ in range(4)]
    assert partitioned_moment(xs, one_partition(4)) == oracle_moment(xs)
    inner = X.embed_m(cond_expect(xs[1] * xs[2]))
    assert partitioned_moment(xs, parse_partition("{(1,4),(2,3)}")) == cond_expect(xs[0] * inner * xs[3])
    ys = [u("g0"), u("g1"), u("g1^-1"), u("g0^-1"), u("e")]
    pi = parse_partition("{(1,4),(2,3),(5)}")
    assert partitioned_moment(ys, pi) == X.one_m
    assert trace_partitioned([y.support()[0] for y in ys], pi) == 1
    with pytest.raises(DomainError):
        partitioned_moment(xs, one_partition(3))


def test_trace_partitioned_examples():
    e, g = F2.identity(), parse_word(F2, "g0")
    assert trace_partitioned([e] * 4, zero_partition(4)) == 1
    assert trace_partitioned([e, g, e], zero_partition(3)) == 0
    with pytest.raises(DomainError):
        trace_partitioned([e], zero_partition(2))


def test_cumulant_examples():
    rng = make_rng(2)
    x = sample_element(X, rng)
    assert cumulant([x]) == cond_expect(x)
    assert cumulant([u("g0"), u("g0^-1")]) == X.one_m
    assert cumulant([u("g0"), u("g1")]) == X.zero_m
    with pytest.raises(DomainError):
        cumulant([x] * (MAX_CUMULANT_ORDER + 1))
    with pytest.raises(DomainError):
        cumulant([])


def test_cumulant_factorized_examples():
    g0, g0i = parse_word(F2, "g0"), parse_word(F2, "g0^-1")
    ms = [MonomialElement(CoeffMatrix.diag([1, 2]), g0), MonomialElement(CoeffMatrix.diag([3, 4]), g0i)]
    assert twisted_product(X, ms) == CoeffMatrix.diag([4, 6])
    assert cumulant_factorized(X, ms) == CoeffMatrix.diag([4, 6])
    assert cumulant([m.to_element(X) for m in ms]) == CoeffMatrix.diag([4, 6])
    words = [parse_word(F2, t) for t in ("g0", "g1", "g1^-1", "g0^-1")]
    ones = [MonomialElement(X.one_m, w) for w in words]
    assert cumulant_factorized(X, ones) == X.one_m.scale(scalar_cumulant(words))


def test_moments_from_cumulants_small_orders():
    rng = make_rng(3)
    x1, x2 = sample_element(X, rng), sample_element(X, rng)
    assert moments_from_cumulants([x1]) == cond_expect(x1)
    k1, k1b = cumulant([x1]), cumulant([x2])
    assert cumulant([x1, x2]) + k1 * k1b == cond_expect(x1 * x2)
    assert moments_from_cumulants([x1, x2]) == cond_expect(x1 * x2)


# properties against the oracle


@pytest.mark.parametrize("fixture", ["f2_diag2", "z2z3_diag6", "f2_full2_float", "fn_split"])
@settings(max_examples=15, deadline=None)
@given(seed=seeds, n=st.integers(1, 4))
def test_cumulant_matches_recursive_oracle(scenarios, fixture, seed, n):
    alg = scenarios[fixture].algebra
    rng = make_rng(seed)
    xs = [sample_element(alg, rng, max_terms=2) for _ in range(n)]
    assert cumulant(xs).close(oracle_cumulant(xs), 1e-9)


@settings(max_examples=20, deadline=None)
@given(seed=seeds, n=st.integers(1, 5))
def test_partitioned_moment_matches_interval_collapse(seed, n):
    rng = make_rng(seed)
    xs = [sample_element(X, rng, max_terms=2) for _ in range(n)]
    for p in _nc_partitions(n):
        assert partitioned_moment(xs, _as_nc(p)) == _collapse(xs, p, oracle_moment)


@pytest.mark.parametrize("fixture", ["f2_diag2", "z2z3_diag6", "f2_full2_float"])
@settings(max_examples=10, deadline=None)
@given(seed=seeds, n=st.integers(1, 5))
def test_monomial_identities(scenarios, fixture, seed, n):
    alg = scenarios[fixture].algebra
    rng = make_rng(seed)
    xs = [sample_monomial(alg, rng) for _ in range(n)]
    ms = as_monomials(xs)
    prefactor = twisted_product(alg, ms)
    for p in enumerate_nc(n):
        lhs = partitioned_moment(xs, p)
        assert lhs.close(prefactor.scale(trace_partitioned([m.word for m in ms], p)), 1e-9)
    assert cumulant(xs).close(cumulant_factorized(alg, ms), 1e-9)


@settings(max_examples=20, deadline=None)
@given(seed=seeds, n=st.integers(1, 4))
def test_round_trip(seed, n):
    rng = make_rng(seed)
    xs = [sample_element(X, rng) for _ in range(n)]
    assert moments_from_cumulants(xs) == oracle_moment(xs)


@settings(max_examples=20, deadline=None)
@given(seed=seeds, n=st.integers(2, 4), slot=st.integers(0, 3))
def test_multilinearity_and_bimodule_law(seed, n, slot):
    slot %= n
    rng = make_rng(seed)
    xs = [sample_element(X, rng) for _ in range(n)]
    y = sample_element(X, rng)
    m = sample_matrix(DIAG, 2, EXACT, rng)
    added = xs[:slot] + [xs[slot] + y] + xs[slot + 1:]
    replaced = xs[:slot] + [y] + xs[slot + 1:]
    assert cumulant(added) == cumulant(xs) + cumulant(replaced)
    mm = X.embed_m(m)
    assert cumulant([mm * xs[0]] + xs[1:]) == m * cumulant(xs)
    assert cumulant(xs[:-1] + [xs[-1] * mm]) == cumulant(xs) * m
    inner = xs[:1] + [xs[1] * mm] + xs[2:]
    shifted = xs[:2] + [mm * xs[2]] + xs[3:] if n > 2 else None
    if shifted is not None:
        assert cumulant(inner) == cumulant(shifted)


def test_unitary_moments_match_group_trace(scenarios):
    # E_M on pure unitaries is the group trace times 1_M
    for sc in scenarios.values():
        alg = sc.algebra
        rng = make_rng(6)
        for _ in range(20):
            ws = [sample_word(alg.group, 3, rng) for _ in range(4)]
            xs = [alg.embed_u(w) for w in ws]
            assert cumulant(xs) == alg.one_m.scale(scalar_cumulant(ws))


def test_threads_do_not_change_results():
    rng = make_rng(7)
    xs = [sample_element(X, rng) for _ in range(5)]
    assert cumulant(xs, threads=1) == cumulant(xs, threads=4) == cumulant(xs, threads=16)


# freeness


def test_check_freeness_examples():
    report = check_freeness(X, [0], [1], max_order=4, trials=30, seed=1)
    assert report.verdict and not report.violations
    assert report.checked == {2: 30, 3: 30, 4: 30}
    with pytest.raises(DomainError):
        check_freeness(X, [0], [0])
    with pytest.raises(DomainError):
        check_freeness(X, [0], [5])
    with pytest.raises(DomainError):
        check_freeness(X, [0], [1], max_order=MAX_CUMULANT_ORDER + 1)
    assert check_freeness(X, [], [], max_order=3, trials=10).verdict


def test_same_factor_is_not_free():
    assert cumulant([u("g0"), u("g0^-1")]) == X.one_m != X.zero_m
    alg = CrossedProduct(ActionSpec(GroupSpec.free_group(3), DIAG, 2, EXACT, PERMUTATION,
                                    [(1, 0), (0, 1), (1, 0)]))
    # a split that puts one factor in both families is refused
    with pytest.raises(DomainError):
        check_freeness_families(alg, [[0, 1], [1, 2]])


def test_report_json():
    data = check_freeness(X, [0], [1], max_order=2, trials=3, seed=4).to_json()
    assert data["verdict"] is True and data["checked"] == {"2": 3}
    assert data["families"] == [[0], [1]]


def test_base_algebra_is_free_from_everything():
    assert check_freeness_families(X, [[0, 1], []], max_order=3, trials=20, seed=0).verdict


def test_single_family_rejected():
    with pytest.raises(DomainError):
        check_freeness_families(X, [[0, 1]])


def test_oracle_cumulant_anchor():
    assert oracle_cumulant([u("g0"), u("g0^-1")]) == X.one_m
    assert oracle_cumulant([u("g0"), u("g0^-1"), u("g0"), u("g0^-1")]) == X.one_m.scale(-1)
    assert cumulant([u("g0"), u("g0^-1"), u("g0"), u("g0^-1")]) == X.one_m.scale(-1)


def test_oracle_examples():
    rng = make_rng(8)
    x = sample_centered(X, rng, [0])
    assert alternating_centered_oracle([x], [0], [1]) == X.zero_m
    assert alternating_centered_oracle([u("g0"), u("g1")], [0], [1]) == X.zero_m
    for _ in range(50):
        xs = [sample_centered(X, rng, [i % 2]) for i in range(4)]
        assert alternating_centered_oracle(xs, [0], [1]) == X.zero_m
    with pytest.raises(DomainError):
        alternating_centered_oracle([u("g0"), u("g0")], [0], [1])
    with pytest.raises(DomainError):
        alternating_centered_oracle([X.embed_m(X.one_m)], [0], [1])
    with pytest.raises(DomainError):
        alternating_centered_oracle([u("g0 g1")], [0], [1])


def test_oracle_detects_non_alternating_dependence():
    # the same computation within one factor does not vanish
    x = center(u("g0") + u("g0^-1"))
    assert cond_expect(x * x) == X.one_m.scale(2)


def test_checker_reports_nonvanishing_cumulants(monkeypatch):
    import crossfree.freeprob as fp

    monkeypatch.setattr(fp, "cumulant", lambda xs, threads=None: xs[0].algebra.one_m)
    report = check_freeness(X, [0], [1], max_order=3, trials=5, seed=0)
    assert not report.verdict
    assert len(report.violations) == 10
    assert report.violations[0]["cumulant"] == X.one_m.to_json()
