"""Operator-valued moments and cumulants over the crossed product.

The conditional expectation ``E_M`` onto the coefficient algebra drives
everything here. For a noncrossing partition ``pi`` the partition-dependent
moment nests ``E_M`` along the blocks: an inner block is evaluated first and
its value (an element of ``M``) is inserted into the product of the block
that encloses it, e.g. ``E_pi(x1, x2, x3, x4) = E(x1 E(x2 x3) x4)`` for
``pi = {(1,4),(2,3)}``. Values of outermost blocks are multiplied left to
right. Cumulants are the Möbius inversion of these moments over NC(n).
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .coeffalgebra import CoeffMatrix, is_negligible, sample_matrix
from .crossedalg import (
    CrossedElement,
    CrossedProduct,
    center,
    cond_expect,
    is_centered,
    word_trace,
    x_mul,
)
from .errors import DomainError
from .groupwords import GroupWord, make_rng, multiply, sample_word
from .nclattice import NCPartition, enumerate_nc, mobius_to_top, nesting_forest

MAX_CUMULANT_ORDER = 6
THREADS_ENV = "CROSSFREE_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class MonomialElement:
    """A single term ``m u_g``; ``coefficient`` may be the zero matrix."""

    coefficient: CoeffMatrix
    word: GroupWord

    def to_element(self, algebra: CrossedProduct) -> CrossedElement:
        return algebra.monomial(self.coefficient, self.word)


def _as_elements(algebra: CrossedProduct | None, xs) -> list[CrossedElement]:
    out = []
    for x in xs:
        if isinstance(x, MonomialElement):
            if algebra is None:
                raise DomainError("monomial arguments need an algebra")
            x = x.to_element(algebra)
        out.append(x)
    return out


def _check_args(xs: Sequence[CrossedElement]) -> CrossedProduct:
    if not xs:
        raise DomainError("at least one argument is required")
    alg = xs[0].algebra
    for x in xs:
        if not isinstance(x, CrossedElement):
            raise DomainError(f"expected CrossedElement arguments, got {type(x).__name__}")
        if x.algebra != alg:
            raise DomainError("arguments belong to different crossed products")
    return alg


def _product(alg: CrossedProduct, xs: Sequence[CrossedElement]) -> CrossedElement:
    out = xs[0]
    for x in xs[1:]:
        out = x_mul(out, x)
    return out


BlockFn = Callable[[list[CrossedElement]], CoeffMatrix]


def _nested(
    xs: Sequence[CrossedElement],
    pi: NCPartition,
    block_fn: BlockFn,
    memo: dict | None = None,
) -> CoeffMatrix:
    """Evaluate ``block_fn`` along the nesting forest of ``pi``.

    A child block's value is right-multiplied onto the element of its parent
    that immediately precedes it; root values are multiplied in order of
    their minima.
    """
    alg = xs[0].algebra
    forest = nesting_forest(pi)
    blocks = forest.blocks
    zero = alg.zero_m
    memo = {} if memo is None else memo

    def value(k: int) -> CoeffMatrix:
        block = blocks[k]
        key = (block, tuple(b for b in blocks if b[0] > block[0] and b[-1] < block[-1]))
        hit = memo.get(key)
        if hit is not None:
            return hit
        args = []
        for j, pos in enumerate(block):
            a = xs[pos - 1]
            for c in forest.children[k]:
                if forest.gap[c] == j + 1:
                    v = value(c)
                    if v.is_zero():
                        memo[key] = zero
                        return zero
                    a = x_mul(a, alg.embed_m(v))
            args.append(a)
        out = block_fn(args)
        memo[key] = out
        return out

    result = None
    for r in forest.roots:
        v = value(r)
        if v.is_zero():
            return zero
        result = v if result is None else result * v
    return result


def _moment_block(alg: CrossedProduct) -> BlockFn:
    return lambda args: cond_expect(_product(alg, args))


def partitioned_moment(xs: Sequence[CrossedElement], pi: NCPartition) -> CoeffMatrix:
    """The partition-dependent moment ``E_{M,pi}(x_1, ..., x_n)``; ``E_M(x_1...x_n)`` for ``1_n``."""
    xs = list(xs)
    alg = _check_args(xs)
    if len(xs) != pi.n:
        raise DomainError(f"{len(xs)} arguments for a partition of {pi.n}")
    return _nested(xs, pi, _moment_block(alg))


def trace_partitioned(ws: Sequence[GroupWord], pi: NCPartition) -> int:
    """``tr_pi(u_w1, ..., u_wn)``: product over blocks of the trace of the block word."""
    if len(ws) != pi.n:
        raise DomainError(f"{len(ws)} words for a partition of {pi.n}")
    if not ws:
        return 1
    spec = ws[0].spec
    for block in pi.blocks:
        w = spec.identity()
        for pos in block:
            w = multiply(w, ws[pos - 1])
        if not word_trace(w):
            return 0
    return 1


def _order_check(n: int) -> None:
    if n < 1 or n > MAX_CUMULANT_ORDER:
        raise DomainError(f"cumulant order must lie in 1..{MAX_CUMULANT_ORDER}, got {n}")


def _mobius_sum(
    alg: CrossedProduct,
    n: int,
    term: Callable[[NCPartition, dict], CoeffMatrix],
    threads: int | None,
) -> CoeffMatrix:
    weights = [(p, mu) for p, mu in mobius_to_top(n) if mu]
    threads = default_threads() if threads is None else max(1, threads)

    def run(chunk):
        memo: dict = {}
        return [term(p, memo) for p, _ in chunk]

    if threads > 1 and len(weights) > 1:
        size = -(-len(weights) // threads)
        chunks = [weights[i:i + size] for i in range(0, len(weights), size)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = [v for part in pool.map(run, chunks) for v in part]
    else:
        values = run(weights)
    # fixed enumeration order keeps float sums reproducible
    acc = alg.zero_m
    for (_, mu), v in zip(weights, values):
        if not v.is_zero():
            acc = acc + v.scale(mu)
    return acc


def cumulant(xs: Sequence[CrossedElement], threads: int | None = None) -> CoeffMatrix:
    """Amalgamated cumulant ``k_n(x_1, ..., x_n) = sum_pi E_pi(x) mu(pi, 1_n)``.

    General elements are handled directly; every partitioned moment is
    multilinear, so this agrees with expanding each argument into monomials.
    """
    xs = _as_elements(None, xs)
    alg = _check_args(xs)
    n = len(xs)
    _order_check(n)
    block = _moment_block(alg)
    return _mobius_sum(alg, n, lambda p, memo: _nested(xs, p, block, memo), threads)


def scalar_cumulant(ws: Sequence[GroupWord]) -> int:
    """``k_n^tr(u_w1, ..., u_wn)`` in the group algebra with its canonical trace."""
    n = len(ws)
    _order_check(n)
    return sum(mu * trace_partitioned(ws, p) for p, mu in mobius_to_top(n) if mu)


def twisted_product(algebra: CrossedProduct, ms: Sequence[MonomialElement]) -> CoeffMatrix:
    """``m_1 alpha_{g_1}(m_2) alpha_{g_1 g_2}(m_3) ... alpha_{g_1...g_{n-1}}(m_n)``."""
    out = algebra.one_m
    prefix = algebra.e
    for mono in ms:
        out = out * algebra.act(prefix, mono.coefficient)
        prefix = multiply(prefix, mono.word)
    return out


def as_monomials(xs: Sequence[CrossedElement]) -> list[MonomialElement]:
    """View single-term elements as :class:`MonomialElement` values."""
    out = []
    for x in xs:
        if isinstance(x, MonomialElement):
            out.append(x)
            continue
        if not x.is_monomial():
            raise DomainError(f"{x} has more than one term")
        if x.is_zero():
            out.append(MonomialElement(x.algebra.zero_m, x.algebra.e))
        else:
            (w, m), = x.terms.items()
            out.append(MonomialElement(m, w))
    return out


def cumulant_factorized(algebra: CrossedProduct, ms: Sequence[MonomialElement]) -> CoeffMatrix:
    """Cumulant of monomials as twisted coefficient product times ``k_n^tr`` of the words."""
    ms = as_monomials(ms)
    _order_check(len(ms))
    k = scalar_cumulant([m.word for m in ms])
    if not k:
        return algebra.zero_m
    return twisted_product(algebra, ms).scale(k)


def moments_from_cumulants(xs: Sequence[CrossedElement], threads: int | None = None) -> CoeffMatrix:
    """``sum_pi k_pi(x_1, ..., x_n)`` with cumulants nested like partitioned moments.

    Reproduces ``E_M(x_1 ... x_n)``.
    """
    xs = _as_elements(None, xs)
    alg = _check_args(xs)
    n = len(xs)
    _order_check(n)

    def block(args):
        return cumulant(args, threads=1)

    acc = alg.zero_m
    memo: dict = {}
    for p in enumerate_nc(n):
        acc = acc + _nested(xs, p, block, memo)
    return acc


# sampling


def sample_monomial(
    algebra: CrossedProduct,
    rng: np.random.Generator,
    factors: Sequence[int] | None = None,
    max_len: int = 3,
) -> CrossedElement:
    m = sample_matrix(algebra.shape, algebra.d, algebra.mode, rng)
    return algebra.monomial(m, sample_word(algebra.group, max_len, rng, factors))


def sample_element(
    algebra: CrossedProduct,
    rng: np.random.Generator,
    factors: Sequence[int] | None = None,
    max_terms: int = 3,
    max_len: int = 3,
) -> CrossedElement:
    """A monomial half of the time, otherwise a sum of up to ``max_terms`` monomials."""
    count = 1 if rng.integers(0, 2) else int(rng.integers(2, max_terms + 1))
    out = algebra.zero()
    for _ in range(count):
        out = out + sample_monomial(algebra, rng, factors, max_len)
    return out


def sample_centered(
    algebra: CrossedProduct,
    rng: np.random.Generator,
    factors: Sequence[int],
    max_terms: int = 3,
    max_len: int = 3,
) -> CrossedElement:
    """A nonzero element of the family over ``factors`` with ``E_M = 0``."""
    if not factors:
        raise DomainError("the coefficient algebra has no nonzero centered elements")
    while True:
        x = center(sample_element(algebra, rng, factors, max_terms, max(1, max_len)))
        if not x.is_zero():
            return x


# freeness


@dataclass
class FreenessReport:
    """Outcome of a mixed-cumulant scan; the verdict holds iff nothing was flagged."""

    families: list[list[int]]
    max_order: int
    trials: int
    seed: int
    checked: dict[int, int] = field(default_factory=dict)
    violations: list[dict] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "families": self.families,
            "max_order": self.max_order,
            "trials": self.trials,
            "seed": self.seed,
            "checked": {str(k): v for k, v in self.checked.items()},
            "violations": self.violations,
            "verdict": self.verdict,
        }


def _validate_families(algebra: CrossedProduct, families: Sequence[Sequence[int]]) -> list[list[int]]:
    if len(families) < 2:
        raise DomainError("at least two families are needed")
    out = []
    seen: set[int] = set()
    for fam in families:
        fam = sorted(set(int(i) for i in fam))
        for i in fam:
            if not 0 <= i < algebra.group.rank:
                raise DomainError(f"factor index {i} out of range")
            if i in seen:
                raise DomainError(
                    f"factor g{i} appears in two families; the subalgebras are not distinct over M"
                )
        seen.update(fam)
        out.append(fam)
    return out


def check_freeness_families(
    algebra: CrossedProduct,
    families: Sequence[Sequence[int]],
    max_order: int = 4,
    trials: int = 100,
    seed: int = 0,
    tol: float | None = None,
    max_terms: int = 3,
    max_len: int = 3,
    min_order: int = 2,
    threads: int | None = None,
) -> FreenessReport:
    """Scan mixed cumulants of the subalgebras ``M x G_S`` for each factor subset ``S``.

    An empty subset stands for ``M`` itself. For every order, ``trials``
    label patterns cycle through all non-constant assignments of arguments to
    families; each argument is a random monomial or short sum from its
    family. A cumulant is flagged when it is not exactly zero (exact mode) or
    has an entry above ``tol`` (float mode).
    """
    fams = _validate_families(algebra, families)
    if not 2 <= min_order <= max_order <= MAX_CUMULANT_ORDER:
        raise DomainError(f"orders must satisfy 2 <= min <= max <= {MAX_CUMULANT_ORDER}")
    tol = algebra.tol if tol is None else tol
    report = FreenessReport(fams, max_order, trials, seed)
    streams = make_rng(seed).spawn(max_order + 1)
    for n in range(min_order, max_order + 1):
        rng = streams[n]
        patterns = [p for p in itertools.product(range(len(fams)), repeat=n) if len(set(p)) > 1]
        report.checked[n] = 0
        for t in range(trials):
            pattern = patterns[t % len(patterns)]
            xs = [sample_element(algebra, rng, fams[f], max_terms, max_len) for f in pattern]
            k = cumulant(xs, threads=threads)
            report.checked[n] += 1
            if not is_negligible(k, tol):
                report.violations.append({
                    "order": n,
                    "pattern": list(pattern),
                    "arguments": [x.to_json() for x in xs],
                    "cumulant": k.to_json(),
                })
    return report


def check_freeness(
    algebra: CrossedProduct,
    family_a: Sequence[int],
    family_b: Sequence[int],
    max_order: int = 4,
    trials: int = 100,
    seed: int = 0,
    **kwargs,
) -> FreenessReport:
    """Mixed-cumulant scan for ``M x G_A`` against ``M x G_B``.

    Raises :class:`DomainError` when the factor subsets overlap.
    """
    return check_freeness_families(
        algebra, [family_a, family_b], max_order=max_order, trials=trials, seed=seed, **kwargs
    )


def alternating_centered_oracle(
    xs: Sequence[CrossedElement],
    family_a: Sequence[int],
    family_b: Sequence[int],
    tol: float | None = None,
) -> CoeffMatrix:
    """``E_M(x_1 ... x_n)`` for centered elements alternating between two families.

    Freeness over ``M`` forces this to vanish. This path multiplies the
    elements directly and never touches partitions or Möbius values.
    """
    xs = list(xs)
    alg = _check_args(xs)
    sa, sb = frozenset(family_a), frozenset(family_b)
    if sa & sb:
        raise DomainError("families overlap")
    prev = None
    for x in xs:
        if not is_centered(x, tol):
            raise DomainError(f"{x} is not centered")
        if x.is_zero():
            prev = None
            continue
        used = x.factors()
        label = "a" if used <= sa else "b" if used <= sb else None
        if label is None:
            raise DomainError(f"{x} lies in neither family")
        if label == prev:
            raise DomainError("arguments do not alternate between the families")
        prev = label
    return cond_expect(_product(alg, xs))
