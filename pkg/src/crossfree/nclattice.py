"""Noncrossing partitions of ``{1..n}``: enumeration, order, Möbius values, nesting.

Partitions are immutable values kept in a canonical form (blocks sorted by
their minimum), so equality and hashing are structural.

>>> len(enumerate_nc(4))
14
>>> mobius(zero_partition(4), one_partition(4))
-5
>>> str(parse_partition("{(2,3),(1,4),(5)}"))
'{(1,4),(2,3),(5)}'
"""
from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import DomainError

MAX_ENUM_N = 10
MAX_MOBIUS_N = 8

Block = tuple[int, ...]


def catalan(n: int) -> int:
    """Return the nth Catalan number."""
    return math.comb(2 * n, n) // (n + 1)


@dataclass(frozen=True)
class NCPartition:
    """A noncrossing partition of ``{1..n}``.

    Construction validates the blocks and stores them canonically, so
    ``NCPartition(3, [(3,), (1, 2)]) == NCPartition(3, [(1, 2), (3,)])``.
    """

    n: int
    blocks: tuple[Block, ...]

    def __init__(self, n: int, blocks: Iterable[Iterable[int]]):
        canon = tuple(sorted(tuple(sorted(int(x) for x in b)) for b in blocks))
        _validate(n, canon)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "blocks", canon)

    @classmethod
    def _trusted(cls, n: int, blocks: tuple[Block, ...]) -> NCPartition:
        obj = object.__new__(cls)
        object.__setattr__(obj, "n", n)
        object.__setattr__(obj, "blocks", blocks)
        return obj

    def __str__(self) -> str:
        return "{" + ",".join("(" + ",".join(map(str, b)) + ")" for b in self.blocks) + "}"

    def __repr__(self) -> str:
        return f"NCPartition({self})"

    def __len__(self) -> int:
        return len(self.blocks)

    def labels(self) -> tuple[int, ...]:
        """Block index of each element ``1..n`` (0-based positions)."""
        out = [0] * self.n
        for k, block in enumerate(self.blocks):
            for x in block:
                out[x - 1] = k
        return tuple(out)

    def block_of(self, x: int) -> Block:
        for block in self.blocks:
            if x in block:
                return block
        raise DomainError(f"{x} is not in 1..{self.n}")

    def to_json(self) -> list[list[int]]:
        return [list(b) for b in self.blocks]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[int]], n: int | None = None) -> NCPartition:
        blocks = [tuple(int(x) for x in b) for b in data]
        if n is None:
            n = max((max(b) for b in blocks if b), default=0)
        return cls(n, blocks)


def _validate(n: int, blocks: tuple[Block, ...]) -> None:
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"ground set size must be a positive integer, got {n!r}")
    seen: list[int] = []
    for b in blocks:
        if not b:
            raise DomainError("empty block")
        seen.extend(b)
    if sorted(seen) != list(range(1, n + 1)):
        raise DomainError(f"blocks {blocks} do not partition 1..{n}")
    lo = {x: b[0] for b in blocks for x in b}
    hi = {x: b[-1] for b in blocks for x in b}
    for b in blocks:
        for a, c in zip(b, b[1:]):
            for x in range(a + 1, c):
                if lo[x] < a or hi[x] > c:
                    raise DomainError(f"blocks {blocks} cross")


def zero_partition(n: int) -> NCPartition:
    """The finest partition ``{(1),...,(n)}``."""
    return NCPartition(n, [(i,) for i in range(1, n + 1)])


def one_partition(n: int) -> NCPartition:
    """The single-block partition ``{(1,...,n)}``."""
    return NCPartition(n, [tuple(range(1, n + 1))])


_PAREN = re.compile(r"\(([^()]*)\)")


def parse_partition(text: str, n: int | None = None) -> NCPartition:
    """Parse the brace-tuple syntax ``{(1,4),(2,3),(5)}``."""
    body = text.strip()
    if not (body.startswith("{") and body.endswith("}")):
        raise DomainError(f"partition must be enclosed in braces: {text!r}")
    inner = body[1:-1]
    groups = _PAREN.findall(inner)
    if _PAREN.sub("", inner).replace(",", "").strip():
        raise DomainError(f"unparseable partition: {text!r}")
    try:
        blocks = [tuple(int(tok) for tok in g.split(",") if tok.strip()) for g in groups]
    except ValueError as exc:
        raise DomainError(f"unparseable partition: {text!r}") from exc
    if n is None:
        n = max((max(b) for b in blocks if b), default=0)
    return NCPartition(n, blocks)


@lru_cache(maxsize=None)
def _nc_range(lo: int, hi: int) -> tuple[tuple[Block, ...], ...]:
    # all noncrossing partitions of the integer interval lo..hi
    if lo > hi:
        return ((),)
    out = []
    rest = list(range(lo + 1, hi + 1))
    for mask in range(1 << len(rest)):
        block = (lo,) + tuple(x for i, x in enumerate(rest) if mask >> i & 1)
        bounds = list(zip(block, block[1:])) + [(block[-1], hi + 1)]
        pieces: list[tuple[tuple[Block, ...], ...]] = [_nc_range(a + 1, b - 1) for a, b in bounds]
        stack: list[tuple[Block, ...]] = [(block,)]
        for options in pieces:
            stack = [acc + opt for acc in stack for opt in options]
        out.extend(stack)
    return tuple(out)


@lru_cache(maxsize=None)
def _enumerate(n: int) -> tuple[NCPartition, ...]:
    canon = sorted(tuple(sorted(p)) for p in _nc_range(1, n))
    return tuple(NCPartition._trusted(n, p) for p in canon)


def enumerate_nc(n: int) -> tuple[NCPartition, ...]:
    """All noncrossing partitions of ``{1..n}`` in lexicographic order of their blocks.

    ``n`` is capped at ``MAX_ENUM_N``; the count is the nth Catalan number.
    """
    if not isinstance(n, int) or n < 1 or n > MAX_ENUM_N:
        raise DomainError(f"n must lie in 1..{MAX_ENUM_N}, got {n!r}")
    return _enumerate(n)


def _leq(pi: NCPartition, theta_labels: tuple[int, ...]) -> bool:
    for block in pi.blocks:
        target = theta_labels[block[0] - 1]
        for x in block[1:]:
            if theta_labels[x - 1] != target:
                return False
    return True


def leq(pi: NCPartition, theta: NCPartition) -> bool:
    """Refinement order: every block of ``pi`` lies inside a block of ``theta``."""
    if pi.n != theta.n:
        raise DomainError(f"partitions of different sizes: {pi.n} and {theta.n}")
    return _leq(pi, theta.labels())


class _Lattice:
    """Möbius memo for one NC(n); rows ``mu(pi, .)`` are filled on first use."""

    def __init__(self, n: int):
        self.parts = enumerate_nc(n)
        self.index = {p: i for i, p in enumerate(self.parts)}
        self.labels = [p.labels() for p in self.parts]
        self._rows: dict[int, dict[int, int]] = {}
        self._lock = threading.Lock()

    def row(self, i: int) -> dict[int, int]:
        with self._lock:
            row = self._rows.get(i)
            if row is None:
                row = self._rows[i] = self._compute_row(i)
            return row

    def _compute_row(self, i: int) -> dict[int, int]:
        pi = self.parts[i]
        up = [j for j in range(len(self.parts)) if _leq(pi, self.labels[j])]
        # more blocks first: a linear extension of the refinement order
        up.sort(key=lambda j: (-len(self.parts[j]), j))
        row: dict[int, int] = {}
        for j in up:
            if j == i:
                row[j] = 1
                continue
            lab = self.labels[j]
            row[j] = -sum(v for t, v in row.items() if _leq(self.parts[t], lab))
        return row


@lru_cache(maxsize=None)
def _lattice(n: int) -> _Lattice:
    return _Lattice(n)


def mobius(pi: NCPartition, sigma: NCPartition) -> int:
    """Möbius value of the interval ``[pi, sigma]`` in NC(n).

    Uses the defining recursion ``mu(pi, pi) = 1`` and
    ``mu(pi, sigma) = -sum(mu(pi, tau) for pi <= tau < sigma)``, memoized per row.
    """
    if pi.n != sigma.n:
        raise DomainError(f"partitions of different sizes: {pi.n} and {sigma.n}")
    if pi.n > MAX_MOBIUS_N:
        raise DomainError(f"Möbius tables are limited to n <= {MAX_MOBIUS_N}")
    if not leq(pi, sigma):
        raise DomainError(f"{pi} is not below {sigma}")
    lat = _lattice(pi.n)
    return lat.row(lat.index[pi])[lat.index[sigma]]


def mobius_to_top(n: int) -> tuple[tuple[NCPartition, int], ...]:
    """``(pi, mu(pi, 1_n))`` for every ``pi`` in NC(n), in enumeration order."""
    top = one_partition(n)
    return tuple((p, mobius(p, top)) for p in enumerate_nc(n))


@dataclass(frozen=True)
class NestingForest:
    """Immediate-nesting structure of the blocks of a noncrossing partition.

    ``parent[k]`` is the index of the tightest block that block ``k`` is inner
    in, or ``None`` for a root. ``gap[k]`` counts the parent's elements that
    precede block ``k``; the child sits between parent elements ``gap-1`` and
    ``gap`` (0-based).
    """

    n: int
    blocks: tuple[Block, ...]
    parent: tuple[int | None, ...]
    gap: tuple[int | None, ...]
    children: tuple[tuple[int, ...], ...]

    @property
    def roots(self) -> tuple[int, ...]:
        return tuple(k for k, p in enumerate(self.parent) if p is None)

    def leaves(self) -> tuple[int, ...]:
        """Indices of innermost blocks (no block nested inside)."""
        return tuple(k for k, ch in enumerate(self.children) if not ch)


def is_inner(v: Block, b: Block) -> bool:
    """True if block ``v`` sits strictly between two consecutive elements of ``b``."""
    return any(a < v[0] and v[-1] < c for a, c in zip(b, b[1:]))


def nesting_forest(pi: NCPartition) -> NestingForest:
    blocks = pi.blocks
    parent: list[int | None] = []
    gap: list[int | None] = []
    for v in blocks:
        best = None
        for k, b in enumerate(blocks):
            if b is not v and is_inner(v, b) and (best is None or b[0] > blocks[best][0]):
                best = k
        parent.append(best)
        gap.append(None if best is None else sum(1 for x in blocks[best] if x < v[0]))
    children = tuple(
        tuple(k for k, p in enumerate(parent) if p == i) for i in range(len(blocks))
    )
    return NestingForest(pi.n, blocks, tuple(parent), tuple(gap), children)
