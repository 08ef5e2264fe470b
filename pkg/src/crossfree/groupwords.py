"""Free products of cyclic groups with reduced-word normal forms.

A group is an ordered list of cyclic factors; factor ``i`` is generated by
``g{i}``. Order ``0`` marks an infinite cyclic factor (a copy of Z), order
``k >= 2`` a finite cyclic factor Z_k. The free group F_N is N copies of Z.

>>> G = GroupSpec.free_group(2)
>>> a, b = G.generator(0), G.generator(1)
>>> str(a * b * b.inverse() * a)
'g0^2'
>>> str(parse_word(G, "g0 g1^-1").inverse())
'g1 g0^-1'
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

Letter = tuple[int, int]


@dataclass(frozen=True)
class GroupSpec:
    orders: tuple[int, ...]

    def __post_init__(self):
        if not self.orders:
            raise DomainError("a group needs at least one cyclic factor")
        for k in self.orders:
            if k != 0 and k < 2:
                raise DomainError(f"finite cyclic factors need order >= 2, got {k}")

    @classmethod
    def free_group(cls, n: int) -> GroupSpec:
        return cls((0,) * n)

    @classmethod
    def from_factors(cls, names: Iterable[str]) -> GroupSpec:
        """Build from names such as ``["Z", "Z2", "Z3"]``."""
        orders = []
        for name in names:
            m = re.fullmatch(r"Z(\d*)", str(name).strip())
            if m is None:
                raise DomainError(f"unknown cyclic factor {name!r}")
            orders.append(int(m.group(1)) if m.group(1) else 0)
        return cls(tuple(orders))

    @property
    def rank(self) -> int:
        return len(self.orders)

    def factor_names(self) -> list[str]:
        return ["Z" if k == 0 else f"Z{k}" for k in self.orders]

    def identity(self) -> GroupWord:
        return GroupWord(self, ())

    def generator(self, i: int, exponent: int = 1) -> GroupWord:
        return reduce(self, [(i, exponent)])

    def __str__(self) -> str:
        return " * ".join(self.factor_names())


@dataclass(frozen=True)
class GroupWord:
    """A reduced word; build it through :func:`reduce` or the group operations."""

    spec: GroupSpec
    letters: tuple[Letter, ...]

    def __mul__(self, other: GroupWord) -> GroupWord:
        return multiply(self, other)

    def inverse(self) -> GroupWord:
        return inverse(self)

    def is_identity(self) -> bool:
        return not self.letters

    def __len__(self) -> int:
        return len(self.letters)

    def factors(self) -> frozenset[int]:
        """Factor indices the word uses."""
        return frozenset(i for i, _ in self.letters)

    def sort_key(self) -> tuple:
        return (len(self.letters), self.letters)

    def __str__(self) -> str:
        if not self.letters:
            return "e"
        return " ".join(f"g{i}" if e == 1 else f"g{i}^{e}" for i, e in self.letters)

    def __repr__(self) -> str:
        return f"GroupWord({self})"

    def to_json(self) -> list[list[int]]:
        return [[i, e] for i, e in self.letters]


def _normalize_exponent(order: int, e: int) -> int:
    return e % order if order else e


def reduce(spec: GroupSpec, letters: Iterable[Sequence[int]]) -> GroupWord:
    """Free-product normal form of a raw letter sequence.

    Adjacent letters from one factor are merged (mod the factor order), zero
    exponents dropped, and merging continues across the gap left behind.
    """
    stack: list[list[int]] = []
    for letter in letters:
        i, e = int(letter[0]), int(letter[1])
        if not 0 <= i < len(spec.orders):
            raise DomainError(f"factor index {i} out of range for {spec}")
        e = _normalize_exponent(spec.orders[i], e)
        if e == 0:
            continue
        if stack and stack[-1][0] == i:
            merged = _normalize_exponent(spec.orders[i], stack[-1][1] + e)
            if merged:
                stack[-1][1] = merged
            else:
                stack.pop()
        else:
            stack.append([i, e])
    return GroupWord(spec, tuple((i, e) for i, e in stack))


def multiply(w1: GroupWord, w2: GroupWord) -> GroupWord:
    if w1.spec != w2.spec:
        raise DomainError("words belong to different groups")
    if not w1.letters:
        return w2
    if not w2.letters:
        return w1
    a, b = list(w1.letters), list(w2.letters)
    orders = w1.spec.orders
    # both halves are reduced, so only the junction can collapse
    while a and b and a[-1][0] == b[0][0]:
        i = a[-1][0]
        merged = _normalize_exponent(orders[i], a[-1][1] + b[0][1])
        a.pop()
        b.pop(0)
        if merged:
            a.append((i, merged))
            break
    return GroupWord(w1.spec, tuple(a) + tuple(b))


def inverse(w: GroupWord) -> GroupWord:
    orders = w.spec.orders
    return GroupWord(
        w.spec, tuple((i, _normalize_exponent(orders[i], -e)) for i, e in reversed(w.letters))
    )


def is_identity(w: GroupWord) -> bool:
    return not w.letters


def product(spec: GroupSpec, words: Iterable[GroupWord]) -> GroupWord:
    out = spec.identity()
    for w in words:
        out = multiply(out, w)
    return out


_TOKEN = re.compile(r"g(\d+)(?:\^(-?\d+))?")


def parse_word(spec: GroupSpec, text: str) -> GroupWord:
    """Parse ``g0^2 g1^-1``; ``e`` (or an empty string) is the identity."""
    tokens = text.split()
    if tokens in ([], ["e"]):
        return spec.identity()
    letters = []
    for tok in tokens:
        m = _TOKEN.fullmatch(tok)
        if m is None:
            raise DomainError(f"bad word token {tok!r}")
        letters.append((int(m.group(1)), int(m.group(2) or 1)))
    return reduce(spec, letters)


def word_from_json(spec: GroupSpec, data: Sequence[Sequence[int]] | str) -> GroupWord:
    if isinstance(data, str):
        return parse_word(spec, data)
    return reduce(spec, data)


def make_rng(seed: int) -> np.random.Generator:
    """The repo-wide generator: PCG64 (64-bit state increments, splittable via ``spawn``)."""
    return np.random.Generator(np.random.PCG64(seed))


def _exponent(order: int, rng: np.random.Generator) -> int:
    if order:
        return int(rng.integers(1, order))
    e = int(rng.integers(1, 4))
    return e if rng.integers(0, 2) else -e


def sample_word(
    spec: GroupSpec,
    max_len: int,
    rng: np.random.Generator,
    factors: Sequence[int] | None = None,
) -> GroupWord:
    """Random reduced word with at most ``max_len`` letters.

    Letters come from ``factors`` (all factors by default); an empty factor
    list yields the identity. Infinite-cyclic exponents are drawn from
    ``±1, ±2, ±3``.
    """
    if max_len < 0:
        raise DomainError("max_len must be nonnegative")
    pool = list(range(spec.rank)) if factors is None else list(factors)
    if not pool:
        return spec.identity()
    length = int(rng.integers(0, max_len + 1))
    letters: list[Letter] = []
    for _ in range(length):
        choices = [i for i in pool if not letters or i != letters[-1][0]]
        if not choices:
            break
        i = choices[int(rng.integers(0, len(choices)))]
        letters.append((i, _exponent(spec.orders[i], rng)))
    return GroupWord(spec, tuple(letters))
