"""Crossed products ``M x_alpha G`` with finitely supported elements.

An element is a finite sum ``sum_g m_g u_g`` stored as a mapping from reduced
group words to nonzero coefficient matrices. Products follow the covariance
rule ``u_g m = alpha_g(m) u_g``, so

    (m1 u_g1)(m2 u_g2) = (m1 alpha_g1(m2)) u_{g1 g2},
    (m u_g)* = alpha_{g^-1}(m*) u_{g^-1}.

The action is given per generator: a permutation of the ``d`` coordinates
(valid for diagonal and full coefficients) or conjugation by a unitary
(full coefficients only).
"""
from __future__ import annotations

from types import MappingProxyType
from typing import Any, Iterable, Mapping, Sequence

from .coeffalgebra import (
    DEFAULT_TOL,
    DIAG,
    FULL,
    CoeffMatrix,
    is_negligible,
    mat_eq,
    scalar,
)
from .errors import DomainError
from .groupwords import GroupSpec, GroupWord, multiply, word_from_json

PERMUTATION = "permutation"
UNITARY = "unitary"


def _compose(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    # (p o q)(i) = p(q(i))
    return tuple(p[q[i]] for i in range(len(q)))


def _perm_power(p: tuple[int, ...], e: int) -> tuple[int, ...]:
    if e < 0:
        inv = [0] * len(p)
        for i, j in enumerate(p):
            inv[j] = i
        p, e = tuple(inv), -e
    out = tuple(range(len(p)))
    for _ in range(e):
        out = _compose(p, out)
    return out


def _basis(shape: str, d: int, mode: str) -> list[CoeffMatrix]:
    one, zero = scalar(1, mode), scalar(0, mode)
    if shape == DIAG:
        return [CoeffMatrix._raw(DIAG, d, mode, tuple(one if k == i else zero for k in range(d)))
                for i in range(d)]
    return [CoeffMatrix._raw(FULL, d, mode, tuple(one if k == i else zero for k in range(d * d)))
            for i in range(d * d)]


class ActionSpec:
    """Per-generator automorphism data for an action of ``group`` on ``M``.

    ``generators[i]`` describes the action of ``g{i}``: a 0-based permutation
    tuple ``p`` (coordinate ``k`` moves to ``p[k]``) for ``kind="permutation"``,
    or a unitary :class:`CoeffMatrix` ``U`` acting by ``m -> U m U*`` for
    ``kind="unitary"``. For a finite cyclic factor of order ``k`` the
    generator's action applied ``k`` times must be the identity on ``M``;
    this is checked on a basis at construction.
    """

    def __init__(
        self,
        group: GroupSpec,
        shape: str,
        d: int,
        mode: str,
        kind: str,
        generators: Sequence[Any],
        tol: float = DEFAULT_TOL,
    ):
        self.group = group
        self.shape = shape
        self.d = d
        self.mode = mode
        self.kind = kind
        self.tol = tol
        if len(generators) != group.rank:
            raise DomainError(f"action needs {group.rank} generators, got {len(generators)}")
        if kind == PERMUTATION:
            gens = []
            for p in generators:
                p = tuple(int(x) for x in p)
                if sorted(p) != list(range(d)):
                    raise DomainError(f"{list(p)} is not a permutation of 0..{d - 1}")
                gens.append(p)
            self.generators: tuple = tuple(gens)
        elif kind == UNITARY:
            if shape != FULL:
                raise DomainError("unitary conjugation needs full coefficient matrices")
            gens = []
            for u in generators:
                if not isinstance(u, CoeffMatrix):
                    u = CoeffMatrix.full(u, mode)
                if (u.shape, u.d, u.mode) != (FULL, d, mode):
                    raise DomainError("unitary has the wrong dimension or scalar mode")
                if not mat_eq(u * u.adjoint(), u.one(), tol):
                    raise DomainError(f"generator matrix {u} is not unitary")
                gens.append(u)
            self.generators = tuple(gens)
        else:
            raise DomainError(f"unknown action kind {kind!r}")
        self._cache: dict[tuple[int, int], Any] = {}
        self._validate_orders()

    def _validate_orders(self) -> None:
        for i, k in enumerate(self.group.orders):
            if not k:
                continue
            for b in _basis(self.shape, self.d, self.mode):
                m = b
                for _ in range(k):
                    m = self._apply(i, 1, m)
                if not mat_eq(m, b, self.tol):
                    raise DomainError(
                        f"generator g{i} of a cyclic factor of order {k} does not act with order dividing {k}"
                    )

    def _letter_data(self, i: int, e: int):
        key = (i, e)
        data = self._cache.get(key)
        if data is None:
            if self.kind == PERMUTATION:
                data = _perm_power(self.generators[i], e)
            else:
                u = self.generators[i]
                base = u if e > 0 else u.adjoint()
                power = u.one()
                for _ in range(abs(e)):
                    power = power * base
                data = (power, power.adjoint())
            self._cache[key] = data
        return data

    def _apply(self, i: int, e: int, m: CoeffMatrix) -> CoeffMatrix:
        data = self._letter_data(i, e)
        if self.kind == UNITARY:
            left, right = data
            return left * m * right
        d = self.d
        src = m.entries
        out = [None] * len(src)
        if m.shape == DIAG:
            for k in range(d):
                out[data[k]] = src[k]
        else:
            for r in range(d):
                pr = data[r] * d
                for c in range(d):
                    out[pr + data[c]] = src[r * d + c]
        return m.like(out)

    def check_matrix(self, m: CoeffMatrix) -> None:
        if not isinstance(m, CoeffMatrix):
            raise DomainError(f"expected a CoeffMatrix, got {type(m).__name__}")
        if (m.shape, m.d, m.mode) != (self.shape, self.d, self.mode):
            raise DomainError(
                f"coefficient {m.shape}({m.d}, {m.mode}) does not match "
                f"{self.shape}({self.d}, {self.mode})"
            )

    def act(self, w: GroupWord, m: CoeffMatrix) -> CoeffMatrix:
        """``alpha_w(m)``; the last letter of ``w`` acts first."""
        if w.spec != self.group:
            raise DomainError("word is over a different group than the action")
        self.check_matrix(m)
        for i, e in reversed(w.letters):
            m = self._apply(i, e, m)
        return m

    def _key(self):
        gens = self.generators if self.kind == PERMUTATION else tuple(u.entries for u in self.generators)
        return (self.group, self.shape, self.d, self.mode, self.kind, gens)

    def __eq__(self, other):
        if not isinstance(other, ActionSpec):
            return NotImplemented
        return self is other or self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def to_json(self) -> dict:
        if self.kind == PERMUTATION:
            gens: list = [[x + 1 for x in p] for p in self.generators]
        else:
            gens = [u.to_json()["entries"] for u in self.generators]
        return {"kind": self.kind, "generators": gens}


def act(action: ActionSpec, w: GroupWord, m: CoeffMatrix) -> CoeffMatrix:
    return action.act(w, m)


class CrossedProduct:
    """The algebra ``M x_alpha G`` fixed by an :class:`ActionSpec`."""

    def __init__(self, action: ActionSpec):
        self.action = action
        self.group = action.group
        self.shape, self.d, self.mode = action.shape, action.d, action.mode
        self.tol = action.tol
        self._one_m = CoeffMatrix.identity(self.d, self.shape, self.mode)
        self._zero_m = CoeffMatrix.zero(self.d, self.shape, self.mode)
        self.e = self.group.identity()

    def __eq__(self, other):
        if not isinstance(other, CrossedProduct):
            return NotImplemented
        return self is other or self.action == other.action

    def __hash__(self):
        return hash(self.action)

    @property
    def one_m(self) -> CoeffMatrix:
        return self._one_m

    @property
    def zero_m(self) -> CoeffMatrix:
        return self._zero_m

    def element(self, terms: Iterable[tuple[GroupWord, CoeffMatrix]] | Mapping) -> CrossedElement:
        """Sum of ``m u_w`` over ``terms``; duplicate words are added together."""
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[GroupWord, CoeffMatrix] = {}
        for w, m in items:
            if w.spec != self.group:
                raise DomainError("word is over a different group")
            self.action.check_matrix(m)
            acc[w] = acc[w] + m if w in acc else m
        return CrossedElement._normalized(self, acc)

    def monomial(self, m: CoeffMatrix, w: GroupWord) -> CrossedElement:
        return self.element([(w, m)])

    def embed_m(self, m: CoeffMatrix) -> CrossedElement:
        """``m -> m u_e``."""
        return self.element([(self.e, m)])

    def embed_u(self, w: GroupWord) -> CrossedElement:
        """``w -> 1_M u_w``."""
        return self.element([(w, self._one_m)])

    def one(self) -> CrossedElement:
        return self.embed_u(self.e)

    def zero(self) -> CrossedElement:
        return CrossedElement(self, {})

    def scalar_matrix(self, s: Any) -> CoeffMatrix:
        return CoeffMatrix.scalar_matrix(s, self.d, self.shape, self.mode)

    def act(self, w: GroupWord, m: CoeffMatrix) -> CoeffMatrix:
        return self.action.act(w, m)

    def header(self) -> dict:
        return {
            "group": self.group.factor_names(),
            "coefficients": {"shape": self.shape, "dimension": self.d, "mode": self.mode},
            "action": self.action.to_json(),
        }

    def element_from_json(self, data: Any) -> CrossedElement:
        """Read ``[{"word": ..., "matrix": ...}, ...]`` (or an object with ``terms``)."""
        terms = data["terms"] if isinstance(data, Mapping) else data
        out = []
        for t in terms:
            try:
                w = word_from_json(self.group, t.get("word", []))
                raw = t["matrix"]
            except (KeyError, AttributeError, TypeError) as exc:
                raise DomainError(f"bad element term {t!r}") from exc
            if isinstance(raw, Mapping):
                m = CoeffMatrix.from_json(raw)
            elif self.shape == DIAG:
                m = CoeffMatrix.diag(raw, self.mode)
            else:
                m = CoeffMatrix.full(raw, self.mode)
            out.append((w, m))
        return self.element(out)


class CrossedElement:
    """Finitely supported ``sum_g m_g u_g``; immutable and always normalized.

    Words are reduced, zero coefficients are dropped, and terms are kept in
    canonical order (word length, then letters).
    """

    __slots__ = ("algebra", "_terms")

    def __init__(self, algebra: CrossedProduct, terms: Mapping[GroupWord, CoeffMatrix]):
        self.algebra = algebra
        self._terms = dict(sorted(terms.items(), key=lambda kv: kv[0].sort_key()))

    @classmethod
    def _normalized(cls, algebra, acc: Mapping[GroupWord, CoeffMatrix]) -> CrossedElement:
        return cls(algebra, {w: m for w, m in acc.items() if not m.is_zero()})

    @property
    def terms(self) -> Mapping[GroupWord, CoeffMatrix]:
        return MappingProxyType(self._terms)

    def _check(self, other: CrossedElement) -> None:
        if not isinstance(other, CrossedElement):
            raise DomainError(f"expected a CrossedElement, got {type(other).__name__}")
        if other.algebra != self.algebra:
            raise DomainError("elements belong to different crossed products")

    def __add__(self, other: CrossedElement) -> CrossedElement:
        self._check(other)
        acc = dict(self._terms)
        for w, m in other._terms.items():
            acc[w] = acc[w] + m if w in acc else m
        return CrossedElement._normalized(self.algebra, acc)

    def __neg__(self) -> CrossedElement:
        return CrossedElement(self.algebra, {w: -m for w, m in self._terms.items()})

    def __sub__(self, other: CrossedElement) -> CrossedElement:
        return self + (-other)

    def scale(self, s: Any) -> CrossedElement:
        return CrossedElement._normalized(self.algebra, {w: m.scale(s) for w, m in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, CrossedElement):
            return x_mul(self, other)
        return self.scale(other)

    def __rmul__(self, s):
        return self.scale(s)

    def adjoint(self) -> CrossedElement:
        return x_adjoint(self)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) <= 1

    def support(self) -> tuple[GroupWord, ...]:
        return tuple(self._terms)

    def factors(self) -> frozenset[int]:
        """Group factors used by the support."""
        out: frozenset[int] = frozenset()
        for w in self._terms:
            out |= w.factors()
        return out

    def __eq__(self, other):
        if not isinstance(other, CrossedElement):
            return NotImplemented
        return self.algebra == other.algebra and self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def close(self, other: CrossedElement, tol: float | None = None) -> bool:
        """Equality up to ``tol`` in float mode (structural in exact mode)."""
        self._check(other)
        tol = self.algebra.tol if tol is None else tol
        words = set(self._terms) | set(other._terms)
        zero = self.algebra.zero_m
        return all(
            mat_eq(self._terms.get(w, zero), other._terms.get(w, zero), tol) for w in words
        )

    def to_json(self) -> dict:
        return {
            "terms": [{"word": w.to_json(), "matrix": m.to_json()} for w, m in self._terms.items()]
        }

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"{m}*u[{w}]" for w, m in self._terms.items())

    def __repr__(self) -> str:
        return f"CrossedElement({self})"


def x_mul(x: CrossedElement, y: CrossedElement) -> CrossedElement:
    """Bilinear extension of ``(m1 u_g1)(m2 u_g2) = (m1 alpha_g1(m2)) u_{g1 g2}``.

    Term pairs are accumulated in canonical order so float results do not
    depend on anything but the inputs.
    """
    x._check(y)
    alg = x.algebra
    action = alg.action
    acc: dict[GroupWord, CoeffMatrix] = {}
    for g1, m1 in x._terms.items():
        for g2, m2 in y._terms.items():
            w = multiply(g1, g2)
            c = m1 * action.act(g1, m2)
            acc[w] = acc[w] + c if w in acc else c
    return CrossedElement._normalized(alg, acc)


def x_adjoint(x: CrossedElement) -> CrossedElement:
    """``(m u_g)* = alpha_{g^-1}(m*) u_{g^-1}`` termwise."""
    action = x.algebra.action
    acc = {}
    for g, m in x._terms.items():
        gi = g.inverse()
        acc[gi] = action.act(gi, m.adjoint())
    return CrossedElement._normalized(x.algebra, acc)


def embed_m(algebra: CrossedProduct, m: CoeffMatrix) -> CrossedElement:
    return algebra.embed_m(m)


def embed_u(algebra: CrossedProduct, w: GroupWord) -> CrossedElement:
    return algebra.embed_u(w)


def cond_expect(x: CrossedElement) -> CoeffMatrix:
    """The coefficient at the group identity (``0_M`` when absent)."""
    alg = x.algebra
    return x._terms.get(alg.e, alg.zero_m)


def word_trace(w: GroupWord) -> int:
    """Canonical trace of ``u_w``: 1 at the identity, 0 elsewhere."""
    return 0 if w.letters else 1


def group_trace(x: CrossedElement):
    """Trace of an element whose coefficients are all multiples of ``1_M``."""
    for w, m in x._terms.items():
        if not m.is_scalar():
            raise DomainError(f"coefficient {m} at {w} is not a multiple of the identity")
    m = cond_expect(x)
    return m[0, 0] if not m.is_zero() else scalar(0, x.algebra.mode)


def center(x: CrossedElement) -> CrossedElement:
    """``x - E_M(x)``."""
    return x - x.algebra.embed_m(cond_expect(x))


def is_centered(x: CrossedElement, tol: float | None = None) -> bool:
    tol = x.algebra.tol if tol is None else tol
    return is_negligible(cond_expect(x), tol)


__all__ = [
    "ActionSpec", "CrossedElement", "CrossedProduct", "PERMUTATION", "UNITARY",
    "act", "center", "cond_expect", "embed_m", "embed_u", "group_trace",
    "is_centered", "word_trace", "x_adjoint", "x_mul",
]
