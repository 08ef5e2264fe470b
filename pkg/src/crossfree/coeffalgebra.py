"""The coefficient *-algebra: full or diagonal square matrices.

Two scalar modes are supported. ``"exact"`` uses :class:`GaussianRational`
(complex numbers with rational parts, always in lowest terms) and every
operation is exact. ``"float"`` uses Python ``complex`` and comparisons go
through an absolute tolerance.

A ``Diagonal(d)`` matrix stores only its diagonal and embeds into ``Full(d)``
with zeros off the diagonal; arithmetic commutes with that embedding.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import DomainError

EXACT = "exact"
FLOAT = "float"
FULL = "full"
DIAG = "diag"
MODES = (EXACT, FLOAT)
SHAPES = (FULL, DIAG)

DEFAULT_TOL = 1e-9


class GaussianRational:
    """``re + im*i`` with ``Fraction`` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Any = 0, im: Any = 0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)

    @classmethod
    def _raw(cls, re: Fraction, im: Fraction) -> GaussianRational:
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    @classmethod
    def coerce(cls, x: Any) -> GaussianRational:
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, str):
            return parse_exact(x)
        if isinstance(x, (int, Fraction)):
            return cls(x)
        if isinstance(x, complex):
            raise DomainError(f"float value {x!r} has no exact representation; pass a string")
        if isinstance(x, float):
            if not x.is_integer():
                raise DomainError(f"float value {x!r} is not exact; pass a string like '1/2'")
            return cls(int(x))
        raise DomainError(f"cannot read {x!r} as a Gaussian rational")

    def __add__(self, other):
        if type(other) is not GaussianRational:
            other = GaussianRational.coerce(other)
        return GaussianRational._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __sub__(self, other):
        if type(other) is not GaussianRational:
            other = GaussianRational.coerce(other)
        return GaussianRational._raw(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        if type(other) is not GaussianRational:
            other = GaussianRational.coerce(other)
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational._raw(a * c, b)
        return GaussianRational._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.coerce(other)
        den = other.re * other.re + other.im * other.im
        if not den:
            raise ZeroDivisionError("division by zero")
        num = self * other.conjugate()
        return GaussianRational._raw(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def conjugate(self) -> GaussianRational:
        return GaussianRational._raw(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return not self.im and self.re == other
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        return format_exact(self)

    def __repr__(self):
        return f"GaussianRational('{self}')"


_TERM = re.compile(r"[+-]?[^+-]+")


def parse_exact(text: str) -> GaussianRational:
    """Read ``"p/q+r/s*i"`` style strings (``"1/2"``, ``"-i"``, ``"3-2/5*i"``...)."""
    s = text.replace(" ", "")
    if not s or _TERM.sub("", s):
        raise DomainError(f"bad exact scalar {text!r}")
    re_part, im_part = Fraction(0), Fraction(0)
    try:
        for term in _TERM.findall(s):
            if term.endswith("i"):
                coef = term[:-1].rstrip("*")
                im_part += Fraction(coef + "1") if coef in ("", "+", "-") else Fraction(coef)
            else:
                re_part += Fraction(term)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"bad exact scalar {text!r}") from exc
    return GaussianRational._raw(re_part, im_part)


def format_exact(x: GaussianRational) -> str:
    if not x.im:
        return str(x.re)
    if not x.re:
        return f"{x.im}*i"
    sign = "-" if x.im < 0 else "+"
    return f"{x.re}{sign}{abs(x.im)}*i"


def scalar(value: Any, mode: str):
    """Coerce ``value`` into the scalar type of ``mode``."""
    if mode == EXACT:
        return GaussianRational.coerce(value)
    if mode == FLOAT:
        if isinstance(value, GaussianRational):
            return complex(value)
        if isinstance(value, str):
            return complex(parse_exact(value))
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
        return complex(value)
    raise DomainError(f"unknown scalar mode {mode!r}")


def conj(x):
    return x.conjugate()


def scalar_to_json(x) -> Any:
    if isinstance(x, GaussianRational):
        return format_exact(x)
    x = complex(x)
    return [x.real, x.imag]


class CoeffMatrix:
    """A ``d x d`` matrix in ``Full`` or ``Diagonal`` storage, exact or float.

    Instances are immutable; ``entries`` is a flat row-major tuple for full
    storage and the diagonal for diagonal storage.
    """

    __slots__ = ("shape", "d", "mode", "entries", "_hash")

    def __init__(self, shape: str, d: int, mode: str, entries: Iterable[Any]):
        if shape not in SHAPES:
            raise DomainError(f"unknown shape {shape!r}")
        if mode not in MODES:
            raise DomainError(f"unknown scalar mode {mode!r}")
        if not isinstance(d, int) or d < 1:
            raise DomainError(f"dimension must be a positive integer, got {d!r}")
        vals = tuple(scalar(v, mode) for v in entries)
        if len(vals) != (d * d if shape == FULL else d):
            raise DomainError(f"wrong number of entries for {shape}({d})")
        self._set(shape, d, mode, vals)

    def _set(self, shape, d, mode, entries):
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("CoeffMatrix is immutable")

    @classmethod
    def _raw(cls, shape, d, mode, entries) -> CoeffMatrix:
        obj = object.__new__(cls)
        obj._set(shape, d, mode, entries)
        return obj

    # constructors

    @classmethod
    def diag(cls, values: Sequence[Any], mode: str = EXACT) -> CoeffMatrix:
        return cls(DIAG, len(values), mode, values)

    @classmethod
    def full(cls, rows: Sequence[Sequence[Any]], mode: str = EXACT) -> CoeffMatrix:
        d = len(rows)
        if any(len(r) != d for r in rows):
            raise DomainError("full matrices must be square")
        return cls(FULL, d, mode, [v for r in rows for v in r])

    @classmethod
    def identity(cls, d: int, shape: str = DIAG, mode: str = EXACT) -> CoeffMatrix:
        return cls.scalar_matrix(1, d, shape, mode)

    @classmethod
    def zero(cls, d: int, shape: str = DIAG, mode: str = EXACT) -> CoeffMatrix:
        return cls.scalar_matrix(0, d, shape, mode)

    @classmethod
    def scalar_matrix(cls, s: Any, d: int, shape: str = DIAG, mode: str = EXACT) -> CoeffMatrix:
        s = scalar(s, mode)
        z = scalar(0, mode)
        if shape == DIAG:
            return cls(DIAG, d, mode, [s] * d)
        return cls(FULL, d, mode, [s if i == j else z for i in range(d) for j in range(d)])

    def like(self, entries) -> CoeffMatrix:
        return CoeffMatrix._raw(self.shape, self.d, self.mode, tuple(entries))

    def one(self) -> CoeffMatrix:
        return CoeffMatrix.identity(self.d, self.shape, self.mode)

    def zeros(self) -> CoeffMatrix:
        return CoeffMatrix.zero(self.d, self.shape, self.mode)

    # structure

    def _check(self, other: CoeffMatrix) -> None:
        if not isinstance(other, CoeffMatrix):
            raise DomainError(f"expected a CoeffMatrix, got {type(other).__name__}")
        if (self.shape, self.d, self.mode) != (other.shape, other.d, other.mode):
            raise DomainError(
                f"incompatible matrices: {self.shape}({self.d}, {self.mode}) vs "
                f"{other.shape}({other.d}, {other.mode})"
            )

    def __getitem__(self, ij: tuple[int, int]):
        i, j = ij
        if self.shape == FULL:
            return self.entries[i * self.d + j]
        return self.entries[i] if i == j else scalar(0, self.mode)

    def rows(self) -> list[list[Any]]:
        d = self.d
        return [[self[i, j] for j in range(d)] for i in range(d)]

    def to_full(self) -> CoeffMatrix:
        if self.shape == FULL:
            return self
        return CoeffMatrix._raw(FULL, self.d, self.mode, tuple(v for r in self.rows() for v in r))

    def is_zero(self) -> bool:
        return not any(self.entries)

    def is_scalar(self) -> bool:
        """True if this is a multiple of the identity."""
        return self == CoeffMatrix.scalar_matrix(self[0, 0], self.d, self.shape, self.mode)

    def max_abs(self) -> float:
        return max((abs(complex(v)) for v in self.entries), default=0.0)

    # arithmetic

    def __add__(self, other: CoeffMatrix) -> CoeffMatrix:
        self._check(other)
        return self.like(a + b for a, b in zip(self.entries, other.entries))

    def __sub__(self, other: CoeffMatrix) -> CoeffMatrix:
        self._check(other)
        return self.like(a - b for a, b in zip(self.entries, other.entries))

    def __neg__(self) -> CoeffMatrix:
        return self.like(-a for a in self.entries)

    def scale(self, s: Any) -> CoeffMatrix:
        s = scalar(s, self.mode)
        return self.like(s * a for a in self.entries)

    def __mul__(self, other):
        if not isinstance(other, CoeffMatrix):
            return self.scale(other)
        self._check(other)
        if self.shape == DIAG:
            return self.like(a * b for a, b in zip(self.entries, other.entries))
        d = self.d
        x, y = self.entries, other.entries
        out = []
        for i in range(d):
            row = x[i * d:(i + 1) * d]
            for j in range(d):
                acc = row[0] * y[j]
                for k in range(1, d):
                    acc = acc + row[k] * y[k * d + j]
                out.append(acc)
        return self.like(out)

    def __rmul__(self, s):
        return self.scale(s)

    def adjoint(self) -> CoeffMatrix:
        """Conjugate transpose."""
        if self.shape == DIAG:
            return self.like(conj(a) for a in self.entries)
        d = self.d
        return self.like(conj(self.entries[j * d + i]) for i in range(d) for j in range(d))

    # comparison

    def __eq__(self, other):
        if not isinstance(other, CoeffMatrix):
            return NotImplemented
        return (self.shape, self.d, self.mode, self.entries) == (
            other.shape, other.d, other.mode, other.entries
        )

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash((self.shape, self.d, self.mode, self.entries)))
        return self._hash

    def close(self, other: CoeffMatrix, tol: float = DEFAULT_TOL) -> bool:
        return mat_eq(self, other, tol)

    # serialization

    def to_json(self) -> dict:
        if self.shape == DIAG:
            entries: list = [scalar_to_json(v) for v in self.entries]
        else:
            entries = [[scalar_to_json(v) for v in row] for row in self.rows()]
        return {"shape": self.shape, "d": self.d, "mode": self.mode, "entries": entries}

    @classmethod
    def from_json(cls, data: dict) -> CoeffMatrix:
        try:
            shape, d, mode, entries = data["shape"], data["d"], data["mode"], data["entries"]
        except (KeyError, TypeError) as exc:
            raise DomainError(f"matrix object needs shape, d, mode, entries: {data!r}") from exc
        if shape == FULL:
            if len(entries) != d:
                raise DomainError("full matrix needs d rows")
            return cls.full(entries, mode)
        return cls(shape, d, mode, entries)

    def __str__(self) -> str:
        if self.shape == DIAG:
            return "diag(" + ", ".join(_fmt(v) for v in self.entries) + ")"
        return "[" + "; ".join(", ".join(_fmt(v) for v in r) for r in self.rows()) + "]"

    def __repr__(self) -> str:
        return f"CoeffMatrix({self}, {self.mode})"


def _fmt(v) -> str:
    if isinstance(v, GaussianRational):
        return format_exact(v)
    return f"{v.real:.6g}{v.imag:+.6g}j"


def mat_mul(x: CoeffMatrix, y: CoeffMatrix) -> CoeffMatrix:
    return x * y


def mat_add(x: CoeffMatrix, y: CoeffMatrix) -> CoeffMatrix:
    return x + y


def mat_scale(s: Any, x: CoeffMatrix) -> CoeffMatrix:
    return x.scale(s)


def adjoint(x: CoeffMatrix) -> CoeffMatrix:
    return x.adjoint()


def mat_eq(x: CoeffMatrix, y: CoeffMatrix, tol: float = DEFAULT_TOL) -> bool:
    """Structural equality in exact mode; entrywise ``|x - y| <= tol`` in float mode."""
    x._check(y)
    if x.mode == EXACT:
        return x.entries == y.entries
    return all(abs(a - b) <= tol for a, b in zip(x.entries, y.entries))


def is_negligible(x: CoeffMatrix, tol: float = DEFAULT_TOL) -> bool:
    """Exact zero in exact mode, every entry within ``tol`` of zero in float mode."""
    if x.mode == EXACT:
        return x.is_zero()
    return x.max_abs() <= tol


_EXACT_POOL = tuple(Fraction(v) for v in ("0", "1", "-1", "2", "-2", "1/2", "-1/2"))


def sample_matrix(
    shape: str, d: int, mode: str, rng: np.random.Generator, imaginary: bool = True
) -> CoeffMatrix:
    """Random coefficient.

    Exact entries take real parts from ``{0, ±1, ±2, ±1/2}`` and, with
    ``imaginary``, imaginary parts from the same pool half of the time.
    Float entries have real and imaginary parts uniform in ``[-1, 1]``.
    """
    count = d * d if shape == FULL else d
    if mode == EXACT:
        vals = []
        for _ in range(count):
            re_part = _EXACT_POOL[int(rng.integers(0, len(_EXACT_POOL)))]
            im_part = Fraction(0)
            if imaginary and rng.integers(0, 2):
                im_part = _EXACT_POOL[int(rng.integers(0, len(_EXACT_POOL)))]
            vals.append(GaussianRational._raw(re_part, im_part))
        return CoeffMatrix._raw(shape, d, mode, tuple(vals))
    parts = rng.uniform(-1.0, 1.0, size=(count, 2))
    if not imaginary:
        parts[:, 1] = 0.0
    return CoeffMatrix._raw(shape, d, mode, tuple(complex(a, b) for a, b in parts))
