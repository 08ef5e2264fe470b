from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crossfree.coeffalgebra import (
    DIAG,
    EXACT,
    FLOAT,
    FULL,
    CoeffMatrix,
    GaussianRational,
    adjoint,
    format_exact,
    is_negligible,
    mat_add,
    mat_eq,
    mat_mul,
    mat_scale,
    parse_exact,
    sample_matrix,
)
from crossfree.errors import DomainError
from crossfree.groupwords import make_rng


def as_array(m: CoeffMatrix) -> np.ndarray:
    rows = m.to_full().rows()
    return np.array([[complex(v) for v in r] for r in rows])


KINDS = [(DIAG, EXACT), (FULL, EXACT), (DIAG, FLOAT), (FULL, FLOAT)]
seeds = st.integers(0, 2**32 - 1)


def test_examples():
    one = CoeffMatrix.identity(2)
    x = CoeffMatrix.diag(["1/2", "3-i"])
    assert mat_mul(one, x) == x
    assert mat_mul(CoeffMatrix.diag([1, 2]), CoeffMatrix.diag([4, 3])) == CoeffMatrix.diag([4, 6])
    assert mat_scale(0, x) == CoeffMatrix.zero(2)
    assert adjoint(one) == one
    assert adjoint(CoeffMatrix.diag(["i", 2])) == CoeffMatrix.diag(["-i", 2])
    assert mat_eq(x, x, 0)
    assert mat_eq(CoeffMatrix.diag(["1/2"]), CoeffMatrix.diag(["2/4"]), 0)
    a = CoeffMatrix.diag([1.0], FLOAT)
    assert mat_eq(a, CoeffMatrix.diag([1.0 + 1e-12], FLOAT), 1e-9)
    assert not mat_eq(a, CoeffMatrix.diag([1.0 + 1e-6], FLOAT), 1e-9)


def test_exact_ignores_tolerance():
    a, b = CoeffMatrix.diag(["1"]), CoeffMatrix.diag(["1+1/1000000000000*i"])
    assert not mat_eq(a, b, 1.0)
    assert not is_negligible(b - a, 1.0)


def test_mismatch_errors():
    with pytest.raises(DomainError):
        CoeffMatrix.identity(2) * CoeffMatrix.identity(3)
    with pytest.raises(DomainError):
        CoeffMatrix.identity(2) + CoeffMatrix.identity(2, FULL)
    with pytest.raises(DomainError):
        mat_eq(CoeffMatrix.identity(2), CoeffMatrix.identity(2, mode=FLOAT))
    with pytest.raises(DomainError):
        CoeffMatrix.diag([0.5])
    with pytest.raises(DomainError):
        CoeffMatrix(DIAG, 0, EXACT, [])


@pytest.mark.parametrize(
    "text,re,im",
    [("1/2", "1/2", 0), ("-i", 0, -1), ("3-2/5*i", 3, "-2/5"), ("2/4+i", "1/2", 1), ("0", 0, 0)],
)
def test_parse_exact(text, re, im):
    x = parse_exact(text)
    assert (x.re, x.im) == (Fraction(re), Fraction(im))
    assert parse_exact(format_exact(x)) == x


@pytest.mark.parametrize("bad", ["", "1/0", "abc", "1//2"])
def test_parse_exact_rejects(bad):
    with pytest.raises(DomainError):
        parse_exact(bad)


@given(st.fractions(), st.fractions())
def test_exact_format_round_trip(re, im):
    x = GaussianRational(re, im)
    assert parse_exact(format_exact(x)) == x
    assert x.re.denominator > 0


@pytest.mark.parametrize("shape,mode", KINDS)
@given(seed=seeds)
def test_ring_axioms_match_numpy(shape, mode, seed):
    rng = make_rng(seed)
    x, y, z = (sample_matrix(shape, 3, mode, rng) for _ in range(3))
    eq = (lambda a, b: a == b) if mode == EXACT else (lambda a, b: mat_eq(a, b, 1e-9))
    assert eq((x * y) * z, x * (y * z))
    assert eq(x * (y + z), x * y + x * z)
    assert eq((x + y) * z, x * z + y * z)
    assert eq(x + y, y + x)
    assert eq(x * x.one(), x) and eq(x.one() * x, x)
    assert np.allclose(as_array(x * y), as_array(x) @ as_array(y), atol=1e-12)
    assert np.allclose(as_array(mat_add(x, y)), as_array(x) + as_array(y), atol=1e-12)
    assert np.allclose(as_array(x.adjoint()), as_array(x).conj().T, atol=0)


@pytest.mark.parametrize("shape,mode", KINDS)
@given(seed=seeds)
def test_adjoint_is_star_involution(shape, mode, seed):
    rng = make_rng(seed)
    x, y = sample_matrix(shape, 2, mode, rng), sample_matrix(shape, 2, mode, rng)
    s = GaussianRational(1, 2) if mode == EXACT else complex(0.3, -1.1)
    eq = (lambda a, b: a == b) if mode == EXACT else (lambda a, b: mat_eq(a, b, 1e-9))
    assert adjoint(adjoint(x)) == x
    assert eq(adjoint(x * y), adjoint(y) * adjoint(x))
    assert eq(adjoint(x + y), adjoint(x) + adjoint(y))
    assert eq(adjoint(x.scale(s)), adjoint(x).scale(s.conjugate()))


@given(seed=seeds)
def test_diagonal_embedding_is_star_homomorphism(seed):
    rng = make_rng(seed)
    x, y = sample_matrix(DIAG, 3, EXACT, rng), sample_matrix(DIAG, 3, EXACT, rng)
    assert (x * y).to_full() == x.to_full() * y.to_full()
    assert (x + y).to_full() == x.to_full() + y.to_full()
    assert x.adjoint().to_full() == x.to_full().adjoint()
    assert x.one().to_full() == CoeffMatrix.identity(3, FULL)


@pytest.mark.parametrize("shape,mode", KINDS)
def test_json_round_trip(shape, mode):
    rng = make_rng(5)
    for _ in range(20):
        x = sample_matrix(shape, 2, mode, rng)
        assert CoeffMatrix.from_json(x.to_json()) == x


def test_json_layout():
    assert CoeffMatrix.diag(["1/2", "i"]).to_json() == {
        "shape": "diag", "d": 2, "mode": "exact", "entries": ["1/2", "1*i"],
    }
    assert CoeffMatrix.full([[1, 0], [0, 1]], FLOAT).to_json()["entries"] == [
        [[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]],
    ]


def test_scalar_and_zero_predicates():
    assert CoeffMatrix.scalar_matrix(3, 2, FULL).is_scalar()
    assert not CoeffMatrix.diag([1, 2]).is_scalar()
    assert CoeffMatrix.zero(2).is_zero()
    assert is_negligible(CoeffMatrix.diag([1e-12], FLOAT), 1e-9)
