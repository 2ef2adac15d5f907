import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ratlines.arith import (
    REAL,
    IncompatibleCongruences,
    NotALocalSquare,
    crt_combine,
    factorize,
    hensel_sqrt,
    hilbert_symbol,
    is_square_in_qp,
    jacobi_symbol,
    m_p,
    padic_valuation,
    squarefree_part,
)


@pytest.mark.parametrize("a,m,want", [(-2, 3, 1), (1, 15, 1), (2, 7, 1), (3, 7, -1)])
def test_jacobi_examples(a, m, want):
    assert jacobi_symbol(a, m) == want


def test_crt_examples():
    r = crt_combine([(7, 8), (1, 3)])
    assert (r.value, r.modulus) == (7, 24)
    r = crt_combine([(2, 5)])
    assert (r.value, r.modulus) == (2, 5)
    with pytest.raises(IncompatibleCongruences):
        crt_combine([(1, 4), (3, 4)])


@pytest.mark.parametrize("q,p,want", [(-18, 3, 2), (1, 5, 0), (Fraction(3, 4), 2, -2)])
def test_valuation_examples(q, p, want):
    assert padic_valuation(q, p) == want


def test_factorization_examples():
    f = factorize(-18)
    assert f.sign == -1 and f.factors == ((2, 1), (3, 2))
    assert squarefree_part(-18) == -2
    assert factorize(1).factors == ()
    assert squarefree_part(1) == 1
    assert factorize(360).factors == ((2, 3), (3, 2), (5, 1))
    assert squarefree_part(360) == 10


@pytest.mark.parametrize("q,p,want", [(-2, 3, True), (9, 3, True), (3, 3, False), (17, 2, True), (3, 2, False)])
def test_local_squares(q, p, want):
    assert is_square_in_qp(q, p) is want


def test_hensel_examples():
    assert hensel_sqrt(-2, 3, 4) == 22
    assert hensel_sqrt(1, 7, 5) == 1
    assert hensel_sqrt(17, 2, 6) == 9
    with pytest.raises(NotALocalSquare):
        hensel_sqrt(3, 7, 4)


def test_hilbert_examples():
    assert hilbert_symbol(-1, -1, 2) == -1
    assert hilbert_symbol(-1, -1, REAL) == -1
    assert hilbert_symbol(1, 7, 3) == 1
    assert hilbert_symbol(-1, 3, 3) == -1


def test_m_p():
    assert m_p(2) == 8 and m_p(3) == 3 and m_p(13) == 13


nonzero = st.integers(-300, 300).filter(lambda x: x != 0)


@settings(max_examples=200, deadline=None)
@given(nonzero, nonzero)
def test_hilbert_symmetric_and_norm(a, b):
    for p in (REAL, 2, 3, 5, 7):
        assert hilbert_symbol(a, b, p) == hilbert_symbol(b, a, p)
        assert hilbert_symbol(a, -a, p) == 1


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10**12))
def test_factorize_round_trip(n):
    f = factorize(n)
    assert f.value() == n
    s = squarefree_part(n)
    q, r = divmod(n, s)
    assert r == 0 and math.isqrt(q) ** 2 == q
    assert all(e == 1 for _, e in factorize(s).factors)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([3, 5, 7, 11, 13]), st.integers(1, 10**6))
def test_hensel_certifies(p, a):
    if a % p == 0 or not is_square_in_qp(a, p):
        return
    r = hensel_sqrt(a, p, 16)
    assert (r * r - a) % p ** 16 == 0
