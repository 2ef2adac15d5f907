from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ratlines.isotropy import rational_isotropic_vector
from ratlines.padic import PAdicField, RationalField
from ratlines.quadform import (
    KVector,
    QuadraticField,
    QuadraticForm,
    SingularForm,
    bilinear,
    congruence,
    diagonalize,
    evaluate,
    integral_kernel,
    padic_normalize,
    radical_split,
    residual_det_check,
    restrict,
    split_hyperbolic,
)

HALF = Fraction(1, 2)


def test_gram_convention():
    Q = QuadraticForm.from_coefficients(2, {(0, 1): 1})
    assert Q.gram == ((0, HALF), (HALF, 0))
    assert Q.det() == Fraction(-1, 4)


def test_evaluate_examples():
    Q = QuadraticForm.from_coefficients(2, {(0, 1): 1})
    assert evaluate(Q, [1, 1]) == 1
    x = KVector.from_parts([1, 0], [0, 1], 1)
    K = QuadraticField(1)
    Qk = QuadraticForm([[K.coerce(t) for t in r] for r in QuadraticForm.diagonal([1, 1]).gram])
    assert K.is_zero(evaluate(Qk, list(x.entries)))
    assert evaluate(QuadraticForm.diagonal([1, 1, 3, -6]), [1, 1, 1, 1]) == -1


def _check_diagonal(Q):
    D = diagonalize(Q)
    T = [list(r) for r in D.transform.matrix]
    G = congruence(Q.matrix(), T)
    n = Q.n
    for i in range(n):
        for j in range(n):
            assert G[i][j] == (D.coefficients[i] if i == j else 0)
    return D


def test_diagonalize_examples():
    D = _check_diagonal(QuadraticForm.from_coefficients(2, {(0, 1): 1}))
    assert D.coefficients[0] * D.coefficients[1] < 0
    D = _check_diagonal(QuadraticForm.diagonal([2, 3]))
    assert D.coefficients == (2, 3)
    D = _check_diagonal(QuadraticForm.from_coefficients(2, {(0, 0): 1, (0, 1): 2, (1, 1): 1}))
    assert list(D.coefficients) == [1, 0]


def test_padic_normalize_example():
    N = padic_normalize(diagonalize(QuadraticForm.diagonal([1, 1, 3, -6])), 3)
    assert N.units == (1, 1, 1, -2)
    assert N.exponents == (0, 0, 1, 1)
    N = padic_normalize(diagonalize(QuadraticForm.diagonal([Fraction(4, 9)])), 3)
    assert N.exponents == (0,)


def _check_split(Q, dec, field=None):
    f = field or RationalField()
    T = [list(r) for r in dec.transform.matrix]
    G = congruence([[f.coerce(t) for t in r] for r in Q.gram], T)
    want = dec.expected_gram(f)
    for i in range(Q.n):
        for j in range(Q.n):
            assert f.is_zero(G[i][j] - want[i][j])


def test_split_already_split():
    Q = QuadraticForm.from_coefficients(5, {(0, 1): 1, (2, 2): 1, (3, 3): 1, (4, 4): 1})
    dec = split_hyperbolic(Q, 1, rational_isotropic_vector)
    _check_split(Q, dec)
    assert dec.residual.n == 3
    assert residual_det_check(Q, dec, 3) is True
    assert residual_det_check(Q, dec, 2) is None


def test_split_with_given_vector():
    Q = QuadraticForm.diagonal([1, -1, 1, 1, 1])
    dec = split_hyperbolic(Q, 1, lambda F: [1, 1, 0, 0, 0] if F.n == 5 else None)
    _check_split(Q, dec)
    assert dec.residual.det() != 0


def test_split_over_gaussian_field():
    K = QuadraticField(1)
    Q = QuadraticForm.diagonal([1, 1, 1, 1, 1])
    i = K.sqrt_minus_d()
    dec = split_hyperbolic(Q, 1, lambda F: [K.one(), i, K.zero(), K.zero(), K.zero()], K)
    _check_split(Q, dec, K)


def test_split_rejects_singular():
    with pytest.raises(SingularForm):
        split_hyperbolic(QuadraticForm.diagonal([1, -1, 0]), 1, rational_isotropic_vector)


def test_radical_split_examples():
    part, rad, _ = radical_split(QuadraticForm.from_coefficients(2, {(0, 0): 1, (0, 1): 2, (1, 1): 1}))
    assert (part.n, rad) == (1, 1)
    part, rad, _ = radical_split(QuadraticForm.from_coefficients(3, {(0, 1): 1}))
    assert (part.n, rad) == (2, 1)
    part, rad, _ = radical_split(QuadraticForm.diagonal([1, 2, 3]))
    assert (part.n, rad) == (3, 0)


def test_restrict_examples():
    assert restrict(QuadraticForm.diagonal([1, 1, 1]), [[1, 0, 0], [0, 1, 0]]).gram == ((1, 0), (0, 1))
    assert restrict(QuadraticForm.from_coefficients(2, {(0, 1): 1}), [[1, 1]]).gram == ((1,),)
    assert restrict(QuadraticForm.diagonal([1, -1]), [[1, 1]]).gram == ((0,),)


def test_integral_kernel_is_saturated():
    A = [[1000003, 999999, 7, 1]]
    B = integral_kernel(A)
    assert len(B) == 3
    for b in B:
        assert sum(a * t for a, t in zip(A[0], b)) == 0
        assert all(t.denominator == 1 for t in b)


coeff = st.integers(-5, 5)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(st.just(n), st.lists(coeff, min_size=n * (n + 1) // 2, max_size=n * (n + 1) // 2))))
def test_diagonalize_identity(data):
    n, cs = data
    it = iter(cs)
    Q = QuadraticForm.from_coefficients(n, {(i, j): next(it) for i in range(n) for j in range(i, n)})
    _check_diagonal(Q)


def test_bilinear_polarisation():
    Q = QuadraticForm.from_coefficients(3, {(0, 0): 2, (0, 1): -3, (1, 2): 5, (2, 2): -1})
    x, y = [1, 2, -1], [0, 3, 4]
    s = [a + b for a, b in zip(x, y)]
    assert 2 * bilinear(Q, x, y) == evaluate(Q, s) - evaluate(Q, x) - evaluate(Q, y)


def test_padic_diagonalize_unimodular_gives_units():
    # after the first pivot the remaining diagonal is divisible by 3 but an off-diagonal entry is not
    Q = QuadraticForm.from_coefficients(3, {(0, 0): -1, (0, 1): -4, (0, 2): 1, (1, 1): 2, (1, 2): -3, (2, 2): -4})
    assert Q.det().numerator % 3
    D = diagonalize(Q, PAdicField(3, 20))
    assert [c.valuation for c in D.coefficients] == [0, 0, 0]


def test_split_transform_only_involves_bad_primes():
    Q = QuadraticForm.from_coefficients(5, {(0, 0): 7, (0, 3): 5, (1, 2): -3, (2, 2): 4, (3, 4): 2, (4, 4): -5})
    det = Q.det()
    dec = split_hyperbolic(Q, 1, rational_isotropic_vector)
    assert congruence(Q.matrix(), [list(r) for r in dec.transform.matrix]) == dec.expected_gram()
    for p in (3, 5, 7, 11, 13, 17, 19, 23):
        if (det.numerator * det.denominator) % p:
            assert residual_det_check(Q, dec, p) is True
