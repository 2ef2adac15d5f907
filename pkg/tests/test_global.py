import itertools
import random
from fractions import Fraction

import pytest

from ratlines.globalspace import (
    NoAdmissibleField,
    SearchBudget,
    SpaceWitness,
    binary_piece,
    choose_field,
    decide_space_over_Q,
    find_space,
    isotropic_vector_over_K,
    verify_space_witness,
)
from ratlines.isotropy import (
    diagonal_isotropic_over_Q,
    is_isotropic_over_Q,
    rational_isotropic_vector,
    solve_diagonal,
)
from ratlines.quadform import KVector, QuadraticForm

COUNTER = QuadraticForm.from_coefficients(
    8, {(0, 0): 1, (1, 1): 1, (2, 2): 3, (3, 3): -6, (4, 5): 1, (6, 7): 1}
)


def K(u, v, d):
    return KVector.from_parts(u, v, d)


# --- rational zeros -------------------------------------------------------------------

@pytest.mark.parametrize("coeffs,iso", [
    ([1, 1, -2], True), ([1, 1, 1], False), ([1, 1, 3, -6], False), ([1, -1], True),
    ([3, -273, 1547, -53295], True), ([1, 1, 1, 1, -7], True), ([2, 3, -5, 7, -11, 13], True),
])
def test_solve_diagonal(coeffs, iso):
    assert diagonal_isotropic_over_Q(coeffs) is iso
    z = solve_diagonal(coeffs)
    if iso:
        assert any(z) and sum(c * t * t for c, t in zip(coeffs, z)) == 0
    else:
        assert z is None


def _small_zero_exists(Q, h):
    return any(
        any(x) and Q([Fraction(t) for t in x]) == 0
        for x in itertools.product(range(-h, h + 1), repeat=Q.n)
    )


def test_rational_zero_random_forms():
    rng = random.Random(11)
    for _ in range(60):
        n = rng.randint(2, 5)
        Q = QuadraticForm.from_coefficients(n, {(i, j): rng.randint(-4, 4) for i in range(n) for j in range(i, n)})
        x = rational_isotropic_vector(Q)
        if x is None:
            assert not is_isotropic_over_Q(Q)
            assert not _small_zero_exists(Q, 2)
        else:
            assert any(x) and Q(x) == 0


# --- fields and binary pieces -----------------------------------------------------

def test_isotropic_vector_over_K_examples():
    x = isotropic_vector_over_K(QuadraticForm.diagonal([1, 1]), 1)
    assert x is not None
    x = isotropic_vector_over_K(QuadraticForm.diagonal([1, 2]), 2)
    assert x is not None
    assert isotropic_vector_over_K(QuadraticForm.diagonal([1, 1, 3, -6]), 5, SearchBudget((4, 10))) is None


def test_binary_piece_ternary():
    Q = QuadraticForm.diagonal([1, 1, 1])
    u, v = binary_piece(Q, 1)
    assert Q(u) == Q(v) and sum(a * b for a, b in zip(u, v)) == 0


def test_choose_field_sum_of_five_squares():
    c = choose_field(QuadraticForm.diagonal([1] * 5), 2)
    assert c.d == 1


def test_find_space_sum_of_five_squares():
    Q = QuadraticForm.diagonal([1] * 5)
    W = find_space(Q, 2)
    assert W.d == 1 and verify_space_witness(Q, W)
    given = SpaceWitness(1, (K([1, 0, 0, 0, 0], [0, 1, 0, 0, 0], 1), K([0, 0, 1, 0, 0], [0, 0, 0, 1, 0], 1)))
    assert verify_space_witness(Q, given)


def test_verify_examples():
    Q = QuadraticForm.diagonal([1] * 5)
    w = SpaceWitness(1, (K([3, 0, 0, 0, 0], [0, 3, 0, 0, 0], 1), K([0, 0, 1, 1, 0], [0, 0, -1, 1, 0], 1)))
    assert verify_space_witness(Q, w)
    assert not verify_space_witness(QuadraticForm.diagonal([1, 1]), SpaceWitness(1, (K([1, 0], [0, 0], 1),)))
    # dependent basis
    x = K([1, 0, 0, 0, 0], [0, 1, 0, 0, 0], 1)
    assert not verify_space_witness(Q, SpaceWitness(1, (x, x)))
    assert not verify_space_witness(Q, SpaceWitness(4, (x,)))


def test_find_space_split_forms():
    Q = QuadraticForm.from_coefficients(5, {(0, 1): 1, (2, 3): 1, (4, 4): 1})
    W = find_space(Q, 2)
    assert verify_space_witness(Q, W)
    Q = QuadraticForm.from_coefficients(3, {(0, 1): 1})
    W = find_space(Q, 1)
    assert verify_space_witness(Q, W) and W.d == 1


def test_find_space_seven_variables():
    Q = QuadraticForm.diagonal([1, 1, 2, 3, 7, 11, -1])
    W = find_space(Q, 3)
    assert W.k == 3 and verify_space_witness(Q, W)


def test_counterexample_forces_d2_and_fails_at_3():
    with pytest.raises(NoAdmissibleField) as info:
        find_space(COUNTER, 4)
    assert info.value.d == 2 and info.value.place == 3


def test_find_space_rejects_too_large_k():
    with pytest.raises(NoAdmissibleField):
        find_space(QuadraticForm.diagonal([1, 1, 1]), 2)


def test_decide_examples():
    Q = QuadraticForm.from_coefficients(6, {(0, 1): 1, (2, 3): 1, (4, 5): 1})
    assert decide_space_over_Q(Q, 3)
    assert not decide_space_over_Q(QuadraticForm.diagonal([1] * 5), 1)
    assert not decide_space_over_Q(QuadraticForm.diagonal([1, 1, 3, -6]), 1)


def test_find_space_is_deterministic():
    Q = QuadraticForm.from_coefficients(5, {(0, 0): 2, (0, 3): -3, (1, 2): 5, (2, 2): -1, (3, 4): 4, (4, 4): 1})
    a, b = find_space(Q, 2), find_space(Q, 2)
    assert a.d == b.d and a.basis == b.basis
