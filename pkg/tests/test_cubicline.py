import random
import warnings
from fractions import Fraction

import pytest

from ratlines.cubicline import (
    CubicForm,
    LineGuaranteeWarning,
    LineSearchFailed,
    LineWitness,
    PipelineConfig,
    PullBackError,
    base_point,
    cubic_from_trilinear,
    cubic_zero_over_K,
    find_line,
    hyperplane_basis,
    pull_back_line,
    slice_forms,
    trilinear_from_cubic,
    verify_line,
)
from ratlines.quadform import KVector, QuadFieldElement

F = Fraction


def test_trilinear_examples():
    phi = trilinear_from_cubic(CubicForm(1, {(0, 0, 0): 1}))
    assert phi.entry(0, 0, 0) == 1
    phi = trilinear_from_cubic(CubicForm(3, {(0, 1, 2): 1}))
    assert all(phi.entry(*p) == F(1, 6) for p in [(0, 1, 2), (2, 1, 0), (1, 0, 2)])
    phi = trilinear_from_cubic(CubicForm(2, {(0, 0, 1): 1}))
    assert phi.entry(0, 1, 0) == F(1, 3)
    C = CubicForm(3, {(0, 1, 2): 4, (0, 0, 0): -1, (1, 1, 2): F(2, 3)})
    assert cubic_from_trilinear(trilinear_from_cubic(C)) == C


def test_base_point_examples():
    assert base_point(CubicForm(3, {(0, 0, 0): 1, (1, 1, 1): 1, (2, 2, 2): -2})) == [1, 1, 1]
    assert base_point(CubicForm(3, {(0, 1, 2): 1})) == [1, 1, 0]  # value order 1, -1, ..., 0
    assert base_point(CubicForm(3, {(0, 0, 0): 1, (1, 1, 1): 1, (2, 2, 2): 1}), 2) == [1, -1, 0]
    assert base_point(CubicForm(2, {(0, 0, 0): 1, (1, 1, 1): 2}), 5) is None


def test_slice_examples():
    phi = trilinear_from_cubic(CubicForm(3, {(0, 1, 2): 1}))
    L, Q = slice_forms(phi, [1, 0, 0])
    assert L == [0, 0, 0]
    assert Q.coefficients() == {(1, 2): F(1, 3)}
    phi = trilinear_from_cubic(CubicForm(2, {(0, 0, 1): 1}))
    with pytest.raises(ValueError):
        slice_forms(phi, [1, 1])  # not a zero
    phi = trilinear_from_cubic(CubicForm(2, {(0, 0, 0): 1}))
    L, Q = slice_forms(phi, [0, 1])
    assert L == [0, 0] and Q.coefficients() == {}


def test_expansion_identity_small():
    C = CubicForm(4, {(0, 0, 1): 2, (1, 2, 3): -1, (3, 3, 3): 1, (0, 2, 2): 3})
    x = [F(1), F(0), F(0), F(0)]
    phi = trilinear_from_cubic(C)
    L, Q = slice_forms(phi, x)
    Y = [F(2), F(-1), F(3), F(1, 2)]
    for lam in (F(1), F(-2), F(1, 3)):
        z = [a + lam * b for a, b in zip(x, Y)]
        Ly = sum(a * b for a, b in zip(L, Y))
        assert C(z) == 3 * lam * Ly + 3 * lam ** 2 * Q(Y) + lam ** 3 * C(Y)


def test_hyperplane_examples():
    B = hyperplane_basis([1, 0, 0, 0], 1, 4)
    assert sorted(tuple(b) for b in B) == [(0, 0, 0, 1), (0, 0, 1, 0)]
    assert len(hyperplane_basis([0, 0, 0], 0, 3)) == 2
    B = hyperplane_basis([1, 1, 0], 0, 3)
    assert B == [[0, 0, 1]]


def test_cubic_zero_examples():
    one = lambda u: KVector.rational(u, 1)
    t = cubic_zero_over_K(CubicForm(2, {(0, 0, 0): 1, (1, 1, 1): 1}), [one([1, 0]), one([0, 1])], 1)
    assert t is not None
    t = cubic_zero_over_K(CubicForm(2, {(0, 0, 1): 1}), [one([1, 0]), one([0, 1])], 1)
    assert [x.re for x in t] == [1, 0]


def test_pull_back_rational_y():
    C = CubicForm(3, {(0, 1, 2): 1})
    w = pull_back_line(C, [1, 0, 0], KVector.rational([0, 1, 0], 2))
    assert verify_line(C, w)


def test_pull_back_degenerate_span():
    C = CubicForm(3, {(0, 0, 2): 1, (1, 1, 2): 1})
    y = KVector.from_parts([0, 1, 0], [1, 0, 0], 1)
    w = pull_back_line(C, [1, 0, 0], y)
    assert verify_line(C, w)
    assert {w.z1, w.z2} == {(1, 0, 0), (0, 1, 0)}


def test_pull_back_rejects_bad_identities():
    C = CubicForm(2, {(0, 0, 0): 1, (1, 1, 1): 1})
    with pytest.raises(PullBackError):
        pull_back_line(C, [1, -1], KVector.from_parts([1, 0], [0, 1], 1))


def _random_k_line_instance(rng):
    """Random cubic in the ideal (X4, X5, X3^2 + d X2^2), which vanishes on span(e1, e2 + sqrt(-d) e3)."""
    n = 5
    d = rng.choice([1, 2, 3, 5, 7])
    coeffs = {}

    def add(key, c):
        key = tuple(sorted(key))
        coeffs[key] = coeffs.get(key, 0) + c

    for lin in (3, 4):
        for i in range(n):
            for j in range(i, n):
                add((lin, i, j), rng.randint(-3, 3))
    for i in range(n):
        c = rng.randint(-3, 3)
        add((2, 2, i), c)
        add((1, 1, i), d * c)
    return CubicForm(n, coeffs), d


def test_pull_back_constructed_instances():
    rng = random.Random(3)
    for _ in range(20):
        C, d = _random_k_line_instance(rng)
        y = KVector.from_parts([0, 1, 0, 0, 0], [0, 0, 1, 0, 0], d)
        w = pull_back_line(C, [1, 0, 0, 0, 0], y)
        assert verify_line(C, w)


def test_verify_line_examples():
    assert verify_line(CubicForm(3, {(0, 1, 2): 1}), LineWitness((1, 0, 0), (0, 1, 0)))
    C = CubicForm(2, {(0, 0, 0): 1, (1, 1, 1): 1})
    assert not verify_line(C, LineWitness((1, -1), (2, -2)))
    assert not verify_line(C, LineWitness((1, -1), (1, 0)))


def test_find_line_toy():
    C = CubicForm(3, {(0, 1, 2): 1})
    with pytest.warns(LineGuaranteeWarning):
        w, attempts = find_line(C, PipelineConfig(gamma_effective=1))
    assert verify_line(C, w) and attempts[-1].stage == "done"


def test_find_line_structured():
    C = CubicForm(6, {(0, 0, 0): 1, (1, 1, 1): 1, (2, 2, 2): -2, (3, 4, 5): 1})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LineGuaranteeWarning)
        w, _ = find_line(C, PipelineConfig(gamma_effective=2, base_height=3))
    assert verify_line(C, w)


def test_find_line_failure_names_stage():
    C = CubicForm(6, {(i, i, i): c for i, c in enumerate([1, 2, 3, 4, 5, -6])})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LineGuaranteeWarning)
        with pytest.raises(LineSearchFailed) as info:
            find_line(C, PipelineConfig(gamma_effective=2, base_height=3))
    assert info.value.stage in {"base-point", "hyperplane", "space", "cubic-zero", "pull-back", "verify"}
    assert info.value.attempts


def test_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(gamma=9)
    assert PipelineConfig().k == 16
    assert PipelineConfig(gamma_effective=3).k == 3


def test_k_element_arithmetic():
    a = QuadFieldElement(1, 2, 3)
    b = QuadFieldElement(F(1, 2), -1, 3)
    assert (a * b).re == F(1, 2) + 6 and (a * b).im == -1 + 1
