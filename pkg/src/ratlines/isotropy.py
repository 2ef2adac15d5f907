"""Rational isotropic vectors, decided by local invariants and built exactly.

A diagonal form is reduced to squarefree integer coefficients; ternaries go to
Legendre's descent (sympy), larger forms are split as
``<a1, a2, -t> + <a3, ..., am, t>`` for a small integer ``t`` that makes both
halves locally isotropic everywhere.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Optional, Sequence

from sympy import symbols
from sympy.solvers.diophantine.diophantine import diop_ternary_quadratic_normal

from .arith import (
    REAL,
    as_fraction,
    crt_combine,
    hasse_invariant,
    is_prime,
    is_rational_square,
    prime_divisors,
    rational_sqrt,
    squarefree_part,
)
from .local import isotropic_by_invariants
from .quadform import QuadraticForm, diagonalize, kernel, mat_vec

SMALL_T_LIMIT = 64
PRIME_SEARCH_STEPS = 10**6
SMALL_BOX_SIZE = 3000
WIDE_BOX_SIZE = 60000
LARGE_ZERO = 10**6

_X, _Y, _Z = symbols("x y z", integer=True)


class NoRationalZero(ArithmeticError):
    pass


def _places(coeffs: Sequence[int]):
    ps = {2}
    for a in coeffs:
        ps.update(prime_divisors(a))
    return [REAL] + sorted(ps)


def diagonal_isotropic_at(coeffs: Sequence[int], place) -> bool:
    """Isotropy of ``<coeffs>`` (nonzero integers) over Q_p or R."""
    if place == REAL:
        return any(a > 0 for a in coeffs) and any(a < 0 for a in coeffs)
    det = math.prod(coeffs)
    return isotropic_by_invariants(len(coeffs), Fraction(det), hasse_invariant(coeffs, place), place)


def diagonal_isotropic_over_Q(coeffs: Sequence[int]) -> bool:
    """Hasse-Minkowski: isotropic over Q iff isotropic at every place."""
    m = len(coeffs)
    if any(a == 0 for a in coeffs):
        return True
    if m <= 1:
        return False
    if m == 2:
        return is_rational_square(Fraction(-coeffs[0] * coeffs[1]))
    if m >= 5:
        return diagonal_isotropic_at(coeffs, REAL)
    # for m = 3, 4 only primes dividing 2*prod(a) can obstruct
    return all(diagonal_isotropic_at(coeffs, v) for v in _places(coeffs))


def _check(coeffs, x):
    if sum(a * t * t for a, t in zip(coeffs, x)) != 0 or not any(x):
        raise AssertionError(f"bad zero {x} of {coeffs}")
    return x


def _primitive(x):
    g = math.gcd(*x)
    return [t // g for t in x] if g else list(x)


def _ternary(a: int, b: int, c: int) -> Optional[list[int]]:
    """Zero of ``a x² + b y² + c z²`` (squarefree, nonzero) or None."""
    coeffs = [a, b, c]
    if not diagonal_isotropic_over_Q(coeffs):
        return None
    # make coefficients pairwise coprime: a = g a', b = g b'  ->  a' x² + b' y² + g c z'²
    # with z = g z'; scales[i] records x_i = scales[i] * x_i'
    scales = [Fraction(1)] * 3
    cs = list(coeffs)
    changed = True
    while changed:
        changed = False
        for i in range(3):
            for j in range(i + 1, 3):
                g = math.gcd(cs[i], cs[j])
                if g > 1:
                    k = 3 - i - j
                    cs[i] //= g
                    cs[j] //= g
                    cs[k] *= g
                    scales[k] *= g
                    sf = squarefree_part(cs[k])
                    r = math.isqrt(cs[k] // sf)
                    cs[k] = sf
                    # g * c_k z_k² = sf (r z_k)² so the new variable is r z_k
                    scales[k] /= r
                    changed = True
    sol = diop_ternary_quadratic_normal(cs[0] * _X**2 + cs[1] * _Y**2 + cs[2] * _Z**2)
    if sol[0] is None:
        raise NoRationalZero(f"Legendre descent failed for {coeffs}")
    # new variable w_k = x_k / scales[k]
    x = [Fraction(int(s)) * sc for s, sc in zip(sol, scales)]
    den = math.lcm(*(t.denominator for t in x))
    return _check(coeffs, _primitive([int(t * den) for t in x]))


def _good_split_value(a: Sequence[int], t: int) -> bool:
    first = [a[0], a[1], -t]
    second = list(a[2:]) + [t]
    for half in (first, second):
        if len(half) >= 5:
            if not diagonal_isotropic_at(half, REAL):
                return False
            continue
        if not all(diagonal_isotropic_at(half, v) for v in _places(half)):
            return False
    return True


def _class_representatives(place):
    if place == REAL:
        return [1, -1]
    if place == 2:
        return [1, 3, 5, 7, 2, 6, 10, 14]
    n = next(r for r in range(2, place) if pow(r, (place - 1) // 2, place) == place - 1)
    return [1, n, place, place * n]


def _constructed_split_value(a: Sequence[int]) -> Optional[int]:
    """A squarefree ``t`` with prescribed square classes at the bad places.

    At each place dividing ``2 * prod(a)`` (and at infinity) pick a class that
    both halves accept; then ``t = sign * prod(p^e_p) * q`` with a prime ``q``
    in the matching residue class. The halves are ternary or larger, so the one
    remaining place ``q`` is handled by the product formula.
    """
    places = _places(a)
    sign, t0, congruences = 1, 1, []
    for v in places:
        ok = [r for r in _class_representatives(v) if _halves_ok_at(a, r, v)]
        if not ok:
            return None
        r = ok[0]
        if v == REAL:
            sign = r
            continue
        e = 1 if r % v == 0 else 0
        t0 *= v**e
        congruences.append((v, 8 if v == 2 else v, r // v**e))
    t0 *= sign
    residues = []
    for p, mod, unit in congruences:
        rest = t0 // p if t0 % p == 0 else t0
        residues.append((unit * pow(rest % mod, -1, mod) % mod, mod))
    target = crt_combine(residues)
    q = target.value or target.modulus
    for _ in range(PRIME_SEARCH_STEPS):
        if q == 1 or is_prime(q):
            t = t0 * q
            if _good_split_value(a, t):
                return t
        q += target.modulus
    return None


def _halves_ok_at(a, t, place) -> bool:
    return all(diagonal_isotropic_at(h, place) for h in ([a[0], a[1], -t], list(a[2:]) + [t]))


def _small_zero(a: Sequence[int]) -> Optional[list[int]]:
    """Exhaustive search over a box of about SMALL_BOX_SIZE points; keeps easy answers small."""
    m = len(a)
    h = 1
    while (2 * (h + 1) + 1) ** m <= SMALL_BOX_SIZE:
        h += 1
    if (2 * h + 1) ** m > SMALL_BOX_SIZE:
        return None
    for x in itertools.product(range(h + 1), *([range(-h, h + 1)] * (m - 1))):
        if any(x) and math.gcd(*x) == 1 and sum(c * t * t for c, t in zip(a, x)) == 0:
            return list(x)
    return None


def _split_values(a):
    for t in range(1, SMALL_T_LIMIT + 1):
        for s in (t, -t):
            if squarefree_part(s) == s and _good_split_value(a, s):
                yield s
    t = _constructed_split_value(a)
    if t is not None:
        yield t


def solve_diagonal(coeffs: Sequence[int]) -> Optional[list[int]]:
    """Primitive integer zero of ``Σ a_i x_i²`` for squarefree integers ``a_i``, or None."""
    a = [int(c) for c in coeffs]
    m = len(a)
    for i, c in enumerate(a):
        if c == 0:
            return [int(j == i) for j in range(m)]
    if not diagonal_isotropic_over_Q(a):
        return None
    if m == 2:
        # -a1 a2 a square with both squarefree forces a2 = -a1
        return _check(a, [1, 1])
    small = _small_zero(a)
    if small is not None:
        return small
    if m == 3:
        return _ternary(*a)
    if m >= 6:
        # five coordinates of mixed sign already carry a zero
        first_pos = next(i for i in range(m) if a[i] > 0)
        first_neg = next(i for i in range(m) if a[i] < 0)
        rest = [i for i in range(m) if i not in (first_pos, first_neg)]
        idx = sorted([first_pos, first_neg] + rest[:3])
        sub = solve_diagonal([a[i] for i in idx])
        x = [0] * m
        for i, v in zip(idx, sub):
            x[i] = v
        return _check(a, x)
    # m in (4, 5): try the leading subform first, it is often enough
    for drop in range(m - 1, -1, -1):
        idx = [i for i in range(m) if i != drop]
        sub_coeffs = [a[i] for i in idx]
        if diagonal_isotropic_over_Q(sub_coeffs):
            sub = solve_diagonal(sub_coeffs)
            x = [0] * m
            for i, v in zip(idx, sub):
                x[i] = v
            return _check(a, x)
    for t in _split_values(a):
        y = solve_diagonal([a[0], a[1], -t])
        z = solve_diagonal(list(a[2:]) + [t])
        # a1 y1² + a2 y2² = t y3², Σ a_i z_i² = -t z_last²
        if y[2] == 0:
            return _check(a, [y[0], y[1]] + [0] * (m - 2))
        if z[-1] == 0:
            return _check(a, [0, 0] + z[:-1])
        x = [y[0] * z[-1], y[1] * z[-1]] + [zi * y[2] for zi in z[:-1]]
        return _check(a, _primitive(x))
    raise NoRationalZero(f"no splitting value found for {a}")


def _squarefree_diagonal(coeffs: Sequence[Fraction]):
    """Squarefree integers ``a_i`` and rationals ``s_i`` with ``c_i = a_i s_i²``."""
    a, s = [], []
    for c in coeffs:
        c = as_fraction(c)
        if c == 0:
            a.append(0)
            s.append(Fraction(1))
            continue
        sf = squarefree_part(c.numerator * c.denominator)
        a.append(sf)
        s.append(rational_sqrt(c / sf))
    return a, s


def is_isotropic_over_Q(Q: QuadraticForm) -> bool:
    D = diagonalize(Q)
    a, _ = _squarefree_diagonal(D.coefficients)
    return diagonal_isotropic_over_Q(a)


def _small_gram_zero(Q: QuadraticForm, box: int = 4 * SMALL_BOX_SIZE) -> Optional[list[Fraction]]:
    """Smallest-box zero of the form in its own coordinates; descent output can be huge."""
    n = Q.n
    Gi = _integer_gram(Q)
    h = 1
    while (2 * (h + 1) + 1) ** n <= box:
        h += 1
    if 3 ** n > box:
        return None
    for x in itertools.product(range(h + 1), *([range(-h, h + 1)] * (n - 1))):
        if not any(x) or math.gcd(*x) != 1:
            continue
        if sum(x[i] * sum(Gi[i][j] * x[j] for j in range(n)) for i in range(n)) == 0:
            return [Fraction(t) for t in x]
    return None


def _integer_gram(Q: QuadraticForm):
    G = [[as_fraction(t) for t in row] for row in Q.gram]
    den = math.lcm(*(t.denominator for row in G for t in row))
    return [[int(t * den) for t in row] for row in G]


def _last_coordinate_zero(Q: QuadraticForm, box: int = WIDE_BOX_SIZE) -> Optional[list[int]]:
    """Enumerate all but one coordinate and solve the quadratic for the last one."""
    n = Q.n
    G = _integer_gram(Q)
    last = max(range(n), key=lambda i: G[i][i] != 0)
    rest = [i for i in range(n) if i != last]
    h = 1
    while (2 * (h + 1) + 1) ** (n - 1) <= box:
        h += 1
    a = G[last][last]
    for y in itertools.product(range(h + 1), *([range(-h, h + 1)] * (n - 2))):
        if not any(y):
            continue
        b = 2 * sum(G[last][i] * t for i, t in zip(rest, y))
        c = sum(t * sum(G[i][j] * u for j, u in zip(rest, y)) for i, t in zip(rest, y))
        if a == 0:
            if not b:
                continue
            t = Fraction(-c, b)
        else:
            disc = b * b - 4 * a * c
            if disc < 0 or math.isqrt(disc) ** 2 != disc:
                continue
            t = Fraction(-b + math.isqrt(disc), 2 * a)
        x = [Fraction(0)] * n
        for i, v in zip(rest, y):
            x[i] = Fraction(v)
        x[last] = t
        den = math.lcm(*(v.denominator for v in x))
        return _primitive([int(v * den) for v in x])
    return None


def rational_isotropic_vector(Q: QuadraticForm) -> Optional[list[Fraction]]:
    """Nonzero ``x ∈ Q^n`` with ``Q(x) = 0``, or None when Q is anisotropic over Q."""
    if Q.n == 0:
        return None
    ker = kernel(Q.matrix())
    if ker:
        return [as_fraction(t) for t in ker[0]]
    D = diagonalize(Q)
    a, s = _squarefree_diagonal(D.coefficients)
    if not diagonal_isotropic_over_Q(a):
        return None
    small = _small_gram_zero(Q)
    if small is not None:
        return small
    z = solve_diagonal(a)
    y = [Fraction(zi) / si for zi, si in zip(z, s)]
    x = mat_vec(D.transform.matrix, y)
    x = [as_fraction(t) for t in x]
    den = math.lcm(*(t.denominator for t in x))
    x = _primitive([int(t * den) for t in x])
    if max(abs(t) for t in x) > LARGE_ZERO:
        x = _last_coordinate_zero(Q) or x
    if Q([Fraction(t) for t in x]) != 0:
        raise AssertionError("rational zero failed exact check")
    return [Fraction(t) for t in x]
