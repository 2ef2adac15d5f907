"""Exact integer and rational number theory used by every other module.

Rationals are :class:`fractions.Fraction` throughout. Primes are plain ``int``;
the real place is the string ``"inf"`` (see :data:`REAL`).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import sympy

REAL = "inf"



class NotALocalSquare(ValueError):
    pass


class IncompatibleCongruences(ValueError):
    def __init__(self, first, second):
        super().__init__(f"incompatible congruences {first[0]} mod {first[1]} and {second[0]} mod {second[1]}")
        self.pair = (first, second)


def as_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    return Fraction(q)


@dataclass(frozen=True)
class ResidueClass:
    value: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        if not 0 <= self.value < self.modulus:
            object.__setattr__(self, "value", self.value % self.modulus)

    def __contains__(self, n: int) -> bool:
        return (n - self.value) % self.modulus == 0


@dataclass(frozen=True)
class PrimeFactorization:
    sign: int
    factors: tuple[tuple[int, int], ...]

    def value(self) -> int:
        n = self.sign
        for p, e in self.factors:
            n *= p**e
        return n

    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def __str__(self):
        parts = ["-1"] if self.sign < 0 else []
        parts += [f"{p}^{e}" if e > 1 else str(p) for p, e in self.factors]
        return " * ".join(parts) or "1"


# --- primality and factoring -------------------------------------------------

def is_prime(n: int) -> bool:
    return n >= 2 and bool(sympy.isprime(n))


@functools.lru_cache(maxsize=65536)
def factorize(n: int) -> PrimeFactorization:
    """Prime factorization via sympy's factorint (trial division, rho, p-1, ECM)."""
    n = int(n)
    if n == 0:
        raise ValueError("cannot factor 0")
    sign = -1 if n < 0 else 1
    found = sympy.factorint(abs(n))
    return PrimeFactorization(sign, tuple(sorted((int(p), int(e)) for p, e in found.items())))


def squarefree_part(n: int) -> int:
    """Signed product of the primes dividing ``n`` to an odd power."""
    f = factorize(n)
    out = f.sign
    for p, e in f.factors:
        if e % 2:
            out *= p
    return out


def squarefree_class(q) -> int:
    """Squarefree integer in the same square class as the nonzero rational ``q``."""
    q = as_fraction(q)
    if q == 0:
        raise ValueError("zero has no square class")
    return squarefree_part(q.numerator * q.denominator)


def is_rational_square(q) -> bool:
    q = as_fraction(q)
    if q < 0:
        return False
    return all(math.isqrt(x) ** 2 == x for x in (q.numerator, q.denominator))


def rational_sqrt(q) -> Fraction:
    q = as_fraction(q)
    if not is_rational_square(q):
        raise ValueError(f"{q} is not a rational square")
    return Fraction(math.isqrt(q.numerator), math.isqrt(q.denominator))


def prime_divisors(q) -> list[int]:
    """Primes dividing numerator or denominator of a nonzero rational."""
    q = as_fraction(q)
    ps = set(factorize(q.numerator).primes()) | set(factorize(q.denominator).primes())
    return sorted(ps)


# --- residues ----------------------------------------------------------------

def jacobi_symbol(a: int, m: int) -> int:
    if m < 1 or m % 2 == 0:
        raise ValueError(f"Jacobi symbol needs an odd positive modulus, got {m}")
    a %= m
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                result = -result
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            result = -result
        a %= m
    return result if m == 1 else 0


def crt_combine(congruences: Iterable[tuple[int, int]]) -> ResidueClass:
    """Combine ``(residue, modulus)`` pairs; moduli need not be coprime."""
    r, m = 0, 1
    seen = (0, 1)
    for ri, mi in congruences:
        if mi < 1:
            raise ValueError("moduli must be positive")
        g = math.gcd(m, mi)
        if (ri - r) % g:
            raise IncompatibleCongruences(seen, (ri, mi))
        lcm = m // g * mi
        # r + m*t ≡ ri (mod mi)
        t = ((ri - r) // g) * pow(m // g, -1, mi // g) % (mi // g) if mi // g > 1 else 0
        r = (r + m * t) % lcm
        m = lcm
        seen = (ri, mi)
    return ResidueClass(r, m)


def m_p(p: int) -> int:
    """Modulus controlling square classes of p-adic units."""
    return 8 if p == 2 else p


# --- p-adic ------------------------------------------------------------------

def int_valuation(n: int, p: int) -> int:
    if n == 0:
        return math.inf
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def padic_valuation(q, p: int):
    """``v`` with ``q = p**v * (unit)``; ``math.inf`` for zero."""
    q = as_fraction(q)
    if q == 0:
        return math.inf
    return int_valuation(q.numerator, p) - int_valuation(q.denominator, p)


def unit_part(q, p: int) -> Fraction:
    q = as_fraction(q)
    v = padic_valuation(q, p)
    return q / Fraction(p) ** v


def unit_residue(q, p: int, modulus: int) -> int:
    """Residue modulo ``modulus`` (a power of p) of the unit part of ``q``."""
    u = unit_part(q, p)
    return u.numerator * pow(u.denominator, -1, modulus) % modulus


def is_square_in_qp(q, p: int) -> bool:
    q = as_fraction(q)
    if q == 0:
        raise ValueError("0 is excluded from the square test")
    if padic_valuation(q, p) % 2:
        return False
    u = unit_residue(q, p, m_p(p))
    if p == 2:
        return u == 1
    return jacobi_symbol(u, p) == 1


def _sqrt_mod_prime(a: int, p: int) -> int:
    """Smallest positive square root of a nonzero residue modulo an odd prime."""
    a %= p
    if p < 5000:
        for r in range(1, p):
            if r * r % p == a:
                return r
        raise NotALocalSquare(f"{a} is not a square mod {p}")
    if jacobi_symbol(a, p) != 1:
        raise NotALocalSquare(f"{a} is not a square mod {p}")
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while jacobi_symbol(z, p) != -1:
        z += 1
    mm, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (mm - i - 1), p)
        mm, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return min(r, p - r)


def hensel_sqrt(a: int, p: int, N: int) -> int:
    """Square root of the p-adic unit ``a`` modulo ``p**N``.

    The root is the lift of the smallest positive root modulo p (modulo 8
    when p = 2), so results are reproducible.
    """
    if N < 1:
        raise ValueError("precision must be at least 1")
    a = int(a)
    if a % p == 0:
        raise NotALocalSquare(f"{a} is not a unit at {p}")
    if p == 2:
        if a % 8 != 1:
            raise NotALocalSquare(f"{a} is not 1 mod 8")
        if N <= 3:
            return 1 % (2**N)
        # x ↦ x - (x² - a)/2 refined one bit at a time keeps x odd
        r = 1
        for k in range(3, N):
            # invariant: r² ≡ a mod 2^k
            if (r * r - a) % (2 ** (k + 1)):
                r += 2 ** (k - 1)
        return r % 2**N
    r = _sqrt_mod_prime(a, p)
    mod = p
    while mod < p**N:
        mod = min(mod * mod, p**N)
        r = (r - (r * r - a) * pow(2 * r, -1, mod)) % mod
    return r


# --- Hilbert symbols -----------------------------------------------------------

def _hilbert_int(a: int, b: int, p) -> int:
    if p == REAL:
        return -1 if a < 0 and b < 0 else 1
    alpha, beta = int_valuation(a, p), int_valuation(b, p)
    u, v = a // p**alpha, b // p**beta
    if p == 2:
        eps = lambda x: ((x - 1) // 2) % 2
        omega = lambda x: ((x * x - 1) // 8) % 2
        e = (eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)) % 2
        return -1 if e else 1
    e = (alpha * beta * ((p - 1) // 2)) % 2
    s = -1 if e else 1
    return s * jacobi_symbol(u, p) ** beta * jacobi_symbol(v, p) ** alpha


def hilbert_symbol(a, b, place) -> int:
    """(a, b) at ``place`` (a prime or :data:`REAL`)."""
    a, b = as_fraction(a), as_fraction(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol of zero")
    # multiplying by squares of denominators keeps the square classes
    ai = a.numerator * a.denominator
    bi = b.numerator * b.denominator
    return _hilbert_int(ai, bi, place)


def relevant_places(*qs) -> list:
    """Real place plus every prime dividing 2 and the given nonzero rationals."""
    ps = {2}
    for q in qs:
        ps.update(prime_divisors(q))
    return [REAL] + sorted(ps)


def hasse_invariant(coeffs: Sequence, place) -> int:
    """Product of (a_i, a_j) over i < j for a nonzero diagonal."""
    s = 1
    for i in range(len(coeffs)):
        for j in range(i + 1, len(coeffs)):
            s *= hilbert_symbol(coeffs[i], coeffs[j], place)
    return s
