"""Approximate p-adic numbers with explicit precision, and the scalar fields
(Q, Q_p, Q(√-d) over either) that the generic form algebra runs over."""

from __future__ import annotations

import math
from fractions import Fraction

from .arith import (
    NotALocalSquare,
    as_fraction,
    hensel_sqrt,
    int_valuation,
    jacobi_symbol,
    padic_valuation,
    unit_residue,
)

DEFAULT_PRECISION = 16


class PAdicApprox:
    """``p**valuation * unit`` with the unit known modulo ``p**precision``.

    Zero carries only an absolute precision (``valuation``), ``math.inf``
    for an exact zero.
    """

    __slots__ = ("p", "valuation", "unit", "precision")

    def __init__(self, p: int, valuation, unit: int, precision):
        self.p = p
        self.valuation = valuation
        self.precision = precision
        self.unit = unit % p**precision if unit and precision != math.inf else unit
        if unit and self.unit % p == 0:
            raise ValueError("unit part divisible by p")

    @classmethod
    def zero(cls, p: int, absolute=math.inf) -> "PAdicApprox":
        return cls(p, absolute, 0, 0)

    @classmethod
    def from_rational(cls, q, p: int, precision: int = DEFAULT_PRECISION) -> "PAdicApprox":
        q = as_fraction(q)
        if q == 0:
            return cls.zero(p)
        return cls(p, padic_valuation(q, p), unit_residue(q, p, p**precision), precision)

    # -- inspection --
    def is_zero(self) -> bool:
        return self.unit == 0

    @property
    def absolute_precision(self):
        return self.valuation if self.is_zero() else self.valuation + self.precision

    def lift(self) -> Fraction:
        """The rational ``p**v * u`` with ``0 < u < p**precision``."""
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.p) ** self.valuation * self.unit

    def residue(self, modulus_exp: int) -> int:
        """Integer residue modulo ``p**modulus_exp``; requires integrality."""
        if self.is_zero():
            return 0
        if self.valuation < 0:
            raise ValueError("not a p-adic integer")
        return int(self.lift()) % self.p**modulus_exp

    def __repr__(self):
        if self.is_zero():
            return f"O({self.p}^{self.valuation})"
        return f"{self.p}^{self.valuation}*{self.unit} + O({self.p}^{self.absolute_precision})"

    # -- arithmetic --
    def _coerce(self, other) -> "PAdicApprox":
        if isinstance(other, PAdicApprox):
            if other.p != self.p:
                raise ValueError("mixing different primes")
            return other
        prec = self.precision if not self.is_zero() else DEFAULT_PRECISION
        return PAdicApprox.from_rational(other, self.p, max(prec, 1))

    def __add__(self, other):
        other = self._coerce(other)
        p = self.p
        cap = min(self.absolute_precision, other.absolute_precision)
        terms = [x for x in (self, other) if not x.is_zero()]
        if not terms:
            return PAdicApprox.zero(p, cap)
        vm = min(x.valuation for x in terms)
        if vm >= cap:
            return PAdicApprox.zero(p, cap)
        mod = p ** (cap - vm)
        w = sum(x.unit * p ** (x.valuation - vm) for x in terms) % mod
        if w == 0:
            return PAdicApprox.zero(p, cap)
        t = int_valuation(w, p)
        v = vm + t
        return PAdicApprox(p, v, w // p**t, cap - v)

    __radd__ = __add__

    def __neg__(self):
        if self.is_zero():
            return self
        return PAdicApprox(self.p, self.valuation, -self.unit, self.precision)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            if self.is_zero() and other.is_zero():
                return PAdicApprox.zero(self.p, self.valuation + other.valuation)
            z, nz = (self, other) if self.is_zero() else (other, self)
            return PAdicApprox.zero(self.p, z.valuation + nz.valuation)
        n = min(self.precision, other.precision)
        return PAdicApprox(self.p, self.valuation + other.valuation, self.unit * other.unit, n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by a p-adic zero")
        if self.is_zero():
            return PAdicApprox.zero(self.p, self.valuation - other.valuation)
        n = min(self.precision, other.precision)
        inv = pow(other.unit, -1, self.p**n)
        return PAdicApprox(self.p, self.valuation - other.valuation, self.unit * inv, n)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, PAdicApprox)):
            return (self - other).is_zero()
        return NotImplemented

    __hash__ = None


class RationalField:
    """Q. With ``prime`` set, pivots prefer coefficients that are p-units."""

    name = "Q"

    def __init__(self, prime: int | None = None):
        self.prime = prime

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def coerce(self, x):
        return as_fraction(x)

    def is_zero(self, x) -> bool:
        return x == 0

    def diagonal_pivot_key(self, x):
        return 0

    def linear_pivot_key(self, x):
        unit = 0
        if self.prime is not None:
            unit = 0 if padic_valuation(x, self.prime) == 0 else 1
        return (unit, as_fraction(x).denominator)


class PAdicField:
    """Q_p at a fixed working precision; pivots minimise valuation."""

    def __init__(self, p: int, precision: int = DEFAULT_PRECISION):
        self.p = p
        self.precision = precision
        self.name = f"Q_{p}"

    def zero(self):
        return PAdicApprox.zero(self.p)

    def one(self):
        return PAdicApprox.from_rational(1, self.p, self.precision)

    def coerce(self, x):
        if isinstance(x, PAdicApprox):
            return x
        return PAdicApprox.from_rational(x, self.p, self.precision)

    def is_zero(self, x) -> bool:
        return x.is_zero()

    def diagonal_pivot_key(self, x):
        return x.valuation

    linear_pivot_key = diagonal_pivot_key


def padic_is_square(x: PAdicApprox) -> bool:
    if x.is_zero():
        raise ValueError("square test of a p-adic zero")
    if x.valuation % 2:
        return False
    if x.p == 2:
        if x.precision < 3:
            raise ValueError("need three bits of precision to decide a 2-adic square")
        return x.unit % 8 == 1
    return jacobi_symbol(x.unit % x.p, x.p) == 1


def padic_sqrt(x: PAdicApprox) -> PAdicApprox:
    """Canonical square root (see :func:`ratlines.arith.hensel_sqrt`)."""
    if x.is_zero():
        return PAdicApprox.zero(x.p, x.valuation // 2 if x.valuation != math.inf else math.inf)
    if not padic_is_square(x):
        raise NotALocalSquare(f"{x} is not a square in Q_{x.p}")
    r = hensel_sqrt(x.unit, x.p, x.precision)
    prec = x.precision - 1 if x.p == 2 else x.precision
    return PAdicApprox(x.p, x.valuation // 2, r, max(prec, 1))
