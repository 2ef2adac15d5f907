"""Quadratic-form algebra over Q, Q_p and Q(√-d).

A form is stored as its symmetric Gram matrix ``G`` with ``Q(x) = xᵀGx``, so an
integer polynomial has half-integer off-diagonal Gram entries and the
hyperbolic plane ``X1*X2`` has Gram ``[[0, 1/2], [1/2, 0]]`` (determinant -1/4).

The routines that change basis (:func:`diagonalize`, :func:`split_hyperbolic`)
are written against a small *field* object (see :mod:`ratlines.padic`) so the
same code runs over the rationals, over ``Q_p`` at finite precision and over an
imaginary quadratic field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .arith import as_fraction, int_valuation, padic_valuation, squarefree_part
from .padic import PAdicApprox, RationalField

HALF = Fraction(1, 2)


class DimensionMismatch(ValueError):
    pass


class SingularForm(ValueError):
    pass


class SplitFailure(RuntimeError):
    """The isotropic-vector oracle gave up; ``form`` is the residual it was asked about."""

    def __init__(self, message, form=None, done: int = 0):
        super().__init__(message)
        self.form = form
        self.done = done


# --- imaginary quadratic field -------------------------------------------------

class QuadFieldElement:
    """``re + im*sqrt(-d)``; ``re`` and ``im`` are rationals or p-adic approximations."""

    __slots__ = ("re", "im", "d")

    def __init__(self, re, im, d: int):
        self.re = re if isinstance(re, PAdicApprox) else as_fraction(re)
        self.im = im if isinstance(im, PAdicApprox) else as_fraction(im)
        self.d = d

    def _coerce(self, other) -> "QuadFieldElement":
        if isinstance(other, QuadFieldElement):
            if other.d != self.d:
                raise ValueError(f"mixing Q(sqrt(-{self.d})) and Q(sqrt(-{other.d}))")
            return other
        return QuadFieldElement(other, self.im * 0, self.d)

    def __add__(self, other):
        o = self._coerce(other)
        return QuadFieldElement(self.re + o.re, self.im + o.im, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadFieldElement(-self.re, -self.im, self.d)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, QuadFieldElement):
            return QuadFieldElement(self.re * other, self.im * other, self.d)
        o = self._coerce(other)
        return QuadFieldElement(
            self.re * o.re - self.d * self.im * o.im,
            self.re * o.im + self.im * o.re,
            self.d,
        )

    __rmul__ = __mul__

    def conjugate(self):
        return QuadFieldElement(self.re, -self.im, self.d)

    def norm(self):
        return self.re * self.re + self.d * self.im * self.im

    def __truediv__(self, other):
        if not isinstance(other, QuadFieldElement):
            return QuadFieldElement(self.re / other, self.im / other, self.d)
        o = self._coerce(other)
        nrm = o.norm()
        num = self * o.conjugate()
        return QuadFieldElement(num.re / nrm, num.im / nrm, self.d)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def is_zero(self) -> bool:
        if isinstance(self.re, PAdicApprox):
            return self.re.is_zero() and self.im.is_zero()
        return self.re == 0 and self.im == 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, QuadFieldElement)):
            return (self - other).is_zero()
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"({self.re} + {self.im}*sqrt(-{self.d}))"


class QuadraticField:
    """Q(√-d), or Q_p(√-d) when ``base`` is a :class:`~ratlines.padic.PAdicField`."""

    def __init__(self, d: int, base=None):
        if d <= 0 or squarefree_part(d) != d:
            raise ValueError(f"d must be positive and squarefree, got {d}")
        self.d = d
        self.base = base or RationalField()
        self.name = f"{self.base.name}(sqrt(-{d}))"

    def zero(self):
        return QuadFieldElement(self.base.zero(), self.base.zero(), self.d)

    def one(self):
        return QuadFieldElement(self.base.one(), self.base.zero(), self.d)

    def sqrt_minus_d(self):
        return QuadFieldElement(self.base.zero(), self.base.one(), self.d)

    def coerce(self, x):
        if isinstance(x, QuadFieldElement):
            return x
        return QuadFieldElement(self.base.coerce(x), self.base.zero(), self.d)

    def is_zero(self, x) -> bool:
        return self.coerce(x).is_zero()

    def diagonal_pivot_key(self, x):
        x = self.coerce(x)
        if isinstance(x.re, PAdicApprox):
            return min(x.re.valuation, x.im.valuation)
        return 0

    def linear_pivot_key(self, x):
        return self.diagonal_pivot_key(x)


@dataclass(frozen=True)
class KVector:
    entries: tuple
    d: int

    @classmethod
    def from_parts(cls, u: Sequence, v: Sequence, d: int) -> "KVector":
        if len(u) != len(v):
            raise DimensionMismatch("u and v differ in length")
        return cls(tuple(QuadFieldElement(a, b, d) for a, b in zip(u, v)), d)

    @classmethod
    def rational(cls, u: Sequence, d: int) -> "KVector":
        return cls.from_parts(u, [0] * len(u), d)

    def parts(self) -> tuple[tuple, tuple]:
        return tuple(e.re for e in self.entries), tuple(e.im for e in self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def scale(self, c) -> "KVector":
        return KVector(tuple(e * c for e in self.entries), self.d)

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.entries)


# --- matrices ------------------------------------------------------------------

def identity(n: int, field=None) -> list[list]:
    f = field or RationalField()
    return [[f.one() if i == j else f.zero() for j in range(n)] for i in range(n)]


def transpose(A):
    return [list(r) for r in zip(*A)]


def mat_mul(A, B):
    Bt = list(zip(*B))
    out = []
    for row in A:
        out.append([_dot(row, col) for col in Bt])
    return out


def mat_vec(A, x):
    return [_dot(row, x) for row in A]


def _dot(a, b):
    it = iter(zip(a, b))
    try:
        x, y = next(it)
    except StopIteration:
        return Fraction(0)
    s = x * y
    for x, y in it:
        s = s + x * y
    return s


def congruence(G, T):
    """Tᵀ G T."""
    return mat_mul(transpose(T), mat_mul(G, T))


def block_diag(A, B, field=None):
    f = field or RationalField()
    n, m = len(A), len(B)
    out = [[f.zero()] * (n + m) for _ in range(n + m)]
    for i in range(n):
        for j in range(n):
            out[i][j] = A[i][j]
    for i in range(m):
        for j in range(m):
            out[n + i][n + j] = B[i][j]
    return out


def row_echelon(A, field=None):
    """Reduced row echelon form and pivot columns."""
    f = field or RationalField()
    M = [list(r) for r in A]
    rows = len(M)
    cols = len(M[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if not f.is_zero(M[i][c])), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = f.one() / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(rows):
            if i != r and not f.is_zero(M[i][c]):
                fac = M[i][c]
                M[i] = [a - fac * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return M, pivots


def rank(A, field=None) -> int:
    if not A:
        return 0
    return len(row_echelon(A, field)[1])


def kernel(A, field=None) -> list[list]:
    """Basis of {x : A x = 0}; one vector per free column, free entry 1."""
    f = field or RationalField()
    if not A:
        return []
    n = len(A[0])
    R, pivots = row_echelon(A, f)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        x = [f.zero()] * n
        x[fc] = f.one()
        for i, pc in enumerate(pivots):
            x[pc] = -R[i][fc]
        basis.append(x)
    return basis


def integral_kernel(A) -> list[list[Fraction]]:
    """LLL-reduced basis of the integer lattice {x in Z^n : A x = 0} for rational A.

    LLL on the rows of ``[I | N A^T]``: for large N the short vectors are
    exactly the kernel vectors, and the first ones form a saturated basis.
    Small kernel bases keep restricted forms (and the integers that later get
    factored) small.
    """
    if not A:
        return []
    from sympy import ZZ
    from sympy.polys.matrices import DomainMatrix

    n = len(A[0])
    rows = []
    for r in A:
        r = [as_fraction(t) for t in r]
        den = math.lcm(*(t.denominator for t in r))
        rows.append([int(t * den) for t in r])
    dim = n - rank(A)
    if dim == 0:
        return []
    scale = 2 ** n * (1 + sum(abs(t) for r in rows for t in r))
    while True:
        M = [[int(i == j) for j in range(n)] + [scale * r[i] for r in rows] for i in range(n)]
        L = DomainMatrix([[ZZ(t) for t in row] for row in M], (n, n + len(rows)), ZZ).lll().to_list()
        basis = [row[:n] for row in L if all(t == 0 for t in row[n:])]
        if len(basis) == dim:
            return [[Fraction(int(t)) for t in row] for row in basis]
        scale *= 2 ** 16


def determinant(A, field=None):
    f = field or RationalField()
    n = len(A)
    if n == 0:
        return f.one()
    M = [list(r) for r in A]
    det = f.one()
    for c in range(n):
        piv = next((i for i in range(c, n) if not f.is_zero(M[i][c])), None)
        if piv is None:
            return f.zero()
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det = det * M[c][c]
        inv = f.one() / M[c][c]
        for i in range(c + 1, n):
            if not f.is_zero(M[i][c]):
                fac = M[i][c] * inv
                M[i] = [a - fac * b for a, b in zip(M[i], M[c])]
    return det


# --- forms ---------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticForm:
    gram: tuple

    def __init__(self, gram):
        rows = tuple(tuple(_scalar(x) for x in row) for row in gram)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise DimensionMismatch("Gram matrix must be square")
        for i in range(n):
            for j in range(i):
                if not _same(rows[i][j], rows[j][i]):
                    raise ValueError(f"Gram matrix not symmetric at ({i}, {j})")
        object.__setattr__(self, "gram", rows)

    @classmethod
    def from_coefficients(cls, n: int, coeffs: dict) -> "QuadraticForm":
        """From polynomial coefficients keyed by index pairs ``(i, j)`` (0-based)."""
        G = [[Fraction(0)] * n for _ in range(n)]
        for (i, j), c in coeffs.items():
            c = as_fraction(c)
            if i == j:
                G[i][i] += c
            else:
                G[i][j] += c / 2
                G[j][i] += c / 2
        return cls(G)

    @classmethod
    def diagonal(cls, coeffs: Sequence) -> "QuadraticForm":
        n = len(coeffs)
        return cls([[coeffs[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def n(self) -> int:
        return len(self.gram)

    def matrix(self) -> list[list]:
        return [list(r) for r in self.gram]

    def det(self, field=None):
        if field is None:
            return determinant(self.gram)
        return determinant([[field.coerce(x) for x in r] for r in self.gram], field)

    def coefficients(self) -> dict:
        """Polynomial coefficients keyed by ``(i, j)`` with ``i <= j``, zeros omitted."""
        out = {}
        for i in range(self.n):
            for j in range(i, self.n):
                c = self.gram[i][j] if i == j else 2 * self.gram[i][j]
                if c != 0:
                    out[(i, j)] = c
        return out

    def is_rational(self) -> bool:
        return all(isinstance(x, Fraction) for r in self.gram for x in r)

    def is_singular(self) -> bool:
        return self.det() == 0

    def scaled(self, c) -> "QuadraticForm":
        return QuadraticForm([[x * c for x in r] for r in self.gram])

    def __call__(self, x):
        return evaluate(self, x)


def _scalar(x):
    if isinstance(x, (QuadFieldElement, PAdicApprox, Fraction)):
        return x
    return as_fraction(x)


def _same(a, b) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    diff = a - b
    return diff.is_zero() if hasattr(diff, "is_zero") else diff == 0


def _entries(x):
    return list(x.entries) if isinstance(x, KVector) else list(x)


def bilinear(Q: QuadraticForm, x, y):
    x, y = _entries(x), _entries(y)
    if len(x) != Q.n or len(y) != Q.n:
        raise DimensionMismatch(f"vectors of length {len(x)}, {len(y)} for a form in {Q.n} variables")
    return _dot(x, mat_vec(Q.gram, y))


def evaluate(Q: QuadraticForm, x):
    return bilinear(Q, x, x)


@dataclass(frozen=True)
class ChangeOfBasis:
    """Columns are the new basis vectors: old coordinates = matrix · new."""

    matrix: tuple
    determinant: object

    @classmethod
    def of(cls, M, field=None) -> "ChangeOfBasis":
        M = tuple(tuple(r) for r in M)
        det = determinant(M, field)
        f = field or RationalField()
        if f.is_zero(det):
            raise SingularForm("change of basis is singular")
        return cls(M, det)

    @property
    def n(self):
        return len(self.matrix)

    def apply(self, x):
        return mat_vec(self.matrix, _entries(x))

    def column(self, j):
        return [r[j] for r in self.matrix]


def transform(Q: QuadraticForm, T) -> QuadraticForm:
    M = T.matrix if isinstance(T, ChangeOfBasis) else T
    return QuadraticForm(congruence(Q.gram, M))


@dataclass(frozen=True)
class DiagonalForm:
    """``Q(transform · Y) = Σ coefficients[i] * Y_i²``.

    After :func:`padic_normalize` at ``prime``, each coefficient equals
    ``units[i] * prime**exponents[i] * scales[i]**2``.
    """

    coefficients: tuple
    transform: ChangeOfBasis
    prime: Optional[int] = None
    units: Optional[tuple] = None
    exponents: Optional[tuple] = None
    scales: Optional[tuple] = None
    beta: int = 0

    @property
    def rank(self) -> int:
        return sum(1 for c in self.coefficients if not _is_zero(c))


def _is_zero(x) -> bool:
    if isinstance(x, (PAdicApprox, QuadFieldElement)):
        return x.is_zero()
    return x == 0


def diagonalize(Q: QuadraticForm, field=None) -> DiagonalForm:
    """Congruence-diagonalise with a recorded transform; zeros trail.

    Pivot: the best diagonal entry by the field's key (over Q the first
    nonzero one). When the remaining diagonal vanishes but the block does not,
    ``x_i <- x_i + x_j`` on the least ``(i, j)`` with ``G_ij != 0`` creates one.
    """
    f = field or RationalField()
    n = Q.n
    G = [[f.coerce(x) for x in r] for r in Q.gram]
    T = identity(n, f)

    def swap(a, b):
        if a == b:
            return
        G[a], G[b] = G[b], G[a]
        for r in G:
            r[a], r[b] = r[b], r[a]
        for r in T:
            r[a], r[b] = r[b], r[a]

    def add_to(a, b, c):
        # basis vector a <- a + c * b
        for r in T:
            r[a] = r[a] + c * r[b]
        G[a] = [x + c * y for x, y in zip(G[a], G[b])]
        for r in G:
            r[a] = r[a] + c * r[b]

    for i in range(n):
        cands = [j for j in range(i, n) if not f.is_zero(G[j][j])]
        off = [(a, b) for a in range(i, n) for b in range(a + 1, n) if not f.is_zero(G[a][b])]
        best_diag = min((f.diagonal_pivot_key(G[j][j]) for j in cands), default=None)
        best_off = min(off, key=lambda ab: (f.diagonal_pivot_key(G[ab[0]][ab[1]]), ab), default=None)
        fold = getattr(f, "p", 2) != 2
        if fold and cands and best_off is not None and f.diagonal_pivot_key(G[best_off[0]][best_off[1]]) < best_diag:
            # odd p: an off-diagonal entry beats the diagonal, fold it in
            a, b = best_off
            add_to(a, b, f.one())
            swap(i, a)
        elif cands:
            j = min(cands, key=lambda j: (f.diagonal_pivot_key(G[j][j]), j))
            swap(i, j)
        else:
            if not off:
                break
            a, b = off[0]
            add_to(a, b, f.one())
            swap(i, a)
        piv = G[i][i]
        for r in range(i + 1, n):
            if not f.is_zero(G[r][i]):
                add_to(r, i, -(G[r][i] / piv))
            # clear numerical residue of the eliminated entry
            G[r][i] = f.zero()
            G[i][r] = f.zero()
    coeffs = tuple(G[i][i] for i in range(n))
    return DiagonalForm(coeffs, ChangeOfBasis(tuple(tuple(r) for r in T), determinant(T, f)))


def padic_normalize(D: DiagonalForm, p: int) -> DiagonalForm:
    """Write each coefficient as ``a_i * p**alpha_i * s_i**2`` with ``p ∤ a_i``, ``alpha_i ∈ {0, 1}``."""
    units, exps, scales = [], [], []
    for c in D.coefficients:
        if _is_zero(c):
            raise SingularForm("p-adic normalisation needs nonzero coefficients")
        if isinstance(c, PAdicApprox):
            v = c.valuation
            alpha = v % 2
            units.append(c.unit)
            scales.append(Fraction(p) ** ((v - alpha) // 2))
        else:
            c = as_fraction(c)
            v = padic_valuation(c, p)
            alpha = v % 2
            u = c / Fraction(p) ** v
            units.append(u.numerator * u.denominator)
            scales.append(Fraction(p) ** ((v - alpha) // 2) / u.denominator)
        exps.append(alpha)
    return DiagonalForm(D.coefficients, D.transform, p, tuple(units), tuple(exps), tuple(scales), 0)


@dataclass(frozen=True)
class SplitDecomposition:
    """``Q(transform · X) = X1 X2 + ... + X_{2u-1} X_{2u} + residual(X_{2u+1}, ...)``."""

    u: int
    residual: QuadraticForm
    transform: ChangeOfBasis
    field_name: str = "Q"

    def expected_gram(self, field=None):
        f = field or RationalField()
        H = [[f.zero(), f.coerce(HALF)], [f.coerce(HALF), f.zero()]]
        M = [list(r) for r in self.residual.gram]
        for _ in range(self.u):
            M = block_diag(H, M, f)
        return M


Oracle = Callable[[QuadraticForm], Optional[Sequence]]


def split_hyperbolic(Q: QuadraticForm, u: int, oracle: Oracle, field=None) -> SplitDecomposition:
    """Split ``u`` hyperbolic planes off a non-singular form.

    ``oracle(form)`` returns a nonzero isotropic vector of ``form`` over
    ``field`` or ``None``. Each round completes the vector ``x`` to a basis
    (first column ``x``), pivots the linear form ``L`` on one coordinate and
    absorbs the remainder ``M`` so that the form reads ``Z1 Z2 + Q1``.
    """
    f = field or RationalField()
    n = Q.n
    if f.is_zero(Q.det(f)):
        raise SingularForm("split_hyperbolic needs a non-singular form")
    if 2 * u > n:
        raise ValueError(f"cannot split {u} planes from a form in {n} variables")
    work = [[f.coerce(x) for x in r] for r in Q.gram]
    T = identity(n, f)
    half = f.coerce(HALF)
    for step in range(u):
        m = len(work)
        current = QuadraticForm(work)
        x = oracle(current)
        if x is None:
            raise SplitFailure("no isotropic vector found within bound", current, step)
        x = [f.coerce(c) for c in _entries(x)]
        if len(x) != m or all(f.is_zero(c) for c in x):
            raise SplitFailure("oracle returned a zero or mis-sized vector", current, step)
        if not f.is_zero(_dot(x, mat_vec(work, x))):
            raise SplitFailure("oracle vector is not isotropic", current, step)
        S = _balkon_step(work, x, f)
        G3 = congruence(work, S)
        T_step = block_diag(identity(2 * step, f), S, f) if step else S
        T = mat_mul(T, T_step)
        work = [r[2:] for r in G3[2:]]
        if isinstance(f, RationalField):
            expect = [[0, HALF], [HALF, 0]]
            for i in range(2):
                for j in range(m):
                    want = expect[i][j] if j < 2 else 0
                    if G3[i][j] != want:
                        raise AssertionError("hyperbolic split identity failed")
    residual = QuadraticForm(work) if work else QuadraticForm([])
    return SplitDecomposition(u, residual, ChangeOfBasis(tuple(tuple(r) for r in T), determinant(T, f)), f.name)


def _balkon_step(G, x, f):
    """Transform S with Sᵀ G S = [[0, 1/2], [1/2, 0]] ⊕ G1 for isotropic x."""
    m = len(G)
    if isinstance(f, RationalField):
        T1 = _integral_completion(G, x)
    else:
        # complete x to a basis: x first, then the unit vectors except the pivot one
        nz = [i for i in range(m) if not f.is_zero(x[i])]
        piv = min(nz, key=lambda i: (f.linear_pivot_key(x[i]), i))
        T1 = [[f.zero()] * m for _ in range(m)]
        cols = [j for j in range(m) if j != piv]
        for i in range(m):
            T1[i][0] = x[i]
            for c, j in enumerate(cols, start=1):
                T1[i][c] = f.one() if i == j else f.zero()
    G1 = congruence(G, T1)
    G1[0][0] = f.zero()
    # Q' = X1 * L(X2..Xm) + Q0, L_j = 2 G1[0][j]
    L = [2 * G1[0][j] for j in range(m)]
    nzL = [j for j in range(1, m) if not f.is_zero(L[j])]
    if not nzL:
        raise SingularForm("linear part vanished; form is singular")
    jstar = min(nzL, key=lambda j: (f.linear_pivot_key(L[j]), j))
    P = identity(m, f)
    if jstar != 1:
        P[1][1], P[jstar][jstar] = f.zero(), f.zero()
        P[1][jstar], P[jstar][1] = f.one(), f.one()
        L[1], L[jstar] = L[jstar], L[1]
    # tau: Y2 = L(X); inverse puts X2 = (Y2 - sum_{j>=3} L_j Y_j) / L_2
    tau_inv = identity(m, f)
    inv = f.one() / L[1]
    tau_inv[1] = [f.zero(), inv] + [-(L[j] * inv) for j in range(2, m)]
    S = mat_mul(mat_mul(T1, P), tau_inv)
    G2 = congruence(G, S)
    # Q'' = Y2 (Y1 + M) + Q1 with M = c*Y2 + sum 2 G2[1][j] Y_j
    phi_inv = identity(m, f)
    phi_inv[0] = [f.one(), -G2[1][1]] + [-(2 * G2[1][j]) for j in range(2, m)]
    return mat_mul(S, phi_inv)


def _reduce_to_gcd(v):
    """Unimodular integer E, E^-1 with E v = g e1, g = gcd(v) >= 0."""
    m = len(v)
    w = list(v)
    E, Einv = identity(m), identity(m)
    while True:
        nz = [i for i in range(m) if w[i]]
        if not nz:
            break
        j = min(nz, key=lambda i: (abs(w[i]), i))
        others = [i for i in nz if i != j]
        if not others:
            break
        for i in others:
            q = w[i] // w[j]
            w[i] -= q * w[j]
            # row op on E, matching column op on E^-1
            E[i] = [a - q * b for a, b in zip(E[i], E[j])]
            for r in Einv:
                r[j] += q * r[i]
    j = next((i for i in range(m) if w[i]), 0)
    if j:
        w[0], w[j] = w[j], w[0]
        E[0], E[j] = E[j], E[0]
        for r in Einv:
            r[0], r[j] = r[j], r[0]
    if w[0] < 0:
        w[0] = -w[0]
        E[0] = [-a for a in E[0]]
        for r in Einv:
            r[0] = -r[0]
    return w[0], E, Einv


def _integral_completion(G, x):
    """Basis with first column a primitive multiple of x and unimodular over Z.

    The remaining columns are arranged so that only the second one pairs
    with x; the determinant of the later pivot then only involves primes
    dividing 2 det G and its denominators.
    """
    m = len(G)
    den = math.lcm(*(as_fraction(t).denominator for t in x))
    xi = [int(as_fraction(t) * den) for t in x]
    g = math.gcd(*xi)
    xi = [t // g for t in xi]
    _, _, T1 = _reduce_to_gcd(xi)
    T1 = [[Fraction(t) for t in r] for r in T1]
    L = congruence(G, T1)[0][1:]
    dl = math.lcm(*(t.denominator for t in L))
    _, E, _ = _reduce_to_gcd([int(t * dl) for t in L])
    V = block_diag([[Fraction(1)]], [[Fraction(t) for t in r] for r in transpose(E)])
    return mat_mul(T1, V)


def residual_det_check(Q: QuadraticForm, decomposition: SplitDecomposition, p: int):
    """``p ∤ det R`` for the residual; ``None`` when ``p | 2 det Q`` (no claim)."""
    dq = as_fraction(Q.det())
    if p == 2 or dq == 0 or padic_valuation(dq, p) != 0:
        return None
    dr = decomposition.residual.det()
    return dr != 0 and padic_valuation(as_fraction(dr), p) == 0


def radical_split(Q: QuadraticForm):
    """``(nonsingular_part, radical_dim, transform)`` with the radical last.

    ``Q(transform · X)`` only involves ``X_1..X_j`` and is non-singular there.
    """
    n = Q.n
    K = kernel(Q.matrix())
    chosen: list[list] = []
    for i in range(n):
        e = [Fraction(int(i == j)) for j in range(n)]
        if rank(chosen + [e] + K) == len(chosen) + 1 + len(K):
            chosen.append(e)
        if len(chosen) + len(K) == n:
            break
    cols = chosen + K
    T = ChangeOfBasis.of(transpose(cols))
    part = restrict(Q, chosen) if chosen else QuadraticForm([])
    return part, len(K), T


def restrict(Q: QuadraticForm, basis: Sequence[Sequence]) -> QuadraticForm:
    basis = [list(_entries(b)) for b in basis]
    if any(len(b) != Q.n for b in basis):
        raise DimensionMismatch("basis vectors must have the form's length")
    if basis and rank(basis) != len(basis):
        raise ValueError("restriction basis is linearly dependent")
    B = transpose(basis) if basis else [[] for _ in range(Q.n)]
    if not basis:
        return QuadraticForm([])
    return QuadraticForm(congruence(Q.matrix(), B))


def integral_scale(Q: QuadraticForm) -> Fraction:
    """Least positive rational ``c`` making every polynomial coefficient of ``c·Q`` an integer, content 1."""
    cs = [as_fraction(c) for c in Q.coefficients().values()]
    if not cs:
        return Fraction(1)
    den = math.lcm(*(c.denominator for c in cs))
    g = math.gcd(*(int(c * den) for c in cs))
    return Fraction(den, g)
