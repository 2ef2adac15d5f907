"""Totally isotropic subspaces over an imaginary quadratic field Q(√-d).

The field is chosen from the local classes (:func:`ratlines.local.ell_class`)
by CRT and a scan for the least squarefree ``d``. The space itself is built by
peeling pieces off the form over Q: a rational hyperbolic plane when the
current form is isotropic over Q, otherwise a binary piece ``c<1, d>`` spanned
by rational ``u, v`` with ``Q(u) = d Q(v)`` and ``B(u, v) = 0``, whose
K-isotropic vector is ``u + √-d v``. Every step is exact and the result is
checked by evaluation over Q(√-d).
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .arith import (
    IncompatibleCongruences,
    REAL,
    ResidueClass,
    as_fraction,
    crt_combine,
    is_rational_square,
    is_square_in_qp,
    rational_sqrt,
    squarefree_class,
    squarefree_part,
)
from .isotropy import is_isotropic_over_Q, rational_isotropic_vector
from .local import (
    EllClass,
    ell_class,
    is_isotropic_local,
    relevant_primes,
    witt_index_local,
    witt_index_over_K,
)
from .quadform import (
    KVector,
    QuadraticField,
    QuadraticForm,
    bilinear,
    block_diag,
    diagonalize,
    kernel,
    mat_vec,
    radical_split,
    integral_kernel,
    rank,
    restrict,
)

DIRECT_SCAN_LIMIT = 10**4

BUDGET_ENV = "RATLINES_BUDGET"

BUDGET_PROFILES = {
    "quick": (4, 10),
    "default": (10, 30, 100),
    "thorough": (10, 30, 100, 300),
}


class NoAdmissibleField(ValueError):
    """No imaginary quadratic field can carry the requested space."""

    def __init__(self, message, d=None, place=None):
        super().__init__(message)
        self.d = d
        self.place = place


class SearchExhausted(RuntimeError):
    def __init__(self, message, budget=None):
        super().__init__(message)
        self.budget = budget


@dataclass(frozen=True)
class SearchBudget:
    """Height schedule for the searches; each stage is tried in turn up to ``cap``."""

    schedule: tuple = BUDGET_PROFILES["default"]
    cap: int = 300
    d_scan_cap: int = 10**6
    max_candidates: int = 4000

    @classmethod
    def from_env(cls) -> "SearchBudget":
        name = os.environ.get(BUDGET_ENV, "default")
        if name not in BUDGET_PROFILES:
            raise ValueError(f"{BUDGET_ENV} must be one of {', '.join(BUDGET_PROFILES)}, got {name!r}")
        return cls(BUDGET_PROFILES[name])

    def heights(self):
        return [h for h in self.schedule if h <= self.cap] or [self.cap]


@dataclass(frozen=True)
class FieldChoice:
    d: int
    residue: ResidueClass
    classes: tuple = ()
    forced: bool = False

    def describe(self) -> str:
        if self.forced:
            return f"d = {self.d} (forced by the discriminant)"
        if not self.classes:
            return f"d = {self.d}"
        conds = ", ".join(f"-d = {e.ell.value} mod {e.m_p}" for e in self.classes)
        return f"d = {self.d}; local classes {conds}"


@dataclass(frozen=True)
class SpaceWitness:
    d: int
    basis: tuple
    choice: Optional[FieldChoice] = None

    @property
    def k(self) -> int:
        return len(self.basis)


# --- choosing d ---------------------------------------------------------------

def nonsingular_part(Q: QuadraticForm):
    part, rad, T = radical_split(Q)
    return part, rad, T


def locally_admissible(Q: QuadraticForm, k: int, d: int, primes=None) -> bool:
    """Witt index at least k over Q_p(√-d) for every p | 2 det Q.

    For n >= 2k + 1 the other places impose nothing (C at infinity, and a
    unimodular form of odd rank has Witt index (n - 1) / 2).
    """
    primes = relevant_primes(Q) if primes is None else primes
    return all(witt_index_over_K(Q, p, d) >= k for p in primes)


def choose_field(Q: QuadraticForm, k: int, budget: SearchBudget | None = None) -> FieldChoice:
    """Squarefree ``d >= 1`` for a non-singular form with ``n >= 2k + 1``.

    The CRT class of the local unit classes gives a candidate ``d_ell``
    (least squarefree member, scanning at most ``d_scan_cap`` members). A
    direct scan ``d = 1, 2, ...`` below it with the exact local test may find a
    smaller admissible value; the smaller one is returned.
    """
    budget = budget or SearchBudget()
    if Q.n < 2 * k + 1:
        raise ValueError(f"need n >= 2k + 1, got n = {Q.n}, k = {k}")
    primes = relevant_primes(Q)
    classes = tuple(ell_class(Q, k, p) for p in primes)
    try:
        residue = crt_combine((-e.ell.value % e.m_p, e.m_p) for e in classes)
    except IncompatibleCongruences as exc:
        raise NoAdmissibleField(f"local classes conflict: {exc}") from exc
    d_ell = None
    d = residue.value or residue.modulus
    for _ in range(budget.d_scan_cap):
        if squarefree_part(d) == d and all(e.admits(d) for e in classes):
            d_ell = d
            break
        d += residue.modulus
    if d_ell is None:
        raise NoAdmissibleField(
            f"no squarefree d among {budget.d_scan_cap} members of {residue.value} mod {residue.modulus}"
        )
    if not locally_admissible(Q, k, d_ell, primes):
        raise AssertionError(f"d = {d_ell} from the local classes fails the local Witt test")
    for d in range(1, min(d_ell, DIRECT_SCAN_LIMIT)):
        if squarefree_part(d) == d and locally_admissible(Q, k, d, primes):
            return FieldChoice(d, residue, classes)
    return FieldChoice(d_ell, residue, classes)


# --- isotropic vectors over K ------------------------------------------------------

def _rational(x):
    return [as_fraction(t) for t in x]


def _candidate_vectors(m: int, height: int, start: int = 0):
    """Unit vectors first, then nonzero vectors of max-norm ``start < h <= height``."""
    if start == 0:
        for i in range(m):
            yield [int(i == j) for j in range(m)]
    order = [0]
    for h in range(1, height + 1):
        order += [h, -h]
    for h in range(max(start, 1), height + 1):
        vals = [t for t in order if abs(t) <= h]
        for v in itertools.product(*([vals] * m)):
            if max(abs(t) for t in v) != h:
                continue
            first = next(t for t in v if t)
            if first < 0 or math.gcd(*v) != 1:
                continue
            if h == 1 and sum(1 for t in v if t) == 1:
                continue
            yield list(v)


def split_prime_obstruction(Q: QuadraticForm, d: int) -> Optional[int]:
    """A prime where ``-d`` is a square and Q is anisotropic, if any.

    There ``K ⊗ Q_p = Q_p × Q_p`` so Q cannot be isotropic over K.
    """
    if Q.n >= 5:
        return None
    for p in relevant_primes(Q):
        if is_square_in_qp(-d, p) and not is_isotropic_local(Q, p):
            return p
    return None


def _binary_piece_exact(Q: QuadraticForm, d: int):
    """Exact binary piece for a non-singular form of dimension 2 or 3.

    Binary: diagonalise to <a, b>, then v = e1, u = s*e2 with b s^2 = d a.
    Ternary: the form is c<1, d> + <d det> over K exactly when it represents
    d*det, so take w with Q(w) = d*det from the rational quaternary
    Q + <-d det>; the complement of w has determinant d up to squares and is
    handled as a binary.
    """
    m = Q.n
    if m == 2:
        D = diagonalize(Q)
        a, b = (as_fraction(t) for t in D.coefficients)
        ratio = d * a / b
        if not is_rational_square(ratio):
            return None
        T = D.transform.matrix
        u = mat_vec(T, [Fraction(0), rational_sqrt(ratio)])
        v = mat_vec(T, [Fraction(1), Fraction(0)])
        return u, v
    det = as_fraction(Q.det())
    x = rational_isotropic_vector(QuadraticForm(block_diag(Q.matrix(), [[-d * det]])))
    if x is None or x[-1] == 0:
        return None
    w = [t / x[-1] for t in x[:-1]]
    W = integral_kernel([mat_vec(Q.matrix(), w)])
    pair = _binary_piece_exact(restrict(Q, W), d)
    if pair is None:
        return None
    return tuple(_push([list(r) for r in zip(*W)], y) for y in pair)


def binary_piece(Q: QuadraticForm, d: int, budget: SearchBudget | None = None, search_limit: int | None = None):
    """Rational ``(u, v)`` with ``B(u, v) = 0``, ``Q(u) = d Q(v) != 0``, or None.

    Candidates ``v`` run over a height schedule in a diagonal basis; for each
    the question "is ``Q|v^⊥ ⊥ <-d Q(v)>`` isotropic over Q" is decided exactly.
    """
    budget = budget or SearchBudget()
    if search_limit is None:
        search_limit = budget.max_candidates
    if Q.n in (2, 3) and Q.det() != 0:
        pair = _binary_piece_exact(Q, d)
        if pair is None:
            return None
        U, V = (_rational(x) for x in pair)
        assert bilinear(Q, U, V) == 0 and Q(U) == d * Q(V) != 0
        return U, V
    D = diagonalize(Q)
    c = [as_fraction(x) for x in D.coefficients]
    T = D.transform.matrix
    m = len(c)
    Dform = QuadraticForm.diagonal(c)
    tried = 0
    prev = 0
    for height in budget.heights():
        for v in _candidate_vectors(m, height, prev):
            tried += 1
            if tried > search_limit:
                return None
            val = sum(ci * vi * vi for ci, vi in zip(c, v))
            if val == 0:
                continue
            W = kernel([[ci * vi for ci, vi in zip(c, v)]])
            R = restrict(Dform, W) if W else QuadraticForm([])
            Rd = QuadraticForm(block_diag(R.matrix(), [[-d * val]]))
            if not is_isotropic_over_Q(Rd):
                continue
            x = rational_isotropic_vector(Rd)
            if x is None or x[-1] == 0:
                continue
            w = [t / x[-1] for t in x[:-1]]
            u = [sum((wj * Wj[i] for wj, Wj in zip(w, W)), Fraction(0)) for i in range(m)]
            U = _rational(mat_vec(T, u))
            V = _rational(mat_vec(T, [Fraction(t) for t in v]))
            assert bilinear(Q, U, V) == 0 and Q(U) == d * Q(V) != 0
            return U, V
        prev = height
    return None


def isotropic_vector_over_K(Q: QuadraticForm, d: int, budget: SearchBudget | None = None) -> Optional[KVector]:
    """Nonzero ``x`` in ``Q(√-d)^n`` with ``Q(x) = 0``, or None."""
    if Q.n == 0:
        return None
    x = rational_isotropic_vector(Q)
    if x is not None:
        return KVector.rational(x, d)
    if split_prime_obstruction(Q, d) is not None:
        return None
    pair = binary_piece(Q, d, budget)
    if pair is None:
        return None
    u, v = pair
    return KVector.from_parts(u, v, d)


# --- totally isotropic spaces ------------------------------------------------------

def _complement(Q: QuadraticForm, vectors: Sequence[Sequence]):
    rows = [mat_vec(Q.matrix(), list(v)) for v in vectors]
    return integral_kernel((rows))


def _push(M, x):
    """Coordinates ``x`` in the current basis (columns of M) to ambient ones."""
    return [sum((M[i][j] * x[j] for j in range(len(x))), Fraction(0)) for i in range(len(M))]


def totally_isotropic_space(Q: QuadraticForm, k: int, d: int, budget: SearchBudget | None = None) -> list[KVector]:
    """k K-independent, pairwise orthogonal isotropic vectors of a non-singular rational form."""
    budget = budget or SearchBudget()
    R = Q
    n = Q.n
    M = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    found: list[KVector] = []
    while len(found) < k:
        last = len(found) == k - 1
        x = rational_isotropic_vector(R)
        if x is not None:
            found.append(KVector.rational(_push(M, x), d))
            if last:
                break
            # a partner y with B(x, y) != 0 exists since R is non-singular
            Bx = mat_vec(R.matrix(), x)
            j = next(i for i, t in enumerate(Bx) if t != 0)
            y = [Fraction(int(i == j)) for i in range(R.n)]
            pieces = [x, y]
        else:
            obstruction = split_prime_obstruction(R, d)
            if obstruction is not None:
                raise SearchExhausted(
                    f"residual of dimension {R.n} is anisotropic at p = {obstruction}, which splits in Q(sqrt(-{d}))"
                )
            pair = binary_piece(R, d, budget)
            if pair is None:
                raise SearchExhausted(
                    f"no binary piece found in dimension {R.n} within heights {budget.heights()}", budget
                )
            u, v = pair
            found.append(KVector.from_parts(_push(M, u), _push(M, v), d))
            pieces = [u, v]
        W = _complement(R, pieces)
        R = restrict(R, W)
        M = [[sum((row[j] * w[j] for j in range(len(w))), Fraction(0)) for w in W] for row in M]
    return found


# --- canonical form and verification ------------------------------------------------

def canonical_vector(x: KVector) -> KVector:
    """Scale so both parts are integral with content 1 and the first nonzero entry is positive."""
    u, v = x.parts()
    parts = [as_fraction(t) for t in u + v]
    den = math.lcm(*(t.denominator for t in parts))
    ints = [int(t * den) for t in parts]
    g = math.gcd(*ints)
    ints = [t // g for t in ints]
    if next(t for t in ints if t) < 0:
        ints = [-t for t in ints]
    n = len(u)
    return KVector.from_parts([Fraction(t) for t in ints[:n]], [Fraction(t) for t in ints[n:]], x.d)


def _sort_key(x: KVector):
    u, v = x.parts()
    return tuple(u) + tuple(v)


def canonical_basis(vectors: Sequence[KVector]) -> tuple:
    return tuple(sorted((canonical_vector(x) for x in vectors), key=_sort_key))


def verify_space_witness(Q: QuadraticForm, W: SpaceWitness) -> bool:
    """Exact check: d valid, basis K-independent, all pairwise values zero."""
    d = W.d
    if d <= 0 or squarefree_part(d) != d:
        return False
    K = QuadraticField(d)
    basis = [list(x.entries) for x in W.basis]
    if any(len(b) != Q.n or any(e.d != d for e in b) for b in basis):
        return False
    if rank(basis, K) != len(basis):
        return False
    G = [[K.coerce(t) for t in row] for row in Q.gram]
    Qk = QuadraticForm(G)
    for i in range(len(basis)):
        for j in range(i, len(basis)):
            if not K.is_zero(bilinear(Qk, basis[i], basis[j])):
                return False
    return True


# --- the driver ---------------------------------------------------------------------

def forced_field_check(part: QuadraticForm, k: int):
    """When ``n = 2k`` the field must be Q(√δ) with δ = (-1)^k det; check it locally.

    Returns ``d`` (or None when δ is a square) and raises NoAdmissibleField
    when the forced field is real or fails at a split prime.
    """
    delta = (-1) ** k * as_fraction(part.det())
    if is_rational_square(delta):
        return None
    if delta > 0:
        raise NoAdmissibleField(f"the discriminant {delta} forces the real field Q(sqrt({squarefree_class(delta)}))")
    d = squarefree_class(-delta)
    for p in relevant_primes(part):
        if is_square_in_qp(-d, p):
            w = witt_index_local(part, p)
            if w < k:
                raise NoAdmissibleField(
                    f"the discriminant forces d = {d}, but p = {p} splits in Q(sqrt(-{d})) "
                    f"and the Witt index there is {w} < {k}",
                    d=d,
                    place=p,
                )
    return d


def find_space(Q: QuadraticForm, k: int, budget: SearchBudget | None = None) -> SpaceWitness:
    """A k-dimensional totally isotropic space over some Q(√-d), as an exact witness."""
    if k < 1:
        raise ValueError("k must be at least 1")
    budget = budget or SearchBudget()
    part, rad, T = nonsingular_part(Q)
    n = Q.n
    j = part.n
    Tm = T.matrix
    radical = [[Tm[i][c] for i in range(n)] for c in range(j, n)]

    def lift(x: KVector) -> KVector:
        u, v = x.parts()
        pad = [Fraction(0)] * rad
        return KVector.from_parts(mat_vec(Tm, list(u) + pad), mat_vec(Tm, list(v) + pad), x.d)

    if rad >= k:
        choice = FieldChoice(1, ResidueClass(0, 1))
        basis = [KVector.rational(r, 1) for r in radical[:k]]
        W = SpaceWitness(1, canonical_basis(basis), choice)
        assert verify_space_witness(Q, W)
        return W
    kk = k - rad
    if j < 2 * kk:
        raise NoAdmissibleField(f"the non-singular part has dimension {j} < 2 * {kk}")
    if j == 2 * kk:
        d = forced_field_check(part, kk)
        if d is None:
            # discriminant is a square: the space is already rational if it exists at all
            d = 1
        choice = FieldChoice(d, ResidueClass(0, 1), forced=True)
    else:
        choice = choose_field(part, kk, budget)
    vecs = totally_isotropic_space(part, kk, choice.d, budget)
    basis = [lift(x) for x in vecs] + [KVector.rational(r, choice.d) for r in radical]
    W = SpaceWitness(choice.d, canonical_basis(basis), choice)
    if not verify_space_witness(Q, W):
        raise AssertionError("constructed space failed exact verification")
    return W


def decide_space_over_Q(Q: QuadraticForm, k: int) -> bool:
    """Whether a non-singular rational form has a k-dimensional totally isotropic space over Q."""
    n = Q.n
    if Q.det() == 0:
        raise ValueError("form is singular; use the non-singular part")
    if k <= 0:
        return True
    if 2 * k > n:
        return False
    if witt_index_local(Q, REAL) < k:
        return False
    if any(witt_index_local(Q, p) < k for p in relevant_primes(Q)):
        return False
    if 2 * k == n:
        # away from 2 det, full Witt index needs a square discriminant
        return is_rational_square((-1) ** (n // 2) * as_fraction(Q.det()))
    return True
