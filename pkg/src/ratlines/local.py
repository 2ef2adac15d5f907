"""Per-place analysis of rational quadratic forms.

Decisions (isotropy, Witt index) use the classification of forms over Q_p by
dimension, discriminant and Hasse invariant. Constructions (linear spaces over
Q_p and over Q_p(√-d)) run the hyperbolic splitting in p-adic arithmetic and
are checked by exact evaluation of integer lifts modulo p**N.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .arith import (
    REAL,
    ResidueClass,
    as_fraction,
    hasse_invariant,
    hilbert_symbol,
    is_prime,
    is_rational_square,
    is_square_in_qp,
    m_p,
    padic_valuation,
    prime_divisors,
)
from .padic import DEFAULT_PRECISION, PAdicApprox, PAdicField, padic_is_square, padic_sqrt
from .quadform import (
    QuadFieldElement,
    QuadraticForm,
    SingularForm,
    SplitFailure,
    diagonalize,
    integral_scale,
    mat_vec,
    padic_normalize,
    radical_split,
    split_hyperbolic,
)

COMPLEX = "C"


class LocalConstructionError(RuntimeError):
    pass


class CongruenceViolation(ValueError):
    pass


@dataclass(frozen=True)
class Place:
    tag: str
    p: Optional[int] = None

    @classmethod
    def finite(cls, p: int) -> "Place":
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        return cls("finite", p)

    @classmethod
    def real(cls) -> "Place":
        return cls("real")

    @classmethod
    def complex(cls) -> "Place":
        return cls("complex")

    @classmethod
    def coerce(cls, place) -> "Place":
        if isinstance(place, Place):
            return place
        if place in (REAL, "real", "R"):
            return cls.real()
        if place in (COMPLEX, "complex"):
            return cls.complex()
        return cls.finite(int(place))

    def __str__(self):
        return {"finite": f"p = {self.p}", "real": "R", "complex": "C"}[self.tag]


@dataclass(frozen=True)
class LocalReport:
    place: Place
    isotropic: bool
    witt_index: int
    anisotropic_kernel_dim: int
    radical_dim: int = 0

    def line(self) -> str:
        kind = "isotropic" if self.isotropic else "anisotropic"
        s = f"{self.place}: {kind}, Witt {self.witt_index}"
        if self.radical_dim:
            s += f", radical {self.radical_dim}"
        return s


@dataclass(frozen=True)
class EllClass:
    p: int
    m_p: int
    ell: ResidueClass
    source_indices: tuple
    units: tuple = ()
    exponents: tuple = ()

    def admits(self, d: int) -> bool:
        return (-d - self.ell.value) % self.m_p == 0

    def is_square_class(self) -> bool:
        """True when the class is a square mod m_p (the split case)."""
        return is_square_in_qp(self.ell.value, self.p)


@dataclass(frozen=True)
class LocalSpaceWitness:
    """Basis of a totally isotropic space over Q_p or Q_p(√-d).

    Entries are :class:`PAdicApprox`, or :class:`QuadFieldElement` with
    p-adic parts when ``field_tag`` is ``"Q_p(sqrt(-d))"``.
    """

    p: int
    precision: int
    basis: tuple
    field_tag: str
    d: Optional[int] = None

    @property
    def k(self) -> int:
        return len(self.basis)


# --- invariants ----------------------------------------------------------------

def _require_nonsingular(Q: QuadraticForm):
    if Q.det() == 0:
        raise SingularForm("form is singular; apply radical_split first")


def form_invariants(Q: QuadraticForm, p):
    """(dimension, determinant, Hasse invariant at p) of a non-singular rational form."""
    D = diagonalize(Q)
    coeffs = [as_fraction(c) for c in D.coefficients]
    det = math.prod(coeffs, start=Fraction(1))
    return len(coeffs), det, hasse_invariant(coeffs, p)


def isotropic_by_invariants(n: int, det, hasse: int, p) -> bool:
    if n <= 1:
        return False
    if n == 2:
        return is_square_in_qp(-det, p)
    if n == 3:
        return hasse == hilbert_symbol(-1, -det, p)
    if n == 4:
        return (not is_square_in_qp(det, p)) or hasse == hilbert_symbol(-1, -1, p)
    return True


def witt_by_invariants(n: int, det, hasse: int, p) -> int:
    w = 0
    det = as_fraction(det)
    while n >= 2 and isotropic_by_invariants(n, det, hasse, p):
        # Q = H ⊥ Q' with det Q' = -det Q and c(Q') = c(Q) (-1, -det Q)
        hasse *= hilbert_symbol(-1, -det, p)
        det = -det
        n -= 2
        w += 1
    return w


def _signature(Q: QuadraticForm):
    D = diagonalize(Q)
    pos = sum(1 for c in D.coefficients if c > 0)
    neg = sum(1 for c in D.coefficients if c < 0)
    return pos, neg


def witt_index_local(Q: QuadraticForm, place) -> int:
    _require_nonsingular(Q)
    place = Place.coerce(place)
    if place.tag == "complex":
        return Q.n // 2
    if place.tag == "real":
        return min(_signature(Q))
    if Q.n == 0:
        return 0
    n, det, hasse = form_invariants(Q, place.p)
    return witt_by_invariants(n, det, hasse, place.p)


def is_isotropic_local(Q: QuadraticForm, place) -> bool:
    return witt_index_local(Q, place) >= 1


def local_report(Q: QuadraticForm, place) -> LocalReport:
    place = Place.coerce(place)
    part, rad, _ = radical_split(Q)
    w = witt_index_local(part, place) if part.n else 0
    return LocalReport(place, w >= 1 or rad > 0, w, part.n - 2 * w, rad)


def witt_index_over_K(Q: QuadraticForm, p: int, d: int) -> int:
    """Witt index of a non-singular rational form over Q_p(√-d).

    Write Q = wH ⊥ A over Q_p with A anisotropic. Over a quadratic extension
    A of dimension 3 or 4 gains one or two hyperbolic planes (the quaternion
    algebra splits); a binary A = <a, b> gains one exactly when ab·d is a
    square in Q_p.
    """
    w = witt_index_local(Q, p)
    if is_square_in_qp(-d, p):
        return w
    a = Q.n - 2 * w
    if a >= 3:
        return w + a - 2
    if a == 2:
        det_a = as_fraction(Q.det()) * (-1) ** w
        return w + (1 if is_square_in_qp(det_a * d, p) else 0)
    return w


def completion_of_K(d: int, place) -> str:
    """``"Q_p"`` when -d is a square at p (p splits), else the quadratic extension."""
    place = Place.coerce(place)
    if place.tag in ("real", "complex"):
        return "C"
    p = place.p
    return f"Q_{p}" if is_square_in_qp(-d, p) else f"Q_{p}(sqrt(-{d}))"


# --- Chevalley and Hensel ----------------------------------------------------------

def chevalley_zero(coeffs: Sequence[int], p: int) -> tuple:
    """Lexicographically least nonzero zero of ``Σ a_i x_i²`` modulo an odd prime."""
    if p == 2:
        raise ValueError("chevalley_zero is for odd primes")
    a = [int(c) % p for c in coeffs]
    if len(a) < 3:
        raise ValueError("need at least three variables")
    if any(c == 0 for c in a):
        raise ValueError("coefficients must be units mod p")
    for x in itertools.product(range(p), repeat=len(a)):
        if any(x) and sum(c * t * t for c, t in zip(a, x)) % p == 0:
            return x
    raise AssertionError("Chevalley's theorem guarantees a zero")


def hensel_lift_zero(coeffs: Sequence[int], seed: Sequence[int], p: int, N: int) -> list[PAdicApprox]:
    """Lift a simple zero of ``Σ a_i x_i²`` mod p to a zero mod ``p**N``."""
    a = [int(c) for c in coeffs]
    x = [int(t) for t in seed]
    if all(t % p == 0 for t in x):
        raise ValueError("seed is the zero vector mod p")
    if sum(c * t * t for c, t in zip(a, x)) % p:
        raise ValueError("seed is not a zero mod p")
    simple = [i for i in range(len(a)) if (2 * a[i] * x[i]) % p]
    if not simple:
        raise ValueError("no simple coordinate: every partial derivative vanishes mod p")
    i = simple[0]
    mod = p**N
    while True:
        val = sum(c * t * t for c, t in zip(a, x))
        if val % mod == 0:
            break
        x[i] = (x[i] - val * pow(2 * a[i] * x[i], -1, mod)) % mod
    return [PAdicApprox.from_rational(t, p, N) for t in x]


# --- p-adic isotropic vectors --------------------------------------------------------

def _lift(x):
    return x.lift() if isinstance(x, PAdicApprox) else as_fraction(x)


def _diag_isotropic(coeffs: Sequence[PAdicApprox], p: int) -> bool:
    cs = [_lift(c) for c in coeffs]
    n = len(cs)
    det = math.prod(cs, start=Fraction(1))
    return isotropic_by_invariants(n, det, hasse_invariant(cs, p), p)


def _small_vectors(m: int, bound: int):
    """Nonzero integer vectors ordered by max-norm, then lexicographically."""
    for h in range(1, bound + 1):
        for x in itertools.product(range(-h, h + 1), repeat=m):
            if max(abs(t) for t in x) == h:
                yield x


def diagonal_zero_qp(coeffs: Sequence[PAdicApprox], p: int) -> list[PAdicApprox]:
    """Nonzero zero over Q_p of ``Σ c_i x_i²`` (must be isotropic)."""
    m = len(coeffs)
    zero = PAdicApprox.zero(p)
    for i, c in enumerate(coeffs):
        if c.is_zero():
            return [coeffs[0] * 0 + (1 if j == i else 0) for j in range(m)]
    if m > 5:
        return diagonal_zero_qp(coeffs[:5], p) + [zero] * (m - 5)
    if not _diag_isotropic(coeffs, p):
        raise LocalConstructionError(f"diagonal form is anisotropic over Q_{p}")
    one = coeffs[0] / coeffs[0]
    if m == 2:
        return [one, padic_sqrt(-coeffs[0] / coeffs[1])]
    if _diag_isotropic(coeffs[:-1], p):
        return diagonal_zero_qp(coeffs[:-1], p) + [zero]
    last = coeffs[-1]
    for y in _small_vectors(m - 1, 4 * p + 8):
        t = sum((c * (yi * yi) for c, yi in zip(coeffs, y)), start=zero)
        if t.is_zero():
            continue
        target = -t / last
        if padic_is_square(target):
            return [one * yi for yi in y] + [padic_sqrt(target)]
    raise LocalConstructionError("no representation found in the search box")


def padic_isotropic_vector(Q: QuadraticForm, p: int, precision: int):
    """Isotropic vector of a p-adic (or rational) form over Q_p, via diagonalisation."""
    field = PAdicField(p, precision)
    D = diagonalize(Q, field)
    y = diagonal_zero_qp(list(D.coefficients), p)
    return mat_vec([list(r) for r in D.transform.matrix], y)


def _chevalley_oracle(p: int, precision: int):
    """Oracle for unimodular forms at odd p: unit diagonal, Chevalley zero, Hensel lift."""
    field = PAdicField(p, precision)

    def oracle(Q: QuadraticForm):
        D = diagonalize(Q, field)
        units = [c.unit for c in D.coefficients[:3]]
        if any(c.valuation != 0 for c in D.coefficients[:3]):
            raise LocalConstructionError("form is not unimodular at p")
        seed = chevalley_zero(units, p)
        lifted = hensel_lift_zero(units, seed, p, precision)
        y = lifted + [PAdicApprox.zero(p)] * (Q.n - 3)
        return mat_vec([list(r) for r in D.transform.matrix], y)

    return oracle


# --- local linear spaces -------------------------------------------------------

def _integral(Q: QuadraticForm) -> QuadraticForm:
    return Q.scaled(integral_scale(Q))


def _working_precision(Q: QuadraticForm, p: int, N: int) -> int:
    det = as_fraction(Q.det())
    return N + 2 * abs(padic_valuation(det, p)) + 24


def _e(n, i, field):
    return [field.one() if j == i else field.zero() for j in range(n)]


def qp_linear_space(Q: QuadraticForm, k: int, p: int, N: int = DEFAULT_PRECISION) -> LocalSpaceWitness:
    """k-dimensional totally isotropic Q_p-space for ``p ∤ 2 det Q`` (Chevalley + Hensel)."""
    Qi = _integral(Q)
    n = Qi.n
    if n < 2 * k + 1:
        raise ValueError(f"need n >= 2k + 1, got n = {n}, k = {k}")
    det = as_fraction(Qi.det())
    if p == 2 or det == 0 or padic_valuation(det, p) != 0:
        raise ValueError(f"prime {p} divides 2 det Q")
    W = N + 8
    field = PAdicField(p, W)
    oracle = _chevalley_oracle(p, W)
    dec = split_hyperbolic(Qi, k - 1, oracle, field)
    T = [list(r) for r in dec.transform.matrix]
    R = dec.residual
    zr = oracle(R)
    basis = [mat_vec(T, _e(n, 2 * u + 1, field)) for u in range(k - 1)]
    basis.append(mat_vec(T, [field.zero()] * (2 * k - 2) + list(zr)))
    basis = echelon_padic(basis, p)
    w = LocalSpaceWitness(p, N, tuple(tuple(b) for b in basis), f"Q_{p}")
    if not verify_local_witness(Q, w):
        raise LocalConstructionError(f"Q_{p} witness failed verification")
    return w


@dataclass
class _LocalStructure:
    p: int
    precision: int
    split_matrix: list
    diag_matrix: list
    coefficients: tuple
    normalized: object
    pair: tuple


def _local_structure(Q: QuadraticForm, k: int, p: int, precision: int) -> _LocalStructure:
    Qi = _integral(Q)
    field = PAdicField(p, precision)
    dec = split_hyperbolic(Qi, k - 1, lambda F: padic_isotropic_vector(F, p, precision), field)
    D = diagonalize(dec.residual, field)
    if any(c.is_zero() for c in D.coefficients):
        raise LocalConstructionError("precision exhausted while diagonalising the residual")
    N = padic_normalize(D, p)
    pair = next(
        (i, j)
        for i in range(len(N.exponents))
        for j in range(i + 1, len(N.exponents))
        if N.exponents[i] == N.exponents[j]
    )
    return _LocalStructure(
        p,
        precision,
        [list(r) for r in dec.transform.matrix],
        [list(r) for r in D.transform.matrix],
        D.coefficients,
        N,
        pair,
    )


def _structure_with_retry(Q, k, p, N):
    W = _working_precision(_integral(Q), p, N)
    last = None
    for _ in range(3):
        try:
            return _local_structure(Q, k, p, W)
        except (LocalConstructionError, SplitFailure, ZeroDivisionError, ValueError) as exc:
            last = exc
            W *= 2
    raise LocalConstructionError(f"local splitting at {p} failed: {last}")


def ell_class(Q: QuadraticForm, k: int, p: int) -> EllClass:
    """The unit class mod m_p steering the choice of d at a prime dividing 2 det Q."""
    _require_nonsingular(Q)
    if Q.n < 2 * k + 1:
        raise ValueError(f"need n >= 2k + 1, got n = {Q.n}, k = {k}")
    S = _structure_with_retry(Q, k, p, DEFAULT_PRECISION)
    i, j = S.pair
    a = S.normalized.units
    m = m_p(p)
    ell = (-a[i] * a[j]) % m
    return EllClass(p, m, ResidueClass(ell, m), (i, j), tuple(x % m for x in a), S.normalized.exponents)


def local_space_over_K(Q: QuadraticForm, k: int, p: int, d: int, N: int = DEFAULT_PRECISION) -> LocalSpaceWitness:
    """k-dimensional totally isotropic space over Q_p(√-d) for admissible d."""
    _require_nonsingular(Q)
    n = Q.n
    if n < 2 * k + 1:
        raise ValueError(f"need n >= 2k + 1, got n = {n}, k = {k}")
    W = _working_precision(_integral(Q), p, N)
    last = None
    for _ in range(3):
        try:
            w = _local_space_over_K(Q, k, p, d, N, W)
        except CongruenceViolation:
            raise
        except (LocalConstructionError, ZeroDivisionError, ValueError, SplitFailure) as exc:
            last = exc
        else:
            if verify_local_witness(Q, w):
                return w
            last = LocalConstructionError("witness failed verification")
        W *= 2
    raise LocalConstructionError(f"local space over Q_{p}(sqrt(-{d})) failed: {last}")


def _local_space_over_K(Q, k, p, d, N, W) -> LocalSpaceWitness:
    S = _local_structure(Q, k, p, W)
    i, j = S.pair
    a, scales = S.normalized.units, S.normalized.scales
    m = m_p(p)
    ell = (-a[i] * a[j]) % m
    if (-d - ell) % m:
        raise CongruenceViolation(f"-{d} is not congruent to {ell} mod {m}")
    field = PAdicField(p, W)
    ai, aj = field.coerce(a[i]), field.coerce(a[j])
    r = padic_sqrt(ai * d / aj)
    v = len(S.coefficients)
    zero = field.zero()
    # X_i = 1, X_j = Y_j / sqrt(-d) with Y_j = r, in normalised coordinates
    re = [zero] * v
    im = [zero] * v
    re[i] = field.one() / field.coerce(scales[i])
    im_j = -(r / d) / field.coerce(scales[j])
    split = is_square_in_qp(-d, p)
    if split:
        s = padic_sqrt(field.coerce(-d))
        re[j] = im_j * s
    else:
        im[j] = im_j
    n = Q.n
    pad = [zero] * (2 * k - 2)
    Tm, Dm = S.split_matrix, S.diag_matrix
    zre = mat_vec(Tm, pad + mat_vec(Dm, re))
    zim = mat_vec(Tm, pad + mat_vec(Dm, im))
    planes = [mat_vec(Tm, _e(n, 2 * u + 1, field)) for u in range(k - 1)]
    if split:
        basis = echelon_padic(planes + [zre], p)
        return LocalSpaceWitness(p, N, tuple(tuple(b) for b in basis), f"Q_{p}", d)
    basis = [tuple(QuadFieldElement(x, zero, d) for x in b) for b in planes]
    basis.append(tuple(QuadFieldElement(x, y, d) for x, y in zip(zre, zim)))
    return LocalSpaceWitness(p, N, tuple(basis), f"Q_{p}(sqrt(-{d}))", d)


# --- verification ----------------------------------------------------------------

def echelon_padic(vectors, p: int):
    """Same Q_p-span, rescaled so the rows are integral and independent mod p."""
    rows = [list(v) for v in vectors]
    used = set()
    out = []
    for _ in range(len(rows)):
        best = None
        for r, row in enumerate(rows):
            if r in used:
                continue
            for c, x in enumerate(row):
                if not x.is_zero() and (best is None or x.valuation < best[0]):
                    best = (x.valuation, r, c)
        if best is None:
            raise LocalConstructionError("basis vectors are dependent at this precision")
        _, r, c = best
        piv = rows[r][c]
        rows[r] = [x / piv for x in rows[r]]
        for r2 in range(len(rows)):
            if r2 != r and not rows[r2][c].is_zero():
                fac = rows[r2][c]
                rows[r2] = [x - fac * y for x, y in zip(rows[r2], rows[r])]
        used.add(r)
        out.append(r)
    return [rows[r] for r in sorted(out)]


def _integer_lift(entries, p: int):
    """Integer-valued rational lifts of a vector, scaled to be primitive at p."""
    lifts = [_lift(x) for x in entries]
    vals = [padic_valuation(x, p) for x in lifts if x != 0]
    if not vals:
        return lifts, False
    shift = Fraction(p) ** min(vals)
    return [x / shift for x in lifts], True


def _mod_p_rank(rows, p: int) -> int:
    M = [[(x.numerator * pow(x.denominator, -1, p)) % p for x in r] for r in rows]
    rank = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p)
        M[rank] = [x * inv % p for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c]:
                f = M[i][c]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


def verify_local_witness(Q: QuadraticForm, w: LocalSpaceWitness) -> bool:
    """Pairwise bilinear values vanish mod p**N and the basis has full rank."""
    p, N = w.p, w.precision
    G = Q.matrix()
    if w.field_tag.startswith(f"Q_{p}(sqrt"):
        d = w.d
        re_rows, im_rows = [], []
        for b in w.basis:
            re = [_lift(x.re) for x in b]
            im = [_lift(x.im) for x in b]
            vals = [padic_valuation(x, p) for x in re + im if x != 0]
            if not vals:
                return False
            shift = Fraction(p) ** min(vals)
            re_rows.append([x / shift for x in re])
            im_rows.append([x / shift for x in im])
        for s in range(len(re_rows)):
            for t in range(s, len(re_rows)):
                u1, v1, u2, v2 = re_rows[s], im_rows[s], re_rows[t], im_rows[t]
                real = _bil(G, u1, u2) - d * _bil(G, v1, v2)
                imag = _bil(G, u1, v2) + _bil(G, v1, u2)
                if min(padic_valuation(real, p), padic_valuation(imag, p)) < N:
                    return False
        return _k_rank_ok(re_rows, im_rows, d, p, N)
    rows = []
    for b in w.basis:
        lifted, ok = _integer_lift(b, p)
        if not ok:
            return False
        rows.append(lifted)
    for s in range(len(rows)):
        for t in range(s, len(rows)):
            if padic_valuation(_bil(G, rows[s], rows[t]), p) < N:
                return False
    return _mod_p_rank(rows, p) == len(rows)


def _bil(G, x, y):
    return sum((x[i] * G[i][j] * y[j] for i in range(len(x)) for j in range(len(y)) if G[i][j] != 0), start=Fraction(0))


def _k_rank_ok(re_rows, im_rows, d, p, N) -> bool:
    """Some k×k minor of the K-matrix has norm of valuation below the precision."""
    k = len(re_rows)
    n = len(re_rows[0])
    for cols in itertools.combinations(range(n), k):
        M = [[QuadFieldElement(re_rows[r][c], im_rows[r][c], d) for c in cols] for r in range(k)]
        det = _kdet(M, d)
        nrm = det.norm()
        if nrm != 0 and padic_valuation(nrm, p) < N:
            return True
    return False


def _kdet(M, d):
    from .quadform import QuadraticField, determinant

    return determinant(M, QuadraticField(d))


def relevant_primes(Q: QuadraticForm) -> list[int]:
    """Primes dividing 2 det Q after scaling Q to integer coefficients."""
    det = as_fraction(_integral(Q).det())
    return sorted(set([2] + prime_divisors(det)))
