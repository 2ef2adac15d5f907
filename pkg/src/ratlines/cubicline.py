"""Rational lines on cubic hypersurfaces.

Pipeline: base point x with C(x) = 0, the slices L(Y) = Φ(x, x, Y) and
Q(Y) = Φ(x, Y, Y), the subspace H = {X_i = L = 0}, a totally isotropic space
V of Q|H over some Q(√-d), a zero y of C on V, and finally a rational line
pulled back from the K-line through x and y.

The pull-back rests on the factorisation, valid when the K-line conditions
hold for y = u + √-d v:

    C(αx + βu + γv) = (dβ² + γ²)(3Aα + 3Bβ + Eγ),
    A = Φ(x, v, v),  B = Φ(u, v, v),  E = Φ(v, v, v),

so the plane 3Aα + 3Bβ + Eγ = 0 inside span(x, u, v) lies on C = 0.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import sympy as sp

from .arith import as_fraction
from .globalspace import NoAdmissibleField, SearchBudget, SearchExhausted, find_space
from .quadform import KVector, QuadFieldElement, QuadraticForm, kernel, radical_split, rank, restrict

DEFAULT_GAMMA = 16


class LineSearchFailed(RuntimeError):
    """A pipeline stage ran out of budget; ``stage`` names it."""

    def __init__(self, stage: str, message: str, attempts=()):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.attempts = tuple(attempts)


class PullBackError(ValueError):
    pass


class LineGuaranteeWarning(UserWarning):
    pass


def _sorted_key(idx) -> tuple:
    return tuple(sorted(idx))


@dataclass(frozen=True)
class CubicForm:
    """Coefficients keyed by sorted 0-based index triples."""

    n: int
    coeffs: tuple

    def __init__(self, n: int, coeffs: dict):
        merged: dict = {}
        for idx, c in dict(coeffs).items():
            if len(idx) != 3 or any(not 0 <= i < n for i in idx):
                raise ValueError(f"bad monomial {idx} for n = {n}")
            key = _sorted_key(idx)
            merged[key] = merged.get(key, Fraction(0)) + as_fraction(c)
        items = tuple(sorted((k, v) for k, v in merged.items() if v != 0))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "coeffs", items)

    def as_dict(self) -> dict:
        return dict(self.coeffs)

    def __call__(self, x):
        x = list(x)
        if len(x) != self.n:
            raise ValueError("wrong vector length")
        total = 0
        for (a, b, c), coef in self.coeffs:
            total = total + x[a] * x[b] * x[c] * coef
        return total

    def is_zero(self) -> bool:
        return not self.coeffs


@dataclass(frozen=True)
class TrilinearTensor:
    """Symmetric Φ stored once per sorted index triple."""

    n: int
    values: tuple

    def as_dict(self) -> dict:
        return dict(self.values)

    def entry(self, a: int, b: int, c: int) -> Fraction:
        return self.as_dict().get(_sorted_key((a, b, c)), Fraction(0))

    def __call__(self, x, y, z):
        total = 0
        for key, val in self.values:
            for a, b, c in set(itertools.permutations(key)):
                xa = x[a]
                if _zero(xa):
                    continue
                yb = y[b]
                if _zero(yb):
                    continue
                zc = z[c]
                if _zero(zc):
                    continue
                total = total + xa * yb * zc * val
        return total


def _zero(t) -> bool:
    return t.is_zero() if isinstance(t, QuadFieldElement) else t == 0


def _n_arrangements(key) -> int:
    return len(set(itertools.permutations(key)))


def trilinear_from_cubic(C: CubicForm) -> TrilinearTensor:
    return TrilinearTensor(C.n, tuple((k, v / _n_arrangements(k)) for k, v in C.coeffs))


def cubic_from_trilinear(phi: TrilinearTensor) -> CubicForm:
    return CubicForm(phi.n, {k: v * _n_arrangements(k) for k, v in phi.values})


# --- base point ----------------------------------------------------------------------

def value_order(h: int) -> list[int]:
    """1, -1, 2, -2, ..., h, -h, 0."""
    out = []
    for t in range(1, h + 1):
        out += [t, -t]
    return out + [0]


def height_vectors(n: int, h: int):
    """Primitive integer vectors of max-norm exactly h, first nonzero entry positive."""
    vals = value_order(h)
    for x in itertools.product(vals, repeat=n):
        if max(abs(t) for t in x) != h:
            continue
        if next(t for t in x if t) < 0 or math.gcd(*x) != 1:
            continue
        yield x


def base_point(C: CubicForm, budget: int = 10, skip: int = 0) -> Optional[list[Fraction]]:
    """Enumeration-least primitive zero of height <= budget (after ``skip`` earlier ones)."""
    for h in range(1, budget + 1):
        for x in height_vectors(C.n, h):
            if C(x) == 0:
                if skip == 0:
                    return [Fraction(t) for t in x]
                skip -= 1
    return None


# --- slices ---------------------------------------------------------------------------

def slice_forms(phi: TrilinearTensor, x):
    """``(L, Q)`` with ``L(Y) = Φ(x, x, Y)`` as a coefficient list and ``Q(Y) = Φ(x, Y, Y)``."""
    n = phi.n
    x = [as_fraction(t) for t in x]
    if phi(x, x, x) != 0:
        raise ValueError("base point is not a zero of the cubic")
    e = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    L = [phi(x, x, e[i]) for i in range(n)]
    G = [[phi(x, e[i], e[j]) for j in range(n)] for i in range(n)]
    return L, QuadraticForm(G)


def hyperplane_basis(L: Sequence, lambda_index: int, n: int) -> list[list[Fraction]]:
    """Basis of ``{Y_i = 0, L(Y) = 0}``; dimension n - 2, or n - 1 when L is a multiple of Y_i."""
    rows = [[Fraction(int(j == lambda_index)) for j in range(n)], [as_fraction(t) for t in L]]
    return kernel(rows)


@dataclass(frozen=True)
class LinePlan:
    base_point: tuple
    lambda_index: int
    L: tuple
    Qslice: QuadraticForm
    H: tuple

    @property
    def h_dim(self) -> int:
        return len(self.H)


def plan_line(C: CubicForm, x) -> LinePlan:
    phi = trilinear_from_cubic(C)
    L, Qs = slice_forms(phi, x)
    i = next(j for j, t in enumerate(x) if t != 0)
    H = hyperplane_basis(L, i, C.n)
    return LinePlan(tuple(as_fraction(t) for t in x), i, tuple(L), Qs, tuple(tuple(b) for b in H))


def restrict_cubic(C: CubicForm, basis: Sequence[Sequence]) -> CubicForm:
    """``C(Σ t_j b_j)`` as a cubic in the t variables."""
    phi = trilinear_from_cubic(C)
    m = len(basis)
    out = {}
    for key in itertools.combinations_with_replacement(range(m), 3):
        a, b, c = key
        val = phi(basis[a], basis[b], basis[c]) * _n_arrangements(key)
        if val != 0:
            out[key] = val
    return CubicForm(m, out)


# --- zero of a cubic over K ---------------------------------------------------------------

def _k_tensor(phi: TrilinearTensor, vectors: Sequence[KVector], d: int):
    """Φ(y_a, y_b, y_c) over K for sorted triples, as integer pairs over a common denominator."""
    m = len(vectors)
    vals = {}
    for key in itertools.combinations_with_replacement(range(m), 3):
        a, b, c = key
        v = phi(list(vectors[a].entries), list(vectors[b].entries), list(vectors[c].entries))
        if not isinstance(v, QuadFieldElement):
            v = QuadFieldElement(v, 0, d)
        vals[key] = (v * _n_arrangements(key))
    den = math.lcm(*(t.denominator for v in vals.values() for t in (v.re, v.im)), 1)
    return {k: (int(v.re * den), int(v.im * den)) for k, v in vals.items() if not v.is_zero()}


def _kmul(x, y, d):
    return (x[0] * y[0] - d * x[1] * y[1], x[0] * y[1] + x[1] * y[0])


def _eval_k_cubic(T: dict, t, d: int):
    re = im = 0
    for (a, b, c), coef in T.items():
        p = _kmul(_kmul(t[a], t[b], d), _kmul(t[c], coef, d), d)
        re += p[0]
        im += p[1]
    return re, im


def _binary_roots(c0, c1, c2, c3, d: int):
    """Roots in Q(√-d) of c0 s³ + c1 s² + c2 s + c3 (coefficients as K elements)."""
    r = sp.sqrt(-d)
    s = sp.Symbol("s")
    coeffs = [sp.Rational(c.re.numerator, c.re.denominator) + sp.Rational(c.im.numerator, c.im.denominator) * r
              for c in (c0, c1, c2, c3)]
    f = sp.Poly(sum(c * s ** (3 - i) for i, c in enumerate(coeffs)), s, extension=r)
    roots = []
    for g, _ in f.factor_list()[1]:
        if g.degree() == 1:
            a1, a0 = g.all_coeffs()
            root = sp.expand(-a0 / a1)
            re_part, im_part = root.as_real_imag()
            re_q = sp.Rational(sp.nsimplify(re_part))
            im_q = sp.Rational(sp.nsimplify(sp.simplify(im_part / sp.sqrt(d))))
            roots.append(QuadFieldElement(Fraction(int(re_q.p), int(re_q.q)), Fraction(int(im_q.p), int(im_q.q)), d))
    return sorted(roots, key=lambda z: (abs(z.re) + abs(z.im), z.re, z.im))


def _split_primes(d: int, count: int = 6, start: int = 11):
    """Odd primes q (not dividing d) where -d is a square, with a chosen root of -d."""
    out = []
    q = start
    while len(out) < count:
        if all(q % r for r in range(2, int(q**0.5) + 1)) and d % q:
            root = next((r for r in range(1, q) if (r * r + d) % q == 0), None)
            if root is not None:
                out.append((q, root))
        q += 1
    return out


def _may_have_root(coeffs, d: int, primes) -> bool:
    """False when some split prime shows the cubic has no root in K.

    K embeds in F_q via sqrt(-d) -> r; a K-root of a q-integral cubic with
    unit leading coefficient reduces to a root mod q.
    """
    for q, r in primes:
        cs = []
        ok = True
        for c in coeffs:
            den = c.re.denominator * c.im.denominator
            if den % q == 0:
                ok = False
                break
            cs.append((c.re.numerator * pow(c.re.denominator, -1, q) + r * c.im.numerator * pow(c.im.denominator, -1, q)) % q)
        if not ok or cs[0] == 0:
            continue
        if not any((((cs[0] * t + cs[1]) * t + cs[2]) * t + cs[3]) % q == 0 for t in range(q)):
            return False
    return True


def _k_value(T: dict, t, d: int) -> QuadFieldElement:
    re, im = _eval_k_cubic(T, t, d)
    return QuadFieldElement(re, im, d)


def _line_cubic(T: dict, a, b, d: int):
    """Coefficients of s ↦ C2(s·a + b) (a, b integer vectors), highest degree first."""
    def at(s):
        return _k_value(T, [((s * x + y), 0) for x, y in zip(a, b)], d)

    v0, v1, vm, v2 = at(0), at(1), at(-1), at(2)
    B = (v1 + vm) / 2 - v0
    AC = (v1 - vm) / 2
    A = (v2 - 4 * B - v0 - 2 * AC) / 6
    return A, B, AC - A, v0


def cubic_zero_over_K(C: CubicForm, vectors: Sequence[KVector], d: int, height: int = 3, line_height: int = 1):
    """Nonzero K-combination ``t`` of ``vectors`` with C(Σ t_j y_j) = 0, or None.

    Stages, each exact: basis vectors; binary cubics on the lines through
    pairs of small integer combinations (coordinate pairs first), solved over
    K by factoring; then enumeration of t with integer parts of height <= ``height``.
    """
    phi = trilinear_from_cubic(C)
    m = len(vectors)
    if m == 0:
        return None
    T = _k_tensor(phi, vectors, d)
    zero = QuadFieldElement(0, 0, d)
    one = QuadFieldElement(1, 0, d)
    units = [[int(i == j) for j in range(m)] for i in range(m)]
    for e in units:
        if _eval_k_cubic(T, [(x, 0) for x in e], d) == (0, 0):
            return [one * x for x in e]
    points = units + [list(c) for h in range(1, line_height + 1) for c in height_vectors(m, h) if sum(map(abs, c)) > 1]
    primes = _split_primes(d)
    for a, b in itertools.combinations(points, 2):
        if rank([a, b]) < 2:
            continue
        coeffs = _line_cubic(T, a, b, d)
        if coeffs[0].is_zero():
            return [one * x for x in a]
        if not _may_have_root(coeffs, d, primes):
            continue
        roots = _binary_roots(*coeffs, d)
        if roots:
            s0 = roots[0]
            return [s0 * x + y for x, y in zip(a, b)]
    if m < 3:
        return None
    vals = value_order(height)
    for h in range(1, height + 1):
        for parts in itertools.product(vals, repeat=2 * m):
            if max(abs(p) for p in parts) != h:
                continue
            if next(p for p in parts if p) < 0 or math.gcd(*parts) != 1:
                continue
            t = [(parts[2 * j], parts[2 * j + 1]) for j in range(m)]
            if _eval_k_cubic(T, t, d) == (0, 0):
                return [QuadFieldElement(a, b, d) for a, b in t]
    return None


# --- pull-back -------------------------------------------------------------------------------

@dataclass(frozen=True)
class LineWitness:
    z1: tuple
    z2: tuple


def _identity_failures(phi, x, u, v, d):
    checks = [
        ("Phi(x,x,u) = 0", phi(x, x, u)),
        ("Phi(x,x,v) = 0", phi(x, x, v)),
        ("Phi(x,u,v) = 0", phi(x, u, v)),
        ("Phi(x,u,u) = d Phi(x,v,v)", phi(x, u, u) - d * phi(x, v, v)),
        ("Phi(u,u,u) = 3d Phi(u,v,v)", phi(u, u, u) - 3 * d * phi(u, v, v)),
        ("3 Phi(u,u,v) = d Phi(v,v,v)", 3 * phi(u, u, v) - d * phi(v, v, v)),
    ]
    return [name for name, val in checks if val != 0]


def _primitive(z):
    z = [as_fraction(t) for t in z]
    den = math.lcm(*(t.denominator for t in z))
    ints = [int(t * den) for t in z]
    g = math.gcd(*ints)
    ints = [t // g for t in ints]
    if any(ints) and next(t for t in ints if t) < 0:
        ints = [-t for t in ints]
    return tuple(Fraction(t) for t in ints)


def verify_line(C: CubicForm, w: LineWitness) -> bool:
    z1 = [as_fraction(t) for t in w.z1]
    z2 = [as_fraction(t) for t in w.z2]
    if len(z1) != C.n or len(z2) != C.n or rank([z1, z2]) != 2:
        return False
    phi = trilinear_from_cubic(C)
    return all(phi(*triple) == 0 for triple in ((z1, z1, z1), (z1, z1, z2), (z1, z2, z2), (z2, z2, z2)))


def _line_from(C, a, b) -> Optional[LineWitness]:
    w = LineWitness(_primitive(a), _primitive(b))
    return w if verify_line(C, w) else None


def pull_back_line(C: CubicForm, x, y: KVector) -> LineWitness:
    """Rational line on C = 0 from a K-line span(x, y) on it."""
    phi = trilinear_from_cubic(C)
    d = y.d
    x = [as_fraction(t) for t in x]
    u_, v_ = y.parts()
    u = [as_fraction(t) for t in u_]
    v = [as_fraction(t) for t in v_]
    if phi(x, x, x) != 0:
        raise PullBackError("C(x) != 0")
    bad = _identity_failures(phi, x, u, v, d)
    if bad:
        raise PullBackError("K-line identities fail: " + "; ".join(bad))
    if not any(v):
        w = _line_from(C, x, u)
        if w is None:
            raise PullBackError("x and u are dependent")
        return w
    A = phi(x, v, v)
    B = phi(u, v, v)
    E = phi(v, v, v)
    spanning = [x, u, v]
    functional = [3 * A, 3 * B, E]
    if any(functional):
        params = kernel([functional])
    else:
        params = [[Fraction(int(i == j)) for j in range(3)] for i in range(3)]
    images = [[sum(p[k] * spanning[k][i] for k in range(3)) for i in range(len(x))] for p in params]
    chosen = []
    for z in images:
        if any(z) and rank(chosen + [z]) == len(chosen) + 1:
            chosen.append(z)
        if len(chosen) == 2:
            break
    if len(chosen) == 2:
        w = _line_from(C, *chosen)
        if w is not None:
            return w
    # degenerate: fall back to lines inside span(x, u, v)
    basis = []
    for z in spanning:
        if any(z) and rank(basis + [z]) == len(basis) + 1:
            basis.append(z)
    w = _line_search_in_span(C, basis)
    if w is None:
        raise PullBackError("no rational line found in span(x, u, v)")
    return w


def _line_search_in_span(C: CubicForm, basis, height: int = 3) -> Optional[LineWitness]:
    if len(basis) == 2:
        return _line_from(C, *basis)
    if len(basis) < 2:
        return None
    # pairs of small coefficient vectors in the span
    coords = [c for h in range(1, height + 1) for c in height_vectors(len(basis), h)]
    pts = [[sum(c[k] * basis[k][i] for k in range(len(basis))) for i in range(len(basis[0]))] for c in coords]
    zeros = [p for p in pts if C(p) == 0]
    for a, b in itertools.combinations(zeros, 2):
        if rank([a, b]) == 2:
            w = _line_from(C, a, b)
            if w is not None:
                return w
    return None


# --- pipeline --------------------------------------------------------------------------------

@dataclass(frozen=True)
class PipelineConfig:
    gamma: int = DEFAULT_GAMMA
    gamma_effective: Optional[int] = None
    base_height: int = 10
    zero_height: int = 3
    space_budget: SearchBudget = field(default_factory=SearchBudget)
    precision: int = 16
    base_points: int = 6

    def __post_init__(self):
        if self.gamma < 10:
            raise ValueError("gamma must be at least 10")
        if self.gamma_effective is not None and self.gamma_effective < 1:
            raise ValueError("gamma_effective must be positive")

    @property
    def k(self) -> int:
        return self.gamma if self.gamma_effective is None else self.gamma_effective


@dataclass
class Attempt:
    base_point: tuple
    k: int
    stage: str
    detail: str


def _lift_to_ambient(H, t: KVector) -> KVector:
    u, v = t.parts()
    n = len(H[0])
    U = [sum((u[j] * H[j][i] for j in range(len(H))), Fraction(0)) for i in range(n)]
    V = [sum((v[j] * H[j][i] for j in range(len(H))), Fraction(0)) for i in range(n)]
    return KVector.from_parts(U, V, t.d)


def _max_k(Q1: QuadraticForm) -> int:
    part, rad, _ = radical_split(Q1)
    return rad + part.n // 2


def find_line(C: CubicForm, config: PipelineConfig | None = None) -> tuple[LineWitness, list]:
    """Verified rational line on C = 0 plus the log of attempts; raises LineSearchFailed."""
    config = config or PipelineConfig()
    n = C.n
    if n < 2 * config.gamma + 3:
        warnings.warn(
            f"n = {n} < 2*gamma + 3 = {2 * config.gamma + 3}: a line is not guaranteed, searching anyway",
            LineGuaranteeWarning,
            stacklevel=2,
        )
    attempts: list[Attempt] = []
    for skip in range(config.base_points):
        x = base_point(C, config.base_height, skip)
        if x is None:
            attempts.append(Attempt((), 0, "base-point", f"no zero of height <= {config.base_height}"))
            break
        plan = plan_line(C, x)
        H = [list(b) for b in plan.H]
        if not H:
            attempts.append(Attempt(tuple(x), 0, "hyperplane", "H is zero"))
            continue
        Q1 = restrict(plan.Qslice, H)
        k_top = min(config.k, _max_k(Q1))
        for k in range(k_top, 0, -1):
            try:
                W = find_space(Q1, k, config.space_budget)
            except (NoAdmissibleField, SearchExhausted, ValueError) as exc:
                attempts.append(Attempt(tuple(x), k, "space", str(exc)))
                continue
            Vn = [_lift_to_ambient(H, b) for b in W.basis]
            t = cubic_zero_over_K(C, Vn, W.d, config.zero_height)
            if t is None:
                attempts.append(Attempt(tuple(x), k, "cubic-zero", f"no zero over Q(sqrt(-{W.d})) on V"))
                continue
            y = _combine(Vn, t, W.d)
            try:
                w = pull_back_line(C, x, y)
            except PullBackError as exc:
                attempts.append(Attempt(tuple(x), k, "pull-back", str(exc)))
                continue
            if not verify_line(C, w):
                attempts.append(Attempt(tuple(x), k, "verify", "pulled-back line failed verification"))
                continue
            attempts.append(Attempt(tuple(x), k, "done", f"d = {W.d}"))
            return w, attempts
    last = attempts[-1] if attempts else Attempt((), 0, "base-point", "no attempt")
    raise LineSearchFailed(last.stage, last.detail, attempts)


def _combine(vectors: Sequence[KVector], t, d: int) -> KVector:
    n = len(vectors[0])
    entries = []
    for i in range(n):
        s = QuadFieldElement(0, 0, d)
        for vec, tj in zip(vectors, t):
            s = s + vec.entries[i] * tj
        entries.append(s)
    return KVector(tuple(entries), d)
