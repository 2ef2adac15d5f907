"""Text formats: form files and certificates. Exact rationals only.

Form file::

    quadratic n=3
    # X1*X2 + X3^2
    1 2 = 1
    3 3 = 1

Indices are 1-based; each entry is the coefficient of the monomial. Certificate::

    certificate space v1
    tool = ratlines 0.1.0
    form-sha256 = ...
    budget = 10,30,100
    d = 1
    v = (0 + 1*sqrt(-1), 1, 0)
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from . import __version__
from .cubicline import CubicForm, LineWitness
from .quadform import KVector, QuadFieldElement, QuadraticForm

TOOL = f"ratlines {__version__}"


class ParseError(ValueError):
    def __init__(self, line: int, col: int, message: str, source: str = "<input>"):
        super().__init__(f"{source}:{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


_RATIONAL = re.compile(r"[+-]?\d+(/\d+)?$")


def parse_rational(text: str, line: int = 0, col: int = 0) -> Fraction:
    t = text.strip()
    if not _RATIONAL.match(t):
        raise ParseError(line, col, f"not an exact rational: {t!r}")
    q = Fraction(t)
    if "/" in t and int(t.split("/")[1]) == 0:
        raise ParseError(line, col, "zero denominator")
    return q


def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# --- forms ---------------------------------------------------------------------------

Form = Union[QuadraticForm, CubicForm]


def parse_form(text: str, source: str = "<input>") -> Form:
    header = None
    entries: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        col = len(body) - len(body.lstrip()) + 1
        if header is None:
            m = re.fullmatch(r"\s*(quadratic|cubic)\s+n\s*=\s*(\d+)\s*", body)
            if not m:
                raise ParseError(lineno, col, "expected 'quadratic n=<n>' or 'cubic n=<n>'", source)
            header = (m.group(1), int(m.group(2)))
            if header[1] < 1:
                raise ParseError(lineno, col, "n must be positive", source)
            continue
        kind, n = header
        if "=" not in body:
            raise ParseError(lineno, col, "expected '<indices> = <rational>'", source)
        lhs, rhs = body.split("=", 1)
        idx_tokens = lhs.split()
        degree = 2 if kind == "quadratic" else 3
        if len(idx_tokens) != degree:
            raise ParseError(lineno, col, f"{kind} entries need {degree} indices", source)
        pos = col
        idx = []
        for tok in idx_tokens:
            pos = body.index(tok, pos - 1) + 1
            if not tok.isdigit():
                raise ParseError(lineno, pos, f"bad index {tok!r}", source)
            i = int(tok)
            if not 1 <= i <= n:
                raise ParseError(lineno, pos, f"index {i} outside 1..{n}", source)
            idx.append(i - 1)
        rcol = len(lhs) + 2 + (len(rhs) - len(rhs.lstrip()))
        try:
            c = parse_rational(rhs, lineno, rcol)
        except ParseError as exc:
            raise ParseError(lineno, rcol, exc.message, source) from None
        key = tuple(sorted(idx))
        entries[key] = entries.get(key, Fraction(0)) + c
    if header is None:
        raise ParseError(1, 1, "empty form file", source)
    kind, n = header
    if kind == "quadratic":
        return QuadraticForm.from_coefficients(n, entries)
    return CubicForm(n, entries)


def emit_form(form: Form) -> str:
    if isinstance(form, QuadraticForm):
        lines = [f"quadratic n={form.n}"]
        items = sorted(form.coefficients().items())
    else:
        lines = [f"cubic n={form.n}"]
        items = sorted(form.as_dict().items())
    for idx, c in items:
        lines.append(" ".join(str(i + 1) for i in idx) + f" = {format_rational(c)}")
    return "\n".join(lines) + "\n"


def form_digest(form: Form) -> str:
    return hashlib.sha256(emit_form(form).encode()).hexdigest()


# --- certificates ------------------------------------------------------------------------

@dataclass
class Certificate:
    kind: str
    digest: str
    vectors: list
    d: int | None = None
    tool: str = TOOL
    budget: str = ""
    extra: dict = field(default_factory=dict)

    def space_basis(self) -> list[KVector]:
        return [KVector(tuple(QuadFieldElement(a, b, self.d) for a, b in v), self.d) for v in self.vectors]

    def line(self) -> LineWitness:
        return LineWitness(tuple(a for a, _ in self.vectors[0]), tuple(a for a, _ in self.vectors[1]))


def _format_entry(a, b, d) -> str:
    if d is None:
        return format_rational(a)
    return f"{format_rational(a)} + {format_rational(b)}*sqrt(-{d})"


def emit_certificate(cert: Certificate) -> str:
    lines = [f"certificate {cert.kind} v1", f"tool = {cert.tool}", f"form-sha256 = {cert.digest}"]
    if cert.budget:
        lines.append(f"budget = {cert.budget}")
    for key, val in cert.extra.items():
        lines.append(f"{key} = {val}")
    if cert.kind == "space":
        lines.append(f"d = {cert.d}")
    name = "v" if cert.kind == "space" else "z"
    d = cert.d if cert.kind == "space" else None
    for v in cert.vectors:
        lines.append(f"{name} = (" + ", ".join(_format_entry(a, b, d) for a, b in v) + ")")
    return "\n".join(lines) + "\n"


_K_ENTRY = re.compile(r"\s*([+-]?\d+(?:/\d+)?)\s*\+\s*([+-]?\d+(?:/\d+)?)\s*\*\s*sqrt\(\s*-\s*(\d+)\s*\)\s*$")


def _parse_vector(text: str, lineno: int, col: int, d, source):
    t = text.strip()
    if not (t.startswith("(") and t.endswith(")")):
        raise ParseError(lineno, col, "vector must be parenthesised", source)
    out = []
    pos = text.index("(") + col + 1
    for piece in t[1:-1].split(","):
        if d is None:
            try:
                out.append((parse_rational(piece, lineno, pos), Fraction(0)))
            except ParseError as exc:
                raise ParseError(lineno, pos, exc.message, source) from None
        else:
            m = _K_ENTRY.match(piece)
            if m:
                if int(m.group(3)) != d:
                    raise ParseError(lineno, pos, f"entry uses sqrt(-{m.group(3)}) but d = {d}", source)
                out.append((Fraction(m.group(1)), Fraction(m.group(2))))
            else:
                try:
                    out.append((parse_rational(piece, lineno, pos), Fraction(0)))
                except ParseError:
                    raise ParseError(lineno, pos, f"bad field entry {piece.strip()!r}", source) from None
        pos += len(piece) + 1
    return out


def parse_certificate(text: str, source: str = "<certificate>") -> Certificate:
    kind = None
    fields: dict = {}
    extra: dict = {}
    raw_vectors = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        col = len(body) - len(body.lstrip()) + 1
        if kind is None:
            m = re.fullmatch(r"\s*certificate\s+(space|line)\s+v1\s*", body)
            if not m:
                raise ParseError(lineno, col, "expected 'certificate space|line v1'", source)
            kind = m.group(1)
            continue
        if "=" not in body:
            raise ParseError(lineno, col, "expected '<key> = <value>'", source)
        key, val = (s.strip() for s in body.split("=", 1))
        vcol = body.index("=") + 2
        if key in ("v", "z"):
            raw_vectors.append((val, lineno, vcol, key))
        elif key in ("tool", "form-sha256", "budget", "d"):
            fields[key] = (val, lineno, vcol)
        else:
            extra[key] = val
    if kind is None:
        raise ParseError(1, 1, "empty certificate", source)
    if "form-sha256" not in fields:
        raise ParseError(1, 1, "missing form-sha256", source)
    d = None
    if kind == "space":
        if "d" not in fields:
            raise ParseError(1, 1, "missing d", source)
        val, ln, c = fields["d"]
        if not re.fullmatch(r"\d+", val):
            raise ParseError(ln, c, f"d must be a positive integer, got {val!r}", source)
        d = int(val)
    vectors = []
    for val, ln, c, key in raw_vectors:
        want = "v" if kind == "space" else "z"
        if key != want:
            raise ParseError(ln, 1, f"{kind} certificates list vectors as '{want} = (...)'", source)
        vectors.append(_parse_vector(val, ln, c, d, source))
    if kind == "line" and len(vectors) != 2:
        raise ParseError(1, 1, "a line certificate needs exactly two vectors", source)
    return Certificate(
        kind,
        fields["form-sha256"][0],
        vectors,
        d,
        fields.get("tool", (TOOL,))[0],
        fields.get("budget", ("",))[0],
        extra,
    )


def space_certificate(form: QuadraticForm, witness, budget: str = "") -> Certificate:
    vecs = [[(e.re, e.im) for e in x.entries] for x in witness.basis]
    return Certificate("space", form_digest(form), vecs, witness.d, budget=budget, extra={"k": str(witness.k)})


def line_certificate(form: CubicForm, w: LineWitness, budget: str = "", d: int | None = None) -> Certificate:
    vecs = [[(Fraction(t), Fraction(0)) for t in z] for z in (w.z1, w.z2)]
    extra = {"field-used": f"Q(sqrt(-{d}))"} if d else {}
    return Certificate("line", form_digest(form), vecs, None, budget=budget, extra=extra)
