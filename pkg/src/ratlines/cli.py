"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 search exhausted or no
admissible field, 64 malformed input or usage.
"""

from __future__ import annotations

import argparse
import os
import sys
import warnings
from fractions import Fraction

from .arith import REAL
from .cubicline import (
    CubicForm,
    LineGuaranteeWarning,
    LineSearchFailed,
    PipelineConfig,
    find_line,
    trilinear_from_cubic,
    verify_line,
)
from .globalspace import (
    BUDGET_ENV,
    NoAdmissibleField,
    SearchBudget,
    SearchExhausted,
    SpaceWitness,
    find_space,
    forced_field_check,
    verify_space_witness,
)
from .local import ell_class, local_report, relevant_primes
from .quadform import QuadraticField, QuadraticForm, bilinear, radical_split, rank
from .textio import (
    Certificate,
    ParseError,
    emit_certificate,
    form_digest,
    line_certificate,
    parse_certificate,
    parse_form,
    space_certificate,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_EXHAUSTED = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _schedule(text: str | None) -> SearchBudget:
    if text is None:
        return SearchBudget.from_env()
    try:
        hs = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"--budget-schedule expects comma-separated integers, got {text!r}")
    if not hs or any(h < 1 for h in hs):
        raise UsageError("--budget-schedule heights must be positive")
    return SearchBudget(hs, cap=max(hs))


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}")


def _load_form(path: str, kind=None):
    form = parse_form(_read(path), source=path)
    if kind is not None and not isinstance(form, kind):
        want = "quadratic" if kind is QuadraticForm else "cubic"
        raise UsageError(f"{path}: expected a {want} form")
    return form


def _write(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_find_space(args) -> int:
    Q = _load_form(args.form, QuadraticForm)
    budget = _schedule(args.budget_schedule)
    try:
        W = find_space(Q, args.k, budget)
    except NoAdmissibleField as exc:
        print(f"no admissible field: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except SearchExhausted as exc:
        print(f"search exhausted: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    cert = space_certificate(Q, W, ",".join(map(str, budget.heights())))
    _write(emit_certificate(cert), args.out)
    return EXIT_OK


def cmd_find_line(args) -> int:
    C = _load_form(args.form, CubicForm)
    budget = _schedule(args.budget_schedule)
    config = PipelineConfig(
        gamma=args.gamma,
        gamma_effective=args.k,
        base_height=args.height,
        zero_height=max(1, min(args.height, 3)),
        space_budget=budget,
        precision=args.precision,
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", LineGuaranteeWarning)
        try:
            w, attempts = find_line(C, config)
        except LineSearchFailed as exc:
            for a in exc.attempts:
                print(f"stage {a.stage} (k = {a.k}): {a.detail}", file=sys.stderr)
            return EXIT_EXHAUSTED
    for warning in caught:
        print(f"warning: {warning.message}", file=sys.stderr)
    d = attempts[-1].detail.split("=")[-1].strip()
    cert = line_certificate(C, w, ",".join(map(str, budget.heights())), int(d) if d.isdigit() else None)
    _write(emit_certificate(cert), args.out)
    return EXIT_OK


def _space_failure(Q: QuadraticForm, cert: Certificate) -> str | None:
    d = cert.d
    if d is None or d < 1:
        return "d must be a positive squarefree integer"
    try:
        K = QuadraticField(d)
    except ValueError as exc:
        return str(exc)
    basis = cert.space_basis()
    if any(len(x) != Q.n for x in basis):
        return f"vectors must have length {Q.n}"
    if rank([list(x.entries) for x in basis], K) != len(basis):
        return "basis is dependent over K"
    G = QuadraticForm([[K.coerce(t) for t in row] for row in Q.gram])
    for i in range(len(basis)):
        for j in range(i, len(basis)):
            val = bilinear(G, list(basis[i].entries), list(basis[j].entries))
            if not K.is_zero(val):
                return f"B(v{i + 1}, v{j + 1}) = {val} is not zero"
    if not verify_space_witness(Q, SpaceWitness(d, tuple(basis))):
        return "witness rejected"
    return None


def _line_failure(C: CubicForm, cert: Certificate) -> str | None:
    w = cert.line()
    if any(len(z) != C.n for z in (w.z1, w.z2)):
        return f"vectors must have length {C.n}"
    if rank([list(w.z1), list(w.z2)]) != 2:
        return "z1 and z2 are dependent"
    phi = trilinear_from_cubic(C)
    z1, z2 = list(w.z1), list(w.z2)
    for name, triple in (("z1,z1,z1", (z1, z1, z1)), ("z1,z1,z2", (z1, z1, z2)),
                         ("z1,z2,z2", (z1, z2, z2)), ("z2,z2,z2", (z2, z2, z2))):
        val = phi(*triple)
        if val != 0:
            return f"Phi({name}) = {val} is not zero"
    if not verify_line(C, w):
        return "witness rejected"
    return None


def cmd_verify(args) -> int:
    form = _load_form(args.form)
    cert = parse_certificate(_read(args.certificate), source=args.certificate)
    if cert.digest != form_digest(form):
        print("FAIL: form digest does not match the certificate", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    if cert.kind == "space":
        if not isinstance(form, QuadraticForm):
            raise UsageError("space certificates go with quadratic forms")
        failure = _space_failure(form, cert)
    else:
        if not isinstance(form, CubicForm):
            raise UsageError("line certificates go with cubic forms")
        failure = _line_failure(form, cert)
    if failure:
        print(f"FAIL: {failure}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    print("OK")
    return EXIT_OK


def cmd_local_report(args) -> int:
    Q = _load_form(args.form, QuadraticForm)
    part, rad, _ = radical_split(Q)
    print(f"n = {Q.n}, radical dimension {rad}")
    if part.n == 0:
        return EXIT_OK
    print(f"det of non-singular part = {part.det()}")
    primes = relevant_primes(part)
    for place in [REAL] + primes:
        print(local_report(Q, place).line())
    k = args.k if args.k is not None else part.n // 2
    if k >= 1 and part.n >= 2 * k + 1:
        for p in primes:
            e = ell_class(part, k, p)
            print(f"ell class at p = {p} (k = {k}): {e.ell.value} mod {e.m_p}, from coordinates {e.source_indices[0] + 1}, {e.source_indices[1] + 1}")
    elif k >= 1 and part.n == 2 * k:
        try:
            d = forced_field_check(part, k)
        except NoAdmissibleField as exc:
            print(f"forced field (k = {k}): {exc}")
        else:
            if d is None:
                print(f"forced field (k = {k}): discriminant is a square, no constraint on d")
            else:
                print(f"forced field (k = {k}): d = {d}, no split-prime obstruction found")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ratlines", description="Isotropic spaces of rational quadratic forms and lines on cubics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--budget-schedule", help=f"comma-separated search heights (default from ${BUDGET_ENV} or 10,30,100)")
    common.add_argument("--jobs", type=int, default=1, help="worker count; results do not depend on it")
    common.add_argument("--precision", type=int, default=16, help="p-adic working precision")

    p = sub.add_parser("find-space", parents=[common], help="totally isotropic space over some Q(sqrt(-d))")
    p.add_argument("form")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_find_space)

    p = sub.add_parser("find-line", parents=[common], help="rational line on a cubic hypersurface")
    p.add_argument("form")
    p.add_argument("--k", type=int, help="effective gamma: dimension of the isotropic space used")
    p.add_argument("--gamma", type=int, default=16)
    p.add_argument("--height", type=int, default=10, help="base point search height")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_find_line)

    p = sub.add_parser("verify", help="re-check a certificate against its form")
    p.add_argument("form")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("local-report", parents=[common], help="per-place isotropy and local classes")
    p.add_argument("form")
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_local_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be positive")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
