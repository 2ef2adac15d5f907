from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ratlines.cli import main
from ratlines.cubicline import CubicForm
from ratlines.quadform import QuadraticForm
from ratlines.textio import ParseError, emit_form, parse_certificate, parse_form

FIVE_SQUARES = "quadratic n=5\n" + "".join(f"{i} {i} = 1\n" for i in range(1, 6))
COUNTER = """quadratic n=8
# X1^2 + X2^2 + 3 X3^2 - 6 X4^2 + X5 X6 + X7 X8
1 1 = 1
2 2 = 1
3 3 = 3
4 4 = -6
5 6 = 1
7 8 = 1
"""


def test_parse_examples():
    Q = parse_form("quadratic n=2\n1 2 = 1\n")
    assert Q.gram == ((0, Fraction(1, 2)), (Fraction(1, 2), 0))
    C = parse_form("cubic n=3\n1 2 3 = 1\n")
    assert C == CubicForm(3, {(0, 1, 2): 1})
    with pytest.raises(ParseError) as info:
        parse_form("cubic n=3\n1 2 4 = 1\n", source="bad.txt")
    assert str(info.value) == "bad.txt:2:5: index 4 outside 1..3"
    with pytest.raises(ParseError):
        parse_form("quadratic n=2\n1 1 = 0.5\n")


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.tuples(st.just(n), st.dictionaries(
    st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)).map(lambda t: tuple(sorted(t))),
    st.fractions(min_value=-20, max_value=20, max_denominator=9), max_size=6))))
def test_form_round_trip(data):
    n, coeffs = data
    Q = QuadraticForm.from_coefficients(n, coeffs)
    assert parse_form(emit_form(Q)) == Q


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_find_space_and_verify(tmp_path, capsys):
    form = _write(tmp_path, "q.txt", FIVE_SQUARES)
    cert = str(tmp_path / "q.cert")
    assert main(["find-space", form, "--k", "2", "--out", cert]) == 0
    text = open(cert).read()
    assert "d = 1" in text and parse_certificate(text).d == 1
    assert main(["verify", form, cert]) == 0
    assert capsys.readouterr().out.strip() == "OK"


def test_verify_reports_bad_pair(tmp_path, capsys):
    form = _write(tmp_path, "q.txt", FIVE_SQUARES)
    cert = str(tmp_path / "q.cert")
    main(["find-space", form, "--k", "2", "--out", cert])
    lines = open(cert).read().splitlines()
    i = next(j for j, l in enumerate(lines) if l.startswith("v = "))
    lines[i] = lines[i].replace("(1 + ", "(2 + ", 1) if "(1 + " in lines[i] else lines[i].replace("(0 + ", "(5 + ", 1)
    _write(tmp_path, "q.cert", "\n".join(lines) + "\n")
    capsys.readouterr()
    assert main(["verify", form, cert]) == 1
    assert "is not zero" in capsys.readouterr().err


def test_find_space_counterexample_exit_2(tmp_path, capsys):
    form = _write(tmp_path, "c.txt", COUNTER)
    assert main(["find-space", form, "--k", "4"]) == 2
    err = capsys.readouterr().err
    assert "d = 2" in err and "p = 3" in err


def test_local_report_counterexample(tmp_path, capsys):
    form = _write(tmp_path, "r.txt", "quadratic n=4\n1 1 = 1\n2 2 = 1\n3 3 = 3\n4 4 = -6\n")
    assert main(["local-report", form, "--k", "2"]) == 0
    out = capsys.readouterr().out
    assert "p = 3: anisotropic, Witt 0" in out
    assert "d = 2" in out


def test_find_line_and_verify(tmp_path, capsys):
    form = _write(tmp_path, "c.txt", "cubic n=3\n1 2 3 = 1\n")
    cert = str(tmp_path / "c.cert")
    assert main(["find-line", form, "--k", "1", "--out", cert]) == 0
    assert main(["verify", form, cert]) == 0


def test_usage_errors(tmp_path, capsys):
    bad = _write(tmp_path, "bad.txt", "cubic n=3\n1 2 4 = 1\n")
    assert main(["find-line", bad]) == 64
    assert "bad.txt:2:5" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        main(["find-space", bad])
    assert info.value.code == 64
    assert main(["find-space", str(tmp_path / "missing.txt"), "--k", "1"]) == 64


def test_digest_mismatch(tmp_path):
    form = _write(tmp_path, "q.txt", FIVE_SQUARES)
    other = _write(tmp_path, "o.txt", FIVE_SQUARES.replace("5 5 = 1", "5 5 = 2"))
    cert = str(tmp_path / "q.cert")
    main(["find-space", form, "--k", "2", "--out", cert])
    assert main(["verify", other, cert]) == 1


def test_output_independent_of_jobs(tmp_path):
    form = _write(tmp_path, "q.txt", FIVE_SQUARES.replace("5 5 = 1", "5 5 = -7"))
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["find-space", form, "--k", "2", "--jobs", "1", "-o", a]) == 0
    assert main(["find-space", form, "--k", "2", "--jobs", "4", "-o", b]) == 0
    assert open(a).read() == open(b).read()
