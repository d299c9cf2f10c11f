"""Text formatting of series and reports."""

import pytest

from helpers import series
from fedosov_lab.report import (
    Report,
    emit_report,
    format_index,
    format_monomial,
    format_scalar,
    format_series,
    format_term_key,
)
from fedosov_lab.scalar import Scalar


def test_scalars_and_keys():
    assert format_scalar(Scalar(0, -1) / 2) == "-1/2 i"
    assert format_index((1, 0)) == "(1,0)"
    assert format_index(()) == "()"
    assert format_term_key(((0, 2), (1, 0), 1, (1, 2))) == "a=(0,2) b=(1,0) m=1 J=(1,2)"
    assert format_monomial((2, 0), (1, 0), 1, (1, 2)) == "x1^2*y1*ħ*dx1*dx2"


@pytest.mark.parametrize(
    "src,text",
    [
        ("0", "0"),
        ("3/4", "3/4"),
        ("-2", "-2"),
        ("x1*x2 - (1/2) i hbar", "x1*x2 - (1/2)i ħ"),
        ("x1/2 - x2", "(1/2) x1 - x2"),
        ("(1 + i) y1*dx2", "(1 + 1 i) y1*dx2"),
    ],
)
def test_format_series(src, text):
    assert format_series(series(src)) == text


def _report():
    r = Report("demo")
    r.line("value: 3", "value", n=3)
    r.series("s", "s", series("x1 - hbar/2"))
    r.check("first", "first check", True)
    r.check("second", "second check", False, witness="a=(1,0)")
    r.check("hidden", "hidden check", True, quiet=True)
    return r


def test_human_report():
    out = emit_report(_report(), "human")
    assert out == (
        "value: 3\n"
        "s = x1 - (1/2) ħ\n"
        "first check: PASS\n"
        "second check: FAIL\n"
        "  witness: a=(1,0)\n"
        "status: FAIL\n"
    )


def test_machine_report():
    lines = emit_report(_report(), "machine").splitlines()
    assert lines[0] == "report command=demo"
    assert lines[1] == "value n=3"
    assert lines[2] == "series name=s terms=2"
    assert "check name=second status=FAIL witness=a=(1,0)" in lines
    assert "check name=hidden status=PASS" in lines
    assert lines[-1] == "status value=FAIL"


def test_exit_codes():
    r = Report("x")
    assert r.exit_code == 0
    r.check("a", "a", True)
    assert r.exit_code == 0
    r.check("b", "b", False)
    assert r.exit_code == 1


def test_unknown_format():
    with pytest.raises(ValueError):
        emit_report(Report("x"), "json")
