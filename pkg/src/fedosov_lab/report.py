"""Exact-value reports in a human and a machine-readable format.

Human output is a list of lines meant for reading.  Machine output is one
record per line::

    <record> key=value key=value ... key=value

Values contain no spaces, except the last value on a line, which runs to
the end of the line (this is where scalars such as ``-1/2 i`` go).  Both
formats are byte-deterministic for a fixed report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .scalar import Scalar

__all__ = [
    "format_scalar",
    "format_index",
    "format_monomial",
    "format_series",
    "format_term_key",
    "Check",
    "Report",
    "emit_report",
]


def format_scalar(c) -> str:
    """``p/q``, ``p/q i`` or ``a + b i``."""
    return str(c)


def format_index(t) -> str:
    return "(" + ",".join(str(v) for v in t) + ")"


def format_term_key(key) -> str:
    """All indices of a series term: ``a=(..) b=(..) m=.. J=(..)``."""
    alpha, beta, m, J = key
    return f"a={format_index(alpha)} b={format_index(beta)} m={m} J={format_index(J)}"


def _pow(name: str, e: int) -> str:
    return name if e == 1 else f"{name}^{e}"


def format_monomial(alpha, beta, m: int, J) -> str:
    """``x1^2*y1*ħ*dx1*dx2``; empty string for the unit."""
    parts = [_pow(f"x{i}", e) for i, e in enumerate(alpha, start=1) if e]
    parts += [_pow(f"y{i}", e) for i, e in enumerate(beta, start=1) if e]
    if m:
        parts.append(_pow("ħ", m))
    parts += [f"dx{j}" for j in J]
    return "*".join(parts)


def _rat(q, bare_one: bool, paren: bool = True) -> str:
    if q.denominator == 1:
        return "" if (bare_one and q == 1) else str(int(q.numerator))
    txt = f"{int(q.numerator)}/{int(q.denominator)}"
    return f"({txt})" if paren else txt


def _coefficient(c: Scalar, has_mono: bool) -> tuple[int, str]:
    """Sign and magnitude text of a coefficient."""
    re, im = c._re, c._im
    if im == 0:
        sign = -1 if re < 0 else 1
        return sign, _rat(abs(re), has_mono, has_mono)
    if re == 0:
        sign = -1 if im < 0 else 1
        return sign, _rat(abs(im), True) + "i"
    inner = f"{re.numerator}/{re.denominator}" if re.denominator != 1 else str(int(re))
    istr = f"{abs(im).numerator}/{abs(im).denominator}" if abs(im).denominator != 1 else str(int(abs(im)))
    return 1, f"({inner} {'-' if im < 0 else '+'} {istr} i)"


def format_series(a) -> str:
    """Readable sum of terms, e.g. ``x1*x2 - (1/2)i ħ``; reparses to the same series."""
    out = []
    for (alpha, beta, m, J), c in a.terms().items():
        mono = format_monomial(alpha, beta, m, J)
        sign, coef = _coefficient(c, bool(mono))
        if coef == "" and not mono:
            coef = "1"
        body = coef + (" " if coef and mono else "") + mono
        if not out:
            out.append(("-" if sign < 0 else "") + body)
        else:
            out.append((" - " if sign < 0 else " + ") + body)
    return "".join(out) if out else "0"


@dataclass
class Check:
    slug: str
    name: str
    ok: bool
    witness: str | None = None
    quiet: bool = False


@dataclass
class Report:
    """Ordered report items; any failed check makes the report fail."""

    command: str
    items: list = field(default_factory=list)

    def line(self, human: str | None, record: str | None = None, **fields) -> "Report":
        """A human line (None: machine only) and an optional machine record."""
        self.items.append(("line", human, record, fields))
        return self

    def series(self, label: str, slug: str, s, human: str | None = None, quiet: bool = False) -> "Report":
        """A series; ``quiet`` ones appear only in machine output."""
        self.items.append(("series", label, slug, s, False if quiet else human))
        return self

    def check(self, slug: str, name: str, ok: bool, witness: str | None = None, quiet: bool = False) -> Check:
        """A named check; ``quiet`` ones are counted but not printed in human output."""
        c = Check(slug, name, bool(ok), witness, quiet)
        self.items.append(("check", c))
        return c

    @property
    def checks(self) -> list[Check]:
        return [it[1] for it in self.items if it[0] == "check"]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


def _fields(fields: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in fields.items())


def _human(r: Report) -> list[str]:
    out = []
    for it in r.items:
        kind = it[0]
        if kind == "line":
            if it[1] is not None:
                out.append(it[1])
        elif kind == "series":
            _, label, _, s, human = it
            if human is False:
                continue
            out.append(human if human is not None else (f"{label} = {format_series(s)}" if label else format_series(s)))
        else:
            c = it[1]
            if c.quiet:
                continue
            out.append(f"{c.name}: {'PASS' if c.ok else 'FAIL'}")
            if not c.ok and c.witness:
                out.append(f"  witness: {c.witness}")
    if r.checks:
        out.append(f"status: {'PASS' if r.passed else 'FAIL'}")
    return out


def _machine(r: Report) -> list[str]:
    out = [f"report command={r.command}"]
    for it in r.items:
        kind = it[0]
        if kind == "line":
            _, _, record, fields = it
            if record:
                out.append(f"{record} {_fields(fields)}" if fields else record)
        elif kind == "series":
            _, _, slug, s, _ = it
            terms = s.terms()
            out.append(f"series name={slug} terms={len(terms)}")
            for key, c in terms.items():
                out.append(f"term name={slug} {format_term_key(key)} c={c}")
        else:
            c = it[1]
            tail = f" witness={c.witness}" if (not c.ok and c.witness) else ""
            out.append(f"check name={c.slug} status={'PASS' if c.ok else 'FAIL'}{tail}")
    out.append(f"status value={'PASS' if r.passed else 'FAIL'}")
    return out


def emit_report(report: Report, fmt: str = "human") -> str:
    if fmt == "human":
        lines = _human(report)
    elif fmt == "machine":
        lines = _machine(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return "\n".join(lines) + "\n"
