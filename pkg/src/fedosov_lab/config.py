"""Line-oriented problem configuration.

A config is a sequence of named sections.  ``#`` starts a comment; blank
lines are ignored.  Indices may be separated by spaces or commas::

    [problem]
    name = curved-2d
    dim = 2
    order = 3            # K, highest hbar power
    bounds = 8, 10       # optional D_max, J_max (default 2K+2, 2K+4)
    probe = 4            # optional probe order for tables (default 2K)

    [omega]
    1 2 = 1 + x1*x2      # omega_{12}; unlisted entries follow by antisymmetry

    [connection]
    symplectize = yes    # correct the listed Gamma so that it preserves omega
    1 1 1 = x2           # Gamma^k_{ij} as "k i j = expr"

    [weyl]
    1 1 2 = 1            # hbar^1 perturbation of Omega, entry (1,2)

    [functions]
    f = x1 + x2^2

    [lagrangian]
    tangent = 1

    [symmetry]
    generator H1 = x1^2/2
    field H1 = 0, x1     # optional vector-field components
    bracket H1 H2 = H3   # [xi_a, xi_b] as a rational combination of generators

See docs/config.md for the full grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .expr import Expr, ExprError, parse_expr
from .fedosov import WeylCurvatureSpec
from .geometry import (
    GeometryData,
    GeometryError,
    LagrangianSpec,
    SingularFormError,
    check_closed,
    check_symplectic,
    check_torsion_free,
    symplectize,
)
from .series import Bounds, GradedSeries
from .weyl import SingularMatrixError

__all__ = [
    "ConfigError",
    "ConfigSyntaxError",
    "MissingFieldError",
    "DuplicateEntryError",
    "IndexRangeError",
    "ExpressionError",
    "AntisymmetryError",
    "DegenerateOmegaError",
    "OmegaNotClosedError",
    "TorsionError",
    "NotSymplecticError",
    "WeylNotClosedError",
    "LagrangianConfigError",
    "SymmetryConfigError",
    "Located",
    "ProblemConfig",
    "Problem",
    "parse_config",
    "load_config",
    "validate",
    "diagnose",
    "build_problem",
    "function_series",
    "form_series",
    "symmetry_data",
]


class ConfigError(ValueError):
    """Input error with a field path such as ``omega[1,2]`` and a line number."""

    code = "config"

    def __init__(self, message: str, path: str = "", line: int | None = None):
        self.message = message
        self.path = path
        self.line = line
        where = path + (f" (line {line})" if line else "")
        super().__init__(f"{where}: {message}" if where else message)


class ConfigSyntaxError(ConfigError):
    code = "syntax"


class MissingFieldError(ConfigError):
    code = "missing-field"


class DuplicateEntryError(ConfigError):
    code = "duplicate-entry"


class IndexRangeError(ConfigError):
    code = "index-range"


class ExpressionError(ConfigError):
    code = "expression"


class AntisymmetryError(ConfigError):
    code = "omega-antisymmetry"


class DegenerateOmegaError(ConfigError):
    code = "omega-degenerate"


class OmegaNotClosedError(ConfigError):
    code = "omega-closedness"


class TorsionError(ConfigError):
    code = "connection-torsion"


class NotSymplecticError(ConfigError):
    code = "connection-symplectic"


class WeylNotClosedError(ConfigError):
    code = "weyl-closedness"


class LagrangianConfigError(ConfigError):
    code = "lagrangian"


class SymmetryConfigError(ConfigError):
    code = "symmetry"


@dataclass(frozen=True)
class Located:
    """An expression with its source text and line."""

    src: str
    expr: Expr
    line: int


@dataclass
class ProblemConfig:
    dim: int
    order: int = 3
    degree: int | None = None
    jet: int | None = None
    probe: int | None = None
    name: str = ""
    omega: dict[tuple[int, int], Located] = field(default_factory=dict)
    connection: dict[tuple[int, int, int], Located] = field(default_factory=dict)
    symplectize: bool = False
    weyl: dict[tuple[int, int, int], Located] = field(default_factory=dict)
    functions: dict[str, Located] = field(default_factory=dict)
    tangent: tuple[int, ...] | None = None
    tangent_line: int | None = None
    generators: dict[str, Located] = field(default_factory=dict)
    fields: dict[str, list[Located]] = field(default_factory=dict)
    brackets: dict[tuple[str, str], tuple[dict[str, Fraction], int]] = field(default_factory=dict)

    def bounds(self) -> Bounds:
        b = Bounds.for_order(self.order)
        return Bounds(
            jet=self.jet if self.jet is not None else b.jet,
            degree=self.degree if self.degree is not None else b.degree,
            hbar=self.order,
        )

    def with_overrides(self, order: int | None = None, degree: int | None = None, jet: int | None = None) -> "ProblemConfig":
        from dataclasses import replace

        cfg = replace(self)
        if order is not None:
            cfg.order = order
            if degree is None and jet is None:
                cfg.degree = cfg.jet = None
        if degree is not None:
            cfg.degree = degree
        if jet is not None:
            cfg.jet = jet
        return cfg


# ---------------------------------------------------------------- parsing


_SECTIONS = ("problem", "omega", "connection", "weyl", "functions", "lagrangian", "symmetry")
_SECTION = re.compile(r"^\[\s*([A-Za-z]+)\s*\]$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")
_INDICES = re.compile(r"^\d+(?:\s*[,\s]\s*\d+)*$")
_RESERVED = re.compile(r"^(?:i|hbar|(?:x|y|dx)\d+)$")


def _ints(text: str, count: int, path: str, line: int) -> tuple[int, ...]:
    if not _INDICES.match(text):
        raise ConfigSyntaxError(f"expected {count} indices, got {text!r}", path, line)
    vals = tuple(int(t) for t in re.split(r"[,\s]+", text.strip()))
    if len(vals) != count:
        raise ConfigSyntaxError(f"expected {count} indices, got {len(vals)}", path, line)
    return vals


def _int(text: str, path: str, line: int, minimum: int = 0) -> int:
    if not re.fullmatch(r"\d+", text):
        raise ConfigSyntaxError(f"expected a non-negative integer, got {text!r}", path, line)
    v = int(text)
    if v < minimum:
        raise ConfigSyntaxError(f"must be at least {minimum}", path, line)
    return v


def _expr(text: str, path: str, line: int) -> Located:
    try:
        return Located(text, parse_expr(text), line)
    except ExprError as exc:
        raise ExpressionError(str(exc), path, line) from None


def _lincomb(text: str, path: str, line: int) -> dict[str, Fraction]:
    """``2 H1 - 1/2 H3`` or ``0``."""
    s = text.replace(" ", "")
    if s == "0":
        return {}
    out: dict[str, Fraction] = {}
    pos = 0
    pat = re.compile(r"([+-]?)(\d+(?:/\d+)?)?\*?([A-Za-z_][A-Za-z_0-9]*)")
    while pos < len(s):
        m = pat.match(s, pos)
        if not m or (pos > 0 and not m.group(1)):
            raise ConfigSyntaxError(f"expected a rational combination of generators, got {text!r}", path, line)
        c = Fraction(m.group(2)) if m.group(2) else Fraction(1)
        if m.group(1) == "-":
            c = -c
        out[m.group(3)] = out.get(m.group(3), Fraction(0)) + c
        pos = m.end()
    return {k: v for k, v in out.items() if v}


def parse_config(text: str) -> ProblemConfig:
    """Parse config text; structural errors only (see ``validate`` for geometry)."""
    section = None
    problem: dict[str, tuple[str, int]] = {}
    body: list[tuple[str, str, str, int]] = []
    for n, raw in enumerate(text.splitlines(), start=1):
        s = raw.split("#", 1)[0].strip()
        if not s:
            continue
        m = _SECTION.match(s)
        if m:
            section = m.group(1).lower()
            if section not in _SECTIONS:
                raise ConfigSyntaxError(f"unknown section [{section}]", f"[{section}]", n)
            continue
        if section is None:
            raise ConfigSyntaxError("entry outside of any section", "", n)
        if "=" not in s:
            raise ConfigSyntaxError("expected 'key = value'", f"[{section}]", n)
        key, val = (t.strip() for t in s.split("=", 1))
        if not key or not val:
            raise ConfigSyntaxError("empty key or value", f"[{section}]", n)
        if section == "problem":
            if key in problem:
                raise DuplicateEntryError(f"{key} given twice", f"problem.{key}", n)
            problem[key] = (val, n)
        else:
            body.append((section, key, val, n))

    if "dim" not in problem:
        raise MissingFieldError("[problem] dim is required", "problem.dim")
    known = {"dim", "order", "bounds", "probe", "name"}
    for key, (_, n) in problem.items():
        if key not in known:
            raise ConfigSyntaxError(f"unknown key {key!r}", f"problem.{key}", n)
    dval, dline = problem["dim"]
    dim = _int(dval, "problem.dim", dline, 2)
    if dim % 2:
        raise ConfigSyntaxError("dimension must be even", "problem.dim", dline)
    cfg = ProblemConfig(dim)
    if "name" in problem:
        cfg.name = problem["name"][0]
    if "order" in problem:
        cfg.order = _int(problem["order"][0], "problem.order", problem["order"][1], 0)
    if "bounds" in problem:
        v, n = problem["bounds"]
        cfg.degree, cfg.jet = _ints(v, 2, "problem.bounds", n)
    if "probe" in problem:
        cfg.probe = _int(problem["probe"][0], "problem.probe", problem["probe"][1], 0)

    def rng(vals, path, n, lo=1):
        for v in vals:
            if not lo <= v <= dim:
                raise IndexRangeError(f"index {v} outside {lo}..{dim}", path, n)

    for section, key, val, n in body:
        if section == "omega":
            i, j = _ints(key, 2, "omega", n)
            path = f"omega[{i},{j}]"
            rng((i, j), path, n)
            if (i, j) in cfg.omega:
                raise DuplicateEntryError("entry given twice", path, n)
            cfg.omega[(i, j)] = _expr(val, path, n)
        elif section == "connection":
            if key == "symplectize":
                if val not in ("yes", "no"):
                    raise ConfigSyntaxError("expected yes or no", "connection.symplectize", n)
                cfg.symplectize = val == "yes"
                continue
            k, i, j = _ints(key, 3, "connection", n)
            path = f"connection[{k},{i},{j}]"
            rng((k, i, j), path, n)
            if (k, i, j) in cfg.connection:
                raise DuplicateEntryError("entry given twice", path, n)
            cfg.connection[(k, i, j)] = _expr(val, path, n)
        elif section == "weyl":
            m, i, j = _ints(key, 3, "weyl", n)
            path = f"weyl[{m}][{i},{j}]"
            if m < 1:
                raise IndexRangeError("hbar power must be at least 1", path, n)
            rng((i, j), path, n)
            if i == j:
                raise AntisymmetryError("diagonal entries of a 2-form must vanish", path, n)
            if (m, i, j) in cfg.weyl or (m, j, i) in cfg.weyl:
                raise DuplicateEntryError("entry given twice", path, n)
            cfg.weyl[(m, i, j)] = _expr(val, path, n)
        elif section == "functions":
            path = f"functions.{key}"
            if not _NAME.match(key) or _RESERVED.match(key):
                raise ConfigSyntaxError(f"invalid function name {key!r}", path, n)
            if key in cfg.functions:
                raise DuplicateEntryError("function defined twice", path, n)
            cfg.functions[key] = _expr(val, path, n)
        elif section == "lagrangian":
            if key != "tangent":
                raise ConfigSyntaxError(f"unknown key {key!r}", f"lagrangian.{key}", n)
            if cfg.tangent is not None:
                raise DuplicateEntryError("tangent given twice", "lagrangian.tangent", n)
            vals = tuple(int(t) for t in re.split(r"[,\s]+", val) if t) if _INDICES.match(val) else None
            if vals is None:
                raise ConfigSyntaxError("expected indices", "lagrangian.tangent", n)
            rng(vals, "lagrangian.tangent", n)
            cfg.tangent, cfg.tangent_line = vals, n
        elif section == "symmetry":
            parts = key.split()
            kind = parts[0]
            if kind == "generator" and len(parts) == 2:
                name = parts[1]
                path = f"symmetry.generator.{name}"
                if not _NAME.match(name):
                    raise ConfigSyntaxError(f"invalid generator name {name!r}", path, n)
                if name in cfg.generators:
                    raise DuplicateEntryError("generator defined twice", path, n)
                cfg.generators[name] = _expr(val, path, n)
            elif kind == "field" and len(parts) == 2:
                name = parts[1]
                path = f"symmetry.field.{name}"
                if name in cfg.fields:
                    raise DuplicateEntryError("field given twice", path, n)
                comps = [c.strip() for c in val.split(",")]
                if len(comps) != dim:
                    raise ConfigSyntaxError(f"field needs {dim} components", path, n)
                cfg.fields[name] = [_expr(c, f"{path}[{k}]", n) for k, c in enumerate(comps, start=1)]
            elif kind == "bracket" and len(parts) == 3:
                a, b = parts[1], parts[2]
                path = f"symmetry.bracket.{a}.{b}"
                if (a, b) in cfg.brackets or (b, a) in cfg.brackets:
                    raise DuplicateEntryError("bracket given twice", path, n)
                cfg.brackets[(a, b)] = (_lincomb(val, path, n), n)
            else:
                raise ConfigSyntaxError(f"unknown symmetry entry {key!r}", "symmetry", n)
    if not cfg.omega:
        raise MissingFieldError("[omega] needs at least one entry", "omega")
    return cfg


def load_config(path) -> ProblemConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    return parse_config(text)


# ---------------------------------------------------------------- validation


@dataclass
class Problem:
    """Validated geometry and curvature data of a config."""

    config: ProblemConfig
    geometry: GeometryData
    curvature: WeylCurvatureSpec
    bounds: Bounds


def _series(loc: Located, dim: int, path: str, allow=("x",)) -> GradedSeries:
    try:
        s = loc.expr.to_series(dim)
    except ExprError as exc:
        raise ExpressionError(str(exc), path, loc.line) from None
    for (alpha, beta, m, J) in s.terms():
        if (any(beta) and "y" not in allow) or (m and "hbar" not in allow) or (J and "dx" not in allow):
            raise ExpressionError("expected a polynomial in x only", path, loc.line)
    return s


def _omega_series(cfg: ProblemConfig) -> dict:
    dim = cfg.dim
    om = {k: _series(v, dim, f"omega[{k[0]},{k[1]}]") for k, v in cfg.omega.items()}
    for (i, j), v in om.items():
        path = f"omega[{i},{j}]"
        line = cfg.omega[(i, j)].line
        if i == j and not v.is_zero():
            raise AntisymmetryError("diagonal entries must vanish", path, line)
        w = om.get((j, i))
        if i < j and w is not None and w != -v:
            raise AntisymmetryError(f"omega[{j},{i}] != -omega[{i},{j}]", f"omega[{j},{i}]", cfg.omega[(j, i)].line)
    return om


def _diagnostics(cfg: ProblemConfig):
    """Yield ``(slug, description, error or None)`` for every geometry predicate.

    Stops early when a failure makes later predicates meaningless.
    """
    dim = cfg.dim
    b = cfg.bounds()
    jet = b.jet + 1
    try:
        om = _omega_series(cfg)
    except ConfigError as exc:
        yield ("omega-antisymmetry", "omega antisymmetric", exc)
        return
    yield ("omega-antisymmetry", "omega antisymmetric", None)
    full = {}
    for (i, j), v in om.items():
        if i < j or (j, i) not in om:
            full[(i, j) if i < j else (j, i)] = v if i < j else -v
    cl = check_closed(full, dim)
    yield ("omega-closedness", "omega closed", None if cl else OmegaNotClosedError(cl.detail, f"omega[{','.join(map(str, cl.witness))}]"))
    try:
        base = GeometryData(dim, full, {}, jet)
        err = None
    except (SingularFormError, SingularMatrixError) as exc:
        err = DegenerateOmegaError(f"omega(0) is not invertible: {exc}", "omega")
    yield ("omega-degenerate", "omega(0) invertible", err)
    if err is not None or not cl:
        return
    gam = {k: _series(v, dim, f"connection[{k[0]},{k[1]},{k[2]}]") for k, v in cfg.connection.items()}
    probe = GeometryData(dim, full, gam, jet + 1 if cfg.symplectize else jet)
    tf = check_torsion_free(probe)
    terr = None
    if not tf:
        k, i, j = tf.witness
        loc = cfg.connection.get((k, i, j)) or cfg.connection.get((k, j, i))
        terr = TorsionError(tf.detail, f"connection[{k},{i},{j}]", loc.line if loc else None)
    yield ("connection-torsion", "connection torsion-free", terr)
    if terr is not None:
        return
    g = symplectize(full, gam, dim, jet) if cfg.symplectize else probe
    sy = check_symplectic(g)
    yield ("connection-symplectic", "connection preserves omega", None if sy else NotSymplecticError(sy.detail, "connection"))
    if not sy:
        return
    per: dict[int, dict] = {}
    for (m, i, j), loc in cfg.weyl.items():
        v = _series(loc, dim, f"weyl[{m}][{i},{j}]")
        if i > j:
            i, j, v = j, i, -v
        per.setdefault(m, {})[(i, j)] = v
    werr = None
    for m in sorted(per):
        c = check_closed(per[m], dim)
        if not c:
            werr = WeylNotClosedError(f"d omega_{m} != 0: {c.detail}", f"weyl[{m}]")
            break
    yield ("weyl-closedness", "Omega perturbations closed", werr)
    if werr is not None:
        return
    curv = WeylCurvatureSpec(dim, per)
    lerr = None
    if cfg.tangent is not None:
        try:
            LagrangianSpec(dim, cfg.tangent).validate(g)
        except (GeometryError, ValueError, IndexError) as exc:
            lerr = LagrangianConfigError(str(exc), "lagrangian.tangent", cfg.tangent_line)
        yield ("lagrangian", "lagrangian tangent isotropic", lerr)
    serr = None
    if cfg.generators or cfg.brackets or cfg.fields:
        try:
            _check_symmetry(cfg)
        except SymmetryConfigError as exc:
            serr = exc
        yield ("symmetry", "symmetry block consistent", serr)
    if lerr is None and serr is None:
        yield ("ok", "", Problem(cfg, g, curv, b))


def _check_symmetry(cfg: ProblemConfig) -> None:
    for name in cfg.fields:
        if name not in cfg.generators:
            raise SymmetryConfigError(f"field for unknown generator {name!r}", f"symmetry.field.{name}")
    for (a, b), (comb, line) in cfg.brackets.items():
        path = f"symmetry.bracket.{a}.{b}"
        for nm in (a, b, *comb):
            if nm not in cfg.generators:
                raise SymmetryConfigError(f"unknown generator {nm!r}", path, line)
        if a == b:
            raise SymmetryConfigError("bracket of a generator with itself", path, line)
    for nm, loc in cfg.generators.items():
        try:
            _series(loc, cfg.dim, f"symmetry.generator.{nm}", allow=("x", "hbar"))
        except ExpressionError as exc:
            raise SymmetryConfigError(exc.message, exc.path, exc.line) from None


def diagnose(cfg: ProblemConfig) -> list[tuple[str, str, ConfigError | None]]:
    """All predicate outcomes in order (without the final problem)."""
    return [d for d in _diagnostics(cfg) if d[0] != "ok"]


def validate(cfg: ProblemConfig) -> Problem:
    """Run all predicates; raise the first failure, else return the problem."""
    for slug, _, res in _diagnostics(cfg):
        if slug == "ok":
            return res
        if res is not None:
            raise res
    raise AssertionError("diagnostics ended without a result")


def build_problem(path_or_text, order: int | None = None, degree: int | None = None, jet: int | None = None) -> Problem:
    """Load (path) or parse (text containing a newline) and validate."""
    if isinstance(path_or_text, ProblemConfig):
        cfg = path_or_text
    elif isinstance(path_or_text, str) and "\n" in path_or_text:
        cfg = parse_config(path_or_text)
    else:
        cfg = load_config(path_or_text)
    return validate(cfg.with_overrides(order, degree, jet))


def function_series(cfg: ProblemConfig, src: str, what: str = "argument") -> GradedSeries:
    """A function given by name (from [functions]) or as an inline expression."""
    if src in cfg.functions:
        loc = cfg.functions[src]
        return _series(loc, cfg.dim, f"functions.{src}", allow=("x", "hbar"))
    try:
        e = parse_expr(src, cfg.dim)
    except ExprError as exc:
        raise ExpressionError(str(exc), what) from None
    return _series(Located(src, e, 0), cfg.dim, what, allow=("x", "hbar"))


def form_series(cfg: ProblemConfig, src: str, what: str = "theta") -> GradedSeries:
    """A differential form in x, dx and hbar (no y)."""
    if src in cfg.functions:
        loc = cfg.functions[src]
    else:
        try:
            loc = Located(src, parse_expr(src, cfg.dim), 0)
        except ExprError as exc:
            raise ExpressionError(str(exc), what) from None
    return _series(loc, cfg.dim, what, allow=("x", "hbar", "dx"))


def symmetry_data(problem: Problem):
    """The [symmetry] block as ``LieSymmetryData`` (generators in file order)."""
    from .analysis.momentum import LieSymmetryData

    cfg = problem.config
    if not cfg.generators:
        raise MissingFieldError("no generators in [symmetry]", "symmetry")
    names = list(cfg.generators)
    index = {n: k for k, n in enumerate(names, start=1)}
    gens = [_series(cfg.generators[n], cfg.dim, f"symmetry.generator.{n}", allow=("x", "hbar")) for n in names]
    structure = {}
    for (a, b), (comb, _) in cfg.brackets.items():
        structure[(index[a], index[b])] = {index[n]: c for n, c in comb.items()}
    fields = None
    if cfg.fields:
        fields = {
            index[n]: [_series(c, cfg.dim, f"symmetry.field.{n}[{k}]") for k, c in enumerate(comps, start=1)]
            for n, comps in cfg.fields.items()
        }
    try:
        return LieSymmetryData(gens, structure, fields, names)
    except (ValueError, IndexError) as exc:
        raise SymmetryConfigError(str(exc), "symmetry") from None
