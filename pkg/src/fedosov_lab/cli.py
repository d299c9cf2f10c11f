"""``fedosov-lab`` command line interface.

Exit status: 0 when every check passes, 1 when a check fails, 2 on input
errors (unreadable or invalid config, bad expressions, insufficient bounds).
"""

from __future__ import annotations

import argparse
import random
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

from .analysis import (
    LagrangianReport,
    derivation_bracket_inner,
    derivation_even_odd,
    derivation_solve,
    extract_connection,
    lagrangian_check,
    momentum_verify,
    order_bound_violations,
    vey_check,
)
from .config import (
    ConfigError,
    Problem,
    ProblemConfig,
    diagnose,
    form_series,
    function_series,
    load_config,
    symmetry_data,
    validate,
)
from .expr import ExprError
from .fedosov import FedosovError, FedosovState, extract_star_table, moyal_table, quantize, solve_gamma, star
from .geometry import GeometryData, GeometryError, LagrangianSpec
from .report import Report, emit_report, format_index, format_series, format_term_key
from .series import GradedSeries, multi_indices

__all__ = ["main", "run_command", "fixture_path", "FIXTURES", "random_polynomial"]

FIXTURES = ("flat-2d", "curved-2d", "perturbed-omega", "sp2-momentum", "lagrangian-x2", "shear-2d")

COMMANDS = (
    "validate",
    "gamma",
    "star",
    "table",
    "assoc",
    "vey",
    "derivation",
    "momentum",
    "lagrangian",
    "extract-connection",
)


class UsageError(ValueError):
    code = "usage"


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture config such as ``curved-2d``."""
    if name not in FIXTURES:
        raise ValueError(f"unknown fixture {name!r}")
    return Path(str(resources.files("fedosov_lab") / "data" / f"{name}.cfg"))


def _resolve_config(arg: str) -> Path:
    p = Path(arg)
    if not p.exists() and arg in FIXTURES:
        return fixture_path(arg)
    return p


def _witness_term(key, c) -> str:
    return f"{format_term_key(key)} c={c}"


def _first_term(s: GradedSeries) -> str | None:
    for key, c in s.terms().items():
        return _witness_term(key, c)
    return None


def random_polynomial(rng: random.Random, dim: int, degree: int = 3, terms: int = 3) -> GradedSeries:
    """Sparse polynomial with small nonzero integer coefficients."""
    idx = multi_indices(dim, degree)
    out = GradedSeries.zero(dim)
    for alpha in rng.sample(idx, terms):
        c = rng.choice([-3, -2, -1, 1, 2, 3])
        out = out + GradedSeries.monomial(dim, alpha=alpha, coeff=c)
    return out


# ---------------------------------------------------------------- commands


def _solve(problem: Problem) -> FedosovState:
    return solve_gamma(problem.geometry, problem.curvature, problem.bounds)


def _probe(problem: Problem, override: int | None) -> int:
    if override is not None:
        return override
    if problem.config.probe is not None:
        return problem.config.probe
    return 2 * problem.bounds.hbar


def cmd_validate(cfg: ProblemConfig) -> Report:
    r = Report("validate")
    b = cfg.bounds()
    r.line(f"config: {cfg.name or '(unnamed)'}; dim {cfg.dim}; bounds {b}", "config", name=(cfg.name or "-").replace(" ", "_"), dim=cfg.dim,
           K=b.hbar, D=b.degree, J=b.jet)
    for slug, name, err in diagnose(cfg):
        w = None
        if err is not None:
            w = f"{err.path}" + (f" (line {err.line})" if err.line else "") + f": {err.message}"
        r.check(slug, name, err is None, w)
    return r


def cmd_gamma(problem: Problem) -> Report:
    st = _solve(problem)
    r = Report("gamma")
    norm = st.normalized()
    md = st.min_degree()
    mds = "∞" if md is None else str(md)
    r.line(
        f"γ = {format_series(st.gamma)}; δ⁻¹γ = 0: {'PASS' if norm else 'FAIL'}; min filtration degree: {mds}",
        "gamma", normalized="PASS" if norm else "FAIL", min_degree="inf" if md is None else md, iterations=st.iterations,
    )
    r.series("", "gamma", st.gamma, human=None, quiet=True)
    r.check("normalized", "δ⁻¹γ = 0", norm, quiet=True)
    r.check("filtration", "filtration degree of γ ≥ 3", md is None or md >= 3, None if md is None else f"min degree {md}")
    ok = st.curvature_ok()
    diff = (st.omega_recomputed - st.omega_prescribed.truncate(st.omega_recomputed.bounds))
    r.check("curvature", "recomputed Weyl curvature = prescribed Ω", ok, None if ok else _first_term(diff))
    r.line(f"fixed point confirmed after {st.iterations} iterations; bounds {st.bounds}", "solver",
           iterations=st.iterations, bounds=str(st.bounds).replace(" ", ""))
    return r


def cmd_star(problem: Problem, f_src: str, g_src: str) -> Report:
    cfg = problem.config
    f = function_series(cfg, f_src, "f")
    g = function_series(cfg, g_src, "g")
    st = _solve(problem)
    s = star(st, f, g)
    r = Report("star")
    r.series("", "star", s)
    r.line(f"through ħ^{st.order}, bounds {s.bounds}", "bounds", value=str(s.bounds).replace(" ", ""))
    return r


def _table_lines(r: Report, entries) -> None:
    for (k, a, b), v in entries.items():
        r.line(f"k={k} a={format_index(a)} b={format_index(b)} c={v}", "entry", k=k, a=format_index(a), b=format_index(b), c=v)


def cmd_table(problem: Problem, probe: int | None) -> Report:
    st = _solve(problem)
    P = _probe(problem, probe)
    t = extract_star_table(st, st.order, P)
    r = Report("table")
    r.line(f"star table: K={t.order}; probes |a|,|b| <= {P}; nonzero entries: {len(t.entries)}", "table",
           K=t.order, probes=P, entries=len(t.entries))
    _table_lines(r, t.entries)
    par = t.parity_violations()
    r.check("parity", "C_k(a,b) = (-1)^k C_k(b,a)", not par, None if not par else f"k={par[0][0]} a={format_index(par[0][1])} b={format_index(par[0][2])}")
    g = problem.geometry
    if g.is_flat() and g.pi.is_constant() and not problem.curvature.perturbations:
        ref = moyal_table(g.pi.at_origin(), t.order, P)
        bad = [key for key in set(ref.entries) | set(t.entries) if ref.entries.get(key) != t.entries.get(key)]
        bad.sort(key=lambda key: (key[0], key[1], key[2]))
        w = None
        if bad:
            k, a, b = bad[0]
            w = f"k={k} a={format_index(a)} b={format_index(b)} expected={ref.get(k, a, b)} got={t.get(k, a, b)}"
        r.check("moyal", "equals the Moyal-Weyl table", not bad, w)
    return r


def cmd_assoc(problem: Problem, args: Sequence[str], n_random: int | None, seed: int) -> Report:
    cfg = problem.config
    dim = cfg.dim
    triples = []
    if args:
        if len(args) != 3:
            raise UsageError("assoc takes exactly three functions")
        triples.append(tuple(function_series(cfg, a, n) for a, n in zip(args, "fgh")))
    elif n_random is None and all(n in cfg.functions for n in "fgh"):
        triples.append(tuple(function_series(cfg, n, n) for n in "fgh"))
    else:
        rng = random.Random(seed)
        for _ in range(n_random or 5):
            triples.append(tuple(random_polynomial(rng, dim) for _ in range(3)))
    st = _solve(problem)
    K = st.order
    r = Report("assoc")
    for n, (f, g, h) in enumerate(triples, start=1):
        lhs = star(st, star(st, f, g), h)
        rhs = star(st, f, star(st, g, h))
        res = lhs - rhs
        prefix = "" if len(triples) == 1 else f"triple {n}: "
        r.line(f"{prefix}f = {format_series(f)}; g = {format_series(g)}; h = {format_series(h)}", "triple", index=n,
               bounds=str(res.bounds).replace(" ", ""))
        r.check(f"assoc-{n}", f"{prefix}residual ≡ 0 through ħ^{K}", res.is_zero(), _first_term(res))
    return r


def _vey_witness(w) -> str | None:
    if w is None:
        return None
    a, b, v = w
    return f"a={format_index(a)} b={format_index(b)} c={v}"


def cmd_vey(problem: Problem, probe: int | None) -> Report:
    st = _solve(problem)
    P = _probe(problem, probe)
    rep = vey_check(st, P)
    r = Report("vey")
    r.line(f"Vey check: K={st.order}; probes |a|,|b| <= {P}", "vey", K=st.order, probes=P)
    for k, (pa, pb) in rep.profile.items():
        r.line(f"k={k} remainder Q_{k} - P^{k} order profile: ({pa},{pb})", "profile", k=k, a=pa, b=pb)
    for k, rem in rep.remainder.items():
        for (a, b), v in rem.items():
            r.line(None, "remainder", k=k, a=format_index(a), b=format_index(b), c=v)
    for c in rep.checks:
        slug = c.name.replace(" ", "-").replace("<=", "le").replace("=", "eq")
        r.check(slug, c.name, c.ok, _vey_witness(c.witness))
    obmax = min(5, st.bounds.jet)
    viol = order_bound_violations(st, obmax)
    w = None
    if viol:
        a, m, beta, v = viol[0]
        w = f"probe a={format_index(a)} m={m} b={format_index(beta)} c={v}"
    r.check("order-bounds", f"τ order bounds on probes |a| <= {obmax}", not viol, w)
    return r


def cmd_derivation(problem: Problem, theta_src: str, other: str | None, H_src: str | None) -> Report:
    cfg = problem.config
    theta = form_series(cfg, theta_src, "theta")
    st = _solve(problem)
    cert = derivation_solve(st, theta)
    r = Report("derivation")
    r.series("θ", "theta", cert.theta)
    r.series("K", "K", cert.K)
    r.check("residual", "D K = θ", cert.residual.is_zero(), _first_term(cert.residual))
    r.check("normalized", "K|_{y=0} = 0", cert.K.y_free().is_zero(), _first_term(cert.K.y_free()))
    if H_src is not None:
        H = function_series(cfg, H_src, "H")
        expect = (H.truncate(st.bounds) - quantize(st, H))
        b = expect.bounds.meet(cert.K.bounds)
        diff = (cert.K.truncate(b) - expect.truncate(b))
        r.check("exact", "K = H - τ(H)", diff.is_zero(), _first_term(diff))
    if theta.is_real():
        _, odd = derivation_even_odd(st, cert)
        bad = [(a, s) for a, s in odd.items() if s]
        w = None
        if bad:
            a, s = bad[0]
            w = f"probe a={format_index(a)} {_first_term(s)}"
        r.check("odd-part", "odd part of the induced derivation = 0", not bad, w)
    if other is not None:
        cert2 = derivation_solve(st, form_series(cfg, other, "theta2"))
        r.check("residual-2", "D K' = θ'", cert2.residual.is_zero(), _first_term(cert2.residual))
        br = derivation_bracket_inner(cert, cert2, st)
        r.series("bracket generator", "bracket_generator", br.generator)
        r.check("bracket-inner", "bracket derivation is inner (D K = 0)", br.inner, _first_term(br.DK))
    return r


def _pick(failures: list[str], word: str) -> str | None:
    for f in failures:
        if word in f:
            return f
    return None


def cmd_momentum(problem: Problem, probe_degree: int) -> Report:
    sym = symmetry_data(problem)
    st = _solve(problem)
    rep = momentum_verify(st, sym, probe_degree)
    r = Report("momentum")
    r.line(f"generators: {', '.join(sym.names)}", "generators", names=",".join(sym.names))
    r.check("jacobi", "Jacobi identity of the structure constants", rep.jacobi_ok, _pick(rep.failures, "Jacobi"))
    r.check("fields", "generator fields are hamiltonian", rep.field_ok, _pick(rep.failures, "field"))
    r.check("generator-relation", f"ξf = σ((i/ħ)[τa, τf]) on probes |a| <= {probe_degree}", rep.field_ok and rep.eq23_ok,
            _pick(rep.failures, "generator relation"))
    if rep.lambda_zero and rep.lam:
        r.line("lambda: 0 (momentum map candidate consistent)", "lambda", value="0")
    else:
        for (i, j), v in rep.lam.items():
            r.line(f"lambda({sym.label(i)},{sym.label(j)}) = {format_series(v)}", "lambda",
                   i=sym.label(i), j=sym.label(j), value=format_series(v).replace(" ", ""))
    r.check("lambda-constant", "lambda is constant", rep.constant, _pick(rep.failures, "not constant"))
    r.check("cocycle", "lambda satisfies the cocycle identity", rep.cocycle_ok, _pick(rep.failures, "cocycle"))
    return r


def _lag_witness(w) -> str | None:
    if w is None:
        return None
    if len(w) == 4:
        fa, ga, key, c = w
        return f"f=x^{format_index(fa)} g=x^{format_index(ga)} {_witness_term(key, c)}"
    key, c = w
    return _witness_term(key, c)


def cmd_lagrangian(problem: Problem, probe_degree: int) -> Report:
    cfg = problem.config
    if cfg.tangent is None:
        raise ConfigError("no [lagrangian] tangent given", "lagrangian.tangent")
    L = LagrangianSpec(cfg.dim, cfg.tangent)
    st = _solve(problem)
    rep: LagrangianReport = lagrangian_check(st, L, probe_degree)
    r = Report("lagrangian")
    r.line(f"L = {{{', '.join(f'x{c} = 0' for c in L.normal)}}}; probes of degree <= {probe_degree}", "lagrangian",
           tangent=format_index(L.tangent), probes=probe_degree)
    for name, res in rep.hypotheses.items():
        r.check(name.replace(" ", "-"), name, res.ok, res.detail or None)
    if rep.star_ok is not None:
        r.line(f"probe pairs: {rep.pairs}", "pairs", value=rep.pairs)
        r.check("star-closure", f"f∗g vanishes on L through ħ^{st.order}", rep.star_ok, _lag_witness(rep.star_witness))
        r.check("gamma-membership", "γ ∈ (W⊗Λ¹)_L", rep.gamma_ok, _lag_witness(rep.gamma_witness))
        r.check("section-closure", "τf∘τg ∈ W_L", rep.sections_ok, _lag_witness(rep.section_witness))
    return r


def cmd_extract(problem: Problem, probe_kind: str) -> Report:
    st = _solve(problem)
    if st.order < 2:
        raise UsageError("extract-connection needs order >= 2")
    g = problem.geometry
    table = extract_star_table(st, 2, 3)
    if probe_kind == "self":
        probe = g
    elif probe_kind == "zero":
        om = {(i, j): v for (i, j), v in g.omega.items() if i < j}
        probe = GeometryData(g.dim, om, {}, g.jet)
    else:
        raise UsageError(f"unknown probe {probe_kind!r}; use zero or self")
    ext = extract_connection(table, probe)
    r = Report("extract-connection")
    r.line(f"probe connection: {probe_kind}", "probe", value=probe_kind)
    for (i, j, k), v in ext.T.items():
        if i <= j <= k and not v.is_zero():
            r.line(f"T i={i} j={j} k={k} c={v}", "T", i=i, j=j, k=k, c=v)
    if ext.t_zero():
        r.line("T = 0", "T", value=0)
    for (k, i, j), v in ext.christoffel.items():
        if i <= j and not v.is_zero():
            r.line(f"Gamma k={k} i={i} j={j} c={v}", "Gamma", k=k, i=i, j=j, c=v)
    bad = None
    for key, v in ext.christoffel.items():
        expect = g.christoffel[key].coefficient()
        if v != expect:
            bad = f"k={key[0]} i={key[1]} j={key[2]} expected={expect} got={v}"
            break
    r.check("matches", "recovered connection = configured connection at x = 0", bad is None, bad)
    if probe_kind == "self":
        r.check("t-zero", "T = 0 for the natural probe", ext.t_zero())
    return r


def run_command(cmd: str, cfg: ProblemConfig, args: Sequence[str] = (), **opts) -> Report:
    """Run one subcommand on a parsed config and return its report."""
    if cmd not in COMMANDS:
        raise UsageError(f"unknown command {cmd!r}")
    if cmd == "validate":
        return cmd_validate(cfg)
    problem = validate(cfg)
    if cmd == "gamma":
        return cmd_gamma(problem)
    if cmd == "star":
        if len(args) != 2:
            raise UsageError("star takes exactly two functions")
        return cmd_star(problem, *args)
    if cmd == "table":
        return cmd_table(problem, opts.get("probe"))
    if cmd == "assoc":
        return cmd_assoc(problem, args, opts.get("random"), opts.get("seed", 0))
    if cmd == "vey":
        return cmd_vey(problem, opts.get("probe"))
    if cmd == "derivation":
        if len(args) != 1:
            raise UsageError("derivation takes exactly one 1-form")
        return cmd_derivation(problem, args[0], opts.get("other"), opts.get("H"))
    if cmd == "momentum":
        return cmd_momentum(problem, opts.get("probe_degree") or 4)
    if cmd == "lagrangian":
        return cmd_lagrangian(problem, opts.get("probe_degree") or 3)
    return cmd_extract(problem, opts.get("probe_connection") or "zero")


# ---------------------------------------------------------------- entry point


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="config file, or the name of a bundled fixture")
    common.add_argument("--order", type=int, help="highest hbar power K")
    common.add_argument("--bounds", help="D_max,J_max")
    common.add_argument("--format", choices=("human", "machine"), default="human")
    p = argparse.ArgumentParser(prog="fedosov-lab", description="Exact Fedosov star products on jets at a point.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the geometry predicates of a config")
    sub.add_parser("gamma", parents=[common], help="solve for gamma and report normalization")
    s = sub.add_parser("star", parents=[common], help="star product of two functions")
    s.add_argument("f")
    s.add_argument("g")
    s = sub.add_parser("table", parents=[common], help="basepoint coefficient table")
    s.add_argument("--probe", type=int, help="probe order (default from config, else 2K)")
    s = sub.add_parser("assoc", parents=[common], help="associativity residual")
    s.add_argument("functions", nargs="*")
    s.add_argument("--random", type=int, help="number of pseudorandom triples of degree <= 3")
    s.add_argument("--seed", type=int, default=0)
    s = sub.add_parser("vey", parents=[common], help="Vey property and order bounds")
    s.add_argument("--probe", type=int)
    s = sub.add_parser("derivation", parents=[common], help="derivation from a closed 1-form")
    s.add_argument("theta")
    s.add_argument("--with", dest="other", help="second 1-form; checks that the bracket is inner")
    s.add_argument("--H", dest="H", help="primitive H with theta = dH; checks K = H - tau(H)")
    s = sub.add_parser("momentum", parents=[common], help="quantum momentum map and lambda table")
    s.add_argument("--probe-degree", type=int, default=4)
    s = sub.add_parser("lagrangian", parents=[common], help="closure of the vanishing ideal of L")
    s.add_argument("--probe-degree", type=int, default=3)
    s = sub.add_parser("extract-connection", parents=[common], help="recover the connection from Q_2")
    s.add_argument("--probe", dest="probe_connection", choices=("zero", "self"), default="zero")
    return p


def _bounds_arg(text: str | None) -> tuple[int | None, int | None]:
    if text is None:
        return None, None
    try:
        d, j = (int(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"--bounds expects D,J, got {text!r}") from None
    if d < 0 or j < 0:
        raise UsageError("--bounds must be non-negative")
    return d, j


def _error(exc: Exception) -> str:
    code = getattr(exc, "code", None) or type(exc).__name__
    return f"error[{code}] {exc}"


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(_resolve_config(args.config))
        d, j = _bounds_arg(args.bounds)
        cfg = cfg.with_overrides(args.order, d, j)
        extra = ()
        opts = {}
        if args.command == "star":
            extra = (args.f, args.g)
        elif args.command == "assoc":
            extra = tuple(args.functions)
            opts = {"random": args.random, "seed": args.seed}
        elif args.command == "derivation":
            extra = (args.theta,)
            opts = {"other": args.other, "H": args.H}
        elif args.command in ("table", "vey"):
            opts = {"probe": args.probe}
        elif args.command in ("momentum", "lagrangian"):
            opts = {"probe_degree": args.probe_degree}
        elif args.command == "extract-connection":
            opts = {"probe_connection": args.probe_connection}
        report = run_command(args.command, cfg, extra, **opts)
    except (ConfigError, ExprError, GeometryError, UsageError, ValueError, IndexError) as exc:
        print(_error(exc), file=sys.stderr)
        return 2
    except FedosovError as exc:
        print(_error(exc), file=sys.stderr)
        return 1
    sys.stdout.write(emit_report(report, args.format))
    if args.command == "validate" and not report.passed:
        return 2
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
