"""Acceptance criteria 1-10, checked exactly.

Each criterion prints one ``criterion N (...): PASS|FAIL`` line.  Run with
pytest, or directly as ``python3 tests/test_acceptance.py`` for the summary.
"""

from __future__ import annotations

import functools
import os
import random
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conftest import load  # noqa: E402
from helpers import series  # noqa: E402
from fedosov_lab.analysis import (  # noqa: E402
    LieSymmetryData,
    coboundary,
    derivation_bracket_inner,
    derivation_even_odd,
    derivation_solve,
    extract_connection,
    lagrangian_check,
    momentum_verify,
    order_bound_violations,
    vey_check,
)
from fedosov_lab.cli import random_polynomial  # noqa: E402
from fedosov_lab.config import symmetry_data  # noqa: E402
from fedosov_lab.fedosov import extract_star_table, moyal_table, quantize, solve_gamma, star  # noqa: E402
from fedosov_lab.geometry import GeometryData, LagrangianSpec  # noqa: E402
from fedosov_lab.scalar import Scalar  # noqa: E402

ACCEPTANCE_FIXTURES = ("flat-2d", "curved-2d", "perturbed-omega", "sp2-momentum")


@functools.lru_cache(maxsize=None)
def problem(name, degree=None, jet=None):
    return load(name, degree=degree, jet=jet)


@functools.lru_cache(maxsize=None)
def state(name, degree=None, jet=None):
    p = problem(name, degree, jet)
    return solve_gamma(p.geometry, p.curvature, p.bounds)


def criterion_1():
    t0 = time.perf_counter()
    st = state("flat-2d")
    table = extract_star_table(st, 3, 3)
    ref = moyal_table(st.pi.at_origin(), 3, 3)
    dt = time.perf_counter() - t0
    same = table.entries == ref.entries
    return same and dt < 10, f"{len(ref.entries)} entries, equal={same}, {dt:.2f}s"


def criterion_2():
    t0 = time.perf_counter()
    st = state("curved-2d")
    rng = random.Random(20240917)
    bad = []
    for n in range(5):
        f, g, h = (random_polynomial(rng, 2) for _ in range(3))
        res = star(st, star(st, f, g), h) - star(st, f, star(st, g, h))
        if not res.is_zero():
            bad.append(n)
    dt = time.perf_counter() - t0
    return not bad and dt < 60, f"5 triples through ħ^{st.order}, nonzero residuals {bad}, {dt:.2f}s"


def criterion_3():
    bad = []
    for name in ACCEPTANCE_FIXTURES + ("lagrangian-x2", "shear-2d"):
        st = state(name)
        md = st.min_degree()
        if not (st.normalized() and (md is None or md >= 3) and st.curvature_ok()):
            bad.append(name)
    Om = state("perturbed-omega").omega_recomputed
    perturbed_ok = Om == series("(1 + hbar) dx1*dx2")
    return not bad and perturbed_ok, f"failing fixtures {bad}, perturbed Omega recovered={perturbed_ok}"


def criterion_4():
    curved = vey_check(state("curved-2d"), 4)
    flat = vey_check(state("flat-2d"), 4)
    prof = curved.profile[2]
    curved_ok = curved.passed and prof[0] <= 1 and prof[1] <= 1
    flat_ok = flat.passed and all(not r for r in flat.remainder.values())
    return curved_ok and flat_ok, f"curved Q_2 - P^2 profile {prof}, flat remainder zero={flat_ok}"


def criterion_5():
    bad = {name: order_bound_violations(state(name), 5) for name in ("flat-2d", "curved-2d", "perturbed-omega")}
    bad = {k: v[0] for k, v in bad.items() if v}
    return not bad, f"probes |a| <= 5, violations {bad}"


def criterion_6():
    st = state("flat-2d")
    c1 = derivation_solve(st, series("dx1"))
    ok1 = c1.valid and c1.K == series("-y1")
    H = series("x1*x2")
    cH = derivation_solve(st, series("x2*dx1 + x1*dx2"), H)
    ok2 = cH.valid and cH.K == H - quantize(st, H)
    c2 = derivation_solve(st, series("dx2"))
    ok3 = derivation_bracket_inner(c1, c2, st).inner
    _, odd = derivation_even_odd(st, cH, 3)
    ok4 = all(not v for v in odd.values())
    return all((ok1, ok2, ok3, ok4)), f"K(dx1)=-y1 {ok1}, K=H-τ(H) {ok2}, bracket inner {ok3}, odd part zero {ok4}"


def criterion_7():
    st = state("sp2-momentum")
    sym = symmetry_data(problem("sp2-momentum"))
    rep = momentum_verify(st, sym, 4)
    shifts = ["3", "-1/2", "7/3"]
    moved = LieSymmetryData([g + series(c) for g, c in zip(sym.generators, shifts)], sym.structure)
    rep2 = momentum_verify(st, moved, 4)
    cob = coboundary(sym, [series(c).coefficient() for c in shifts])
    shift_ok = rep2.passed and all(v == series(str(cob[k])) for k, v in rep2.lam.items())
    ok = rep.passed and rep.lambda_zero and shift_ok
    return ok, f"generator relation {rep.eq23_ok}, lambda zero {rep.lambda_zero}, shift is coboundary {shift_ok}"


def criterion_8():
    st = state("flat-2d")
    rep = lagrangian_check(st, LagrangianSpec(2, (1,)), 3)
    detail = f"{rep.pairs} pairs, star closure {rep.star_ok}, γ membership {rep.gamma_ok}"
    if rep.star_witness:
        fa, ga, key, c = rep.star_witness
        detail += f", witness x^{fa} ∗ x^{ga} has term {key} = {c}"
    return bool(rep.star_ok and rep.gamma_ok), detail


def criterion_9():
    st = state("curved-2d")
    table = extract_star_table(st, 2, 3)
    g = st.geometry
    zero_probe = GeometryData(2, {k: v.coefficient() for k, v in g.omega.items() if k[0] < k[1]}, {}, 3)
    ez = extract_connection(table, zero_probe)
    es = extract_connection(table, g)
    basepoint = {k: v.coefficient() for k, v in g.christoffel.items()}
    ok_zero = ez.christoffel == basepoint
    ok_self = es.christoffel == basepoint and es.t_zero()
    return ok_zero and ok_self, f"zero probe recovers Γ(0) {ok_zero}, self probe T=0 {ok_self}"


def criterion_10():
    changed = []
    for name in ACCEPTANCE_FIXTURES:
        base = state(name)
        b = base.bounds
        wide = state(name, b.degree + 2, b.jet + 2)
        if wide.gamma.truncate(b) != base.gamma:
            changed.append((name, "gamma"))
        if extract_star_table(wide, b.hbar, 3).entries != extract_star_table(base, b.hbar, 3).entries:
            changed.append((name, "table"))
        f, g = series("x1 + x2^2"), series("x1*x2 - x1^3")
        if star(wide, f, g).truncate(b) != star(base, f, g):
            changed.append((name, "star"))
    return not changed, f"changed {changed}"


CRITERIA = {
    1: ("flat reproduction", criterion_1),
    2: ("associativity", criterion_2),
    3: ("gamma normalization", criterion_3),
    4: ("Vey property", criterion_4),
    5: ("order bounds", criterion_5),
    6: ("derivations", criterion_6),
    7: ("momentum map", criterion_7),
    8: ("lagrangian closure", criterion_8),
    9: ("connection recovery", criterion_9),
    10: ("bound widening", criterion_10),
}


def report_line(n: int) -> tuple[bool, str]:
    title, fn = CRITERIA[n]
    ok, detail = fn()
    return ok, f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'} [{detail}]"


def _run(n, capsys):
    ok, line = report_line(n)
    with capsys.disabled():
        print("\n" + line)
    return ok


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 7, 9, 10])
def test_criterion(n, capsys):
    assert _run(n, capsys)


@pytest.mark.xfail(
    strict=True,
    reason="x1*x2 ∗ x1*x2 = x1^2 x2^2 + ħ^2/4 does not vanish on {x2 = 0}; quadratic probes break star closure",
)
def test_criterion_8(capsys):
    assert _run(8, capsys)


def test_criterion_8_gamma_membership_holds():
    rep = lagrangian_check(state("flat-2d"), LagrangianSpec(2, (1,)), 3)
    assert rep.gamma_ok
    assert rep.star_witness[2:] == (((0, 0), (0, 0), 2, ()), Scalar(1) / 4)


if __name__ == "__main__":
    failed = 0
    for n in CRITERIA:
        ok, line = report_line(n)
        failed += not ok
        print(line)
    sys.exit(1 if failed else 0)
