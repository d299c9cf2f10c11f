"""Closure of the vanishing ideal of a coordinate lagrangian under the star product."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from ..fedosov import FedosovState, quantize, star
from ..geometry import (
    CheckResult,
    LagrangianSpec,
    NotIsotropicError,
    check_totally_geodesic,
    restrict_to,
)
from ..series import GradedSeries, multi_indices
from ..weyl import moyal_mul

__all__ = ["LagrangianReport", "lagrangian_check", "vanishing_probes"]


def vanishing_probes(L: LagrangianSpec, degree: int) -> list[GradedSeries]:
    """Monomials of degree ``1..degree`` containing a normal coordinate."""
    nrm = [c - 1 for c in L.normal]
    out = []
    for a in multi_indices(L.dim, degree, 1):
        if any(a[c] for c in nrm):
            out.append(GradedSeries.monomial(L.dim, alpha=a))
    return out


@dataclass
class LagrangianReport:
    hypotheses: dict[str, CheckResult]
    star_ok: bool | None
    gamma_ok: bool | None
    sections_ok: bool | None
    pairs: int
    failures: list[str] = field(default_factory=list)
    star_witness: tuple | None = None
    section_witness: tuple | None = None
    gamma_witness: tuple | None = None

    @property
    def passed(self) -> bool:
        return all(self.hypotheses.values()) and all(v is not False for v in (self.star_ok, self.gamma_ok, self.sections_ok))


def _omega_on_L(state: FedosovState, L: LagrangianSpec) -> CheckResult:
    Om = state.omega_prescribed
    for (alpha, beta, m, J), c in restrict_to(Om, L).terms().items():
        return CheckResult(False, (m, J, alpha), f"Omega restricted to L has term hbar^{m} dx^{J} x^{alpha}")
    return CheckResult(True)


def lagrangian_check(state: FedosovState, L: LagrangianSpec, probe_degree: int = 3) -> LagrangianReport:
    hyp: dict[str, CheckResult] = {}
    try:
        L.validate(state.geometry)
        hyp["isotropic"] = CheckResult(True)
    except NotIsotropicError as exc:
        hyp["isotropic"] = CheckResult(False, None, str(exc))
    hyp["totally geodesic"] = check_totally_geodesic(state.geometry, L)
    hyp["Omega vanishes on L"] = _omega_on_L(state, L)
    failures = [f"{k}: {v.detail}" for k, v in hyp.items() if not v]
    if failures:
        return LagrangianReport(hyp, None, None, None, 0, failures)
    b = state.bounds
    probes = [p.truncate(b) for p in vanishing_probes(L, probe_degree)]
    star_w = sec_w = gam_w = None
    pairs = 0
    for f, g in product(probes, repeat=2):
        pairs += 1
        fa, ga = next(iter(f.terms()))[0], next(iter(g.terms()))[0]
        r = restrict_to(star(state, f, g), L)
        if r:
            term = next(iter(r.terms().items()))
            star_w = star_w or (fa, ga) + term
            failures.append(f"star product of x^{fa} and x^{ga} does not vanish on L")
        prod = moyal_mul(quantize(state, f), quantize(state, g), state.pi, b)
        r = restrict_to(prod, L)
        if r:
            term = next(iter(r.terms().items()))
            sec_w = sec_w or (fa, ga) + term
            failures.append(f"section product of x^{fa} and x^{ga} leaves W^L")
    r = restrict_to(state.gamma, L)
    if r:
        gam_w = next(iter(r.terms().items()))
        failures.append("gamma is not in (W (x) Lambda)_L")
    return LagrangianReport(hyp, star_w is None, gam_w is None, sec_w is None, pairs, failures, star_w, sec_w, gam_w)
