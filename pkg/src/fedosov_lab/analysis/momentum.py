"""Quantum generators of an infinitesimal symmetry and the lambda cocycle."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

from ..fedosov import FedosovState, probe_monomial, project, quantize
from ..scalar import Scalar
from ..series import GradedSeries, multi_indices, series_mul
from ..weyl import ad_bracket

__all__ = ["LieSymmetryData", "MomentumReport", "momentum_verify", "hamiltonian_field", "coboundary"]


def hamiltonian_field(state: FedosovState, a: GradedSeries) -> list[GradedSeries]:
    """Components ``xi^j = pi^{ij} d_i a`` of the field ``f -> {a, f}`` (hbar^0 part of a)."""
    dim = state.dim
    a0 = a.hbar_part(0)
    out = []
    for j in range(1, dim + 1):
        acc = GradedSeries.zero(dim, state.bounds)
        for i in range(1, dim + 1):
            p = state.pi.entry(i, j)
            if p:
                acc = acc + p * a0.partial_x(i)
        out.append(acc)
    return out


@dataclass
class LieSymmetryData:
    """Basis ``xi_1..xi_d`` with ``[xi_i, xi_j] = c^k_ij xi_k``.

    ``structure[(i, j)]`` maps ``k`` to ``c^k_ij`` (1-based, ``i < j``).
    ``fields`` holds optional vector-field components per generator; by
    default the hamiltonian fields of the generators are used.
    """

    generators: Sequence[GradedSeries]
    structure: Mapping[tuple[int, int], Mapping[int, object]]
    fields: Mapping[int, Sequence[GradedSeries]] | None = None
    names: Sequence[str] | None = None

    def __post_init__(self):
        d = len(self.generators)
        full: dict[tuple[int, int], dict[int, Scalar]] = {}
        for (i, j), row in self.structure.items():
            if not (1 <= i <= d and 1 <= j <= d):
                raise IndexError(f"structure index ({i},{j}) out of range 1..{d}")
            if i == j:
                if any(Scalar(v) if not isinstance(v, Scalar) else v for v in row.values()):
                    raise ValueError("structure constants must vanish on the diagonal")
                continue
            r = {k: (v if isinstance(v, Scalar) else Scalar(v)) for k, v in row.items()}
            if (j, i) in full:
                other = full[(j, i)]
                if any(r.get(k, Scalar(0)) != -other.get(k, Scalar(0)) for k in set(r) | set(other)):
                    raise ValueError(f"structure constants not antisymmetric at ({i},{j})")
                continue
            full[(i, j)] = r
            full[(j, i)] = {k: -v for k, v in r.items()}
        self._c = full
        self.dimension = d

    def c(self, k: int, i: int, j: int) -> Scalar:
        return self._c.get((i, j), {}).get(k, Scalar(0))

    def jacobi_violation(self) -> tuple | None:
        d = self.dimension
        rng = range(1, d + 1)
        for i, j, k in product(rng, repeat=3):
            if not i < j < k:
                continue
            for m in rng:
                s = Scalar(0)
                for a, b, c_ in ((i, j, k), (j, k, i), (k, i, j)):
                    for l in rng:
                        s = s + self.c(l, a, b) * self.c(m, l, c_)
                if not s.is_zero():
                    return (i, j, k, m)
        return None

    def label(self, i: int) -> str:
        return self.names[i - 1] if self.names else f"xi{i}"


def coboundary(sym: LieSymmetryData, shifts: Sequence[object]) -> dict[tuple[int, int], Scalar]:
    """``(i, j) -> c([xi_i, xi_j])`` for constant shifts ``c``."""
    d = sym.dimension
    out = {}
    for i in range(1, d + 1):
        for j in range(i + 1, d + 1):
            s = Scalar(0)
            for k in range(1, d + 1):
                s = s + sym.c(k, i, j) * shifts[k - 1]
            out[(i, j)] = s
    return out


@dataclass
class MomentumReport:
    field_ok: bool
    eq23_ok: bool
    lam: dict[tuple[int, int], GradedSeries]
    constant: bool
    cocycle_ok: bool
    jacobi_ok: bool
    failures: list[str] = field(default_factory=list)

    @property
    def lambda_zero(self) -> bool:
        return all(v.is_zero() for v in self.lam.values())

    @property
    def passed(self) -> bool:
        return self.field_ok and self.eq23_ok and self.constant and self.cocycle_ok and self.jacobi_ok


def _apply_field(comps: Sequence[GradedSeries], f: GradedSeries, cap) -> GradedSeries:
    out = GradedSeries.zero(f.dim, cap)
    for j, c in enumerate(comps, start=1):
        if c:
            out = out + series_mul(c, f.partial_x(j), cap)
    return out


def momentum_verify(state: FedosovState, sym: LieSymmetryData, probe_degree: int = 4) -> MomentumReport:
    """Check ``xi f = sigma((i/hbar)[tau a_xi, tau f])`` on monomials and tabulate lambda."""
    dim = state.dim
    b = state.bounds
    failures: list[str] = []
    jac = sym.jacobi_violation()
    if jac:
        failures.append(f"Jacobi identity fails for structure constants at {jac}")
    gens = [a.truncate(b) for a in sym.generators]
    fields = {}
    field_ok = True
    for i, a in enumerate(gens, start=1):
        ham = hamiltonian_field(state, a)
        given = (sym.fields or {}).get(i)
        if given is None:
            fields[i] = ham
            continue
        given = [c.truncate(b) for c in given]
        for j, (u, v) in enumerate(zip(given, ham), start=1):
            cmp_b = u.bounds.meet(v.bounds).shifted(jet=-1)
            if u.truncate(cmp_b) != v.truncate(cmp_b):
                field_ok = False
                failures.append(f"field of {sym.label(i)} differs from the hamiltonian field of its generator in component {j}")
                break
        fields[i] = given
    if not field_ok:
        return MomentumReport(False, False, {}, False, False, jac is None, failures)
    eq23_ok = True
    taus = [quantize(state, a) for a in gens]
    for i, ta in enumerate(taus, start=1):
        for alpha in multi_indices(dim, probe_degree):
            f = probe_monomial(dim, alpha, b)
            lhs = project(ad_bracket(ta, quantize(state, f), state.pi, b))
            rhs = _apply_field(fields[i], f, b)
            cb = lhs.bounds.meet(rhs.bounds)
            if lhs.truncate(cb) != rhs.truncate(cb):
                eq23_ok = False
                diff = (lhs - rhs).truncate(cb)
                term = next(iter(diff.terms().items()))
                failures.append(f"generator relation fails for {sym.label(i)} on x^{alpha}: term {term[0]} = {term[1]}")
                break
    lam: dict[tuple[int, int], GradedSeries] = {}
    d = sym.dimension
    constant = True
    for i in range(1, d + 1):
        for j in range(i + 1, d + 1):
            comb = GradedSeries.zero(dim, b)
            for k in range(1, d + 1):
                c = sym.c(k, i, j)
                if not c.is_zero():
                    comb = comb + gens[k - 1].scale(c)
            br = project(ad_bracket(taus[i - 1], taus[j - 1], state.pi, b))
            v = comb - br
            lam[(i, j)] = v
            if any(any(al) for (al, _, _, _) in v.terms()):
                constant = False
                failures.append(f"lambda({sym.label(i)},{sym.label(j)}) is not constant")
    cocycle_ok = True
    if constant:
        consts = {k: v.at_origin() for k, v in lam.items()}

        def L(i, j):
            if i == j:
                return GradedSeries.zero(dim)
            return consts[(i, j)] if i < j else -consts[(j, i)]

        for i in range(1, d + 1):
            for j in range(i + 1, d + 1):
                for k in range(j + 1, d + 1):
                    s = GradedSeries.zero(dim)
                    for a, bb, c in ((i, j, k), (j, k, i), (k, i, j)):
                        for l in range(1, d + 1):
                            cl = sym.c(l, a, bb)
                            if not cl.is_zero():
                                s = s + L(l, c).scale(cl)
                    if s:
                        cocycle_ok = False
                        failures.append(f"cocycle identity fails on ({i},{j},{k})")
    return MomentumReport(True, eq23_ok, lam, constant, cocycle_ok, jac is None, failures)
