"""Recover the connection of a natural star product from its ``Q_2`` table.

With ``A^{m b d}`` the coefficient of ``(d_m u)(d_b d_d v)`` in
``Q_2 - P^2`` for a probe connection ``Gamma~``, the correction is
``T = -A/3`` and ``Gamma^{ijk} = Gamma~^{ijk} + 3 T^{ijk}``, where raised
indices are ``Gamma^{ijk} = pi^{ja} pi^{kc} Gamma^i_{ac}`` and lowering is
``Gamma^i_{lm} = Gamma^{ijk} omega_{jl} omega_{km}``.  Only basepoint values
enter, so the probe need only be torsion-free and preserve omega at x = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

from ..fedosov import StarTable
from ..geometry import GeometryData, _nabla_omega
from ..scalar import Scalar
from ..series import unit_index
from .vey import compute_P_k, normalize_Q

__all__ = ["NotNaturalError", "ConnectionExtraction", "extract_connection"]


class NotNaturalError(ValueError):
    """The table is not that of a natural (Vey-compatible) star product."""


@dataclass(frozen=True)
class ConnectionExtraction:
    T: dict[tuple[int, int, int], Scalar]
    raised: dict[tuple[int, int, int], Scalar]
    christoffel: dict[tuple[int, int, int], Scalar]
    lowered: dict[tuple[int, int, int], Scalar]
    geometry: GeometryData

    def t_zero(self) -> bool:
        return all(v.is_zero() for v in self.T.values())


def _raise(g: GeometryData, G: dict) -> dict:
    rng = range(1, g.dim + 1)
    pi = g.pi.at_origin()
    out = {}
    for i, j, k in product(rng, repeat=3):
        s = Scalar(0)
        for a, c in product(rng, repeat=2):
            v = G[(i, a, c)]
            if not v.is_zero():
                s = s + pi[j - 1][a - 1] * pi[k - 1][c - 1] * v
        out[(i, j, k)] = s
    return out


def _lower(g: GeometryData, G: dict) -> dict:
    rng = range(1, g.dim + 1)
    om = [[g.omega[(i, j)].coefficient() for j in rng] for i in rng]
    out = {}
    for i, l, m in product(rng, repeat=3):
        s = Scalar(0)
        for j, k in product(rng, repeat=2):
            v = G[(i, j, k)]
            if not v.is_zero():
                s = s + v * om[j - 1][l - 1] * om[k - 1][m - 1]
        out[(i, l, m)] = s
    return out


def extract_connection(table: StarTable, probe: GeometryData) -> ConnectionExtraction:
    """Unique torsion-free symplectic connection whose ``P^2`` matches ``Q_2`` at x = 0."""
    dim = probe.dim
    if table.dim != dim:
        raise ValueError("dimension mismatch")
    if table.order < 2:
        raise ValueError("table must contain hbar^2 coefficients")
    if table.max_order < 3:
        raise ValueError("probe range must be at least 3 to certify Q_2 has order <= 2")
    rng = range(1, dim + 1)
    for k, i, j in product(rng, repeat=3):
        if probe.christoffel[(k, i, j)].coefficient() != probe.christoffel[(k, j, i)].coefficient():
            raise ValueError(f"probe connection has torsion at ({k},{i},{j})")
    for key, v in _nabla_omega(probe).items():
        if not v.coefficient().is_zero():
            raise ValueError(f"probe connection does not preserve omega at x = 0: {key}")
    Q2 = normalize_Q(table, 2)
    for (a, b), v in Q2.items():
        if sum(a) > 2 or sum(b) > 2:
            raise NotNaturalError(f"Q_2 has order > 2: entry {a}, {b} = {v}")
    P2 = compute_P_k(probe, 2, 2)
    A = {}
    for m, b, d in product(rng, repeat=3):
        beta = tuple(x + y for x, y in zip(unit_index(dim, b), unit_index(dim, d)))
        alpha = unit_index(dim, m)
        c = Q2.get((alpha, beta), Scalar(0)) - P2.get((alpha, beta), Scalar(0))
        mult = Scalar(math.prod(math.factorial(t) for t in beta), 0) / 2
        A[(m, b, d)] = c * mult
    for (m, b, d), v in A.items():
        for p in ((b, m, d), (d, b, m), (m, d, b)):
            if A[p] != v:
                raise NotNaturalError(f"extracted tensor is not symmetric: {(m, b, d)} vs {p}")
    T = {key: -v / 3 for key, v in A.items()}
    tilde = {key: c.coefficient() for key, c in probe.christoffel.items()}
    raised_tilde = _raise(probe, tilde)
    raised = {key: raised_tilde[key] + 3 * T[key] for key in raised_tilde}
    chris = _lower(probe, raised)
    om = {(i, j): probe.omega[(i, j)].coefficient() for i, j in product(rng, repeat=2) if i < j}
    geom = GeometryData(dim, om, {k: v for k, v in chris.items() if not v.is_zero()}, 0)
    lowered = {key: geom.lowered[key].coefficient() for key in geom.lowered}
    return ConnectionExtraction(T, raised, chris, lowered, geom)
