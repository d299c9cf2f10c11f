"""Principal symbols ``P^k`` and the Vey property of star-product tables.

Tables map ``(alpha, beta)`` to the coefficient of ``d^alpha u d^beta v`` at
the basepoint (monomial probing: evaluate on ``x^alpha/alpha!``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..fedosov import FedosovState, StarTable, extract_star_table, probe_monomial, quantize
from ..geometry import GeometryData
from ..scalar import Scalar
from ..series import Bounds, GradedSeries, multi_indices, series_mul, unit_index, y_var
from ..weyl import PoissonMatrix, contracted_product

__all__ = [
    "VeyCheck",
    "VeyReport",
    "compute_P_k",
    "order_profile",
    "vey_check",
    "normalize_Q",
    "symmetric_lift",
    "order_bound_violations",
]

Table = dict[tuple[tuple[int, ...], tuple[int, ...]], Scalar]


def _lift_ops(g: GeometryData) -> list[GradedSeries]:
    dim = g.dim
    ops = []
    for m in range(1, dim + 1):
        acc = GradedSeries.zero(dim, Bounds(jet=g.jet + 2))
        for j in range(1, dim + 1):
            for l in range(1, dim + 1):
                c = g.christoffel[(m, j, l)]
                if c:
                    mono = GradedSeries.monomial(dim, beta=tuple(a + b for a, b in zip(unit_index(dim, j), unit_index(dim, l))))
                    acc = acc + series_mul(c, mono, acc.bounds)
        ops.append(acc)
    return ops


def symmetric_lift(g: GeometryData, u: GradedSeries, k: int) -> GradedSeries:
    """``Sym(nabla^k u)_{i1..ik} y^i1 ... y^ik`` as a series in x and y."""
    dim = g.dim
    ops = _lift_ops(g)
    ys = [y_var(dim, j) for j in range(1, dim + 1)]
    t = u
    for _ in range(k):
        cap = t.bounds
        nxt = GradedSeries.zero(dim, cap)
        for j in range(1, dim + 1):
            d = t.partial_x(j)
            if d:
                nxt = nxt + series_mul(ys[j - 1], d, cap)
        for m in range(1, dim + 1):
            if ops[m - 1]:
                d = t.partial_y(m)
                if d:
                    nxt = nxt - series_mul(ops[m - 1], d, cap)
        t = nxt
    return t


def compute_P_k(g: GeometryData, k: int, max_order: int) -> Table:
    """Basepoint table of ``pi^{i1 j1}..pi^{ik jk} (nabla^k u)_{i..} (nabla^k v)_{j..}``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if g.jet < max_order:
        from ..geometry import InsufficientJetError

        raise InsufficientJetError(f"geometry jets to order {g.jet}, probes need {max_order}")
    dim = g.dim
    pi0 = PoissonMatrix.constant(g.pi.at_origin())
    idx = multi_indices(dim, max_order)
    b = Bounds(jet=max_order + k)
    lifts = {}
    for a in idx:
        u = probe_monomial(dim, a, b)
        lifts[a] = symmetric_lift(g, u, k).at_origin().degree_part(k)
    norm = Scalar(1) / (math.factorial(k) * (Scalar(0, -1) / 2) ** k)
    out: Table = {}
    hb = Bounds(hbar=k)
    for a in idx:
        if not lifts[a]:
            continue
        for c in idx:
            if not lifts[c]:
                continue
            v = contracted_product(lifts[a], lifts[c], pi0, hb).coefficient(m=k)
            if not v.is_zero():
                out[(a, c)] = v * norm
    return out


def normalize_Q(table: StarTable, k: int) -> Table:
    """``Q_k = k! (2i)^k C_k`` so that the flat case gives ``Q_k = P^k``."""
    f = math.factorial(k) * Scalar(0, 2) ** k
    return {(a, b): v * f for (kk, a, b), v in table.entries.items() if kk == k}


def order_profile(t: Table) -> tuple[int, int]:
    """Largest ``|alpha|`` and ``|beta|`` with a nonzero entry (-1 if empty)."""
    ma = max((sum(a) for (a, _), v in t.items() if not v.is_zero()), default=-1)
    mb = max((sum(b) for (_, b), v in t.items() if not v.is_zero()), default=-1)
    return ma, mb


def _first_beyond(t: Table, r: int):
    for (a, b), v in t.items():
        if not v.is_zero() and (sum(a) > r or sum(b) > r):
            return (a, b, v)
    return None


@dataclass
class VeyCheck:
    name: str
    ok: bool
    witness: tuple | None = None


@dataclass
class VeyReport:
    table: StarTable
    Q: dict[int, Table]
    P: dict[int, Table]
    remainder: dict[int, Table]
    profile: dict[int, tuple[int, int]]
    checks: list[VeyCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)


def _sub(a: Table, b: Table) -> Table:
    out = dict(a)
    for key, v in b.items():
        out[key] = out.get(key, Scalar(0)) - v
    return {k: v for k, v in out.items() if not v.is_zero()}


def vey_check(state: FedosovState, max_order: int | None = None, table: StarTable | None = None) -> VeyReport:
    """Compare ``Q_k`` with ``P^k`` for all ``k <= K``.

    Checks: ``Q_k`` has order ``<= k`` per argument; the principal block
    ``|alpha| = |beta| = k`` of ``Q_k`` equals that of ``P^k``; the ``k = 2``
    remainder has order ``<= 1`` per argument.  The remainder order profile
    for every ``k`` is reported as well.
    """
    K = state.order
    P_max = max_order if max_order is not None else 2 * K
    if table is None:
        table = extract_star_table(state, K, P_max)
    P_max = table.max_order
    g = state.geometry
    Q, P, Rm, prof = {}, {}, {}, {}
    checks = []
    for k in range(K + 1):
        Q[k] = normalize_Q(table, k)
        P[k] = compute_P_k(g, k, P_max)
        Rm[k] = _sub(Q[k], P[k])
        prof[k] = order_profile(Rm[k])
        if P_max > k:
            w = _first_beyond(Q[k], k)
            checks.append(VeyCheck(f"Q_{k} order <= {k}", w is None, w))
        prin = [(a, b, v) for (a, b), v in Rm[k].items() if sum(a) == k and sum(b) == k]
        checks.append(VeyCheck(f"principal symbol of Q_{k} = P^{k}", not prin, prin[0] if prin else None))
    if K >= 2:
        if P_max < 2:
            raise ValueError("probe range must exceed 1 to test the k = 2 remainder")
        w = _first_beyond(Rm[2], 1)
        checks.append(VeyCheck("Q_2 - P^2 order <= 1", w is None, w))
    return VeyReport(table, Q, P, Rm, prof, checks)


def order_bound_violations(state: FedosovState, max_order: int = 5) -> list[tuple]:
    """Basepoint terms of ``tau(x^a/a!)`` breaking the differential-order bounds.

    The ``hbar^i y^b`` coefficient is a differential operator of order at most
    ``i + |b|`` in ``f``, and at most 1 when ``i = 1, |b| = 1``.  Returns
    witnesses ``(a, i, b, coefficient)``.
    """
    dim = state.dim
    out = []
    for a in multi_indices(dim, max_order):
        t = quantize(state, probe_monomial(dim, a, state.bounds)).at_origin()
        n = sum(a)
        for (_, beta, m, J), v in t.terms().items():
            lim = 1 if (m == 1 and sum(beta) == 1) else m + sum(beta)
            if n > lim:
                out.append((a, m, beta, v))
    return out
