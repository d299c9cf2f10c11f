"""Fedosov connection, parallel sections and the induced star product.

Conventions: ``D = -delta + d + ad(gamma)`` where ``ad(a) b = (i/hbar)[a, b]``
(graded), the Weyl curvature is

    Omega = omega - R + delta gamma - d gamma - (i/hbar) gamma^2,

and ``gamma`` is the unique solution of

    gamma = delta^-1 Omega~ + delta^-1 (d gamma + (i/hbar) gamma^2),
    Omega~ = Omega - omega + R,

normalized by ``delta^-1 gamma = 0``.  ``(i/hbar) gamma^2 = 1/2 ad(gamma) gamma``
because gamma is a 1-form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping

from .geometry import GeometryData, InsufficientJetError, NotClosedError, check_closed, covariant_derivative
from .scalar import Scalar
from .series import NO_LIMIT, Bounds, GradedSeries, ZeroSeriesError, multi_indices, mi_factorial
from .weyl import PoissonMatrix, ad_bracket, contracted_product, delta_inv, delta_op, moyal_mul

__all__ = [
    "FedosovError",
    "ObstructionError",
    "NonCentralCurvatureError",
    "WeylCurvatureSpec",
    "FedosovState",
    "StarTable",
    "solve_gamma",
    "weyl_curvature",
    "connection_apply",
    "quantize",
    "project",
    "star",
    "extract_star_table",
    "moyal_table",
]

_HALF = Scalar(1) / 2


class FedosovError(RuntimeError):
    pass


class ObstructionError(ValueError):
    """Omega~ produces a correction of filtration degree below 3."""


class NonCentralCurvatureError(FedosovError):
    def __init__(self, term, coeff):
        super().__init__(f"recomputed Weyl curvature is not central: term {term} has coefficient {coeff}")
        self.term = term
        self.coeff = coeff


class WeylCurvatureSpec:
    """``Omega = omega + sum_{m>=1} hbar^m omega_m`` with closed 2-forms ``omega_m``.

    ``perturbations[m][(i, j)]`` is the x-jet of ``(omega_m)_{ij}`` (``i < j``).
    """

    def __init__(self, dim: int, perturbations: Mapping[int, Mapping[tuple[int, int], GradedSeries]] | None = None):
        self.dim = dim
        self.perturbations: dict[int, dict[tuple[int, int], GradedSeries]] = {}
        for m, form in (perturbations or {}).items():
            if m < 1:
                raise ValueError("perturbation powers start at hbar^1; the hbar^0 term is omega itself")
            ent = {}
            for (i, j), v in form.items():
                if not (1 <= i <= dim and 1 <= j <= dim) or i == j:
                    raise IndexError(f"Omega perturbation index ({i},{j}) invalid")
                v = v if isinstance(v, GradedSeries) else GradedSeries.constant(dim, v)
                if i > j:
                    i, j, v = j, i, -v
                ent[(i, j)] = ent.get((i, j), GradedSeries.zero(dim, v.bounds)) + v
            cl = check_closed(ent, dim)
            if not cl:
                raise NotClosedError(f"omega_{m} is not closed: {cl.detail}")
            self.perturbations[m] = ent

    def element(self, g: GeometryData, bounds: Bounds) -> GradedSeries:
        """``Omega`` as a central 2-form ``sum_{i<j} Omega_ij dx^i ^ dx^j``."""
        out = GradedSeries.zero(self.dim, bounds)
        for (i, j), v in g.omega.items():
            if i < j and v:
                out = out + v * GradedSeries.monomial(self.dim, J=(i, j))
        for m, form in self.perturbations.items():
            for (i, j), v in form.items():
                if v:
                    out = out + v * GradedSeries.monomial(self.dim, m=m, J=(i, j))
        return out.truncate(bounds)

    def is_even(self) -> bool:
        return all(m % 2 == 0 for m, f in self.perturbations.items() if any(v for v in f.values()))


@dataclass(frozen=True)
class FedosovState:
    geometry: GeometryData
    curvature: WeylCurvatureSpec
    bounds: Bounds
    gamma: GradedSeries
    omega_tilde: GradedSeries
    omega_prescribed: GradedSeries
    omega_recomputed: GradedSeries
    iterations: int
    gamma_parts: dict = field(repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def pi(self) -> PoissonMatrix:
        return self.geometry.pi

    @property
    def dim(self) -> int:
        return self.geometry.dim

    @property
    def order(self) -> int:
        return self.bounds.hbar

    def normalized(self) -> bool:
        """``delta^-1 gamma = 0`` exactly."""
        return delta_inv(self.gamma).is_zero()

    def min_degree(self) -> int | None:
        try:
            return self.gamma.filtration_degree()
        except ZeroSeriesError:
            return None

    def curvature_ok(self) -> bool:
        b = self.omega_recomputed.bounds
        return self.omega_recomputed == self.omega_prescribed.truncate(b)


# ---------------------------------------------------------------- gamma


def _by_degree(a: GradedSeries) -> dict[int, GradedSeries]:
    out: dict[int, GradedSeries] = {}
    for d in sorted({a._lay.grade(k)[1] for k in a._c}):
        out[d] = a.degree_part(d)
    return out


def _gamma_rhs(g: GeometryData, gamma: GradedSeries, omega_tilde: GradedSeries, b: Bounds) -> GradedSeries:
    sq = ad_bracket(gamma, gamma, g.pi, b).scale(_HALF)
    return delta_inv(omega_tilde + covariant_derivative(gamma, g) + sq).truncate(b)


def solve_gamma(g: GeometryData, omega: WeylCurvatureSpec | None = None, bounds: Bounds | None = None, order: int = 3) -> FedosovState:
    """Solve the gamma recursion degree by degree, then confirm the fixed point."""
    b = bounds if bounds is not None else Bounds.for_order(order)
    omega = omega if omega is not None else WeylCurvatureSpec(g.dim)
    if g.jet < b.jet - 1:
        raise InsufficientJetError(f"geometry jets to order {g.jet}; bounds need at least {b.jet - 1}")
    Om = omega.element(g, b)
    om0 = WeylCurvatureSpec(g.dim).element(g, b)
    Ot = (Om - om0 + g.R).truncate(b)
    seed = delta_inv(Ot).truncate(b)
    if seed and seed.filtration_degree() < 3:
        raise ObstructionError(f"delta^-1 of Omega~ has filtration degree {seed.filtration_degree()} < 3")
    seed_parts = _by_degree(seed)
    parts: dict[int, GradedSeries] = {}
    zero = GradedSeries.zero(g.dim, b)
    pi = g.pi
    steps = 0
    for d in range(3, b.degree + 1):
        steps += 1
        rhs = covariant_derivative(parts.get(d - 1, zero), g) if d - 1 in parts else zero
        for e1 in range(3, d + 1):
            e2 = d + 1 - e1
            if e2 < e1:
                break
            a1, a2 = parts.get(e1), parts.get(e2)
            if a1 is None or a2 is None:
                continue
            t = ad_bracket(a1, a2, pi, b)
            rhs = rhs + (t if e1 < e2 else t.scale(_HALF))
        new = (seed_parts.get(d, zero) + delta_inv(rhs).truncate(b)).degree_part(d)
        if new:
            parts[d] = new
    gamma = zero
    for p in parts.values():
        gamma = gamma + p
    gamma = gamma.truncate(b)
    check = _gamma_rhs(g, gamma, Ot, b)
    steps += 1
    if not check.identical(gamma):
        if check.bounds != b or gamma.bounds != b:
            raise InsufficientJetError(f"gamma is exact only within {check.bounds.meet(gamma.bounds)}, requested {b}")
        raise FedosovError("gamma recursion did not reach a fixed point")
    if steps > b.degree + 1:
        raise FedosovError("gamma iteration cap exceeded")
    rec = _recompute(g, gamma)
    state = FedosovState(g, omega, b, gamma, Ot, Om, rec, steps, parts)
    return state


def _recompute(g: GeometryData, gamma: GradedSeries) -> GradedSeries:
    b = gamma.bounds
    om = WeylCurvatureSpec(g.dim).element(g, b)
    sq = ad_bracket(gamma, gamma, g.pi, b).scale(_HALF)
    return om - g.R + delta_op(gamma) - covariant_derivative(gamma, g) - sq


def weyl_curvature(state: FedosovState) -> GradedSeries:
    """Recompute ``Omega`` from gamma; raises if the result is not central."""
    rec = _recompute(state.geometry, state.gamma)
    for (alpha, beta, m, J), c in rec.terms().items():
        if any(beta):
            raise NonCentralCurvatureError((alpha, beta, m, J), c)
    return rec


def connection_apply(state: FedosovState, a: GradedSeries) -> GradedSeries:
    """``D a = -delta a + d a + (i/hbar)[gamma, a]``."""
    g = state.geometry
    return -delta_op(a) + covariant_derivative(a, g) + ad_bracket(state.gamma, a, g.pi)


# ---------------------------------------------------------------- parallel sections


def _check_function(state: FedosovState, f: GradedSeries) -> None:
    if f.dim != state.dim:
        raise ValueError("dimension mismatch")
    if f.max_y_degree() or f.form_degrees() - {0}:
        raise ValueError("quantize expects a function of x (and hbar) only")
    if f.bounds.jet < state.bounds.jet:
        raise InsufficientJetError(f"function supplied to order {f.bounds.jet}, need {state.bounds.jet}")


def quantize(state: FedosovState, f: GradedSeries) -> GradedSeries:
    """The parallel section ``tau(f)`` with ``sigma(tau f) = f``."""
    _check_function(state, f)
    b = state.bounds
    f = f.truncate(b)
    key = frozenset(f._c.items())
    hit = state._cache.get(key)
    if hit is not None:
        return hit
    g = state.geometry
    pi = g.pi
    gp = state.gamma_parts
    fparts = _by_degree(f)
    zero = GradedSeries.zero(state.dim, b)
    parts: dict[int, GradedSeries] = {}
    for d in range(0, b.degree + 1):
        rhs = zero
        if d - 1 in parts:
            rhs = rhs + covariant_derivative(parts[d - 1], g)
        for e, ge in gp.items():
            j = d + 1 - e
            if j in parts:
                rhs = rhs + ad_bracket(ge, parts[j], pi, b)
        new = fparts.get(d, zero)
        if rhs:
            new = new + delta_inv(rhs).truncate(b).degree_part(d)
        if new:
            parts[d] = new
    out = zero
    for p in parts.values():
        out = out + p
    out = out.truncate(b)
    state._cache[key] = out
    return out


def project(a: GradedSeries) -> GradedSeries:
    """``sigma(a) = a|_{y=0}``."""
    return a.y_free()


def star(state: FedosovState, f: GradedSeries, g: GradedSeries) -> GradedSeries:
    """``sigma(tau f * tau g)`` as an x-jet with hbar coefficients."""
    tf, tg = quantize(state, f), quantize(state, g)
    return project(moyal_mul(tf, tg, state.pi, state.bounds))


def star_bracket(state: FedosovState, f: GradedSeries, g: GradedSeries) -> GradedSeries:
    """``sigma((i/hbar)[tau f, tau g])``."""
    tf, tg = quantize(state, f), quantize(state, g)
    return project(ad_bracket(tf, tg, state.pi, state.bounds))


# ---------------------------------------------------------------- tables


class StarTable:
    """Basepoint coefficients ``C_k(d^alpha, d^beta)`` of a star product."""

    def __init__(self, dim: int, order: int, max_order: int, entries: Mapping[tuple, Scalar], bounds: Bounds | None = None):
        self.dim = dim
        self.order = order
        self.max_order = max_order
        self.bounds = bounds
        self.entries = {k: v for k, v in sorted(entries.items(), key=lambda kv: _table_key(kv[0])) if not v.is_zero()}

    def get(self, k: int, alpha, beta) -> Scalar:
        return self.entries.get((k, tuple(alpha), tuple(beta)), Scalar(0))

    def probes(self) -> list[tuple[int, ...]]:
        return multi_indices(self.dim, self.max_order)

    def parity_violations(self) -> list[tuple]:
        out = []
        for (k, a, b), v in self.entries.items():
            if self.get(k, b, a) != v * (-1) ** k:
                out.append((k, a, b))
        return out

    def restricted(self, max_order: int) -> "StarTable":
        ent = {key: v for key, v in self.entries.items() if sum(key[1]) <= max_order and sum(key[2]) <= max_order}
        return StarTable(self.dim, self.order, max_order, ent, self.bounds)

    def __eq__(self, other):
        if not isinstance(other, StarTable):
            return NotImplemented
        return (self.dim, self.order, self.max_order, self.entries) == (other.dim, other.order, other.max_order, other.entries)

    def __repr__(self):
        return f"<StarTable dim={self.dim} K={self.order} probes<={self.max_order} nonzero={len(self.entries)}>"


def _table_key(key):
    k, a, b = key
    return (k, sum(a), tuple(-t for t in a), sum(b), tuple(-t for t in b))


def probe_monomial(dim: int, alpha, bounds: Bounds = Bounds()) -> GradedSeries:
    """``x^alpha / alpha!``."""
    return GradedSeries.monomial(dim, alpha=tuple(alpha), coeff=Scalar(1) / mi_factorial(alpha), bounds=bounds)


def extract_star_table(state: FedosovState, order: int | None = None, max_order: int | None = None) -> StarTable:
    """Probe ``star(x^a/a!, x^b/b!)`` at x = 0 for all ``|a|, |b| <= max_order``."""
    K = state.order if order is None else order
    if K > state.bounds.hbar:
        raise InsufficientJetError(f"requested order {K} exceeds solved order {state.bounds.hbar}")
    P = 2 * K if max_order is None else max_order
    if P > state.bounds.jet:
        raise InsufficientJetError(f"probe order {P} exceeds jet bound {state.bounds.jet}")
    dim = state.dim
    pi0 = PoissonMatrix.constant(state.pi.at_origin())
    b = Bounds(hbar=K)
    idx = multi_indices(dim, P)
    slices = {a: quantize(state, probe_monomial(dim, a, state.bounds)).at_origin().truncate(b) for a in idx}
    entries = {}
    for a in idx:
        for c in idx:
            prod = contracted_product(slices[a], slices[c], pi0, b)
            for (_, _, m, J), v in prod.terms().items():
                if not J:
                    entries[(m, a, c)] = v
    return StarTable(dim, K, P, entries, state.bounds)


def moyal_table(pi0: list[list[Scalar]], order: int, max_order: int) -> StarTable:
    """Reference table of the constant-coefficient Moyal product."""
    dim = len(pi0)
    pi = PoissonMatrix.constant(pi0)
    b = Bounds(hbar=order)
    idx = multi_indices(dim, max_order)
    entries = {}
    for a in idx:
        fa = GradedSeries.monomial(dim, beta=a, coeff=Scalar(1) / mi_factorial(a))
        for c in idx:
            fc = GradedSeries.monomial(dim, beta=c, coeff=Scalar(1) / mi_factorial(c))
            for (_, _, m, _), v in contracted_product(fa, fc, pi, b).terms().items():
                entries[(m, a, c)] = v
    return StarTable(dim, order, max_order, entries)
