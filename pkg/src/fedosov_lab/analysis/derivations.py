"""Derivations of a Fedosov star product from closed scalar 1-forms.

A closed 1-form ``theta`` (possibly an hbar-series) determines the unique
``K`` with ``D K = theta`` and ``K|_{y=0} = 0``; the induced derivation is
``f -> sigma((i/hbar)[K, tau f])``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..fedosov import FedosovState, _by_degree, connection_apply, probe_monomial, project, quantize
from ..geometry import NotClosedError, covariant_derivative
from ..series import Bounds, GradedSeries, multi_indices
from ..weyl import ad_bracket, delta_inv

__all__ = [
    "NotScalarError",
    "DerivationCert",
    "BracketReport",
    "derivation_solve",
    "derivation_even_odd",
    "derivation_bracket_inner",
    "induced_operator",
]


class NotScalarError(ValueError):
    """theta contains y, or is not a 1-form."""


@dataclass(frozen=True)
class DerivationCert:
    theta: GradedSeries
    K: GradedSeries
    residual: GradedSeries
    H: GradedSeries | None = None

    @property
    def valid(self) -> bool:
        return self.residual.is_zero() and self.K.y_free().is_zero()


def _check_theta(state: FedosovState, theta: GradedSeries) -> GradedSeries:
    if theta.dim != state.dim:
        raise ValueError("dimension mismatch")
    if theta.max_y_degree():
        raise NotScalarError("theta must not contain y")
    if theta and theta.form_degrees() != {1}:
        raise NotScalarError("theta must be a 1-form")
    theta = theta.truncate(state.bounds)
    d = covariant_derivative(theta, state.geometry)
    if d:
        term = next(iter(d.terms()))
        raise NotClosedError(f"d theta has term {term}")
    return theta


def derivation_solve(state: FedosovState, theta: GradedSeries, H: GradedSeries | None = None) -> DerivationCert:
    """Solve ``K = -delta^-1 theta + delta^-1 (d K + (i/hbar)[gamma, K])``."""
    theta = _check_theta(state, theta)
    b = state.bounds
    g = state.geometry
    zero = GradedSeries.zero(state.dim, b)
    seed = _by_degree(-delta_inv(theta).truncate(b))
    parts: dict[int, GradedSeries] = {}
    for d in range(1, b.degree + 1):
        rhs = zero
        if d - 1 in parts:
            rhs = rhs + covariant_derivative(parts[d - 1], g)
        for e, ge in state.gamma_parts.items():
            j = d + 1 - e
            if j in parts:
                rhs = rhs + ad_bracket(ge, parts[j], g.pi, b)
        new = seed.get(d, zero)
        if rhs:
            new = new + delta_inv(rhs).truncate(b).degree_part(d)
        if new:
            parts[d] = new
    K = zero
    for p in parts.values():
        K = K + p
    K = K.truncate(b)
    residual = connection_apply(state, K) - theta
    return DerivationCert(theta, K, residual, H)


def induced_operator(state: FedosovState, cert: DerivationCert, max_order: int = 3) -> dict[tuple[int, ...], GradedSeries]:
    """``x^a/a! -> sigma((i/hbar)[K, tau(x^a/a!)])`` for ``|a| <= max_order``."""
    out = {}
    for a in multi_indices(state.dim, max_order):
        tf = quantize(state, probe_monomial(state.dim, a, state.bounds))
        out[a] = project(ad_bracket(cert.K, tf, state.pi, state.bounds))
    return out


def derivation_even_odd(state: FedosovState, cert: DerivationCert, max_order: int = 3):
    """Split the induced operator into even and odd hbar powers."""
    op = induced_operator(state, cert, max_order)
    even = {a: s.select(lambda gr: gr[2] % 2 == 0) for a, s in op.items()}
    odd = {a: s.select(lambda gr: gr[2] % 2 == 1) for a, s in op.items()}
    return even, odd


@dataclass(frozen=True)
class BracketReport:
    K: GradedSeries
    DK: GradedSeries
    generator: GradedSeries

    @property
    def inner(self) -> bool:
        return self.DK.is_zero()


def derivation_bracket_inner(cert1: DerivationCert, cert2: DerivationCert, state: FedosovState) -> BracketReport:
    """``K = (i/hbar)[K1, K2]`` is parallel, so the bracket derivation is inner."""
    K = ad_bracket(cert1.K, cert2.K, state.pi, state.bounds)
    DK = connection_apply(state, K)
    return BracketReport(K, DK, project(K))
