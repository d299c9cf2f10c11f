"""Verifiers for structural properties of Fedosov star products."""

from .connection import ConnectionExtraction, NotNaturalError, extract_connection
from .derivations import (
    BracketReport,
    DerivationCert,
    derivation_bracket_inner,
    derivation_even_odd,
    derivation_solve,
    induced_operator,
)
from .lagrangian import LagrangianReport, lagrangian_check, vanishing_probes
from .momentum import LieSymmetryData, MomentumReport, coboundary, hamiltonian_field, momentum_verify
from .vey import VeyCheck, VeyReport, compute_P_k, normalize_Q, order_bound_violations, order_profile, symmetric_lift, vey_check

__all__ = [
    "BracketReport",
    "ConnectionExtraction",
    "DerivationCert",
    "LagrangianReport",
    "LieSymmetryData",
    "MomentumReport",
    "NotNaturalError",
    "VeyCheck",
    "VeyReport",
    "coboundary",
    "hamiltonian_field",
    "normalize_Q",
    "order_bound_violations",
    "symmetric_lift",
    "vanishing_probes",
    "compute_P_k",
    "derivation_bracket_inner",
    "derivation_even_odd",
    "derivation_solve",
    "extract_connection",
    "induced_operator",
    "lagrangian_check",
    "momentum_verify",
    "order_profile",
    "vey_check",
]
