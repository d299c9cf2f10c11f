"""Library values against frozen sympy brute-force references.

Each reference is checked twice: the oracle must still reproduce the frozen
value, and the library must match it exactly.
"""

import sympy as sp

import oracles as o
from helpers import scalar, series, to_sympy

from fedosov_lab.analysis import compute_P_k
from fedosov_lab.fedosov import extract_star_table, star
from fedosov_lab.geometry import GeometryData, symplectize
from fedosov_lab.scalar import Scalar
from fedosov_lab.series import GradedSeries
from fedosov_lab.weyl import PoissonMatrix, moyal_mul

PI = [[0, 1], [-1, 0]]

FROZEN_Y1SQ_Y2SQ = o.y1**2 * o.y2**2 - 2 * sp.I * o.h * o.y1 * o.y2 - o.h**2 / 2

FROZEN_FLAT_TABLE = {
    (0, (0, 0), (0, 0)): sp.Integer(1),
    (1, (1, 0), (0, 1)): -sp.I / 2,
    (1, (0, 1), (1, 0)): sp.I / 2,
    (2, (2, 0), (0, 2)): sp.Rational(-1, 8),
    (2, (1, 1), (1, 1)): sp.Rational(1, 4),
    (2, (0, 2), (2, 0)): sp.Rational(-1, 8),
    (3, (3, 0), (0, 3)): sp.I / 48,
    (3, (2, 1), (1, 2)): -sp.I / 16,
    (3, (1, 2), (2, 1)): sp.I / 16,
    (3, (0, 3), (3, 0)): -sp.I / 48,
}

_R = sp.Rational
FROZEN_CURVED_CHRISTOFFEL = {
    (1, 1, 1): _R(2, 3) * o.x2 - _R(2, 3) * o.x1 * o.x2**2,
    (1, 1, 2): _R(1, 3) * o.x1 - _R(1, 3) * o.x1**2 * o.x2,
    (1, 2, 1): _R(1, 3) * o.x1 - _R(1, 3) * o.x1**2 * o.x2,
    (1, 2, 2): sp.Integer(0),
    (2, 1, 1): sp.Integer(0),
    (2, 1, 2): _R(1, 3) * o.x2 - _R(1, 3) * o.x1 * o.x2**2,
    (2, 2, 1): _R(1, 3) * o.x2 - _R(1, 3) * o.x1 * o.x2**2,
    (2, 2, 2): _R(2, 3) * o.x1 - _R(2, 3) * o.x1**2 * o.x2,
}

FROZEN_SHEAR_P2 = {
    ((0, 1), (0, 2)): sp.Integer(-1),
    ((0, 2), (0, 1)): sp.Integer(-1),
    ((0, 2), (2, 0)): sp.Integer(1),
    ((1, 1), (1, 1)): sp.Integer(-2),
    ((2, 0), (0, 2)): sp.Integer(1),
}

FROZEN_PERTURBED_C = o.h / 2 + o.h**2 / 8 + o.h**3 / 16

FROZEN_X1X2_SQUARED = o.x1**2 * o.x2**2 + o.h**2 / 4


def test_moyal_y_monomials():
    assert sp.expand(o.moyal(o.y1**2, o.y2**2, PI, 3) - FROZEN_Y1SQ_Y2SQ) == 0
    got = moyal_mul(series("y1^2"), series("y2^2"), PoissonMatrix.standard(2))
    assert to_sympy(got) == sp.expand(FROZEN_Y1SQ_Y2SQ)


def test_moyal_random_polynomials_match_brute_force():
    pairs = [("y1 + 2 y2^3", "y1^2*y2 - 3 y2"), ("(1/2) y1^3*y2", "y1*y2^2 + i y1"), ("y2^4", "y1^4")]
    pi = PoissonMatrix.standard(2)
    for fs, gs in pairs:
        f, g = series(fs), series(gs)
        ref = o.moyal(to_sympy(f), to_sympy(g), PI, 4)
        assert to_sympy(moyal_mul(f, g, pi)) == ref


def test_flat_table_matches_frozen_oracle(flat):
    assert o.moyal_table(PI, 3, 3) == FROZEN_FLAT_TABLE
    t = extract_star_table(flat, 3, 3)
    assert t.entries == {k: scalar(v) for k, v in FROZEN_FLAT_TABLE.items()}


def test_symplectized_connection_jets():
    ref = o.symplectized_christoffel(1 + o.x1 * o.x2, 3)
    assert {k: sp.expand(v - FROZEN_CURVED_CHRISTOFFEL[k]) for k, v in ref.items()} == {k: 0 for k in ref}
    g = symplectize({(1, 2): series("1 + x1*x2")}, {}, 2, 3)
    for key, v in FROZEN_CURVED_CHRISTOFFEL.items():
        assert to_sympy(g.christoffel[key]) == sp.expand(v)


def test_principal_symbol_shear():
    gamma = {(2, 1, 1): 1 + o.x2}
    assert o.principal_symbol(gamma, PI, 2, 2) == FROZEN_SHEAR_P2
    g = GeometryData(2, {(1, 2): 1}, {(2, 1, 1): series("1 + x2")}, 4)
    assert compute_P_k(g, 2, 2) == {k: scalar(v) for k, v in FROZEN_SHEAR_P2.items()}


def test_principal_symbol_k3_shear():
    gamma = {(2, 1, 1): 1 + o.x2}
    ref = o.principal_symbol(gamma, PI, 3, 3)
    g = GeometryData(2, {(1, 2): 1}, {(2, 1, 1): series("1 + x2")}, 5)
    assert compute_P_k(g, 3, 3) == {k: scalar(v) for k, v in ref.items()}


def test_perturbed_gamma_closed_form(perturbed):
    assert sp.expand(o.perturbed_gamma_coefficient(3) - FROZEN_PERTURBED_C) == 0
    c = sp.Poly(FROZEN_PERTURBED_C, o.h)
    b = perturbed.bounds
    expect = GradedSeries.zero(2, b)
    for (m,), v in c.terms():
        cs = scalar(v)
        expect = expect + GradedSeries.monomial(2, beta=(1, 0), m=m, J=(2,), coeff=cs, bounds=b)
        expect = expect - GradedSeries.monomial(2, beta=(0, 1), m=m, J=(1,), coeff=cs, bounds=b)
    assert perturbed.gamma == expect


def test_lagrangian_counterexample_value(flat):
    assert o.moyal(o.x1 * o.x2, o.x1 * o.x2, PI, 3, o.X) == sp.expand(FROZEN_X1X2_SQUARED)
    got = star(flat, series("x1*x2"), series("x1*x2"))
    assert to_sympy(got) == sp.expand(FROZEN_X1X2_SQUARED)
    restricted = got.filter_terms(lambda a, b, m, J: a[1] == 0)
    assert restricted.terms() == {((0, 0), (0, 0), 2, ()): Scalar(1, 0) / 4}


def test_flat_star_matches_moyal_on_cubics(flat):
    for fs, gs in [("x1^2*x2", "x1*x2^2"), ("x1^3 - x2", "x2^3 + 2 x1*x2")]:
        f, g = series(fs), series(gs)
        assert to_sympy(star(flat, f, g)) == o.moyal(to_sympy(f), to_sympy(g), PI, 3, o.X)
