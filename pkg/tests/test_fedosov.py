"""Abelian connection, quantization map and extracted star products."""

import pytest

from helpers import series
from fedosov_lab.fedosov import (
    WeylCurvatureSpec,
    connection_apply,
    extract_star_table,
    project,
    quantize,
    solve_gamma,
    star,
    star_bracket,
    weyl_curvature,
)
from fedosov_lab.geometry import GeometryData, InsufficientJetError, NotClosedError
from fedosov_lab.scalar import Scalar
from fedosov_lab.series import Bounds
from fedosov_lab.weyl import ad_bracket, delta_inv


def test_flat_gamma_vanishes(flat):
    assert flat.gamma.is_zero()
    assert flat.normalized() and flat.curvature_ok()
    assert flat.min_degree() is None


def test_curved_gamma_leading_term(curved):
    g = curved.geometry
    assert curved.min_degree() == 3
    lead = delta_inv(g.R).truncate(curved.bounds)
    assert curved.gamma.degree_part(3) == lead.degree_part(3)
    assert curved.gamma.form_degrees() == {1}


def test_perturbed_gamma_first_hbar_term(perturbed):
    assert perturbed.gamma.hbar_part(1) == series("(1/2) hbar*(y1*dx2 - y2*dx1)")


def test_weyl_curvature_round_trip(flat, curved, perturbed):
    assert weyl_curvature(flat) == series("dx1*dx2")
    assert weyl_curvature(curved) == series("(1 + x1*x2)*dx1*dx2")
    assert weyl_curvature(perturbed) == series("(1 + hbar)*dx1*dx2")


def test_connection_on_functions(flat, curved):
    f = series("x1^2*x2 - x2^3")
    df = series("2 x1*x2*dx1 + x1^2*dx2 - 3 x2^2*dx2")
    assert connection_apply(flat, f) == df
    assert connection_apply(curved, f) == df
    assert connection_apply(flat, series("y1")) == series("-dx1")


def test_connection_square_is_weyl_curvature(perturbed):
    a = series("y1^2*x2 + hbar*y2 + x1*y1*y2").truncate(perturbed.bounds)
    Da2 = connection_apply(perturbed, connection_apply(perturbed, a))
    Om = perturbed.omega_prescribed
    assert Da2 + ad_bracket(Om, a, perturbed.pi, perturbed.bounds) == series("0")


def test_flat_quantization_is_taylor_lift(flat):
    assert quantize(flat, series("x1^2*x2")) == series("(x1 + y1)^2*(x2 + y2)")
    assert quantize(flat, series("1")) == series("1")


def test_curved_quantization(curved):
    t = quantize(curved, series("x1"))
    assert t.degree_part(0) + t.degree_part(1) == series("x1 + y1")
    assert connection_apply(curved, t).is_zero()
    assert quantize(curved, series("1")) == series("1")


def test_quantize_rejects_non_functions(flat):
    with pytest.raises(ValueError):
        quantize(flat, series("y1"))


def test_projection():
    assert project(series("x1*x2 + y1*x1")) == series("x1*x2")
    assert project(series("y1")).is_zero()
    assert project(series("hbar + y1*x2")) == series("hbar")


def test_section_round_trip(curved):
    f = series("x1*x2 + x2^3")
    assert project(quantize(curved, f)) == f


def test_flat_star_of_coordinates(flat):
    assert star(flat, series("x1"), series("x2")) == series("x1*x2 - (1/2) i hbar")
    assert star_bracket(flat, series("x1"), series("x2")) == series("1")


def test_first_order_table_entry(flat, curved, shear):
    e1, e2 = (1, 0), (0, 1)
    for state in (flat, curved, shear):
        t = extract_star_table(state, 1, 1)
        pi12 = state.pi.at_origin()[0][1]
        assert t.get(1, e1, e2) == Scalar(0, -1) / 2 * pi12


def test_table_product_and_parity(curved):
    t = extract_star_table(curved, 3, 3)
    assert not t.parity_violations()
    for a in t.probes():
        for b in t.probes():
            expect = Scalar(1) if a == b == (0, 0) else Scalar(0)
            assert t.get(0, a, b) == expect


def test_non_closed_perturbation_rejected():
    with pytest.raises(NotClosedError):
        WeylCurvatureSpec(4, {1: {(1, 2): series("x3", dim=4)}})


def test_solver_bounds_follow_order():
    st = solve_gamma(GeometryData.flat(2, 7), order=2)
    assert st.bounds == Bounds.for_order(2)
    with pytest.raises(InsufficientJetError):
        solve_gamma(GeometryData.flat(2, 6), order=2)


def test_gamma_even_in_hbar_for_real_data(curved, shear):
    for state in (curved, shear):
        assert all(m % 2 == 0 for (_, _, m, _) in state.gamma.terms())
        assert all(c.is_real() for c in state.gamma.terms().values())


def test_quantization_mod_W2(curved):
    f = series("x1^2 + x1*x2^2")
    t = quantize(curved, f)
    df = connection_apply(curved, f)
    low = t.degree_part(0) + t.degree_part(1)
    assert low == f + delta_inv(df)


def test_quantization_is_hbar_linear(curved):
    f, g = series("x1*x2"), series("x2^3 - x1")
    lhs = quantize(curved, f + series("hbar") * g)
    assert lhs == quantize(curved, f) + series("hbar") * quantize(curved, g)
