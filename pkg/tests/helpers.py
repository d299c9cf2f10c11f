"""Conversions between library series and sympy expressions."""

from fractions import Fraction

import sympy as sp

from fedosov_lab.expr import parse_expr
from fedosov_lab.scalar import Scalar

from oracles import h, x1, x2, y1, y2

_X = (x1, x2)
_Y = (y1, y2)


def to_sympy(s):
    """Function part (no dx) of a 2-dimensional series as a sympy expression."""
    out = 0
    for (alpha, beta, m, J), c in s.terms().items():
        assert not J
        term = sp.Rational(c.re.numerator, c.re.denominator) + sp.I * sp.Rational(c.im.numerator, c.im.denominator)
        for v, e in zip(_X, alpha):
            term *= v**e
        for v, e in zip(_Y, beta):
            term *= v**e
        out += term * h**m
    return sp.expand(out)


def scalar(v):
    """sympy Gaussian rational -> Scalar."""
    re, im = sp.Rational(sp.re(v)), sp.Rational(sp.im(v))
    return Scalar(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))


def series(src, dim=2):
    return parse_expr(src, dim).to_series(dim)
