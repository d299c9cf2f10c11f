"""Exact Gaussian rationals ``a + b i`` with ``a, b`` in Q."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import gmpy2

__all__ = ["Scalar", "as_scalar", "to_mpq"]


def to_mpq(value) -> gmpy2.mpq:
    if isinstance(value, type(gmpy2.mpq())):
        return value
    if isinstance(value, (int, Fraction)):
        return gmpy2.mpq(value)
    if isinstance(value, str):
        return gmpy2.mpq(Fraction(value))
    if isinstance(value, Rational):
        return gmpy2.mpq(value.numerator, value.denominator)
    raise TypeError(f"not an exact rational: {value!r}")


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


class Scalar:
    """An immutable exact complex rational.

    Both parts are kept as reduced fractions with positive denominators.
    Floats are refused everywhere.
    """

    __slots__ = ("_re", "_im")

    def __init__(self, re=0, im=0):
        if isinstance(re, Scalar):
            if im != 0:
                raise TypeError("Scalar real part cannot itself be a Scalar with an imaginary part given")
            self._re, self._im = re._re, re._im
            return
        self._re = to_mpq(re)
        self._im = to_mpq(im)

    @property
    def re(self) -> Fraction:
        return _frac(self._re)

    @property
    def im(self) -> Fraction:
        return _frac(self._im)

    @classmethod
    def i(cls) -> "Scalar":
        return cls(0, 1)

    def is_zero(self) -> bool:
        return self._re == 0 and self._im == 0

    def is_real(self) -> bool:
        return self._im == 0

    def conjugate(self) -> "Scalar":
        return Scalar(self._re, -self._im)

    def __add__(self, other):
        o = as_scalar(other)
        return Scalar(self._re + o._re, self._im + o._im)

    __radd__ = __add__

    def __sub__(self, other):
        o = as_scalar(other)
        return Scalar(self._re - o._re, self._im - o._im)

    def __rsub__(self, other):
        return as_scalar(other) - self

    def __neg__(self):
        return Scalar(-self._re, -self._im)

    def __mul__(self, other):
        o = as_scalar(other)
        return Scalar(self._re * o._re - self._im * o._im, self._re * o._im + self._im * o._re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = as_scalar(other)
        den = o._re * o._re + o._im * o._im
        if den == 0:
            raise ZeroDivisionError("division by zero Scalar")
        num = self * o.conjugate()
        return Scalar(num._re / den, num._im / den)

    def __rtruediv__(self, other):
        return as_scalar(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers")
        if n < 0:
            return (Scalar(1) / self) ** (-n)
        out, base = Scalar(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        try:
            o = as_scalar(other)
        except TypeError:
            return NotImplemented
        return self._re == o._re and self._im == o._im

    def __hash__(self):
        if self._im == 0:
            return hash(self._re)
        return hash((self._re, self._im))

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        return f"Scalar({self})"

    def __str__(self):
        re, im = self._re, self._im
        if im == 0:
            return _qstr(re)
        ipart = _istr(im)
        if re == 0:
            return ipart
        if im < 0:
            return f"{_qstr(re)} - {_istr(-im)}"
        return f"{_qstr(re)} + {ipart}"


def _qstr(q) -> str:
    return str(int(q.numerator)) if q.denominator == 1 else f"{int(q.numerator)}/{int(q.denominator)}"


def _istr(q) -> str:
    if q == 1:
        return "i"
    if q == -1:
        return "-i"
    return f"{_qstr(q)} i"


def as_scalar(value) -> Scalar:
    if isinstance(value, Scalar):
        return value
    if isinstance(value, complex):
        raise TypeError("floating complex numbers are not exact")
    return Scalar(value)
