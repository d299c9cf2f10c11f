"""Truncated graded formal series in x, y, hbar and dx.

A term is ``c * x^alpha * y^beta * hbar^m * dx^J`` with ``J`` a strictly
increasing tuple of (1-based) indices.  Three gradings matter:

* filtration degree ``2m + |beta|`` (y has degree 1, hbar degree 2);
* x-order ``|alpha|``;
* weight ``|alpha| + 2m + |beta|``.

:class:`Bounds` caps weight (``jet``), filtration degree (``degree``) and the
hbar power (``hbar``).  Capping the weight rather than ``|alpha|`` alone is
what keeps every stored coefficient exact: the recursions used downstream
trade one x-derivative for one extra y, so they never move information
across a weight level from above.

Internally each term is a single packed integer key and a ``gmpy2.mpq``
coefficient.  The imaginary unit is one more packed exponent (0 or 1,
reduced with ``i^2 = -1``), so Gaussian coefficients never need complex
arithmetic in the inner loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterable, Iterator, Mapping

import gmpy2

from .scalar import Scalar, as_scalar

__all__ = [
    "NO_LIMIT",
    "Bounds",
    "Layout",
    "GradedSeries",
    "ZeroSeriesError",
    "mi_abs",
    "mi_factorial",
    "multi_indices",
    "unit_index",
    "series_add",
    "series_mul",
    "partial_x",
    "partial_y",
    "truncate",
    "filtration_degree",
    "eval_at_origin",
    "x_var",
    "y_var",
    "hbar",
    "dx",
]

NO_LIMIT = 1 << 40
FIELD_BITS = 8
_FIELD_MASK = (1 << FIELD_BITS) - 1
_ZERO = gmpy2.mpq(0)
_MPQ = type(gmpy2.mpq())


class ZeroSeriesError(ValueError):
    """Raised for quantities that are undefined on the zero series."""


def _sat(v: int) -> int:
    return NO_LIMIT if v >= NO_LIMIT // 2 else v


@dataclass(frozen=True)
class Bounds:
    jet: int = NO_LIMIT
    degree: int = NO_LIMIT
    hbar: int = NO_LIMIT

    @classmethod
    def for_order(cls, order: int) -> "Bounds":
        degree = 2 * order + 2
        return cls(jet=degree + 2, degree=degree, hbar=order)

    def admits(self, xdeg: int, deg: int, m: int) -> bool:
        return xdeg + deg <= self.jet and deg <= self.degree and m <= self.hbar

    def meet(self, other: "Bounds") -> "Bounds":
        return Bounds(min(self.jet, other.jet), min(self.degree, other.degree), min(self.hbar, other.hbar))

    def shifted(self, jet: int = 0, degree: int = 0, hbar: int = 0) -> "Bounds":
        def sh(v, d):
            return v if v >= NO_LIMIT // 2 else v + d

        return Bounds(sh(self.jet, jet), sh(self.degree, degree), sh(self.hbar, hbar))

    def __str__(self):
        def f(v):
            return "inf" if v >= NO_LIMIT // 2 else str(v)

        return f"(J={f(self.jet)}, D={f(self.degree)}, K={f(self.hbar)})"


# ---------------------------------------------------------------- multi-indices


def mi_abs(alpha: Iterable[int]) -> int:
    return sum(alpha)


def mi_factorial(alpha: Iterable[int]) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out


def unit_index(dim: int, i: int) -> tuple[int, ...]:
    """Multi-index e_i (1-based i)."""
    return tuple(1 if k == i - 1 else 0 for k in range(dim))


def multi_indices(dim: int, max_order: int, min_order: int = 0) -> list[tuple[int, ...]]:
    """All multi-indices with ``min_order <= |alpha| <= max_order``, graded order."""
    out = []
    for order in range(min_order, max_order + 1):
        level = []
        for combo in combinations_with_replacement(range(dim), order):
            alpha = [0] * dim
            for c in combo:
                alpha[c] += 1
            level.append(tuple(alpha))
        out.extend(sorted(level, reverse=True))
    return out


# ---------------------------------------------------------------- packed keys


class Layout:
    """Bit layout of packed term keys for one dimension.

    Fields (low to high): i-power, hbar power, y exponents, x exponents,
    then the dx bitmask.
    """

    _cache: dict[int, "Layout"] = {}

    def __init__(self, dim: int):
        if dim <= 0 or dim % 2:
            raise ValueError(f"dimension must be a positive even integer, got {dim}")
        self.dim = dim
        b = FIELD_BITS
        self.m_unit = 1 << b
        self.y_units = tuple(1 << (b * (2 + k)) for k in range(dim))
        self.x_units = tuple(1 << (b * (2 + dim + k)) for k in range(dim))
        self.j_shift = b * (2 + 2 * dim)
        self.low_mask = (1 << self.j_shift) - 1
        self.y_mask = sum(_FIELD_MASK << (b * (2 + k)) for k in range(dim))
        self.x_mask = sum(_FIELD_MASK << (b * (2 + dim + k)) for k in range(dim))
        self._grades: dict[int, tuple] = {}
        n = 1 << dim
        self.wedge_sign = [[_wedge_sign(j1, j2) for j2 in range(n)] for j1 in range(n)]

    @classmethod
    def of(cls, dim: int) -> "Layout":
        lay = cls._cache.get(dim)
        if lay is None:
            lay = cls._cache[dim] = cls(dim)
        return lay

    def pack(self, alpha=None, beta=None, m: int = 0, jmask: int = 0, ipow: int = 0) -> int:
        key = ipow + m * self.m_unit
        if beta is not None:
            for u, e in zip(self.y_units, beta):
                key += e * u
        if alpha is not None:
            for u, e in zip(self.x_units, alpha):
                key += e * u
        return key | (jmask << self.j_shift)

    def unpack(self, key: int):
        b = FIELD_BITS
        d = self.dim
        ipow = key & _FIELD_MASK
        m = (key >> b) & _FIELD_MASK
        beta = tuple((key >> (b * (2 + k))) & _FIELD_MASK for k in range(d))
        alpha = tuple((key >> (b * (2 + d + k))) & _FIELD_MASK for k in range(d))
        jmask = key >> self.j_shift
        return alpha, beta, m, jmask, ipow

    def grade(self, key: int) -> tuple[int, int, int, int, int]:
        """(x-order, filtration degree, hbar power, form degree, weight)."""
        g = self._grades.get(key)
        if g is None:
            alpha, beta, m, jmask, _ = self.unpack(key)
            xdeg = sum(alpha)
            deg = 2 * m + sum(beta)
            g = (xdeg, deg, m, bin(jmask).count("1"), xdeg + deg)
            self._grades[key] = g
        return g


def _wedge_sign(j1: int, j2: int) -> int:
    if j1 & j2:
        return 0
    inversions = 0
    for a in _bits(j1):
        for b in _bits(j2):
            if a > b:
                inversions += 1
    return -1 if inversions % 2 else 1


def _bits(mask: int) -> list[int]:
    out, k = [], 0
    while mask:
        if mask & 1:
            out.append(k)
        mask >>= 1
        k += 1
    return out


def jmask_of(J: Iterable[int], dim: int) -> tuple[int, int]:
    """Canonical mask and sign of ``dx^{j1} ^ ... ^ dx^{jq}`` (1-based, any order)."""
    J = list(J)
    for j in J:
        if not 1 <= j <= dim:
            raise IndexError(f"dx index {j} out of range 1..{dim}")
    if len(set(J)) != len(J):
        return 0, 0
    inversions = sum(1 for a in range(len(J)) for b in range(a + 1, len(J)) if J[a] > J[b])
    mask = 0
    for j in J:
        mask |= 1 << (j - 1)
    return mask, (-1 if inversions % 2 else 1)


def mask_indices(mask: int) -> tuple[int, ...]:
    return tuple(k + 1 for k in _bits(mask))


# ---------------------------------------------------------------- the series type


class GradedSeries:
    """An immutable truncated element of ``W (x) Lambda`` over a chart of dimension ``dim``.

    ``terms`` maps ``(alpha, beta, m, J)`` to a scalar; anything outside
    ``bounds`` is dropped on construction.
    """

    __slots__ = ("dim", "bounds", "_c", "_lay")

    def __init__(self, dim: int, terms: Mapping | None = None, bounds: Bounds = Bounds()):
        lay = Layout.of(dim)
        acc: dict[int, gmpy2.mpq] = {}
        for (alpha, beta, m, J), value in (terms or {}).items():
            alpha = tuple(alpha) if alpha is not None else (0,) * dim
            beta = tuple(beta) if beta is not None else (0,) * dim
            if len(alpha) != dim or len(beta) != dim:
                raise ValueError("multi-index length does not match dimension")
            if min(alpha + beta, default=0) < 0 or m < 0:
                raise ValueError("negative exponent")
            jmask, sign = jmask_of(J, dim)
            if sign == 0:
                continue
            s = as_scalar(value)
            base = lay.pack(alpha, beta, m, jmask)
            for k, part in ((base, s._re), (base + 1, s._im)):
                if part != 0:
                    acc[k] = acc.get(k, _ZERO) + (part if sign > 0 else -part)
        self.dim = dim
        self.bounds = bounds
        self._lay = lay
        self._c = _clean(lay, acc, bounds)

    @classmethod
    def _wrap(cls, lay: Layout, coeffs: dict, bounds: Bounds, clean: bool = True) -> "GradedSeries":
        obj = object.__new__(cls)
        obj.dim = lay.dim
        obj.bounds = bounds
        obj._lay = lay
        obj._c = _clean(lay, coeffs, bounds) if clean else coeffs
        return obj

    # -- constructors
    @classmethod
    def zero(cls, dim: int, bounds: Bounds = Bounds()) -> "GradedSeries":
        return cls._wrap(Layout.of(dim), {}, bounds, clean=False)

    @classmethod
    def constant(cls, dim: int, value, bounds: Bounds = Bounds()) -> "GradedSeries":
        return cls(dim, {(None, None, 0, ()): value}, bounds)

    @classmethod
    def monomial(cls, dim, alpha=None, beta=None, m=0, J=(), coeff=1, bounds: Bounds = Bounds()):
        return cls(dim, {(alpha, beta, m, tuple(J)): coeff}, bounds)

    # -- inspection
    def __len__(self):
        return len(self._c)

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self):
        return bool(self._c)

    def terms(self) -> dict[tuple, Scalar]:
        """Canonically ordered ``{(alpha, beta, m, J): Scalar}``."""
        lay = self._lay
        merged: dict[int, list] = {}
        for key, c in self._c.items():
            slot = merged.setdefault(key & ~1, [_ZERO, _ZERO])
            slot[key & 1] = c
        out = {}
        for key in sorted(merged, key=lambda k: _sort_key(lay, k)):
            alpha, beta, m, jmask, _ = lay.unpack(key)
            re, im = merged[key]
            out[(alpha, beta, m, mask_indices(jmask))] = Scalar(re, im)
        return out

    def coefficient(self, alpha=None, beta=None, m: int = 0, J=()) -> Scalar:
        lay = self._lay
        alpha = alpha if alpha is not None else (0,) * self.dim
        beta = beta if beta is not None else (0,) * self.dim
        jmask, sign = jmask_of(J, self.dim)
        if sign == 0:
            return Scalar(0)
        key = lay.pack(alpha, beta, m, jmask)
        s = Scalar(self._c.get(key, _ZERO), self._c.get(key + 1, _ZERO))
        return s if sign > 0 else -s

    def form_degrees(self) -> set[int]:
        return {self._lay.grade(k)[3] for k in self._c}

    def max_y_degree(self) -> int:
        lay = self._lay
        return max((lay.grade(k)[1] - 2 * lay.grade(k)[2] for k in self._c), default=0)

    def is_real(self) -> bool:
        return all(not (k & 1) for k in self._c)

    # -- arithmetic
    def _check(self, other: "GradedSeries"):
        if not isinstance(other, GradedSeries):
            raise TypeError(f"expected GradedSeries, got {type(other).__name__}")
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other):
        if not isinstance(other, GradedSeries):
            other = GradedSeries.constant(self.dim, other)
        self._check(other)
        acc = dict(self._c)
        for k, c in other._c.items():
            acc[k] = acc.get(k, _ZERO) + c
        return GradedSeries._wrap(self._lay, acc, self.bounds.meet(other.bounds))

    __radd__ = __add__

    def __neg__(self):
        return GradedSeries._wrap(self._lay, {k: -c for k, c in self._c.items()}, self.bounds, clean=False)

    def __sub__(self, other):
        if not isinstance(other, GradedSeries):
            other = GradedSeries.constant(self.dim, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GradedSeries):
            return series_mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        if isinstance(other, GradedSeries):
            return series_mul(other, self)
        return self.scale(other)

    def scale(self, value) -> "GradedSeries":
        s = as_scalar(value)
        acc: dict[int, gmpy2.mpq] = {}
        if s._re != 0:
            for k, c in self._c.items():
                acc[k] = c * s._re
        if s._im != 0:
            for k, c in self._c.items():
                if k & 1:
                    k2, c2 = k - 1, -c * s._im
                else:
                    k2, c2 = k + 1, c * s._im
                acc[k2] = acc.get(k2, _ZERO) + c2
        return GradedSeries._wrap(self._lay, acc, self.bounds)

    def __truediv__(self, value):
        return self.scale(Scalar(1) / as_scalar(value))

    def __eq__(self, other):
        """Equality up to the shared truncation."""
        if not isinstance(other, GradedSeries):
            if isinstance(other, (int, Scalar)) or isinstance(other, _MPQ):
                other = GradedSeries.constant(self.dim, other)
            else:
                return NotImplemented
        if other.dim != self.dim:
            return False
        b = self.bounds.meet(other.bounds)
        return truncate(self, b)._c == truncate(other, b)._c

    def __hash__(self):
        return hash((self.dim, frozenset(self._c.items())))

    def identical(self, other: "GradedSeries") -> bool:
        """Same terms and the same bounds (bitwise identity)."""
        return self.dim == other.dim and self.bounds == other.bounds and self._c == other._c

    # -- selection helpers
    def select(self, pred) -> "GradedSeries":
        """Keep terms whose grade tuple ``(xdeg, deg, m, q, weight)`` satisfies ``pred``."""
        g = self._lay.grade
        return GradedSeries._wrap(self._lay, {k: c for k, c in self._c.items() if pred(g(k))}, self.bounds, clean=False)

    def filter_terms(self, pred) -> "GradedSeries":
        """Keep terms for which ``pred(alpha, beta, m, J)`` is true."""
        lay = self._lay
        out = {}
        for k, c in self._c.items():
            alpha, beta, m, jmask, _ = lay.unpack(k)
            if pred(alpha, beta, m, mask_indices(jmask)):
                out[k] = c
        return GradedSeries._wrap(lay, out, self.bounds, clean=False)

    def degree_part(self, degree: int) -> "GradedSeries":
        return self.select(lambda g: g[1] == degree)

    def hbar_part(self, m: int) -> "GradedSeries":
        return self.select(lambda g: g[2] == m)

    def form_part(self, q: int) -> "GradedSeries":
        return self.select(lambda g: g[3] == q)

    def y_free(self) -> "GradedSeries":
        """Terms with beta = 0 (the ``y = 0`` restriction, keeping dx factors)."""
        ym = self._lay.y_mask
        return GradedSeries._wrap(self._lay, {k: c for k, c in self._c.items() if not k & ym}, self.bounds, clean=False)

    def at_origin(self) -> "GradedSeries":
        """Terms with alpha = 0 (evaluation at the basepoint x = 0)."""
        xm = self._lay.x_mask
        return GradedSeries._wrap(self._lay, {k: c for k, c in self._c.items() if not k & xm}, self.bounds, clean=False)

    def with_bounds(self, bounds: Bounds) -> "GradedSeries":
        return truncate(self, bounds)

    def truncate(self, bounds: Bounds) -> "GradedSeries":
        return truncate(self, bounds)

    def partial_x(self, i: int) -> "GradedSeries":
        return partial_x(self, i)

    def partial_y(self, i: int) -> "GradedSeries":
        return partial_y(self, i)

    def filtration_degree(self) -> int:
        return filtration_degree(self)

    def __repr__(self):
        n = len(self.terms())
        return f"<GradedSeries dim={self.dim} terms={n} bounds={self.bounds}>"

    def __str__(self):
        from .report import format_series

        return format_series(self)


def _sort_key(lay: Layout, key: int):
    alpha, beta, m, jmask, ipow = lay.unpack(key)
    J = mask_indices(jmask)
    return (len(J), J, m, sum(beta), tuple(-b for b in beta), sum(alpha), tuple(-a for a in alpha), ipow)


def _clean(lay: Layout, acc: dict, bounds: Bounds) -> dict:
    g = lay.grade
    J, D, K = bounds.jet, bounds.degree, bounds.hbar
    out = {}
    for k, c in acc.items():
        if c == 0:
            continue
        xdeg, deg, m, _, w = g(k)
        if w <= J and deg <= D and m <= K:
            out[k] = c
    return out


# ---------------------------------------------------------------- basic operations


def series_add(a: GradedSeries, b: GradedSeries) -> GradedSeries:
    return a + b


def _sorted_terms(lay: Layout, coeffs: dict) -> list[tuple]:
    g = lay.grade
    js = lay.j_shift
    rows = []
    for k, c in coeffs.items():
        xdeg, deg, m, _, w = g(k)
        rows.append((w, deg, m, k, c, k >> js))
    rows.sort(key=lambda r: r[0])
    return rows


def series_mul(a: GradedSeries, b: GradedSeries, bounds: Bounds | None = None) -> GradedSeries:
    """Commutative product in x, y, hbar with the wedge product on dx factors.

    The result is truncated to ``bounds`` (default: the shared bounds of the
    inputs) and further to the levels at which it is provably exact.
    """
    a._check(b)
    lay = a._lay
    cap = bounds if bounds is not None else a.bounds.meet(b.bounds)
    out = cap.meet(_product_exactness(a, b))
    return GradedSeries._wrap(lay, _mul_raw(lay, a._c, b._c, out), out)


def _lowest(a: GradedSeries) -> tuple[int, int, int]:
    g = a._lay.grade
    w = d = m = NO_LIMIT
    for k in a._c:
        _, deg, mm, _, ww = g(k)
        w, d, m = min(w, ww), min(d, deg), min(m, mm)
    return w, d, m


def _product_exactness(a: GradedSeries, b: GradedSeries) -> Bounds:
    wa, da, ma = _lowest(a)
    wb, db, mb = _lowest(b)
    A, B = a.bounds, b.bounds
    return Bounds(
        _sat(min(A.jet + wb, B.jet + wa)),
        _sat(min(A.degree + db, B.degree + da)),
        _sat(min(A.hbar + mb, B.hbar + ma)),
    )


def _mul_raw(lay: Layout, ca: dict, cb: dict, bounds: Bounds) -> dict:
    J, D, K = bounds.jet, bounds.degree, bounds.hbar
    low, js, wsign = lay.low_mask, lay.j_shift, lay.wedge_sign
    rows_b = _sorted_terms(lay, cb)
    acc: dict[int, gmpy2.mpq] = {}
    get = acc.get
    for wa, da, ma, ka, va, ja in _sorted_terms(lay, ca):
        wl, dl, ml = J - wa, D - da, K - ma
        if wl < 0:
            break
        kal = ka & low
        row = wsign[ja]
        for wb, db, mb, kb, vb, jb in rows_b:
            if wb > wl:
                break
            if db > dl or mb > ml:
                continue
            s = row[jb]
            if not s:
                continue
            key = kal + (kb & low)
            c = va * vb
            if key & 2:
                key -= 2
                c = -c
            if s < 0:
                c = -c
            key |= (ja | jb) << js
            acc[key] = get(key, _ZERO) + c
    return acc


def partial_x(a: GradedSeries, i: int) -> GradedSeries:
    """Formal d/dx^i; the result is exact one weight level lower."""
    if not 1 <= i <= a.dim:
        raise IndexError(f"x index {i} out of range 1..{a.dim}")
    lay = a._lay
    unit = lay.x_units[i - 1]
    shift = FIELD_BITS * (2 + a.dim + i - 1)
    acc = {}
    for k, c in a._c.items():
        e = (k >> shift) & _FIELD_MASK
        if e:
            acc[k - unit] = c * e
    return GradedSeries._wrap(lay, acc, a.bounds.shifted(jet=-1), clean=False)


def partial_y(a: GradedSeries, i: int) -> GradedSeries:
    """Formal d/dy^i; lowers weight and filtration degree by one."""
    if not 1 <= i <= a.dim:
        raise IndexError(f"y index {i} out of range 1..{a.dim}")
    lay = a._lay
    unit = lay.y_units[i - 1]
    shift = FIELD_BITS * (2 + i - 1)
    acc = {}
    for k, c in a._c.items():
        e = (k >> shift) & _FIELD_MASK
        if e:
            acc[k - unit] = c * e
    return GradedSeries._wrap(lay, acc, a.bounds.shifted(jet=-1, degree=-1), clean=False)


def truncate(a: GradedSeries, bounds: Bounds) -> GradedSeries:
    b = a.bounds.meet(bounds)
    if b == a.bounds:
        return a
    return GradedSeries._wrap(a._lay, a._c, b)


def filtration_degree(a: GradedSeries) -> int:
    if not a._c:
        raise ZeroSeriesError("filtration degree of the zero series is undefined")
    g = a._lay.grade
    return min(g(k)[1] for k in a._c)


def eval_at_origin(a: GradedSeries) -> dict[tuple[int, tuple[int, ...]], Scalar]:
    """Coefficients with alpha = 0 and beta = 0, keyed by ``(m, J)``."""
    out = {}
    for (alpha, beta, m, J), c in a.terms().items():
        if not any(alpha) and not any(beta):
            out[(m, J)] = c
    return out


# ---------------------------------------------------------------- generators


def x_var(dim: int, i: int, bounds: Bounds = Bounds()) -> GradedSeries:
    return GradedSeries.monomial(dim, alpha=unit_index(dim, i), bounds=bounds)


def y_var(dim: int, i: int, bounds: Bounds = Bounds()) -> GradedSeries:
    return GradedSeries.monomial(dim, beta=unit_index(dim, i), bounds=bounds)


def hbar(dim: int, bounds: Bounds = Bounds()) -> GradedSeries:
    return GradedSeries.monomial(dim, m=1, bounds=bounds)


def dx(dim: int, i: int, bounds: Bounds = Bounds()) -> GradedSeries:
    return GradedSeries.monomial(dim, J=(i,), bounds=bounds)


def iter_keys(a: GradedSeries) -> Iterator[tuple[int, gmpy2.mpq]]:
    return iter(a._c.items())
