"""Fiberwise Weyl algebra: Moyal product, brackets and the delta calculus.

The Moyal product uses the (possibly x-dependent) Poisson matrix as
fiber-wise constant data:

    a * b = sum_k (-i hbar/2)^k / k! pi^{i1 j1} ... pi^{ik jk}
                 (d_y^{i1..ik} a) (d_y^{j1..jk} b)

Grouping the ordered index tuples by their multiset of pairs gives the
kernel used here: for each pair of y-monomials and each pair-count matrix
``nu`` the coefficient is ``(1/nu!) * falling factorials * pi^nu``.
Form parts are multiplied with the wedge product, so commutators are
graded: ``[a, b] = a*b - (-1)^{|a||b|} b*a``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping, Sequence

import gmpy2

from .scalar import Scalar, as_scalar
from .series import (
    NO_LIMIT,
    Bounds,
    GradedSeries,
    Layout,
    _mul_raw,
    _sat,
    _sorted_terms,
)

__all__ = [
    "PoissonMatrix",
    "SingularMatrixError",
    "moyal_mul",
    "moyal_commutator",
    "contracted_product",
    "ad_bracket",
    "poisson_bracket",
    "is_central",
    "delta_op",
    "delta_inv",
    "hodge_decompose",
    "scalar_det",
]

_ZERO = gmpy2.mpq(0)


class SingularMatrixError(ValueError):
    """The constant part of a form or bivector is not invertible."""


def scalar_det(rows: Sequence[Sequence[Scalar]]) -> Scalar:
    """Exact determinant by fraction-free elimination over Gaussian rationals."""
    m = [[as_scalar(v) for v in row] for row in rows]
    n = len(m)
    det = Scalar(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if not m[r][col].is_zero()), None)
        if piv is None:
            return Scalar(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det = det * m[col][col]
        inv = Scalar(1) / m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] * inv
            if not f.is_zero():
                m[r] = [m[r][c] - f * m[col][c] for c in range(n)]
    return det


class PoissonMatrix:
    """Antisymmetric bivector jets ``pi^{ij}(x)`` used by the fiber product.

    ``entries`` maps 1-based ``(i, j)`` with ``i < j`` to an x-jet (or a
    constant).  Lower-triangular entries follow by antisymmetry.
    """

    def __init__(self, dim: int, entries: Mapping[tuple[int, int], object]):
        lay = Layout.of(dim)
        self.dim = dim
        self._lay = lay
        full: dict[tuple[int, int], GradedSeries] = {}
        for (i, j), v in entries.items():
            if not (1 <= i <= dim and 1 <= j <= dim):
                raise IndexError(f"pi index ({i},{j}) out of range 1..{dim}")
            s = v if isinstance(v, GradedSeries) else GradedSeries.constant(dim, v)
            if s.dim != dim:
                raise ValueError("pi entry dimension mismatch")
            if s.max_y_degree() or s.form_degrees() - {0} or any(m for (_, _, m, _) in s.terms()):
                raise ValueError(f"pi^{i}{j} must be an x-jet without y, hbar or dx")
            if i == j:
                if not s.is_zero():
                    raise ValueError(f"pi^{i}{i} must vanish")
                continue
            if (j, i) in full:
                if full[(j, i)] != -s:
                    raise ValueError(f"pi is not antisymmetric at ({i},{j})")
                continue
            full[(i, j)] = s
            full[(j, i)] = -s
        self._entries = {k: v for k, v in full.items() if not v.is_zero()}
        self.jet = min((v.bounds.jet for v in self._entries.values()), default=NO_LIMIT)
        det = scalar_det(self.at_origin())
        if det.is_zero():
            raise SingularMatrixError("Poisson matrix is singular at x = 0")
        self._support = tuple(sorted((i - 1, j - 1) for (i, j) in self._entries))
        self._powers: dict[tuple, list] = {}
        self._contr: dict[tuple, list] = {}

    @classmethod
    def constant(cls, matrix: Sequence[Sequence[object]]) -> "PoissonMatrix":
        n = len(matrix)
        ent = {}
        for i in range(n):
            for j in range(n):
                if i < j:
                    ent[(i + 1, j + 1)] = matrix[i][j]
                if as_scalar(matrix[i][j]) != -as_scalar(matrix[j][i]):
                    raise ValueError(f"pi is not antisymmetric at ({i + 1},{j + 1})")
        return cls(n, ent)

    @classmethod
    def standard(cls, dim: int) -> "PoissonMatrix":
        """Darboux form: ``pi^{i, i+n} = 1``."""
        n = dim // 2
        return cls(dim, {(i, i + n): 1 for i in range(1, n + 1)})

    def entry(self, i: int, j: int) -> GradedSeries:
        return self._entries.get((i, j), GradedSeries.zero(self.dim))

    def is_constant(self) -> bool:
        return all(not v.max_y_degree() and all(not any(a) for (a, _, _, _) in v.terms()) for v in self._entries.values())

    def at_origin(self) -> list[list[Scalar]]:
        d = self.dim
        return [[self.entry(i, j).coefficient() for j in range(1, d + 1)] for i in range(1, d + 1)]

    def __repr__(self):
        return f"<PoissonMatrix dim={self.dim} support={len(self._support)}>"

    # -- kernel caches
    def _power_rows(self, nu: tuple[int, ...]) -> list:
        rows = self._powers.get(nu)
        if rows is None:
            lay = self._lay
            acc = {0: gmpy2.mpq(1)}
            b = Bounds(jet=self.jet)
            for (i, j), e in zip(self._support, nu):
                for _ in range(e):
                    acc = _mul_raw(lay, acc, self._entries[(i + 1, j + 1)]._c, b)
                    acc = {k: c for k, c in acc.items() if c != 0}
            rows = [(w, k, c) for (w, _, _, k, c, _) in _sorted_terms(lay, acc)]
            self._powers[nu] = rows
        return rows

    def _contractions(self, ya: int, yb: int, mode: str) -> list:
        ck = (ya, yb, mode)
        out = self._contr.get(ck)
        if out is not None:
            return out
        lay = self._lay
        _, ba, _, _, _ = lay.unpack(ya)
        _, bb, _, _, _ = lay.unpack(yb)
        out = []
        pairs = self._support
        nu: list[int] = []
        r = [0] * self.dim
        c = [0] * self.dim

        def emit():
            k = sum(nu)
            if mode == "contract":
                if tuple(r) != ba or tuple(c) != bb:
                    return
            elif mode != "full" and k % 2 == 0:
                return
            fac = Fraction(1)
            for e in nu:
                fac /= math.factorial(e)
            for t in range(self.dim):
                fac *= math.perm(ba[t], r[t]) * math.perm(bb[t], c[t])
            if mode in ("full", "contract"):
                fac *= Fraction(-1, 2) ** k * (1 if k % 4 < 2 else -1)
                ipow, mshift = k % 2, k
            elif mode == "comm":
                fac *= 2 * Fraction(-1, 2) ** k * (1 if k % 4 < 2 else -1)
                ipow, mshift = 1, k
            else:
                fac *= 2 * Fraction(1, 2) ** k * (1 if (k - 1) % 4 == 0 else -1)
                ipow, mshift = 0, k - 1
            ykey = ya + yb - lay.pack(beta=r) - lay.pack(beta=c)
            out.append((mshift, ykey + ipow, gmpy2.mpq(fac.numerator, fac.denominator), tuple(nu)))

        def rec(idx):
            if idx == len(pairs):
                emit()
                return
            i, j = pairs[idx]
            cap = min(ba[i] - r[i], bb[j] - c[j])
            for v in range(cap + 1):
                r[i] += v
                c[j] += v
                nu.append(v)
                rec(idx + 1)
                nu.pop()
                r[i] -= v
                c[j] -= v

        rec(0)
        self._contr[ck] = out
        return out


# ---------------------------------------------------------------- kernel


def _blocks(lay: Layout, coeffs: dict) -> dict:
    ym = lay.y_mask
    js = lay.j_shift
    low = lay.low_mask
    g = lay.grade
    blocks: dict[int, list] = {}
    for k, c in coeffs.items():
        y = k & ym
        rest = k - y
        xdeg, deg, m, _, _ = g(k)
        blk = blocks.get(y)
        if blk is None:
            blk = blocks[y] = [deg - 2 * m, []]
        blk[1].append((xdeg + 2 * m, 2 * m, m, rest & low, rest >> js, c))
    for blk in blocks.values():
        blk[1].sort(key=lambda r: r[0])
    return blocks


def _minima(lay: Layout, coeffs: dict):
    """(min weight, min degree, min hbar) overall and over terms with y."""
    g = lay.grade
    ym = lay.y_mask
    allm = [NO_LIMIT] * 3
    ym_ = [NO_LIMIT] * 3
    for k in coeffs:
        _, deg, m, _, w = g(k)
        t = (w, deg, m)
        allm = [min(a, b) for a, b in zip(allm, t)]
        if k & ym:
            ym_ = [min(a, b) for a, b in zip(ym_, t)]
    return allm, ym_


def _exact_bounds(a: GradedSeries, b: GradedSeries, pi: PoissonMatrix, mode: str) -> Bounds:
    la, lb = a._lay, b._lay
    (wa0, da0, ma0), (wa1, da1, ma1) = _minima(la, a._c)
    (wb0, db0, mb0), (wb1, db1, mb1) = _minima(lb, b._c)
    A, B = a.bounds, b.bounds
    if mode in ("full", "contract"):
        jet = min(A.jet + wb0, B.jet + wa0, pi.jet + wa1 + wb1)
        deg = min(A.degree + db0, B.degree + da0)
        hb = min(A.hbar + mb0, B.hbar + ma0)
    else:
        s = 2 if mode == "ad" else 0
        jet = min(A.jet + wb1 - s, B.jet + wa1 - s, pi.jet + wa1 + wb1 - s)
        deg = min(A.degree + db1 - s, B.degree + da1 - s)
        h = 0 if mode == "ad" else 1
        hb = min(A.hbar + mb1 + h, B.hbar + ma1 + h)
    return Bounds(_sat(jet), _sat(deg), _sat(hb))


def _weyl(a: GradedSeries, b: GradedSeries, pi: PoissonMatrix, mode: str, bounds: Bounds | None) -> GradedSeries:
    a._check(b)
    if pi.dim != a.dim:
        raise ValueError(f"dimension mismatch: series {a.dim}, pi {pi.dim}")
    lay = a._lay
    cap = bounds if bounds is not None else a.bounds.meet(b.bounds)
    out_b = cap.meet(_exact_bounds(a, b, pi, mode))
    J, D, K = out_b.jet, out_b.degree, out_b.hbar
    mu = lay.m_unit
    js = lay.j_shift
    wsign = lay.wedge_sign
    g = lay.grade
    s = 2 if mode == "ad" else 0
    A = _blocks(lay, a._c)
    B = _blocks(lay, b._c)
    acc: dict[int, gmpy2.mpq] = {}
    get = acc.get
    for ya, (pa, rows_a) in A.items():
        for yb, (pb, rows_b) in B.items():
            cons = pi._contractions(ya, yb, mode)
            if not cons:
                continue
            off = pa + pb - s
            wl, dl = J - off, D - off
            if wl < 0 or dl < 0:
                continue
            prod: dict[int, gmpy2.mpq] = {}
            pget = prod.get
            for wa, da, ma, ka, ja, va in rows_a:
                if wa > wl:
                    break
                row = wsign[ja]
                for wb, db, mb, kb, jb, vb in rows_b:
                    if wa + wb > wl:
                        break
                    if da + db > dl or ma + mb > K:
                        continue
                    sg = row[jb]
                    if not sg:
                        continue
                    key = ka + kb
                    c = va * vb
                    if key & 2:
                        key -= 2
                        c = -c
                    if sg < 0:
                        c = -c
                    key |= (ja | jb) << js
                    prod[key] = pget(key, _ZERO) + c
            rows = []
            for key, c in prod.items():
                if c:
                    gr = g(key)
                    rows.append((gr[4], gr[2], key, c))
            if not rows:
                continue
            for mshift, add, fac, nu in cons:
                ml = K - mshift
                if ml < 0:
                    continue
                prow = pi._power_rows(nu)
                add += mshift * mu
                for w, m, key, c in rows:
                    if m > ml:
                        continue
                    cc = c * fac
                    wl2 = wl - w
                    base = key + add
                    for pw, pk, pc in prow:
                        if pw > wl2:
                            break
                        kk = base + pk
                        v = cc * pc
                        ip = kk & 3
                        if ip >= 2:
                            kk -= 2
                            v = -v
                        acc[kk] = get(kk, _ZERO) + v
    return GradedSeries._wrap(lay, acc, out_b)


def moyal_mul(a: GradedSeries, b: GradedSeries, pi: PoissonMatrix, bounds: Bounds | None = None) -> GradedSeries:
    """Moyal-Weyl product, wedge on form parts, truncated to the shared bounds."""
    return _weyl(a, b, pi, "full", bounds)


def contracted_product(a: GradedSeries, b: GradedSeries, pi: PoissonMatrix, bounds: Bounds | None = None) -> GradedSeries:
    """The y-free part of ``a * b`` (only complete contractions of y's)."""
    return _weyl(a, b, pi, "contract", bounds)


def moyal_commutator(a: GradedSeries, b: GradedSeries, pi: PoissonMatrix, bounds: Bounds | None = None) -> GradedSeries:
    """Graded commutator ``a*b - (-1)^{|a||b|} b*a``."""
    return _weyl(a, b, pi, "comm", bounds)


def ad_bracket(a: GradedSeries, b: GradedSeries, pi: PoissonMatrix, bounds: Bounds | None = None) -> GradedSeries:
    """``(i/hbar) [a, b]``; its hbar-free part is the Poisson bracket in y."""
    return _weyl(a, b, pi, "ad", bounds)


def poisson_bracket(a: GradedSeries, b: GradedSeries, pi: PoissonMatrix) -> GradedSeries:
    """Fiber Poisson bracket ``pi^{ij} d_{y^i} a d_{y^j} b`` (first-order term only)."""
    out = GradedSeries.zero(a.dim, a.bounds.meet(b.bounds).shifted(jet=-2, degree=-2))
    for (i, j), e in pi._entries.items():
        out = out + e * a.partial_y(i) * b.partial_y(j)
    return out


def is_central(a: GradedSeries) -> bool:
    return all(not any(beta) for (_, beta, _, _) in a.terms())


# ---------------------------------------------------------------- delta calculus


def delta_op(a: GradedSeries) -> GradedSeries:
    """``dx^i ^ d/dy^i``: form degree +1, y-degree -1."""
    lay = a._lay
    js = lay.j_shift
    acc: dict[int, gmpy2.mpq] = {}
    for key, c in a._c.items():
        jm = key >> js
        for t in range(a.dim):
            e = (key >> (8 * (2 + t))) & 0xFF
            if not e or jm >> t & 1:
                continue
            sign = -1 if bin(jm & ((1 << t) - 1)).count("1") % 2 else 1
            nk = key - lay.y_units[t] + (1 << (js + t))
            acc[nk] = acc.get(nk, _ZERO) + (c * e if sign > 0 else -c * e)
    return GradedSeries._wrap(lay, acc, a.bounds.shifted(jet=-1, degree=-1))


def delta_inv(a: GradedSeries) -> GradedSeries:
    """``(1/(p+q)) y^i contracted with d/dx^i`` on each (p, q) piece; zero when p+q = 0."""
    lay = a._lay
    js = lay.j_shift
    g = lay.grade
    acc: dict[int, gmpy2.mpq] = {}
    for key, c in a._c.items():
        jm = key >> js
        if not jm:
            continue
        _, deg, m, q, _ = g(key)
        p = deg - 2 * m
        cf = c / (p + q)
        pos = 0
        for t in range(a.dim):
            if jm >> t & 1:
                nk = key - (1 << (js + t)) + lay.y_units[t]
                acc[nk] = acc.get(nk, _ZERO) + (-cf if pos % 2 else cf)
                pos += 1
    return GradedSeries._wrap(lay, acc, a.bounds.shifted(jet=1, degree=1))


def hodge_decompose(a: GradedSeries) -> tuple[GradedSeries, GradedSeries, GradedSeries]:
    """``(delta delta^-1 a, delta^-1 delta a, a00)`` summing exactly to ``a``."""
    dd = delta_op(delta_inv(a))
    di = delta_inv(delta_op(a))
    ym = a._lay.y_mask
    js = a._lay.j_shift
    a00 = GradedSeries._wrap(a._lay, {k: c for k, c in a._c.items() if not (k & ym) and not (k >> js)}, a.bounds, clean=False)
    b = a.bounds
    return dd.truncate(b), di.truncate(b), a00
