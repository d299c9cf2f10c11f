"""Brute-force sympy reference computations, independent of the library."""

from __future__ import annotations

import itertools
import math

import sympy as sp

x1, x2, y1, y2, h = sp.symbols("x1 x2 y1 y2 hbar")
X = (x1, x2)
Y = (y1, y2)


def moyal(f, g, pi, order: int, vars_=Y):
    """``sum_k (-i h/2)^k / k! pi^{i1 j1}..pi^{ik jk} d_I f d_J g`` through ``h^order``."""
    n = len(vars_)
    out = f * g
    for k in range(1, order + 1):
        acc = 0
        for I in itertools.product(range(n), repeat=k):
            for J in itertools.product(range(n), repeat=k):
                c = sp.Integer(1)
                for a, b in zip(I, J):
                    c *= pi[a][b]
                if c == 0:
                    continue
                df = sp.diff(f, *[vars_[a] for a in I])
                dg = sp.diff(g, *[vars_[b] for b in J])
                acc += c * df * dg
        out += (-sp.I * h / 2) ** k / math.factorial(k) * acc
    return sp.expand(out)


def moyal_table(pi, order: int, max_order: int) -> dict:
    """``(k, a, b) -> coefficient`` of the Moyal product on ``x^a/a!, x^b/b!`` at 0."""
    idx = [a for n in range(max_order + 1) for a in itertools.product(range(n + 1), repeat=2) if sum(a) == n]
    out = {}
    for a in idx:
        fa = x1 ** a[0] * x2 ** a[1] / (math.factorial(a[0]) * math.factorial(a[1]))
        for b in idx:
            fb = x1 ** b[0] * x2 ** b[1] / (math.factorial(b[0]) * math.factorial(b[1]))
            p = moyal(fa, fb, pi, order, X).subs({x1: 0, x2: 0})
            poly = sp.Poly(p, h)
            for (k,), c in poly.terms():
                if c != 0:
                    out[(k, a, b)] = sp.nsimplify(c)
    return out


def symplectized_christoffel(w12, order: int) -> dict:
    """Taylor jets of ``Gamma^p_{xy}`` for omega_12 = w12 and the zero probe connection.

    ``S^p_{xy} = pi^{pz} (1/3)[d_x omega_{yz} + d_y omega_{xz}]`` with
    ``pi^{ik} omega_{jk} = delta^i_j``.
    """
    om = sp.Matrix([[0, w12], [-w12, 0]])
    pi = (om.T).inv()
    out = {}
    for p, a, b in itertools.product(range(2), repeat=3):
        s = 0
        for z in range(2):
            s += pi[p, z] * (sp.diff(om[b, z], X[a]) + sp.diff(om[a, z], X[b])) / 3
        out[(p + 1, a + 1, b + 1)] = taylor(sp.simplify(s), order)
    return out


def taylor(expr, order: int):
    """Total-degree Taylor polynomial of ``expr`` at 0 in x1, x2."""
    t = sp.symbols("t")
    ser = sp.series(expr.subs({x1: t * x1, x2: t * x2}), t, 0, order + 1).removeO()
    return sp.expand(ser.subs(t, 1))


def sym_covariant(u, gamma: dict, k: int) -> dict:
    """Symmetrized k-th covariant derivative ``(nabla^k u)_{i1..ik}`` as functions of x."""
    T = {(): u}
    for r in range(1, k + 1):
        new = {}
        for I in itertools.product(range(1, 3), repeat=r):
            i0, rest = I[0], I[1:]
            v = sp.diff(T[rest], X[i0 - 1])
            for pos, ia in enumerate(rest):
                for m in range(1, 3):
                    g = gamma.get((m, i0, ia), 0)
                    if g != 0:
                        mod = rest[:pos] + (m,) + rest[pos + 1 :]
                        v -= g * T[mod]
            new[I] = v
        sym = {}
        for I in new:
            perms = set(itertools.permutations(I))
            sym[I] = sp.expand(sum(new[P] for P in perms) / len(perms))
        T = sym
    return T


def principal_symbol(gamma: dict, pi, k: int, max_order: int) -> dict:
    """``P^k`` at 0: ``pi^{i1 j1}..pi^{ik jk} (nabla^k u)_I (nabla^k v)_J`` on probes ``x^a/a!``."""
    idx = [a for n in range(max_order + 1) for a in itertools.product(range(n + 1), repeat=2) if sum(a) == n]
    lifts = {}
    for a in idx:
        u = x1 ** a[0] * x2 ** a[1] / (math.factorial(a[0]) * math.factorial(a[1]))
        T = sym_covariant(u, gamma, k)
        lifts[a] = {I: v.subs({x1: 0, x2: 0}) for I, v in T.items()}
    out = {}
    for a in idx:
        for b in idx:
            s = 0
            for I in itertools.product(range(1, 3), repeat=k):
                for J in itertools.product(range(1, 3), repeat=k):
                    c = sp.Integer(1)
                    for i, j in zip(I, J):
                        c *= pi[i - 1][j - 1]
                    if c != 0:
                        s += c * lifts[a][I] * lifts[b][J]
            s = sp.nsimplify(s)
            if s != 0:
                out[(a, b)] = s
    return out


def perturbed_gamma_coefficient(order: int):
    """For Omega = omega + h dx1^dx2 on the flat plane, gamma = c(h) (y1 dx2 - y2 dx1).

    The fixed point reduces to ``c = (h + c^2)/2``, whose normalized root is
    ``1 - sqrt(1 - h)``.
    """
    return sp.series(1 - sp.sqrt(1 - h), h, 0, order + 1).removeO()
