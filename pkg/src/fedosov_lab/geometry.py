"""Jet-level symplectic geometry at the basepoint x = 0.

Index conventions (all 1-based in the public API):

* ``omega[(i, j)]`` is the x-jet of ``omega_ij``;
* ``pi`` satisfies ``pi^{ik} omega_{jk} = delta^i_j``, so ``omega_12 = 1``
  gives ``pi^{12} = 1`` and ``{f, g} = pi^{ij} d_i f d_j g``;
* ``christoffel[(m, i, j)]`` is ``Gamma^m_{ij}`` with ``nabla_i d_j = Gamma^m_{ij} d_m``;
* ``riemann[(m, j, k, l)]`` is ``R^m_{jkl}``;
* indices are lowered on the second slot of omega:
  ``Gamma_{ijk} = omega_{mi} Gamma^m_{jk}`` and ``R_{ijkl} = omega_{mi} R^m_{jkl}``.
  With this pi convention that is the choice under which the identities
  below hold with the usual signs.

The covariant derivative on Weyl-bundle elements is

    d a = dx^k ^ (d/dx^k a - Gamma^m_{kj} y^j d/dy^m a),

which is valid for x-dependent omega.  For constant omega it coincides with
``d a + (i/hbar)[Gamma_hat, a]``, ``Gamma_hat = 1/2 Gamma_{ijk} y^i y^j dx^k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping

from .scalar import Scalar, as_scalar
from .series import NO_LIMIT, Bounds, GradedSeries, series_mul, unit_index
from .weyl import PoissonMatrix, SingularMatrixError, scalar_det

__all__ = [
    "GeometryError",
    "NotAntisymmetricError",
    "NotClosedError",
    "SingularFormError",
    "InsufficientJetError",
    "NotIsotropicError",
    "CheckResult",
    "GeometryData",
    "LagrangianSpec",
    "invert_omega",
    "covariant_derivative",
    "symplectize",
    "curvature",
    "check_torsion_free",
    "check_symplectic",
    "check_closed",
    "check_totally_geodesic",
    "lagrangian_membership",
    "restrict_to",
]


class GeometryError(ValueError):
    """Base class for invalid geometric input."""


class NotAntisymmetricError(GeometryError):
    pass


class NotClosedError(GeometryError):
    pass


class SingularFormError(GeometryError, SingularMatrixError):
    pass


class InsufficientJetError(GeometryError):
    pass


class NotIsotropicError(GeometryError):
    pass


@dataclass(frozen=True)
class CheckResult:
    """Outcome of an exact predicate; ``witness`` names the first offending entry."""

    ok: bool
    witness: tuple | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def _xjet(dim: int, value, jet: int, what: str) -> GradedSeries:
    s = value if isinstance(value, GradedSeries) else GradedSeries.constant(dim, value)
    if s.dim != dim:
        raise ValueError(f"{what}: dimension mismatch")
    if s.max_y_degree() or s.form_degrees() - {0} or any(m for (_, _, m, _) in s.terms()):
        raise ValueError(f"{what}: expected a function of x only")
    if s.bounds.jet < jet:
        raise InsufficientJetError(f"{what}: supplied to x-order {s.bounds.jet}, need {jet}")
    return s.truncate(Bounds(jet=jet))


def _zero(dim: int, jet: int) -> GradedSeries:
    return GradedSeries.zero(dim, Bounds(jet=jet))


def _omega_full(dim: int, omega: Mapping, jet: int) -> dict[tuple[int, int], GradedSeries]:
    given = {}
    for (i, j), v in omega.items():
        if not (1 <= i <= dim and 1 <= j <= dim):
            raise IndexError(f"omega index ({i},{j}) out of range 1..{dim}")
        given[(i, j)] = _xjet(dim, v, jet, f"omega[{i},{j}]")
    full = {}
    for i, j in product(range(1, dim + 1), repeat=2):
        a, b = given.get((i, j)), given.get((j, i))
        if i == j:
            if a is not None and not a.is_zero():
                raise NotAntisymmetricError(f"omega[{i},{i}] must vanish")
            full[(i, j)] = _zero(dim, jet)
        elif a is not None and b is not None:
            if a != -b:
                raise NotAntisymmetricError(f"omega[{i},{j}] != -omega[{j},{i}]")
            full[(i, j)] = a
        elif a is not None:
            full[(i, j)] = a
        elif b is not None:
            full[(i, j)] = -b
        else:
            full[(i, j)] = _zero(dim, jet)
    return full


def _const_inverse(m: list[list[Scalar]]) -> list[list[Scalar]]:
    n = len(m)
    aug = [[as_scalar(v) for v in row] + [Scalar(int(r == c)) for c in range(n)] for r, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not aug[r][col].is_zero()), None)
        if piv is None:
            raise SingularFormError("omega is singular at x = 0")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = Scalar(1) / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [aug[r][c] - f * aug[col][c] for c in range(2 * n)]
    return [row[n:] for row in aug]


def _matmul(a, b, dim):
    out = []
    for i in range(dim):
        row = []
        for j in range(dim):
            acc = GradedSeries.zero(a[0][0].dim, a[0][0].bounds.meet(b[0][0].bounds))
            for k in range(dim):
                if a[i][k] and b[k][j]:
                    acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def invert_omega(omega: Mapping, dim: int, jet: int | None = None) -> PoissonMatrix:
    """Neumann-series inversion of ``omega(x)`` around x = 0.

    Returns ``pi`` with ``pi^{ik} omega_{jk} = delta^i_j``, exact to x-order
    ``jet`` (default: the order to which omega is supplied).
    """
    if jet is None:
        jet = min((v.bounds.jet for v in omega.values() if isinstance(v, GradedSeries)), default=NO_LIMIT)
    full = _omega_full(dim, omega, jet)
    c0 = [[full[(i, j)].coefficient() for j in range(1, dim + 1)] for i in range(1, dim + 1)]
    if scalar_det(c0).is_zero():
        raise SingularFormError("omega is singular at x = 0")
    w0inv = _const_inverse(c0)
    b = Bounds(jet=jet)
    W0inv = [[GradedSeries.constant(dim, v, b) for v in row] for row in w0inv]
    # omega = omega0 (1 + N) with N = omega0^{-1} omega1
    W1 = [[full[(i, j)] - c0[i - 1][j - 1] for j in range(1, dim + 1)] for i in range(1, dim + 1)]
    N = _matmul(W0inv, W1, dim)
    negN = [[-v for v in row] for row in N]
    term = W0inv
    inv = W0inv
    while True:
        term = _matmul(negN, term, dim)
        if all(v.is_zero() for row in term for v in row):
            break
        if jet >= NO_LIMIT:
            raise InsufficientJetError("non-constant omega needs a finite jet order")
        inv = [[inv[i][j] + term[i][j] for j in range(dim)] for i in range(dim)]
    # pi = -(omega^{-1})
    ent = {(i + 1, j + 1): -inv[i][j] for i in range(dim) for j in range(dim) if i < j}
    return PoissonMatrix(dim, ent)


class GeometryData:
    """Symplectic form, connection and derived jets at the basepoint.

    ``jet`` is the x-order to which omega, pi and Gamma are exact; curvature
    jets are exact one order lower.
    """

    def __init__(self, dim: int, omega: Mapping, christoffel: Mapping, jet: int, symplectic: bool | None = None):
        if dim <= 0 or dim % 2:
            raise ValueError(f"dimension must be a positive even integer, got {dim}")
        self.dim = dim
        self.jet = jet
        self.omega = _omega_full(dim, omega, jet)
        self.pi = invert_omega(self.omega, dim, jet)
        self.christoffel = _christoffel_full(dim, christoffel, jet)
        rng = range(1, dim + 1)
        self.lowered = {
            (i, j, k): _sum(dim, jet, (self.omega[(m, i)] * self.christoffel[(m, j, k)] for m in rng))
            for i, j, k in product(rng, repeat=3)
        }
        wb = Bounds(jet=jet + 2)
        gh = GradedSeries.zero(dim, wb)
        for (i, j, k), c in self.lowered.items():
            if c:
                gh = gh + series_mul(c, GradedSeries.monomial(dim, beta=_add(unit_index(dim, i), unit_index(dim, j)), J=(k,)), wb)
        self.gamma_hat = gh.scale(Scalar(1, 0) / 2)
        self._G = []
        for m in rng:
            g = GradedSeries.zero(dim, Bounds(jet=jet + 1))
            for k, j in product(rng, repeat=2):
                c = self.christoffel[(m, k, j)]
                if c:
                    g = g + series_mul(c, GradedSeries.monomial(dim, beta=unit_index(dim, j), J=(k,)), g.bounds)
            self._G.append(g)
        self.riemann = _riemann(dim, self.christoffel)
        self.riemann_lowered = {
            (i, j, k, l): _sum(dim, jet - 1, (self.omega[(m, i)] * self.riemann[(m, j, k, l)] for m in rng))
            for i, j, k, l in product(rng, repeat=4)
        }
        rb = Bounds(jet=jet + 1)
        R = GradedSeries.zero(dim, rb)
        for (i, j, k, l), c in self.riemann_lowered.items():
            if c and k != l:
                R = R + series_mul(c, GradedSeries.monomial(dim, beta=_add(unit_index(dim, i), unit_index(dim, j)), J=(k, l)), rb)
        self.R = R.scale(Scalar(1) / 4)
        self._symplectic = symplectic

    @classmethod
    def flat(cls, dim: int, jet: int = 8) -> "GeometryData":
        n = dim // 2
        return cls(dim, {(i, i + n): 1 for i in range(1, n + 1)}, {}, jet)

    @property
    def bounds(self) -> Bounds:
        return Bounds(jet=self.jet)

    def is_flat(self) -> bool:
        return all(c.is_zero() for c in self.christoffel.values())

    def __repr__(self):
        return f"<GeometryData dim={self.dim} jet={self.jet} flat={self.is_flat()}>"


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _sum(dim, jet, items) -> GradedSeries:
    out = GradedSeries.zero(dim, Bounds(jet=jet))
    for s in items:
        if s:
            out = out + s
    return out


def _christoffel_full(dim: int, christoffel: Mapping, jet: int) -> dict:
    given = {}
    for (m, i, j), v in christoffel.items():
        if not all(1 <= t <= dim for t in (m, i, j)):
            raise IndexError(f"Gamma index ({m},{i},{j}) out of range 1..{dim}")
        given[(m, i, j)] = _xjet(dim, v, jet, f"Gamma[{m},{i},{j}]")
    full = {}
    for m, i, j in product(range(1, dim + 1), repeat=3):
        v = given.get((m, i, j))
        if v is None:
            v = given.get((m, j, i))
        full[(m, i, j)] = v if v is not None else _zero(dim, jet)
    return full


def _riemann(dim: int, G: dict) -> dict:
    rng = range(1, dim + 1)
    out = {}
    for m, j, k, l in product(rng, repeat=4):
        if k == l:
            out[(m, j, k, l)] = _zero(dim, G[(1, 1, 1)].bounds.jet - 1)
            continue
        if k > l:
            out[(m, j, k, l)] = -out[(m, j, l, k)]
            continue
        r = G[(m, l, j)].partial_x(k) - G[(m, k, j)].partial_x(l)
        for s in rng:
            r = r + G[(m, k, s)] * G[(s, l, j)] - G[(m, l, s)] * G[(s, k, j)]
        out[(m, j, k, l)] = r
    return out


# ---------------------------------------------------------------- operations


def covariant_derivative(a: GradedSeries, g: GeometryData) -> GradedSeries:
    """Induced covariant derivative on W (x) Lambda; raises form degree by one."""
    dim = a.dim
    cap = a.bounds.shifted(jet=-1)
    out = GradedSeries.zero(dim, cap)
    for k in range(1, dim + 1):
        d = a.partial_x(k)
        if d:
            out = out + series_mul(GradedSeries.monomial(dim, J=(k,)), d, cap)
    for m in range(1, dim + 1):
        G = g._G[m - 1]
        if not G:
            continue
        d = a.partial_y(m)
        if d:
            out = out - series_mul(G, d, cap)
    return out


def symplectize(omega: Mapping, gamma_tilde: Mapping, dim: int, jet: int) -> GeometryData:
    """Correct a torsion-free connection so that it preserves omega.

    ``Gamma = Gamma_tilde + S`` with
    ``omega(S(X,Y), Z) = 1/3 [(nabla~_X omega)(Y,Z) + (nabla~_Y omega)(X,Z)]``.
    Inputs are needed one x-order beyond ``jet``.
    """
    base = GeometryData(dim, omega, gamma_tilde, jet + 1, symplectic=False)
    tf = check_torsion_free(base)
    if not tf:
        raise GeometryError(f"probe connection has torsion at {tf.witness}")
    cl = check_closed(base)
    if not cl:
        raise NotClosedError(f"omega is not closed: {cl.detail}")
    rng = range(1, dim + 1)
    nab = _nabla_omega(base)
    third = Scalar(1) / 3
    new = {}
    for p, x, y in product(rng, repeat=3):
        acc = _zero(dim, jet)
        for z in rng:
            pz = base.pi.entry(p, z)
            if not pz:
                continue
            n = (nab[(x, y, z)] + nab[(y, x, z)]).scale(third)
            if n:
                acc = acc + pz * n
        new[(p, x, y)] = (base.christoffel[(p, x, y)] + acc).truncate(Bounds(jet=jet))
    om = {k: v.truncate(Bounds(jet=jet)) for k, v in base.omega.items()}
    return GeometryData(dim, om, new, jet, symplectic=True)


def _nabla_omega(g: GeometryData) -> dict:
    """``(nabla_k omega)_{ij}`` keyed by ``(k, i, j)``."""
    rng = range(1, g.dim + 1)
    out = {}
    for k, i, j in product(rng, repeat=3):
        r = g.omega[(i, j)].partial_x(k)
        for m in rng:
            c1, c2 = g.christoffel[(m, k, i)], g.christoffel[(m, k, j)]
            if c1:
                r = r - c1 * g.omega[(m, j)]
            if c2:
                r = r - c2 * g.omega[(i, m)]
        out[(k, i, j)] = r
    return out


def curvature(g: GeometryData) -> GradedSeries:
    """The element ``R = 1/4 R_{ijkl} y^i y^j dx^k ^ dx^l``."""
    return g.R


def check_torsion_free(g: GeometryData) -> CheckResult:
    rng = range(1, g.dim + 1)
    for k, i, j in product(rng, repeat=3):
        if i < j and g.christoffel[(k, i, j)] != g.christoffel[(k, j, i)]:
            return CheckResult(False, (k, i, j), f"Gamma^{k}_{i}{j} != Gamma^{k}_{j}{i}")
    return CheckResult(True)


def check_symplectic(g: GeometryData) -> CheckResult:
    """``nabla omega = 0`` up to the jet order."""
    for (k, i, j), v in _nabla_omega(g).items():
        if i < j and v:
            term = next(iter(v.terms()))
            return CheckResult(False, (k, i, j, term[0]), f"(nabla_{k} omega)_{i}{j} has term {term[0]}: {v.terms()[term]}")
    return CheckResult(True)


def check_closed(g_or_omega, dim: int | None = None) -> CheckResult:
    """``d omega = 0``: cyclic sum of ``d_k omega_ij`` vanishes."""
    if isinstance(g_or_omega, GeometryData):
        om, dim = g_or_omega.omega, g_or_omega.dim
    else:
        om = g_or_omega
    rng = range(1, dim + 1)

    def w(i, j):
        v = om.get((i, j))
        if v is None:
            v = om.get((j, i))
            return -v if v is not None else None
        return v

    for i, j, k in product(rng, repeat=3):
        if not i < j < k:
            continue
        parts = [(w(i, j), k), (w(j, k), i), (w(k, i), j)]
        acc = None
        for v, d in parts:
            if v is None:
                continue
            t = v.partial_x(d)
            acc = t if acc is None else acc + t
        if acc is not None and acc:
            return CheckResult(False, (i, j, k), f"d omega has nonzero component ({i},{j},{k})")
    return CheckResult(True)


# ---------------------------------------------------------------- lagrangians


@dataclass(frozen=True)
class LagrangianSpec:
    """Coordinate submanifold ``{x^c = 0 : c not in S}`` with tangent indices ``S``."""

    dim: int
    tangent: tuple[int, ...]
    normal: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        S = tuple(sorted(set(self.tangent)))
        if len(S) != len(self.tangent):
            raise ValueError("tangent indices must be distinct")
        if len(S) != self.dim // 2:
            raise NotIsotropicError(f"a lagrangian needs {self.dim // 2} tangent indices, got {len(S)}")
        if not all(1 <= s <= self.dim for s in S):
            raise IndexError("tangent index out of range")
        object.__setattr__(self, "tangent", S)
        object.__setattr__(self, "normal", tuple(c for c in range(1, self.dim + 1) if c not in S))

    def validate(self, g: GeometryData) -> "LagrangianSpec":
        """Raise unless omega restricted to L vanishes on tangent pairs."""
        for s in self.tangent:
            for t in self.tangent:
                if s < t and not restrict_to(g.omega[(s, t)], self).is_zero():
                    raise NotIsotropicError(f"omega[{s},{t}] does not vanish on L")
        return self


def restrict_to(a: GradedSeries, L: LagrangianSpec) -> GradedSeries:
    """Set normal x's and y's to zero and drop dx factors with normal indices."""
    nrm = [c - 1 for c in L.normal]
    nset = set(L.normal)
    return a.filter_terms(lambda al, be, m, J: not any(al[c] or be[c] for c in nrm) and not nset.intersection(J))


def lagrangian_membership(a: GradedSeries, L: LagrangianSpec) -> bool:
    """True iff ``a`` vanishes after restriction to ``L`` (membership in (W (x) Lambda)_L)."""
    if a.dim != L.dim:
        raise ValueError("dimension mismatch")
    return restrict_to(a, L).is_zero()


def check_totally_geodesic(g: GeometryData, L: LagrangianSpec) -> CheckResult:
    """``Gamma^c_{st}`` vanishes on L for tangent s, t and normal c."""
    for c in L.normal:
        for s in L.tangent:
            for t in L.tangent:
                if not restrict_to(g.christoffel[(c, s, t)], L).is_zero():
                    return CheckResult(False, (c, s, t), f"Gamma^{c}_{s}{t} does not vanish on L")
    return CheckResult(True)
