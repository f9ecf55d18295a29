"""Schroedinger, mixed and Fock models of the Weil representation.

A ``GaussPoly`` p stands for the Schwartz function p(x) exp(-pi sum x_rj^2).
Variables are (row r, column j) with 1 <= r <= m and 1 <= j <= n.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from .liegeom import LieElement, ParabolicData
from .polys import Monomial, Poly, mono_degree, mono_exponent, mono_mul, mono_without, sum_polys
from .scalars import I, INV_SQRT2, ONE, PI, TWO_PI_I, Scalar

INV_2PI = (2 * PI).inv()
INV_2PI_I = TWO_PI_I.inv()


class GaussPoly(Poly):
    """Polynomial part of p(x) * exp(-pi tr(x, x)) in the x_rj variables."""

    __slots__ = ()
    _name = "x"


class FockPoly(Poly):
    """Fock model polynomial in the z_rj variables."""

    __slots__ = ()
    _name = "z"


class OutOfScope(ValueError):
    """The computation leaves the range where the model formulas are available."""


@dataclass(frozen=True)
class DeltaMatrix:
    """m x n matrix of nonnegative integers indexing the Hermite functions phi_Delta."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in row) for row in self.entries)
        if any(x < 0 for row in rows for x in row):
            raise ValueError("Delta entries must be nonnegative")
        if len({len(r) for r in rows}) > 1:
            raise ValueError("ragged Delta matrix")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def zero(cls, m: int, n: int) -> "DeltaMatrix":
        return cls(tuple((0,) * n for _ in range(m)))

    @classmethod
    def from_dict(cls, m: int, n: int, values: Mapping[tuple, int]) -> "DeltaMatrix":
        rows = [[0] * n for _ in range(m)]
        for (r, j), d in values.items():
            rows[r - 1][j - 1] += d
        return cls(tuple(map(tuple, rows)))

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def __getitem__(self, rj: tuple) -> int:
        r, j = rj
        return self.entries[r - 1][j - 1]

    def nonzero(self) -> dict:
        return {(r + 1, j + 1): d for r, row in enumerate(self.entries) for j, d in enumerate(row) if d}

    def monomial(self) -> Monomial:
        return tuple(sorted(self.nonzero().items()))

    def _rows(self, rows) -> dict:
        return {rj: d for rj, d in self.nonzero().items() if rj[0] in rows}

    def plus(self, p: int) -> dict:
        return self._rows(range(1, p + 1))

    def minus(self, p: int) -> dict:
        return self._rows(range(p + 1, self.m + 1))

    def inner(self, ell: int) -> dict:
        """Entries in the middle rows l+1 .. m-l (the W rows)."""
        return self._rows(range(ell + 1, self.m - ell + 1))

    def outer(self, ell: int) -> dict:
        """Entries in the first and last l rows (the E and E' rows)."""
        return {rj: d for rj, d in self.nonzero().items() if rj[0] <= ell or rj[0] > self.m - ell}


@lru_cache(maxsize=None)
def _hermite_coeffs(k: int) -> tuple:
    # H_{k+1}(y) = 2y H_k(y) - (1/2pi) H_k'(y)
    coeffs = {0: ONE}
    for _ in range(k):
        nxt: dict = {}
        for e, c in coeffs.items():
            nxt[e + 1] = nxt.get(e + 1, Scalar()) + c * 2
            if e:
                nxt[e - 1] = nxt.get(e - 1, Scalar()) - c * INV_2PI * e
        coeffs = {e: c for e, c in nxt.items() if c}
    return tuple(sorted(coeffs.items()))


def hermite(k: int, var: tuple = (1, 1), cls=Poly) -> Poly:
    """The scaled Hermite polynomial (2pi)^(-k/2) H_k(sqrt(2pi) y) in the variable var."""
    if k < 0:
        raise ValueError("hermite degree must be nonnegative")
    var = tuple(var)
    return cls({((var, e),) if e else (): c for e, c in _hermite_coeffs(k)})


def raise_op(phi: GaussPoly, r: int, j: int) -> GaussPoly:
    """(x_rj - (1/2pi) d/dx_rj) applied to phi * Gaussian, divided by the Gaussian."""
    var = (r, j)
    # d/dx (p e^{-pi x^2}) = (p' - 2 pi x p) e^{-pi x^2}
    return phi.times_variable(var) * 2 - phi.derivative(var).scale(INV_2PI)


def phi_delta(delta: DeltaMatrix | Mapping[tuple, int]) -> GaussPoly:
    entries = delta.nonzero() if isinstance(delta, DeltaMatrix) else {k: v for k, v in delta.items() if v}
    out = GaussPoly.constant(1)
    for var, d in sorted(entries.items()):
        out = out * hermite(d, var, GaussPoly)
    return out


def phi_delta_from_monomial(mono: Monomial) -> GaussPoly:
    return phi_delta(dict(mono))


class DeltaCombination(dict):
    """Finite linear combination of phi_Delta, keyed by the monomial form of Delta."""

    def to_gauss(self) -> GaussPoly:
        return sum_polys(GaussPoly, (phi_delta_from_monomial(k).scale(c) for k, c in self.items() if c))


def delta_expansion(phi: GaussPoly) -> DeltaCombination:
    """Rewrite phi in the phi_Delta basis (triangular: phi_Delta = 2^|Delta| x^Delta + lower)."""
    rest = phi
    out = DeltaCombination()
    while rest:
        lead = max(rest.terms, key=lambda k: (mono_degree(k), k))
        c = rest.terms[lead] * Scalar.coerce(2) ** (-mono_degree(lead))
        out[lead] = out.get(lead, Scalar()) + c
        rest = rest - phi_delta_from_monomial(lead).scale(c)
    return DeltaCombination({k: c for k, c in out.items() if c})


def _fock_factor(mono: Monomial, p: int) -> tuple[Monomial, Scalar]:
    coeff = ONE
    for (r, j), d in mono:
        coeff = coeff * (INV_2PI_I ** d if r <= p else (-INV_2PI_I) ** d)
    return mono, coeff


def to_fock(phi, p: int) -> FockPoly:
    """Intertwiner phi_Delta -> prod (z_aj/2 pi i)^d prod (-z_muj/2 pi i)^d; rows > p are negative."""
    if isinstance(phi, DeltaCombination):
        combo = phi
    elif isinstance(phi, GaussPoly):
        combo = delta_expansion(phi)
    else:
        raise TypeError("to_fock needs a GaussPoly or a DeltaCombination")
    out: dict = {}
    for mono, c in combo.items():
        k, f = _fock_factor(mono, p)
        out[k] = out.get(k, Scalar()) + c * f
    return FockPoly(out)


def fock_restrict(F: FockPoly, P: ParabolicData) -> FockPoly:
    """Drop monomials with a z_aj, a <= l; keep the rest as polynomials in the W rows."""
    ell, m = P.ell, P.m

    def keep(mono):
        for (r, _), _e in mono:
            if r > m - ell:
                raise OutOfScope(f"negative-index variable in discarded row {r}: mixed-sign restriction")
        if any(r <= ell for (r, _), _e in mono):
            return None
        return mono

    return F.map_monomials(keep)


@lru_cache(maxsize=None)
def _ft_moment(k: int) -> tuple:
    """P_k with FT(y^k e^{-pi y^2}) = P_k(xi) e^{-pi xi^2}: P_{k+1} = (i/2pi) P_k' - i xi P_k."""
    coeffs = {0: ONE}
    i_over_2pi = I * INV_2PI
    for _ in range(k):
        nxt: dict = {}
        for e, c in coeffs.items():
            if e:
                nxt[e - 1] = nxt.get(e - 1, Scalar()) + c * i_over_2pi * e
            nxt[e + 1] = nxt.get(e + 1, Scalar()) - c * I
        coeffs = {e: c for e, c in nxt.items() if c}
    return tuple(sorted(coeffs.items()))


def fourier_in(phi: GaussPoly, var: tuple) -> GaussPoly:
    """Fourier transform in the single variable var (kernel e^{-2 pi i y xi}); xi keeps the name var."""
    var = tuple(var)
    out: dict = {}
    for mono, c in phi.terms.items():
        k = mono_exponent(mono, var)
        rest = mono_without(mono, var)
        for e, pc in _ft_moment(k):
            nk = mono_mul(rest, ((var, e),)) if e else rest
            s = out.get(nk, Scalar()) + c * pc
            if s:
                out[nk] = s
            else:
                out.pop(nk, None)
    return GaussPoly._raw(out)


def fourier_1d(f: GaussPoly) -> GaussPoly:
    vs = f.variables()
    if len(vs) > 1:
        raise ValueError("fourier_1d expects a one-variable function")
    return fourier_in(f, vs[0]) if vs else f


def reflect(f: GaussPoly) -> GaussPoly:
    """f(-y) in every variable."""
    return GaussPoly({k: (-c if mono_degree(k) % 2 else c) for k, c in f.terms.items()})


def witt_coordinates(phi: GaussPoly, P: ParabolicData) -> GaussPoly:
    """Rewrite phi in Witt coordinates.

    With x = sum_i y_i u_i + x_W + sum_i y'_i u'_i, the row-r variable (r <= l) becomes y_r and
    the row-(m+1-r) variable becomes y'_r:  x_r = -(y_r + y'_r)/sqrt2, x_{m+1-r} = (y'_r - y_r)/sqrt2.
    """
    ell, m = P.ell, P.m
    mapping = {}
    for (r, j) in phi.variables():
        if r <= ell:
            y, yp = (r, j), (m + 1 - r, j)
            mapping[(r, j)] = (GaussPoly.variable(y) + GaussPoly.variable(yp)).scale(-INV_SQRT2)
        elif r > m - ell:
            i = m + 1 - r
            y, yp = (i, j), (r, j)
            mapping[(r, j)] = (GaussPoly.variable(yp) - GaussPoly.variable(y)).scale(INV_SQRT2)
    return phi.substitute(mapping) if mapping else phi


def mixed_transform(phi: GaussPoly, P: ParabolicData) -> GaussPoly:
    """Partial Fourier transform over E^n.

    The result is polynomial x exp(-pi(|xi|^2 + |x_W|^2 + |u'|^2)) with xi_r in row r (r <= l),
    x_W in rows l+1..m-l and u'_r in row m+1-r.
    """
    psi = witt_coordinates(phi, P)
    for var in psi.variables():
        if var[0] <= P.ell:
            psi = fourier_in(psi, var)
    return psi


def weil_restrict(phi: GaussPoly, P: ParabolicData) -> GaussPoly:
    """r_P: the mixed model function evaluated at xi = 0, u' = 0."""
    ell, m = P.ell, P.m
    return mixed_transform(phi, P).set_zero(lambda v: v[0] <= ell or v[0] > m - ell)


def lie_action(X: LieElement, phi: GaussPoly, n: int) -> GaussPoly:
    """(X.phi)(x) = -sum_r (X x)_r d phi/dx_r, including the Gaussian's derivative."""
    mat = X.matrix()  # X e_s = sum_r M[r, s] e_r
    two_pi = PI * 2
    out = []
    for (r, s), c in mat.items():
        for j in range(1, n + 1):
            # -M_rs x_sj (d_rj p - 2 pi x_rj p)
            dp = phi.derivative((r, j)) - phi.times_variable((r, j)).scale(two_pi)
            out.append(dp.times_variable((s, j)).scale(-c))
    return sum_polys(GaussPoly, out)


def evaluate_gauss(phi: GaussPoly, point: Mapping[tuple, float]) -> complex:
    """Numerical value of phi * exp(-pi sum x^2) at a point given by {(r, j): x_rj}."""
    sq = sum(float(v) ** 2 for v in point.values())
    return phi.evaluate({k: complex(v) for k, v in point.items()}) * np.exp(-np.pi * sq)


# ---------------------------------------------------------------- mixed model actions

@dataclass(frozen=True)
class GroupElement:
    """kind: "N_Q" (m x m matrix), "SL_E" (l x l), "a" (tuple t), "SO_W" ((m-2l) x (m-2l)),
    "m_prime" (n x n), "n_prime" (symmetric n x n)."""

    kind: str
    data: object


@dataclass
class MixedFunction:
    """A numerical function of (xi, x_W, u') with xi, u' of shape (l, n) and x_W of shape (m-2l, n)."""

    P: ParabolicData
    n: int
    func: Callable = field(repr=False)

    def __call__(self, xi, xw, up) -> complex:
        return self.func(np.asarray(xi, float), np.asarray(xw, float), np.asarray(up, float))


def mixed_function(phi: GaussPoly, P: ParabolicData, n: int) -> MixedFunction:
    psi = mixed_transform(phi, P)
    ell, m = P.ell, P.m

    def f(xi, xw, up):
        point = {}
        for j in range(1, n + 1):
            for r in range(1, ell + 1):
                point[(r, j)] = xi[r - 1, j - 1]
                point[(m + 1 - r, j)] = up[r - 1, j - 1]
            for k, r in enumerate(range(ell + 1, m - ell + 1)):
                point[(r, j)] = xw[k, j - 1]
        return evaluate_gauss(psi, point)

    return MixedFunction(P, n, f)


def _w_gram(P: ParabolicData, xw) -> np.ndarray:
    signs = np.array([P.space.sign(a) for a in P.w_indices()], float)
    return xw.T @ (signs[:, None] * xw)


def _witt_matrix(P: ParabolicData) -> np.ndarray:
    """Standard coordinates of the Witt basis as columns: u_1..u_l, the W basis, u'_1..u'_l."""
    m, ell = P.m, P.ell
    s = 1 / np.sqrt(2)
    cols = []
    for i in range(1, ell + 1):
        v = np.zeros(m)
        v[i - 1] = v[m - i] = -s
        cols.append(v)
    for a in P.w_indices():
        v = np.zeros(m)
        v[a - 1] = 1
        cols.append(v)
    for i in range(1, ell + 1):
        v = np.zeros(m)
        v[i - 1], v[m - i] = -s, s
        cols.append(v)
    return np.array(cols).T


def mixed_action(g: GroupElement, F: MixedFunction) -> MixedFunction:
    """The action of g on the mixed model, one formula per family."""
    P, n = F.P, F.n
    ell, m = P.ell, P.m
    J = np.eye(ell)[::-1]
    kind, data = g.kind, g.data
    if kind == "a":
        t = np.asarray(data, float)
        tt = np.diag(t[::-1])
        scale = abs(np.prod(t)) ** n
        return MixedFunction(P, n, lambda xi, xw, up: scale * F(tt @ xi, xw, tt @ up))
    if kind == "SL_E":
        gm = np.asarray(data, float)
        gt = J @ np.linalg.inv(gm).T @ J
        return MixedFunction(P, n, lambda xi, xw, up: F(gt @ xi, xw, gt @ up))
    if kind == "SO_W":
        hinv = np.linalg.inv(np.asarray(data, float))
        return MixedFunction(P, n, lambda xi, xw, up: F(xi, hinv @ xw, up))
    if kind == "m_prime":
        a = np.asarray(data, float)
        det = np.linalg.det(a)
        if det <= 0:
            raise ValueError("m'(a) needs det a > 0")
        astar = np.linalg.inv(a).T
        c = det ** (m / 2 - ell)
        return MixedFunction(P, n, lambda xi, xw, up: c * F(xi @ astar, xw @ a, up @ a))
    if kind == "n_prime":
        b = np.asarray(data, float)
        if not np.allclose(b, b.T):
            raise ValueError("n'(b) needs symmetric b")
        return MixedFunction(
            P, n, lambda xi, xw, up: cmath.exp(2j * np.pi * np.trace(b @ _w_gram(P, xw)) / 2)
            * F(xi - up @ b, xw, up))
    if kind == "N_Q":
        nm = np.asarray(data, float)
        B = _witt_matrix(P)
        gram = np.diag([P.space.sign(a) for a in range(1, m + 1)]).astype(float)
        dim_w = m - 2 * ell

        def f(xi, xw, up):
            wpart = B[:, ell:ell + dim_w] @ xw
            upart = B[:, ell + dim_w:] @ up
            xivec = B[:, ell + dim_w:] @ xi
            phase = np.trace((nm @ (wpart + upart)).T @ gram @ xivec)
            # W-coordinates of n(u'): pair with the W basis (orthonormal up to sign)
            nu_ = nm @ upart
            signs = np.array([P.space.sign(a) for a in P.w_indices()], float)
            w_coords = signs[:, None] * (B[:, ell:ell + dim_w].T @ gram @ nu_)
            return cmath.exp(2j * np.pi * phase) * F(xi, xw + w_coords, up)

        return MixedFunction(P, n, f)
    raise ValueError(f"unsupported group element {kind!r}")


def schrodinger_action(g: GroupElement, phi: GaussPoly, P: ParabolicData, n: int) -> Callable:
    """phi(g^{-1} x) as a numerical function of standard coordinates (an m x n array)."""
    m, ell = P.m, P.ell
    B = _witt_matrix(P)
    if g.kind == "a":
        t = np.asarray(g.data, float)
        # a(t) scales u_i by t_{l+1-i} and u'_i by its inverse
        diag = np.ones(m)
        for i in range(1, ell + 1):
            diag[i - 1] = t[ell - i]
            diag[m - 2 * ell + ell + i - 1] = 1 / t[ell - i]
        gmat = B @ np.diag(diag) @ np.linalg.inv(B)
    elif g.kind == "SO_W":
        h = np.asarray(g.data, float)
        inner = np.eye(m)
        inner[ell:m - ell, ell:m - ell] = h
        gmat = B @ inner @ np.linalg.inv(B)
    else:
        raise ValueError(f"Schroedinger action not modelled for {g.kind!r}")
    ginv = np.linalg.inv(gmat)

    def f(x):
        y = ginv @ np.asarray(x, float)
        return evaluate_gauss(phi, {(r + 1, j + 1): y[r, j] for r in range(m) for j in range(n)})

    return f


__all__ = [
    "GaussPoly", "FockPoly", "DeltaMatrix", "DeltaCombination", "OutOfScope",
    "hermite", "raise_op", "phi_delta", "delta_expansion", "to_fock", "fock_restrict",
    "fourier_in", "fourier_1d", "reflect", "witt_coordinates", "mixed_transform", "weil_restrict",
    "lie_action", "evaluate_gauss", "GroupElement", "MixedFunction", "mixed_function",
    "mixed_action", "schrodinger_action", "INV_2PI", "INV_2PI_I",
]
