"""Positive definite lattice theta series with certified truncation, the W-lattice family
attached to a parabolic, nonvanishing certificates and a Poisson summation check.

Polynomials are GaussPoly in the variables (r, 1), r = 1..d, for the d lattice coordinates;
the Gaussian factor is exp(-pi t |x|^2).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp

from .liegeom import ParabolicData
from .polys import mono_degree
from .scalars import Scalar, to_complex_mp
from .weil import GaussPoly, fourier_1d


class RadiusTooSmall(ValueError):
    pass


class SearchBudgetExceeded(RuntimeError):
    pass


class NonProductDecomposition(ValueError):
    pass


def _frac_vector(v: Iterable) -> tuple:
    return tuple(Fraction(x) for x in v)


@dataclass(frozen=True)
class LatticeCoset:
    """weight * (L + h); the rows of ``basis`` generate L."""

    basis: tuple
    shift: tuple
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        rows = tuple(_frac_vector(r) for r in self.basis)
        d = len(rows)
        if any(len(r) != d for r in rows):
            raise ValueError("lattice basis must be square")
        shift = _frac_vector(self.shift) if self.shift is not None else (Fraction(0),) * d
        if len(shift) != d:
            raise ValueError("shift has the wrong dimension")
        object.__setattr__(self, "basis", rows)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "weight", Fraction(self.weight))
        if d and Matrix(rows).det() == 0:
            raise ValueError("lattice basis is singular")

    @classmethod
    def standard(cls, d: int, scale=1, shift=None, weight=1) -> "LatticeCoset":
        basis = [[Fraction(scale) if i == j else Fraction(0) for j in range(d)] for i in range(d)]
        return cls(tuple(map(tuple, basis)), tuple(shift) if shift is not None else (0,) * d, weight)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def covolume(self) -> Fraction:
        return abs(Fraction(str(Matrix(self.basis).det()))) if self.dim else Fraction(1)

    def dual(self) -> "LatticeCoset":
        """L# with zero shift (standard inner product)."""
        inv = Matrix(self.basis).inv().T
        return LatticeCoset(tuple(tuple(Fraction(str(x)) for x in inv.row(i)) for i in range(self.dim)), None)


@dataclass
class ThetaValue:
    value: complex
    tail_bound: float
    terms: int
    radius: float = 0.0
    constants: dict = field(default_factory=dict)


# ---------------------------------------------------------------- polynomial plumbing

def _compile(phi: GaussPoly, d: int):
    coeffs, exps = [], []
    for mono, c in phi.terms.items():
        e = [0] * d
        for (r, j), k in mono:
            if j != 1 or not 1 <= r <= d:
                raise ValueError(f"variable x{r}{j} is not one of the {d} lattice coordinates")
            e[r - 1] = k
        coeffs.append(c.to_complex())
        exps.append(e)
    return np.array(coeffs, dtype=complex), np.array(exps, dtype=int).reshape(len(exps), d)


def _poly_values(coeffs, exps, pts: np.ndarray) -> np.ndarray:
    if len(coeffs) == 0:
        return np.zeros(len(pts), dtype=complex)
    powers = np.prod(pts[:, None, :] ** exps[None, :, :], axis=2) if pts.shape[1] else np.ones((len(pts), len(coeffs)))
    return powers @ coeffs


def _majorant(phi: GaussPoly) -> tuple[float, int]:
    """|p(x)| <= C (1 + |x|)^D."""
    C = sum(abs(c.to_complex()) for c in phi.terms.values())
    D = max((mono_degree(k) for k in phi.terms), default=0)
    return C, D


def exact_value(phi: GaussPoly, point: Sequence[Fraction]) -> Scalar:
    """p(point) as an exact Scalar at a rational point (Gaussian factor excluded)."""
    total = Scalar()
    for mono, c in phi.terms.items():
        v = Fraction(1)
        for (r, _), k in mono:
            v *= Fraction(point[r - 1]) ** k
        total = total + c * v
    return total


# ---------------------------------------------------------------- enumeration and tail bound

def _geometry(coset: LatticeCoset):
    M = np.array([[float(x) for x in r] for r in coset.basis], dtype=float)
    h = np.array([float(x) for x in coset.shift], dtype=float)
    sv = np.linalg.svd(M, compute_uv=False)
    c = np.linalg.solve(M.T, h)  # h = c M
    return M, c, float(sv.min()), float(sv.max())


def _points(coset: LatticeCoset, R: float, max_points: int) -> np.ndarray:
    d = coset.dim
    if d == 0:
        return np.zeros((1, 0))
    M, c, smin, _ = _geometry(coset)
    span = R / smin
    ranges = [np.arange(math.ceil(-span - ci), math.floor(span - ci) + 1) for ci in c]
    count = math.prod(len(r) for r in ranges)
    if count > max_points:
        raise RadiusTooSmall(f"enumeration box has {count} points, budget {max_points}")
    grid = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, d)
    pts = (grid + c) @ M
    keep = np.einsum("ij,ij->i", pts, pts) <= R * R
    return pts[keep]


def _decay_start(D: int, t: float) -> float:
    """r0 beyond which (1+r)^D exp(-pi t r^2) decreases."""
    return (-1 + math.sqrt(1 + 2 * D / (math.pi * t))) / 2


def tail_bound(coset: LatticeCoset, C: float, D: int, t: float, R: float) -> float:
    """Upper bound for sum over |x| > R of C (1+|x|)^D exp(-pi t |x|^2), R >= decay start.

    With x = y M, |x| >= smin |y| and |x| > R forces |y| > R / smax.  Every y in Z^d + c owns the
    unit cube around it, whose points u satisfy |u| <= |y| + sqrt(d)/2; comparing with the
    radial integral of the nonincreasing majorant G(s) = g(max(R, smin s)) gives the bound.
    """
    d = coset.dim
    if d == 0 or C == 0:
        return 0.0
    _, _, smin, smax = _geometry(coset)
    if R < _decay_start(D, t):
        raise RadiusTooSmall("radius is inside the growth region of the majorant")
    delta = math.sqrt(d) / 2
    rho = R / smax

    def g(r):
        return C * (1 + r) ** D * mpmath.exp(-mpmath.pi * t * r * r)

    def G(s):
        return g(max(R, smin * s))

    surface = 2 * mpmath.pi ** (mpmath.mpf(d) / 2) / mpmath.gamma(mpmath.mpf(d) / 2)
    lo = max(0.0, rho - delta)
    knee = R / smin + delta
    pieces = [lo, knee] if knee > lo else [lo]
    integrand = lambda r: G(max(0.0, float(r) - delta)) * r ** (d - 1)  # noqa: E731
    val = mpmath.quad(integrand, pieces + [mpmath.inf])
    return float(surface * val * abs(coset.weight))


def _as_list(cosets) -> list:
    return [cosets] if isinstance(cosets, LatticeCoset) else list(cosets)


def theta_eval(cosets, phi: GaussPoly, t: float = 1.0, radius: float | None = None,
               tol: float = 1e-12, max_points: int = 2_000_000) -> ThetaValue:
    """sum over the weighted cosets of p(x) exp(-pi t |x|^2) with a certified tail bound.

    Without a radius, the smallest radius of the form r0 * 1.25^k whose tail bound is below tol is used.
    """
    cosets = _as_list(cosets)
    if t <= 0:
        raise ValueError("t must be positive")
    if not phi.terms:
        return ThetaValue(0j, 0.0, 0, radius or 0.0)
    C, D = _majorant(phi)
    value_re, value_im, tail, count = [], [], 0.0, 0
    R_used = 0.0
    for coset in cosets:
        d = coset.dim
        coeffs, exps = _compile(phi, d)
        if d == 0:
            v = complex(coeffs.sum()) if (exps.size == 0 or not exps.any()) else 0j
            v *= float(coset.weight)
            value_re.append(v.real)
            value_im.append(v.imag)
            count += 1
            continue
        R = radius
        if R is None:
            R = max(1.0, _decay_start(D, t))
            while tail_bound(coset, C, D, t, R) > tol:
                R *= 1.25
        elif tail_bound(coset, C, D, t, R) > tol:
            raise RadiusTooSmall(f"radius {R} cannot certify tolerance {tol}")
        tail += tail_bound(coset, C, D, t, R)
        pts = _points(coset, R, max_points)
        order = np.lexsort(pts.T[::-1]) if len(pts) else np.array([], dtype=int)
        pts = pts[order]
        vals = _poly_values(coeffs, exps, pts) * np.exp(-np.pi * t * np.einsum("ij,ij->i", pts, pts))
        vals *= float(coset.weight)
        value_re.extend(vals.real.tolist())
        value_im.extend(vals.imag.tolist())
        count += len(pts)
        R_used = max(R_used, R)
    value = complex(math.fsum(value_re), math.fsum(value_im))
    return ThetaValue(value, tail, count, R_used, {"C": C, "D": D, "t": t})


def theta_eval_mp(coset: LatticeCoset, phi: GaussPoly, t: float, radius: float, dps: int = 50):
    """The finite part of theta_eval recomputed with mpmath at dps digits."""
    with mpmath.workdps(dps):
        pts = _points(coset, radius, 10 ** 7)
        coeffs = [(mono, to_complex_mp(c, dps)) for mono, c in phi.terms.items()]
        total = mpmath.mpc(0)
        for x in pts:
            xs = [mpmath.mpf(float(v)) for v in x]
            # lattice points are rational; recover them exactly from the coset data
            pv = mpmath.mpc(0)
            for mono, c in coeffs:
                term = c
                for (r, _), k in mono:
                    term *= xs[r - 1] ** k
                pv += term
            total += pv * mpmath.exp(-mpmath.pi * t * sum(v * v for v in xs))
        return total * coset.weight.numerator / coset.weight.denominator


# ---------------------------------------------------------------- Poisson summation

def _phase_sum(coset: LatticeCoset, phi: GaussPoly, phase: Sequence[float], tol: float) -> complex:
    C, D = _majorant(phi)
    R = max(1.0, _decay_start(D, 1.0))
    while tail_bound(coset, C, D, 1.0, R) > tol:
        R *= 1.25
    pts = _points(coset, R, 2_000_000)
    coeffs, exps = _compile(phi, coset.dim)
    vals = _poly_values(coeffs, exps, pts) * np.exp(-np.pi * np.einsum("ij,ij->i", pts, pts))
    vals = vals * np.exp(2j * np.pi * (pts @ np.array(phase, dtype=float)))
    return complex(math.fsum(vals.real), math.fsum(vals.imag))


def poisson_check(coset: LatticeCoset, phi: GaussPoly, tol: float = 1e-14) -> float:
    """|sum_{L+h} f - covol^-1 sum_{L#} e^{2 pi i (xi, h)} f^(xi)| for a 1-dimensional coset."""
    if coset.dim != 1:
        raise ValueError("poisson_check is one-dimensional")
    lhs = theta_eval(coset, phi, 1.0, tol=tol).value / float(coset.weight)
    fhat = fourier_1d(phi)
    rhs = _phase_sum(coset.dual(), fhat, [float(x) for x in coset.shift], tol) / float(coset.covolume())
    return abs(lhs - rhs)


# ---------------------------------------------------------------- nonvanishing

def _small_points(d: int, N: int):
    """Points of (1/N) Z^d in [0, 1)^d, in order of increasing height."""
    pts = list(itertools.product(range(N), repeat=d))
    pts.sort(key=lambda v: (sum(v), v))
    for v in pts:
        yield tuple(Fraction(x, N) for x in v)


def nonvanishing_search(phi: GaussPoly, d: int | None = None, t: float = 1.0, max_n1: int = 64,
                        max_n2: int = 64, dps: int = 50, h: Sequence | None = None) -> dict:
    """Witness (h, N1, N2) with theta over N1 N2 Z^d + h of phi nonzero.

    h in (1/N1) Z^d has p(h) != 0 exactly; N2 is the least integer with
    sum_{x in N1 N2 Z^d, x != 0} |phi(x + h)| < |phi(h)|, the left side bounded by a finite
    sum plus the certified tail.  The inequality is re-checked with mpmath at dps digits.
    A given h is used as is (N1 is then its common denominator).
    """
    if not phi.terms:
        raise ValueError("phi is identically zero")
    if d is None:
        d = max((r for r, _ in phi.variables()), default=1)
    N1 = 1
    if h is not None:
        h = tuple(Fraction(v) for v in h)
        if len(h) != d or not exact_value(phi, h):
            raise ValueError("the given h does not have p(h) != 0")
        N1 = math.lcm(*[v.denominator for v in h])
    while N1 <= max_n1 and h is None:
        for pt in _small_points(d, N1):
            if exact_value(phi, pt):
                h = pt
                break
        if h is None:
            N1 *= 2
    if h is None:
        raise SearchBudgetExceeded("no rational point with p(h) != 0 found")
    hf = [float(x) for x in h]
    phi_h = abs(complex(exact_value(phi, h).to_complex())) * math.exp(-math.pi * t * sum(x * x for x in hf))
    C, D = _majorant(phi)
    coeffs, exps = _compile(phi, d)
    for N2 in range(1, max_n2 + 1):
        scale = N1 * N2
        coset = LatticeCoset.standard(d, scale, h)
        R = max(1.0, _decay_start(D, t), 2.0 * scale)
        while tail_bound(coset, C, D, t, R) > phi_h * 1e-6:
            R *= 1.25
        tail = tail_bound(coset, C, D, t, R)
        pts = _points(coset, R, 2_000_000)
        far = pts[np.any(np.abs(pts - np.array(hf)) > 1e-12, axis=1)]
        vals = np.abs(_poly_values(coeffs, exps, far)) * np.exp(-np.pi * t * np.einsum("ij,ij->i", far, far))
        rest = math.fsum(vals.tolist())
        if rest + tail < phi_h:
            cert = {"h": [str(x) for x in h], "N1": N1, "N2": N2, "phi_h": phi_h, "rest": rest,
                    "tail_bound": tail, "radius": R, "margin": phi_h - rest - tail}
            cert["reverified"] = _reverify(phi, h, scale, t, R, tail, dps)
            return cert
    raise SearchBudgetExceeded(f"no N2 <= {max_n2} certifies nonvanishing")


def _reverify(phi: GaussPoly, h, scale: int, t: float, R: float, tail: float, dps: int) -> bool:
    """Recompute |phi(h)| and the finite rest sum with mpmath from the exact lattice points."""
    d = len(h)
    with mpmath.workdps(dps):
        exact = [(mono, to_complex_mp(c, dps)) for mono, c in phi.terms.items()]

        def value(x):
            tot = mpmath.mpc(0)
            for mono, c in exact:
                term = c
                for (r, _), k in mono:
                    term *= x[r - 1] ** k
                tot += term
            return abs(tot) * mpmath.exp(-mpmath.pi * t * sum(v * v for v in x))

        hm = [mpmath.mpf(x.numerator) / x.denominator for x in h]
        phi_h = value(hm)
        span = int(math.ceil(R / scale)) + 1
        rest = mpmath.mpf(0)
        for k in itertools.product(range(-span, span + 1), repeat=d):
            if not any(k):
                continue
            x = [hm[i] + scale * k[i] for i in range(d)]
            if sum(v * v for v in x) <= R * R:
                rest += value(x)
        return bool(rest + mpmath.mpf(tail) < phi_h)


# ---------------------------------------------------------------- the W-lattice family

def _int_matrix(rows) -> tuple[Matrix, int]:
    den = 1
    for r in rows:
        for x in r:
            den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
    return Matrix([[int(Fraction(x) * den) for x in r] for r in rows]), den


def _left_kernel(A: Matrix) -> list[list[int]]:
    """Z-basis of {z integer : z A = 0}."""
    if A.cols == 0:
        return [[1 if i == j else 0 for j in range(A.rows)] for i in range(A.rows)]
    S, U, _ = smith_normal_decomp(A, domain=ZZ)
    rank = sum(1 for i in range(min(S.rows, S.cols)) if S[i, i] != 0)
    return [list(U.row(i)) for i in range(rank, A.rows)]


def _particular(A: Matrix, c: list[int]) -> list[int] | None:
    """Integer z with z A = c, or None."""
    if A.cols == 0:
        return [0] * A.rows
    S, U, V = smith_normal_decomp(A, domain=ZZ)
    cv = Matrix([c]) * V
    y = [0] * A.rows
    for j in range(A.cols):
        s = S[j, j] if j < S.rows else 0
        if s == 0:
            if cv[0, j] != 0:
                return None
        else:
            if cv[0, j] % s:
                return None
            y[j] = cv[0, j] // s
    return list(Matrix([y]) * U)


def hat_LW(cosets, P: ParabolicData, n: int = 1) -> list[LatticeCoset]:
    """Split (L + h) meet E-perp into product cosets (L_E + e_k) x (L_W + w_k).

    Lattices in V are given in Witt coordinates (y_1..y_l, x_W, y'_1..y'_l) with respect to
    u_1..u_l, the standard basis of W, u'_1..u'_l, so E-perp is y' = 0.  Each piece contributes
    |det L_E|^-n (L_W + w_k) with the determinant taken in the basis u_1..u_l.
    """
    ell, m = P.ell, P.m
    w = m - 2 * ell
    out: list[LatticeCoset] = []
    for coset in _as_list(cosets):
        if coset.dim != m:
            raise ValueError(f"lattice must live in dimension {m}")
        M = [list(r) for r in coset.basis]
        h = list(coset.shift)
        # integer k with (k M + h) has vanishing u' coordinates
        Mb = [[r[j] for j in range(m - ell, m)] for r in M]
        Ab, den = _int_matrix(Mb + [h[m - ell:]])
        A_int, h_int = Ab[:m, :], [-x for x in Ab.row(m)]
        k0 = _particular(A_int, h_int)
        if k0 is None:
            continue
        K = _left_kernel(A_int)
        G = [[sum(Fraction(z[i]) * M[i][j] for i in range(m)) for j in range(m - ell)] for z in K]
        x0 = [sum(Fraction(k0[i]) * M[i][j] for i in range(m)) + h[j] for j in range(m - ell)]
        r = len(G)
        GE, _ = _int_matrix([row[:ell] for row in G]) if ell else (Matrix.zeros(r, 0), 1)
        GW, _ = _int_matrix([row[ell:] for row in G]) if w else (Matrix.zeros(r, 0), 1)
        KE = _left_kernel(GW) if w else [[1 if i == j else 0 for j in range(r)] for i in range(r)]
        KW = _left_kernel(GE) if w else []
        if len(KE) != ell or len(KW) != w:
            raise NonProductDecomposition("L meet E-perp does not split into E and W parts")
        basis_E = [[sum(Fraction(z[i]) * G[i][j] for i in range(r)) for j in range(ell)] for z in KE]
        basis_W = [[sum(Fraction(z[i]) * G[i][j] for i in range(r)) for j in range(ell, m - ell)] for z in KW]
        det_E = abs(Fraction(str(Matrix(basis_E).det())))
        weight = coset.weight / det_E ** n
        T = Matrix(KE + KW)
        S, _, V = smith_normal_decomp(T, domain=ZZ)
        Vinv = V.inv()
        diag = [int(S[i, i]) for i in range(r)]
        seen = set()
        for ys in itertools.product(*[range(abs(s)) for s in diag]):
            z = list(Matrix([list(ys)]) * Vinv)
            pt = [sum(Fraction(int(z[i])) * G[i][j] for i in range(r)) + x0[j] for j in range(m - ell)]
            wpart = tuple(_reduce_mod(pt[ell:], basis_W))
            key = (wpart, tuple(_reduce_mod(pt[:ell], basis_E)))
            if key in seen:
                continue
            seen.add(key)
            out.append(LatticeCoset(tuple(map(tuple, basis_W)), wpart, weight))
    return out


def _reduce_mod(v: list, basis: list) -> list:
    """Representative of v modulo the lattice spanned by basis (coordinates in [0, 1))."""
    if not basis:
        return list(v)
    B = Matrix(basis)
    coords = Matrix([v]) * B.inv()
    frac = [Fraction(str(c)) - math.floor(Fraction(str(c))) for c in coords]
    return [sum(frac[i] * basis[i][j] for i in range(len(basis))) for j in range(len(v))]


__all__ = [
    "LatticeCoset", "ThetaValue", "RadiusTooSmall", "SearchBudgetExceeded", "NonProductDecomposition",
    "theta_eval", "theta_eval_mp", "tail_bound", "exact_value", "poisson_check", "nonvanishing_search", "hat_LW",
]
