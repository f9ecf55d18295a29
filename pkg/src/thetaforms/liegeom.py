"""The quadratic space of signature (p, q), Witt bases, so(V) as Lambda^2 V, and the parabolic cotangent labels."""
from __future__ import annotations

from typing import NamedTuple

from .multitensor import Space, SparseTensor, quadratic_space
from .scalars import INV_SQRT2, ONE, Scalar


class LabelRangeError(ValueError):
    """A cotangent label falls outside (or into two of) the ranges of the pullback table."""


class QuadSpace:
    """R^{p,q} with the diagonal form: (e_a, e_a) = +1 for a <= p, -1 otherwise."""

    def __init__(self, p: int, q: int):
        if p < 0 or q < 0 or p + q < 1:
            raise ValueError(f"bad signature ({p},{q})")
        self.p, self.q, self.m = p, q, p + q
        self.space: Space = quadratic_space(p, q)

    def __eq__(self, other) -> bool:
        return isinstance(other, QuadSpace) and (self.p, self.q) == (other.p, other.q)

    def __hash__(self) -> int:
        return hash((self.p, self.q))

    def __repr__(self) -> str:
        return f"QuadSpace({self.p},{self.q})"

    def sign(self, a: int) -> int:
        return self.space.sign(a)

    def e(self, a: int) -> SparseTensor:
        return SparseTensor.basis(self.space, a)

    def vector(self, coords: dict) -> SparseTensor:
        return SparseTensor(self.space, 1, {(a,): c for a, c in coords.items()})

    def form(self, v: SparseTensor, w: SparseTensor) -> Scalar:
        total = Scalar()
        for (a,), c in v.terms.items():
            d = w.terms.get((a,))
            if d:
                total = total + (c * d if self.sign(a) == 1 else -(c * d))
        return total

    def positive(self) -> range:
        return range(1, self.p + 1)

    def negative(self) -> range:
        return range(self.p + 1, self.m + 1)


class LieElement:
    """An element of so(V) stored as the antisymmetric 2-tensor w (x) w' - w' (x) w of w ^ w'."""

    __slots__ = ("tensor",)

    def __init__(self, tensor: SparseTensor):
        if tensor.degree != 2:
            raise ValueError("Lie elements are degree-2 tensors")
        for (a, b), c in tensor.terms.items():
            if tensor.terms.get((b, a), Scalar()) != -c:
                raise ValueError("tensor is not antisymmetric")
        self.tensor = tensor

    @property
    def space(self) -> Space:
        return self.tensor.space

    def components(self) -> dict:
        """{(a, b): c} with a < b, meaning sum c e_a ^ e_b."""
        return {k: v for k, v in sorted(self.tensor.terms.items()) if k[0] < k[1]}

    def __add__(self, other: "LieElement") -> "LieElement":
        return LieElement(self.tensor + other.tensor)

    def __sub__(self, other: "LieElement") -> "LieElement":
        return LieElement(self.tensor - other.tensor)

    def __mul__(self, c) -> "LieElement":
        return LieElement(self.tensor * c)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, LieElement) and self.tensor == other.tensor

    def __bool__(self) -> bool:
        return bool(self.tensor)

    def __repr__(self) -> str:
        body = " + ".join(f"({c})*e{a}^e{b}" for (a, b), c in self.components().items())
        return f"LieElement({body or '0'})"

    def matrix(self) -> dict:
        """Sparse matrix {(row, col): c} with X e_col = sum_row c e_row."""
        sp = self.space
        return {(b, a): (c if sp.sign(a) == 1 else -c) for (a, b), c in self.tensor.terms.items()}

    @classmethod
    def from_matrix(cls, space: Space, mat: dict) -> "LieElement":
        # X e_a = sum_b T_ab sign(a) e_b, so T_ab = sign(a) M_ba
        terms = {}
        for (b, a), c in mat.items():
            if c:
                terms[(a, b)] = c if space.sign(a) == 1 else -c
        return cls(SparseTensor(space, 2, terms))


def wedge(v: SparseTensor, w: SparseTensor) -> LieElement:
    return LieElement(v.tensor(w) - w.tensor(v))


def lie_act(X: LieElement, v: SparseTensor) -> SparseTensor:
    """(w ^ w')(v) = (w, v) w' - (w', v) w, extended linearly."""
    sp = X.space
    out: dict = {}
    for (a, b), c in X.tensor.terms.items():
        va = v.terms.get((a,))
        if va:
            val = c * va if sp.sign(a) == 1 else -(c * va)
            out[(b,)] = out.get((b,), Scalar()) + val
    return v.with_terms(out)


def lie_act_tensor(X: LieElement, t: SparseTensor) -> SparseTensor:
    """X acting on T^k(V) as a derivation."""
    sp = X.space
    col: dict = {}
    for (a, b), c in X.tensor.terms.items():
        col.setdefault(a, []).append((b, c if sp.sign(a) == 1 else -c))
    out: dict = {}
    for idx, v in t.terms.items():
        for pos, a in enumerate(idx):
            for b, c in col.get(a, ()):
                j = idx[:pos] + (b,) + idx[pos + 1:]
                nv = out.get(j, Scalar()) + v * c
                if nv:
                    out[j] = nv
                else:
                    out.pop(j, None)
    return t.with_terms(out)


def bracket(X: LieElement, Y: LieElement) -> LieElement:
    mx, my = X.matrix(), Y.matrix()
    out: dict = {}
    for (i, k), a in mx.items():
        for (k2, j), b in my.items():
            if k == k2:
                out[(i, j)] = out.get((i, j), Scalar()) + a * b
    for (i, k), a in my.items():
        for (k2, j), b in mx.items():
            if k == k2:
                out[(i, j)] = out.get((i, j), Scalar()) - a * b
    return LieElement.from_matrix(X.space, out)


def p_basis(space: QuadSpace) -> list[tuple[tuple[int, int], LieElement]]:
    """[((alpha, mu), e_alpha ^ e_mu)] in lexicographic order."""
    return [((a, mu), wedge(space.e(a), space.e(mu))) for a in space.positive() for mu in space.negative()]


def k_basis(space: QuadSpace) -> list[tuple[tuple[int, int], LieElement]]:
    out = []
    for block in (space.positive(), space.negative()):
        for a in block:
            for b in block:
                if a < b:
                    out.append(((a, b), wedge(space.e(a), space.e(b))))
    return out


def wedge_pairing(space: QuadSpace, X: LieElement, Y: LieElement) -> Scalar:
    """(w1^w2, w3^w4) = (w1,w3)(w2,w4) - (w1,w4)(w2,w3), extended bilinearly."""
    total = Scalar()
    for (a, b), c in X.components().items():
        for (a2, b2), d in Y.components().items():
            val = 0
            if a == a2 and b == b2:
                val += space.sign(a) * space.sign(b)
            if a == b2 and b == a2:
                val -= space.sign(a) * space.sign(b)
            if val:
                total = total + c * d * val
    return total


class CotangentLabel(NamedTuple):
    """Basis covector.  kind is one of
    omega (a, mu): dual of e_a ^ e_mu in p;
    nu (a, i): dual of e_a ^ u_i in n_W, a a W-direction;
    zeta (i, j): dual of u_i ^ u_j in the center of n_Q (i < j);
    a (i, 0): the split torus part;
    gl (a, b): opaque gl(E) part killed by the boundary restriction.
    """

    kind: str
    a: int
    b: int

    def __str__(self) -> str:
        return f"{self.kind}[{self.a},{self.b}]"


KIND_ORDER = {"omega": 0, "nu": 1, "zeta": 2, "a": 3, "gl": 4}


def label_key(label: CotangentLabel) -> tuple:
    return (KIND_ORDER[label.kind], label.a, label.b)


def omega(a: int, mu: int) -> CotangentLabel:
    return CotangentLabel("omega", a, mu)


def nu(a: int, i: int) -> CotangentLabel:
    return CotangentLabel("nu", a, i)


def zeta(i: int, j: int) -> CotangentLabel:
    if not i < j:
        raise ValueError("zeta labels need i < j")
    return CotangentLabel("zeta", i, j)


class ParabolicData:
    """The standard isotropic E = span(u_1..u_l), its partner E', and W = (E + E')^perp.

    u_i = -(e_i + e_{m+1-i})/sqrt2 and u'_i = (e_{m+1-i} - e_i)/sqrt2, so that
    (u_i, u'_j) = delta_ij and (u_i, u_j) = (u'_i, u'_j) = 0.
    """

    def __init__(self, space: QuadSpace, ell: int):
        if not 1 <= ell <= min(space.p, space.q):
            raise ValueError(f"need 1 <= l <= min(p,q), got l={ell} for {space}")
        self.space, self.ell = space, ell
        m = space.m
        for i in range(1, ell + 1):
            for j in range(1, ell + 1):
                if space.form(self.u(i), self.uprime(j)) != (1 if i == j else 0):
                    raise ArithmeticError("Witt basis is not dual")
                if space.form(self.u(i), self.u(j)) or space.form(self.uprime(i), self.uprime(j)):
                    raise ArithmeticError("E or E' is not isotropic")
        self.w_positive = range(ell + 1, space.p + 1)
        self.w_negative = range(space.p + 1, m - ell + 1)
        self.w_space: Space = Space("W", m - 2 * ell, space.p - ell)

    def __eq__(self, other) -> bool:
        return isinstance(other, ParabolicData) and self.space == other.space and self.ell == other.ell

    def __hash__(self) -> int:
        return hash((self.space, self.ell))

    def __repr__(self) -> str:
        return f"ParabolicData(p={self.space.p}, q={self.space.q}, l={self.ell})"

    @property
    def m(self) -> int:
        return self.space.m

    def u(self, i: int) -> SparseTensor:
        return self.space.vector({i: -INV_SQRT2, self.m + 1 - i: -INV_SQRT2})

    def uprime(self, i: int) -> SparseTensor:
        return self.space.vector({i: -INV_SQRT2, self.m + 1 - i: INV_SQRT2})

    def w_indices(self) -> list[int]:
        """V-indices of the standard basis of W (positive ones first)."""
        return list(self.w_positive) + list(self.w_negative)

    def w_to_v(self, k: int) -> int:
        return k + self.ell

    def v_to_w(self, a: int) -> int:
        if not self.ell < a <= self.m - self.ell:
            raise ValueError(f"V-index {a} is not a W direction")
        return a - self.ell

    def is_w_index(self, a: int) -> bool:
        return self.ell < a <= self.m - self.ell

    def n_w_basis(self) -> list[tuple[CotangentLabel, LieElement]]:
        """(nu label, X) with X = e_a ^ u_i, ordered by (a, i)."""
        return [(nu(a, i), wedge(self.space.e(a), self.u(i)))
                for a in self.w_indices() for i in range(1, self.ell + 1)]

    def z_basis(self) -> list[tuple[CotangentLabel, LieElement]]:
        return [(zeta(i, j), wedge(self.u(i), self.u(j)))
                for i in range(1, self.ell + 1) for j in range(i + 1, self.ell + 1)]

    def n_basis(self) -> list[tuple[CotangentLabel, LieElement]]:
        """Basis of the nilradical of the maximal parabolic stabilizing E, with dual labels."""
        return self.n_w_basis() + self.z_basis()

    def dual_vector(self, label: CotangentLabel) -> LieElement:
        """The element of Lambda^2 V representing a nu or zeta label under the wedge pairing."""
        if label.kind == "nu":
            a, i = label.a, label.b
            X = wedge(self.space.e(a), self.uprime(i))
            return X if self.space.sign(a) == 1 else X * -1
        if label.kind == "zeta":
            return wedge(self.uprime(label.a), self.uprime(label.b))
        raise ValueError(f"no dual vector for {label}")

    def o_w_basis(self) -> list[LieElement]:
        idx = self.w_indices()
        return [wedge(self.space.e(a), self.space.e(b)) for a in idx for b in idx if a < b]

    def sigma_pullback(self, label: CotangentLabel) -> list[tuple[CotangentLabel, Scalar]]:
        return sigma_pullback(label, self)


def sigma_pullback(label: CotangentLabel, P: ParabolicData) -> list[tuple[CotangentLabel, Scalar]]:
    """Pull an omega label of p* back to n* + a* + p_M* in horospherical coordinates."""
    if label.kind != "omega":
        raise ValueError(f"sigma pullback is defined on omega labels, got {label}")
    space, ell, m = P.space, P.ell, P.m
    a, mu = label.a, label.b
    if not (1 <= a <= space.p and space.p < mu <= m):
        raise LabelRangeError(f"{label} is not a label of p*")
    hits = []
    if ell < a <= space.p and m + 1 - ell <= mu <= m:
        hits.append([(nu(a, m + 1 - mu), -INV_SQRT2)])
    if a <= ell and space.p < mu <= m + 1 - ell:
        hits.append([(nu(mu, a), INV_SQRT2)])
    if ell < a <= space.p and space.p < mu <= m - ell:
        hits.append([(label, ONE)])
    if a <= ell and m + 1 - ell <= mu <= m:
        hits.append([(CotangentLabel("gl", a, mu), ONE)])
    if len(hits) != 1:
        raise LabelRangeError(f"{label} falls into {len(hits)} ranges of the pullback table for l={ell}")
    (target, coeff), = hits[0]
    if target.kind == "nu" and not P.is_w_index(target.a):
        raise LabelRangeError(f"{label} pulls back to {target}, outside the n_W labels")
    return hits[0]
