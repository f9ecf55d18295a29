"""Sparse tensors over tagged bases, the signature form, contractions and harmonic projection."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .exactla import NotInSpan, RationalSolver, RowReducer
from .scalars import Scalar
from . import tableaux

SPACE_TAGS = ("V", "Cn", "W", "E", "Eprime")


class DegenerateDecomposition(ArithmeticError):
    pass


@dataclass(frozen=True)
class Space:
    """A tagged vector space with basis indexed 1..dim.

    For quadratic spaces (``p`` not None) basis vector a has square +1 if a <= p
    and -1 otherwise.  Without ``p`` the pairing is the Kronecker pairing.
    """

    tag: str
    dim: int
    p: int | None = None

    def __post_init__(self):
        if self.tag not in SPACE_TAGS:
            raise ValueError(f"unknown space tag {self.tag!r}")
        if self.dim < 0 or (self.p is not None and not 0 <= self.p <= self.dim):
            raise ValueError(f"bad dimensions for space {self}")

    @property
    def q(self) -> int:
        return self.dim - (self.p if self.p is not None else self.dim)

    def sign(self, a: int) -> int:
        if self.p is None:
            return 1
        return 1 if a <= self.p else -1

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(self.sign(a) for a in range(1, self.dim + 1))

    def indices(self) -> range:
        return range(1, self.dim + 1)


def quadratic_space(p: int, q: int, tag: str = "V") -> Space:
    return Space(tag, p + q, p)


def coordinate_space(n: int) -> Space:
    return Space("Cn", n)


class SparseTensor:
    """Finitely supported map from multi-indices to Scalars, all of one degree over one space."""

    __slots__ = ("space", "degree", "terms")

    def __init__(self, space: Space, degree: int, terms: Mapping | None = None):
        self.space = space
        self.degree = degree
        clean = {}
        for idx, c in (terms or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"multi-index {idx} has wrong length for degree {degree}")
            if any(not 1 <= a <= space.dim for a in idx):
                raise ValueError(f"multi-index {idx} out of range for {space}")
            c = Scalar.coerce(c)
            if c:
                clean[idx] = c
        self.terms = clean

    def with_terms(self, terms: Mapping) -> "SparseTensor":
        t = SparseTensor.__new__(SparseTensor)
        t.space, t.degree = self.space, self.degree
        t.terms = {k: v for k, v in terms.items() if v}
        return t

    @classmethod
    def basis(cls, space: Space, *idx: int) -> "SparseTensor":
        return cls(space, len(idx), {tuple(idx): 1})

    @classmethod
    def scalar(cls, space: Space, c=1) -> "SparseTensor":
        return cls(space, 0, {(): c})

    def _check(self, other: "SparseTensor") -> None:
        if self.space != other.space or self.degree != other.degree:
            raise ValueError("tensors live in different spaces or degrees")

    def __add__(self, other: "SparseTensor") -> "SparseTensor":
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return self.with_terms(out)

    def __neg__(self) -> "SparseTensor":
        return self.with_terms({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "SparseTensor") -> "SparseTensor":
        return self + (-other)

    def __mul__(self, c) -> "SparseTensor":
        c = Scalar.coerce(c)
        return self.with_terms({k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (isinstance(other, SparseTensor) and self.space == other.space
                and self.degree == other.degree and self.terms == other.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def tensor(self, other: "SparseTensor") -> "SparseTensor":
        if self.space != other.space:
            raise ValueError("tensor product across spaces is not supported")
        out = {}
        for a, x in self.terms.items():
            for b, y in other.terms.items():
                out[a + b] = x * y
        t = SparseTensor.__new__(SparseTensor)
        t.space, t.degree, t.terms = self.space, self.degree + other.degree, out
        return t

    def permuted(self, perm) -> "SparseTensor":
        return self.with_terms({perm.act_on_index(k): v for k, v in self.terms.items()})

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        sym = "e" if self.space.tag in ("V", "W") else self.space.tag.lower()
        parts = []
        for idx, c in sorted(self.terms.items()):
            name = "(x)".join(f"{sym}{a}" for a in idx) or "1"
            parts.append(f"({c})*{name}")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"SparseTensor({self.space.tag}, {self.degree}, {self})"


def pair(s: SparseTensor, t: SparseTensor) -> Scalar:
    s._check(t)
    total = Scalar()
    small, big = (s, t) if len(s.terms) <= len(t.terms) else (t, s)
    for idx, c in small.terms.items():
        d = big.terms.get(idx)
        if d:
            sign = 1
            for a in idx:
                sign *= s.space.sign(a)
            total = total + (c * d if sign == 1 else -(c * d))
    return total


def contract(t: SparseTensor, i: int, j: int) -> SparseTensor:
    """C_ij: pair the factors in positions i < j (1-based) using the form."""
    if not (1 <= i < j <= t.degree):
        raise IndexError(f"bad contraction positions ({i},{j}) for degree {t.degree}")
    out: dict = {}
    for idx, c in t.terms.items():
        a, b = idx[i - 1], idx[j - 1]
        if a != b:
            continue
        rest = idx[: i - 1] + idx[i:j - 1] + idx[j:]
        v = c if t.space.sign(a) == 1 else -c
        out[rest] = out[rest] + v if rest in out else v
    res = SparseTensor.__new__(SparseTensor)
    res.space, res.degree = t.space, t.degree - 2
    res.terms = {k: v for k, v in out.items() if v}
    return res


def insert_metric(t: SparseTensor, i: int, j: int) -> SparseTensor:
    """E_ij(g*): insert sum_a sign(a) e_a (x) e_a into positions i < j of the degree k+2 result."""
    k = t.degree + 2
    if not (1 <= i < j <= k):
        raise IndexError(f"bad insertion positions ({i},{j}) for result degree {k}")
    out = {}
    for idx, c in t.terms.items():
        for a in t.space.indices():
            new = list(idx)
            new.insert(i - 1, a)
            new.insert(j - 1, a)
            out[tuple(new)] = c if t.space.sign(a) == 1 else -c
    res = SparseTensor.__new__(SparseTensor)
    res.space, res.degree, res.terms = t.space, k, out
    return res


def _odd_set(idx: tuple) -> frozenset:
    odd = set()
    for a in idx:
        odd ^= {a}
    return frozenset(odd)


@lru_cache(maxsize=None)
def _harmonic_solver(space: Space, k: int, odd: frozenset):
    """Solver for C(E x) = C t inside one parity block (contractions and insertions keep parities)."""
    lower = [J for J in itertools.product(space.indices(), repeat=k - 2) if _odd_set(J) == odd]
    pairs = [(i, j) for i in range(1, k + 1) for j in range(i + 1, k + 1)]
    columns = {}
    for (i, j) in pairs:
        for J in lower:
            ins = insert_metric(SparseTensor(space, k - 2, {J: 1}), i, j)
            col = {}
            for (a, b) in pairs:
                for K, v in contract(ins, a, b).terms.items():
                    col[(a, b, K)] = v.rational()
            columns[(i, j, J)] = col
    # the insertion span must meet ker C trivially for the projection to exist
    span = RowReducer()
    for (i, j, J) in columns:
        span.add(insert_metric(SparseTensor(space, k - 2, {J: 1}), i, j).terms)
    solver = RationalSolver(columns)
    if len(span) != len(solver.col_keys):
        raise DegenerateDecomposition(
            f"harmonic/insertion decomposition fails for {space}, degree {k}, block {sorted(odd)}")
    return solver


def harmonic_project(t: SparseTensor) -> SparseTensor:
    """Projection onto the common kernel of all contractions along the span of metric insertions."""
    if t.space.p is None:
        raise ValueError("harmonic projection needs a quadratic space")
    k = t.degree
    if k < 2:
        return t
    blocks: dict = {}
    for idx, c in t.terms.items():
        blocks.setdefault(_odd_set(idx), {})[idx] = c
    result = dict(t.terms)
    for odd, terms in blocks.items():
        part = t.with_terms(terms)
        rhs = {}
        for i in range(1, k + 1):
            for j in range(i + 1, k + 1):
                for K, v in contract(part, i, j).terms.items():
                    rhs[(i, j, K)] = v
        if not rhs:
            continue
        solver = _harmonic_solver(t.space, k, odd)
        try:
            x = solver.solve(rhs)
        except NotInSpan as exc:
            raise DegenerateDecomposition(str(exc)) from exc
        for (i, j, J), coeff in x.items():
            for idx, v in insert_metric(SparseTensor(t.space, k - 2, {J: 1}), i, j).terms.items():
                nv = result.get(idx, Scalar()) - coeff * v
                if nv:
                    result[idx] = nv
                else:
                    result.pop(idx, None)
    return t.with_terms(result)


def is_harmonic(t: SparseTensor) -> bool:
    return all(contract(t, i, j).is_zero() for i in range(1, t.degree + 1) for j in range(i + 1, t.degree + 1))


class TensorSubspace:
    """Span of SparseTensors of one degree, kept as a reduced echelon basis."""

    def __init__(self, space: Space, degree: int, vectors: Iterable[SparseTensor] = ()):
        self.space = space
        self.degree = degree
        self._reducer = RowReducer()
        for v in vectors:
            self.add(v)

    def add(self, v: SparseTensor) -> bool:
        if v.space != self.space or v.degree != self.degree:
            raise ValueError("vector does not live in this tensor space")
        return self._reducer.add(v.terms)

    @property
    def dim(self) -> int:
        return len(self._reducer)

    def basis(self) -> list[SparseTensor]:
        return [SparseTensor(self.space, self.degree, row) for row in self._reducer.basis()]

    def contains(self, v: SparseTensor) -> bool:
        return self._reducer.contains(v.terms)

    def __eq__(self, other) -> bool:
        return (isinstance(other, TensorSubspace) and self.space == other.space
                and self.degree == other.degree and self.basis() == other.basis())

    def __repr__(self) -> str:
        return f"TensorSubspace({self.space.tag}, degree={self.degree}, dim={self.dim})"


def _row_orbit_representatives(filling: tableaux.Filling, dim: int) -> Iterable[tuple]:
    """Multi-indices up to the row group: values on each row are weakly increasing."""
    k = filling.size
    choices = [list(itertools.combinations_with_replacement(range(1, dim + 1), len(r))) for r in filling.rows]
    for combo in itertools.product(*choices):
        idx = [0] * k
        for row, vals in zip(filling.rows, combo):
            for x, a in zip(row, vals):
                idx[x - 1] = a
        yield tuple(idx)


def schur_image(filling: tableaux.Filling, space: Space) -> TensorSubspace:
    """Reduced basis of s(A) T^k(space)."""
    k = filling.size
    sub = TensorSubspace(space, k)
    seen = set()
    for idx in _row_orbit_representatives(filling, space.dim):
        v = tableaux.apply_symmetrizer(filling, SparseTensor(space, k, {idx: 1}))
        if not v.terms:
            continue
        lead = v.terms[min(v.terms)].inv()
        key = tuple(sorted((i, c * lead) for i, c in v.terms.items()))
        if key in seen:
            continue
        seen.add(key)
        sub.add(v)
    return sub


def harmonic_schur_image(filling: tableaux.Filling, space: Space) -> TensorSubspace:
    """Harmonic projection of the symmetrizer image, re-reduced."""
    img = schur_image(filling, space)
    return TensorSubspace(space, filling.size, (harmonic_project(v) for v in img.basis()))


def metric_tensor(space: Space) -> SparseTensor:
    return insert_metric(SparseTensor.scalar(space), 1, 2)
