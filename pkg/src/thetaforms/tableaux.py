"""Young diagrams, standard fillings and Young symmetrizers acting on tensor positions."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .scalars import Scalar


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    parts: tuple[int, ...]

    def __init__(self, parts: Sequence[int] = ()):
        parts = tuple(int(b) for b in parts if b != 0)
        if any(b < 0 for b in parts):
            raise ValueError(f"negative part in {parts}")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError(f"parts must be weakly decreasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    @property
    def rows(self) -> int:
        return len(self.parts)

    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        return Partition([sum(1 for b in self.parts if b > j) for j in range(self.parts[0])])

    def boxes(self) -> Iterator[tuple[int, int]]:
        for r, b in enumerate(self.parts):
            for c in range(b):
                yield r, c

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"


def partitions(k: int, max_rows: int | None = None) -> list[Partition]:
    """All partitions of k (at most max_rows rows), in reverse lexicographic order."""
    out = []

    def rec(rest, bound, acc):
        if rest == 0:
            out.append(Partition(acc))
            return
        if max_rows is not None and len(acc) == max_rows:
            return
        for b in range(min(rest, bound), 0, -1):
            rec(rest - b, b, acc + [b])

    rec(k, k, [])
    return out


class Filling:
    """A standard tableau: rows of distinct entries 1..k, increasing along rows and columns."""

    __slots__ = ("shape", "rows")

    def __init__(self, rows: Sequence[Sequence[int]]):
        rows = tuple(tuple(int(x) for x in r) for r in rows if len(r))
        shape = Partition([len(r) for r in rows])
        k = shape.size
        if sorted(x for r in rows for x in r) != list(range(1, k + 1)):
            raise ValueError(f"entries must be exactly 1..{k}: {rows}")
        for r in rows:
            if any(r[i] >= r[i + 1] for i in range(len(r) - 1)):
                raise ValueError(f"row not increasing: {r}")
        for i in range(len(rows) - 1):
            for c in range(len(rows[i + 1])):
                if rows[i][c] >= rows[i + 1][c]:
                    raise ValueError(f"column {c + 1} not increasing in {rows}")
        self.shape = shape
        self.rows = rows

    @classmethod
    def canonical(cls, shape: Partition | Sequence[int]) -> "Filling":
        """Fill the rows in order, beginning at the top."""
        if not isinstance(shape, Partition):
            shape = Partition(shape)
        rows, nxt = [], 1
        for b in shape.parts:
            rows.append(list(range(nxt, nxt + b)))
            nxt += b
        return cls(rows)

    @classmethod
    def rectangle(cls, n: int, ell: int) -> "Filling":
        """The n by ell rectangle filled row-wise (n rows of length ell)."""
        return cls.canonical(Partition([ell] * n))

    @property
    def size(self) -> int:
        return self.shape.size

    def columns(self) -> list[tuple[int, ...]]:
        if not self.rows:
            return []
        return [tuple(r[c] for r in self.rows if len(r) > c) for c in range(len(self.rows[0]))]

    def __eq__(self, other) -> bool:
        return isinstance(other, Filling) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __str__(self) -> str:
        return "[" + "".join("[" + ",".join(map(str, r)) + "]" for r in self.rows) + "]"

    def __repr__(self) -> str:
        return f"Filling({[list(r) for r in self.rows]})"


def standard_fillings(shape: Partition | Sequence[int]) -> list[Filling]:
    if not isinstance(shape, Partition):
        shape = Partition(shape)
    k = shape.size
    out = []

    def rec(entry, rows):
        if entry > k:
            out.append(Filling(rows))
            return
        for r, b in enumerate(shape.parts):
            if len(rows[r]) < b and (r == 0 or len(rows[r - 1]) > len(rows[r])):
                rows[r].append(entry)
                rec(entry + 1, rows)
                rows[r].pop()

    rec(1, [[] for _ in shape.parts])
    return out


def hook_product(shape: Partition | Sequence[int]) -> int:
    if not isinstance(shape, Partition):
        shape = Partition(shape)
    conj = shape.conjugate().parts
    prod = 1
    for r, c in shape.boxes():
        prod *= (shape.parts[r] - c - 1) + (conj[c] - r - 1) + 1
    return prod


def count_standard_fillings(shape: Partition | Sequence[int]) -> int:
    if not isinstance(shape, Partition):
        shape = Partition(shape)
    return math.factorial(shape.size) // hook_product(shape)


def row_group_order(filling: Filling) -> int:
    return math.prod(math.factorial(len(r)) for r in filling.rows)


def hook_content_dimension(shape: Partition | Sequence[int], n: int) -> int:
    """dim of the irreducible GL(n) module of highest weight ``shape``."""
    if not isinstance(shape, Partition):
        shape = Partition(shape)
    num = 1
    for r, c in shape.boxes():
        num *= n + c - r
    return num // hook_product(shape) if num > 0 else 0


@dataclass(frozen=True)
class Permutation:
    """A bijection of {1..k}; images[i-1] is the image of i."""

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise ValueError(f"not a permutation: {self.images}")

    @classmethod
    def identity(cls, k: int) -> "Permutation":
        return cls(tuple(range(1, k + 1)))

    @classmethod
    def from_mapping(cls, k: int, mapping: dict) -> "Permutation":
        return cls(tuple(mapping.get(i, i) for i in range(1, k + 1)))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "Permutation") -> "Permutation":
        """Composition: (self * other)(i) = self(other(i))."""
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, j in enumerate(self.images, 1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    def sign(self) -> int:
        seen, s = set(), 1
        for i in range(1, len(self.images) + 1):
            if i in seen:
                continue
            length, j = 0, i
            while j not in seen:
                seen.add(j)
                j = self.images[j - 1]
                length += 1
            if length % 2 == 0:
                s = -s
        return s

    def act_on_index(self, idx: tuple) -> tuple:
        """Move the factor in position j to position self(j)."""
        out = [None] * len(idx)
        for j, x in enumerate(idx):
            out[self.images[j] - 1] = x
        return tuple(out)

    def __str__(self) -> str:
        return "".join(str(x) for x in self.images) if len(self.images) < 10 else str(self.images)


def _block_group(blocks: Sequence[Sequence[int]], k: int, signed: bool) -> list[tuple[Permutation, int]]:
    factors = []
    for blk in blocks:
        opts = []
        for perm in itertools.permutations(blk):
            opts.append(dict(zip(blk, perm)))
        factors.append(opts)
    out = []
    for combo in itertools.product(*factors):
        mapping = {}
        for d in combo:
            mapping.update(d)
        p = Permutation.from_mapping(k, mapping)
        out.append((p, p.sign() if signed else 1))
    return out


@lru_cache(maxsize=None)
def row_group(filling: Filling) -> tuple:
    return tuple(_block_group(filling.rows, filling.size, signed=False))


@lru_cache(maxsize=None)
def column_group(filling: Filling) -> tuple:
    return tuple(_block_group(filling.columns(), filling.size, signed=True))


class GroupAlgebraElement:
    """Finite formal combination of permutations of a fixed degree with Scalar coefficients."""

    __slots__ = ("degree", "terms")

    def __init__(self, degree: int, terms: dict | None = None):
        self.degree = degree
        self.terms = {p: Scalar.coerce(c) for p, c in (terms or {}).items() if c}
        for p in self.terms:
            if p.degree != degree:
                raise ValueError("permutation degree mismatch")

    @classmethod
    def identity(cls, k: int) -> "GroupAlgebraElement":
        return cls(k, {Permutation.identity(k): 1})

    def __add__(self, other: "GroupAlgebraElement") -> "GroupAlgebraElement":
        out = dict(self.terms)
        for p, c in other.terms.items():
            out[p] = out.get(p, Scalar()) + c
        return GroupAlgebraElement(self.degree, out)

    def __sub__(self, other: "GroupAlgebraElement") -> "GroupAlgebraElement":
        return self + other.scale(-1)

    def scale(self, c) -> "GroupAlgebraElement":
        c = Scalar.coerce(c)
        return GroupAlgebraElement(self.degree, {p: v * c for p, v in self.terms.items()})

    def __mul__(self, other: "GroupAlgebraElement") -> "GroupAlgebraElement":
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        out: dict = {}
        for p, a in self.terms.items():
            for q, b in other.terms.items():
                r = p * q
                out[r] = out.get(r, Scalar()) + a * b
        return GroupAlgebraElement(self.degree, out)

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupAlgebraElement) and self.degree == other.degree and self.terms == other.terms

    def __repr__(self) -> str:
        body = " + ".join(f"({c})*[{p}]" for p, c in sorted(self.terms.items(), key=lambda kv: kv[0].images))
        return f"GroupAlgebraElement({body or '0'})"


def row_sum(filling: Filling) -> GroupAlgebraElement:
    return GroupAlgebraElement(filling.size, {p: 1 for p, _ in row_group(filling)})


def column_sum(filling: Filling) -> GroupAlgebraElement:
    return GroupAlgebraElement(filling.size, {p: s for p, s in column_group(filling)})


def symmetrizer(filling: Filling, dual: bool = False) -> GroupAlgebraElement:
    """c(A) r(A) / h(A), or r(A) c(A) / h(A) when ``dual``."""
    r, c = row_sum(filling), column_sum(filling)
    prod = r * c if dual else c * r
    return prod.scale(Fraction(1, hook_product(filling.shape)))


def apply_group_element(g: GroupAlgebraElement, t):
    """Apply g to a SparseTensor permutation by permutation."""
    if t.degree != g.degree:
        raise ValueError(f"tensor degree {t.degree} does not match group degree {g.degree}")
    out = {}
    for p, c in g.terms.items():
        for idx, v in t.terms.items():
            j = p.act_on_index(idx)
            nv = out.get(j, Scalar()) + v * c
            if nv:
                out[j] = nv
            else:
                out.pop(j, None)
    return t.with_terms(out)


def _apply_signed_group(group, t, scale=None):
    out = {}
    for p, s in group:
        for idx, v in t.terms.items():
            j = p.act_on_index(idx)
            nv = out.get(j, Scalar()) + (v if s == 1 else -v)
            if nv:
                out[j] = nv
            else:
                out.pop(j, None)
    if scale is not None:
        out = {j: v * scale for j, v in out.items()}
    return t.with_terms(out)


def apply_symmetrizer(filling: Filling, t, dual: bool = False):
    """Same operator as apply_group_element(symmetrizer(filling, dual), t), computed in two passes."""
    if t.degree != filling.size:
        raise ValueError(f"tensor degree {t.degree} does not match tableau size {filling.size}")
    h = Fraction(1, hook_product(filling.shape))
    if dual:
        return _apply_signed_group(row_group(filling), _apply_signed_group(column_group(filling), t), h)
    return _apply_signed_group(column_group(filling), _apply_signed_group(row_group(filling), t), h)


def abut(B: Filling, A: Filling) -> Filling:
    """Place A to the right of the rectangle B, A's entries continuing after B's."""
    if B.rows and len(set(len(r) for r in B.rows)) != 1:
        raise ShapeMismatch("B must be rectangular")
    if B != Filling.canonical(B.shape):
        raise ShapeMismatch("B must carry the row-wise filling")
    if A.shape.rows > B.shape.rows and B.rows:
        raise ShapeMismatch(f"A has {A.shape.rows} rows but B only {B.shape.rows}")
    base = B.size
    rows = [list(r) for r in B.rows]
    for i, r in enumerate(A.rows):
        if i < len(rows):
            rows[i].extend(x + base for x in r)
        else:
            rows.append([x + base for x in r])
    return Filling(rows)


def abut_constant(A: Filling, B: Filling) -> Fraction:
    """The positive rational c(A, B) with s(B)e_B (x) s(A)e_A = c(A, B) s(B|A)e_{B|A}."""
    BA = abut(B, A)
    num = hook_product(BA.shape) * row_group_order(B) * row_group_order(A)
    den = hook_product(B.shape) * hook_product(A.shape) * row_group_order(BA)
    return Fraction(num, den)


def highest_weight_index(filling: Filling) -> tuple[int, ...]:
    """Multi-index of e_A = e_1^{b_1} (x) ... (x) e_n^{b_n}: position of entry x gets its row number."""
    out = [0] * filling.size
    for r, row in enumerate(filling.rows, 1):
        for x in row:
            out[x - 1] = r
    return tuple(out)
