"""Sparse exact linear algebra over pi-degree-0 Scalars (and plain Fractions)."""
from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Iterable, Mapping

from .scalars import Scalar


class NotInSpan(ValueError):
    pass


def _check_degree_zero(x: Scalar) -> None:
    degs = x.pi_degrees()
    if degs and degs != [0]:
        raise ValueError(f"linear algebra needs pi-degree 0 coefficients, got {x}")


class RowReducer:
    """Incrementally maintained reduced row echelon basis of sparse vectors.

    Vectors are dicts key -> Scalar.  Pivots are chosen as the smallest key
    (under the natural ordering of the keys) so that the reduced basis is
    canonical for a given span.
    """

    def __init__(self):
        self.rows: dict[Hashable, dict] = {}  # pivot key -> row with row[pivot] == 1

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, vec: Mapping) -> dict:
        v = {k: c for k, c in vec.items() if c}
        if not self.rows:
            return v
        for piv in sorted(set(v) & set(self.rows)):
            c = v.get(piv)
            if not c:
                continue
            for k, rc in self.rows[piv].items():
                nv = v.get(k, 0) - c * rc
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
        return v

    def add(self, vec: Mapping) -> bool:
        """Insert vec; return True when it enlarged the span."""
        v = self.reduce(vec)
        if not v:
            return False
        for c in v.values():
            _check_degree_zero(c)
        piv = min(v)
        scale = v[piv].inv()
        v = {k: c * scale for k, c in v.items()}
        # back-substitute into existing rows to keep the basis fully reduced
        for other_piv, row in self.rows.items():
            c = row.get(piv)
            if c:
                for k, vc in v.items():
                    nv = row.get(k, 0) - c * vc
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
        self.rows[piv] = v
        return True

    def contains(self, vec: Mapping) -> bool:
        return not self.reduce(vec)

    def basis(self) -> list[dict]:
        return [dict(sorted(self.rows[p].items())) for p in sorted(self.rows)]


def rank(vectors: Iterable[Mapping]) -> int:
    rr = RowReducer()
    for v in vectors:
        rr.add(v)
    return len(rr)


def _frac_inverse(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(mat)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


class RationalSolver:
    """Solve A x = b for a fixed rational matrix A given column-wise.

    ``columns`` maps a column key to a sparse dict row_key -> Fraction.
    Right-hand sides may carry Scalar entries.  A minimal set of independent
    columns is selected once; solutions are expressed on those columns.
    """

    def __init__(self, columns: Mapping[Hashable, Mapping[Hashable, Fraction]]):
        col_keys = sorted(columns)
        row_keys = sorted({r for c in columns.values() for r in c})
        row_index = {r: i for i, r in enumerate(row_keys)}
        # select independent columns greedily via Fraction elimination
        chosen = []
        echelon: dict[int, list] = {}
        for ck in col_keys:
            v = [Fraction(0)] * len(row_keys)
            for r, x in columns[ck].items():
                v[row_index[r]] = Fraction(x)
            w = list(v)
            for piv, row in echelon.items():
                if w[piv]:
                    f = w[piv]
                    w = [a - f * b for a, b in zip(w, row)]
            nz = next((i for i, a in enumerate(w) if a), None)
            if nz is None:
                continue
            inv = 1 / w[nz]
            w = [a * inv for a in w]
            for piv in list(echelon):
                row = echelon[piv]
                if row[nz]:
                    f = row[nz]
                    echelon[piv] = [a - f * b for a, b in zip(row, w)]
            echelon[nz] = w
            chosen.append((ck, v))
        self.col_keys = [ck for ck, _ in chosen]
        self.row_keys = row_keys
        self.row_index = row_index
        self.full = [[v[i] for _, v in chosen] for i in range(len(row_keys))]
        # rows that make the chosen columns a square invertible block
        self.sel_rows = self._independent_rows()
        sub = [self.full[r] for r in self.sel_rows]
        self.inv = _frac_inverse(sub) if sub else []

    def _independent_rows(self) -> list[int]:
        ncols = len(self.col_keys)
        rows = []
        echelon: dict[int, list] = {}
        for ri, row in enumerate(self.full):
            w = list(row)
            for piv, er in echelon.items():
                if w[piv]:
                    f = w[piv]
                    w = [a - f * b for a, b in zip(w, er)]
            nz = next((i for i, a in enumerate(w) if a), None)
            if nz is None:
                continue
            inv = 1 / w[nz]
            w = [a * inv for a in w]
            for piv in list(echelon):
                er = echelon[piv]
                if er[nz]:
                    f = er[nz]
                    echelon[piv] = [a - f * b for a, b in zip(er, w)]
            echelon[nz] = w
            rows.append(ri)
            if len(rows) == ncols:
                break
        return rows

    def solve(self, rhs: Mapping[Hashable, Scalar]) -> dict:
        """Return {column key: Scalar}; raise NotInSpan if A x = rhs has no solution."""
        for r in rhs:
            if r not in self.row_index and rhs[r]:
                raise NotInSpan(f"right-hand side uses row {r!r} outside the column span")
        b = [rhs.get(self.row_keys[r], Scalar()) for r in self.sel_rows]
        x = []
        for inv_row in self.inv:
            acc = Scalar()
            for coeff, bv in zip(inv_row, b):
                if coeff and bv:
                    acc = acc + bv * coeff
            x.append(acc)
        # verify every equation
        for ri, row in enumerate(self.full):
            acc = Scalar()
            for coeff, xv in zip(row, x):
                if coeff and xv:
                    acc = acc + xv * coeff
            if acc != rhs.get(self.row_keys[ri], Scalar()):
                raise NotInSpan("inconsistent linear system")
        return {ck: xv for ck, xv in zip(self.col_keys, x) if xv}
