"""Sparse multivariate polynomials over Scalars.

Variables are pairs (row, column) of positive integers.  A monomial is a
sorted tuple of ((row, column), exponent) pairs; the empty tuple is 1.
"""
from __future__ import annotations

from typing import Callable, Iterable, Mapping

from .scalars import ONE, Scalar

Var = tuple
Monomial = tuple


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for v, e in b:
        out[v] = out.get(v, 0) + e
    return tuple(sorted(out.items()))


def mono_degree(a: Monomial) -> int:
    return sum(e for _, e in a)


def mono_exponent(a: Monomial, var: Var) -> int:
    for v, e in a:
        if v == var:
            return e
    return 0


def mono_without(a: Monomial, var: Var) -> Monomial:
    return tuple((v, e) for v, e in a if v != var)


def mono_from_dict(exps: Mapping[Var, int]) -> Monomial:
    return tuple(sorted((v, e) for v, e in exps.items() if e))


class Poly:
    """Immutable sparse polynomial; subclasses tag the meaning (Gaussian factor or Fock)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean = {}
        if terms:
            for k, c in terms.items():
                c = Scalar.coerce(c)
                if c:
                    clean[tuple(k)] = c
        self.terms: dict = clean

    @classmethod
    def _raw(cls, terms: dict):
        obj = cls.__new__(cls)
        obj.terms = terms
        return obj

    @classmethod
    def constant(cls, c=1):
        return cls({(): Scalar.coerce(c)})

    @classmethod
    def variable(cls, var: Var, c=1):
        return cls({((tuple(var), 1),): Scalar.coerce(c)})

    @classmethod
    def monomial(cls, mono: Monomial, c=1):
        return cls({tuple(mono): Scalar.coerce(c)})

    def _same(self, other) -> None:
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")

    def __add__(self, other):
        self._same(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k)
            s = c if s is None else s + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return type(self)._raw(out)

    def __neg__(self):
        return type(self)._raw({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Scalar.coerce(c)
        if not c:
            return type(self)._raw({})
        return type(self)._raw({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        self._same(other)
        out: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = mono_mul(k1, k2)
                s = out.get(k)
                s = c1 * c2 if s is None else s + c1 * c2
                if s:
                    out[k] = s
                else:
                    out.pop(k, None)
        return type(self)._raw(out)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        out = type(self).constant(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return type(self) is type(other) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((type(self).__name__, frozenset(self.terms.items())))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> list[Var]:
        return sorted({v for k in self.terms for v, _ in k})

    def degree(self) -> int:
        return max((mono_degree(k) for k in self.terms), default=-1)

    def coefficient(self, mono: Monomial) -> Scalar:
        return self.terms.get(tuple(mono), Scalar())

    def derivative(self, var: Var):
        var = tuple(var)
        out: dict = {}
        for k, c in self.terms.items():
            e = mono_exponent(k, var)
            if e:
                rest = dict(k)
                rest[var] = e - 1
                nk = mono_from_dict(rest)
                out[nk] = out.get(nk, Scalar()) + c * e
        return type(self)({k: c for k, c in out.items() if c})

    def times_variable(self, var: Var, power: int = 1):
        var = tuple(var)
        m = ((var, power),)
        return type(self)._raw({mono_mul(k, m): c for k, c in self.terms.items()})

    def map_monomials(self, fn: Callable[[Monomial], Monomial | None]):
        """Rename variables monomial by monomial; fn returning None drops the term."""
        out: dict = {}
        for k, c in self.terms.items():
            nk = fn(k)
            if nk is None:
                continue
            s = out.get(nk, Scalar()) + c
            if s:
                out[nk] = s
            else:
                out.pop(nk, None)
        return type(self)._raw(out)

    def substitute(self, mapping: Mapping[Var, "Poly"]):
        """Simultaneously replace variables by polynomials of the same type."""
        cache: dict = {}

        def power(v, e):
            key = (v, e)
            if key not in cache:
                cache[key] = mapping[v] ** e
            return cache[key]

        out = type(self)._raw({})
        for k, c in self.terms.items():
            keep = tuple((v, e) for v, e in k if v not in mapping)
            piece = type(self)._raw({keep: c})
            for v, e in k:
                if v in mapping:
                    piece = piece * power(v, e)
            out = out + piece
        return out

    def set_zero(self, predicate: Callable[[Var], bool]):
        """Evaluate every variable satisfying predicate at 0."""
        return self.map_monomials(lambda k: None if any(predicate(v) for v, _ in k) else k)

    def evaluate(self, values: Mapping[Var, complex]) -> complex:
        total = 0j
        for k, c in self.terms.items():
            term = c.to_complex()
            for v, e in k:
                term *= values[v] ** e
            total += term
        return total

    def __iter__(self):
        return iter(sorted(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms.items()):
            mono = "*".join(f"{self._name}{r}{j}" + (f"^{e}" if e > 1 else "") for (r, j), e in k)
            cs = str(c)
            if not mono:
                parts.append(f"({cs})")
            elif c == ONE:
                parts.append(mono)
            else:
                parts.append(f"({cs})*{mono}")
        return " + ".join(parts)

    _name = "x"

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self})"


def sum_polys(cls, polys: Iterable[Poly]) -> Poly:
    out: dict = {}
    for p in polys:
        for k, c in p.terms.items():
            s = out.get(k)
            s = c if s is None else s + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return cls._raw(out)
