"""Exact scalars: Q(i, sqrt2) with a formal invertible symbol pi.

A ``Scalar`` is a finite sum  sum_k c_k * pi^k  where each c_k lies in the
field Q(i, sqrt2), stored as four Fractions in the basis 1, i, sqrt2, i*sqrt2.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Union

Rational = Union[int, Fraction]
FieldElt = tuple  # (a, b, c, d) meaning a + b*i + c*sqrt2 + d*i*sqrt2

_ZERO = Fraction(0)
_FZERO: FieldElt = (_ZERO, _ZERO, _ZERO, _ZERO)
_BASIS_NAMES = ("", "i", "sqrt2", "i*sqrt2")


def _fmul(x: FieldElt, y: FieldElt) -> FieldElt:
    a, b, c, d = x
    e, f, g, h = y
    return (
        a * e - b * f + 2 * (c * g - d * h),
        a * f + b * e + 2 * (c * h + d * g),
        a * g + c * e - b * h - d * f,
        a * h + d * e + b * g + c * f,
    )


def _fadd(x: FieldElt, y: FieldElt) -> FieldElt:
    return (x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3])


def _fzero(x: FieldElt) -> bool:
    return not (x[0] or x[1] or x[2] or x[3])


def _conj_i(x: FieldElt) -> FieldElt:
    return (x[0], -x[1], x[2], -x[3])


def _conj_s(x: FieldElt) -> FieldElt:
    return (x[0], x[1], -x[2], -x[3])


def _finv(x: FieldElt) -> FieldElt:
    # product over the Galois orbit is rational
    others = _fmul(_fmul(_conj_i(x), _conj_s(x)), _conj_i(_conj_s(x)))
    norm = _fmul(x, others)[0]
    return tuple(t / norm for t in others)


class Scalar:
    """Immutable element of Q(i, sqrt2)[pi, pi^-1]."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, Iterable[Rational]] | None = None):
        clean = {}
        if terms:
            for k, v in terms.items():
                elt = tuple(Fraction(t) for t in v)
                if len(elt) != 4:
                    raise ValueError("field element needs four rational coordinates")
                if not _fzero(elt):
                    clean[int(k)] = elt
        self._terms = dict(sorted(clean.items()))
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "Scalar":
        obj = cls.__new__(cls)
        obj._terms = dict(sorted(terms.items()))
        obj._hash = None
        return obj

    @classmethod
    def from_rational(cls, r: Rational) -> "Scalar":
        r = Fraction(r)
        if r == 0:
            return cls._raw({})
        return cls._raw({0: (r, _ZERO, _ZERO, _ZERO)})

    @classmethod
    def coerce(cls, x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return cls.from_rational(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to Scalar")

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def pi_degrees(self) -> list[int]:
        return list(self._terms)

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def __add__(self, other) -> "Scalar":
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for k, v in other._terms.items():
            if k in out:
                s = _fadd(out[k], v)
                if _fzero(s):
                    del out[k]
                else:
                    out[k] = s
            else:
                out[k] = v
        return Scalar._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar._raw({k: tuple(-t for t in v) for k, v in self._terms.items()})

    def __sub__(self, other) -> "Scalar":
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Scalar":
        return Scalar.coerce(other) - self

    def __mul__(self, other) -> "Scalar":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return Scalar._raw({})
            return Scalar._raw({k: tuple(t * other for t in v) for k, v in self._terms.items()})
        if not isinstance(other, Scalar):
            return NotImplemented
        out: dict = {}
        for k1, v1 in self._terms.items():
            for k2, v2 in other._terms.items():
                k = k1 + k2
                prod = _fmul(v1, v2)
                out[k] = _fadd(out[k], prod) if k in out else prod
        return Scalar._raw({k: v for k, v in out.items() if not _fzero(v)})

    __rmul__ = __mul__

    def inv(self) -> "Scalar":
        if not self._terms:
            raise ZeroDivisionError("Scalar zero is not invertible")
        if len(self._terms) != 1:
            raise ValueError("only pi-monomials are invertible: " + str(self))
        (k, v), = self._terms.items()
        return Scalar._raw({-k: _finv(v)})

    def __truediv__(self, other) -> "Scalar":
        return self * Scalar.coerce(other).inv()

    def __rtruediv__(self, other) -> "Scalar":
        return Scalar.coerce(other) * self.inv()

    def __pow__(self, n: int) -> "Scalar":
        if n < 0:
            return self.inv() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conj(self) -> "Scalar":
        """Complex conjugation (i -> -i); pi is real."""
        return Scalar._raw({k: _conj_i(v) for k, v in self._terms.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Scalar.from_rational(other)
        if not isinstance(other, Scalar):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def rational(self) -> Fraction:
        """Return the value as a Fraction, or raise if it is not rational."""
        if not self._terms:
            return Fraction(0)
        if list(self._terms) != [0] or any(self._terms[0][1:]):
            raise ValueError(f"{self} is not rational")
        return self._terms[0][0]

    def to_complex(self) -> complex:
        total = 0j
        s2 = math.sqrt(2.0)
        for k, (a, b, c, d) in self._terms.items():
            z = complex(float(a) + float(c) * s2, float(b) + float(d) * s2)
            total += z * math.pi ** k
        return total

    def __complex__(self) -> complex:
        return self.to_complex()

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for k, elt in self._terms.items():
            for coeff, name in zip(elt, _BASIS_NAMES):
                if coeff == 0:
                    continue
                factors = []
                mag = abs(coeff)
                if mag != 1 or (not name and k == 0):
                    factors.append(str(mag))
                if name:
                    factors.append(name)
                if k == 1:
                    factors.append("pi")
                elif k != 0:
                    factors.append(f"pi^{k}")
                pieces.append(("-" if coeff < 0 else "+", "*".join(factors)))
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"Scalar({str(self)!r})"


def field(a: Rational = 0, b: Rational = 0, c: Rational = 0, d: Rational = 0, pi_power: int = 0) -> Scalar:
    """(a + b i + c sqrt2 + d i sqrt2) * pi^pi_power"""
    return Scalar({pi_power: (a, b, c, d)})


ZERO = Scalar()
ONE = field(1)
I = field(0, 1)
SQRT2 = field(0, 0, 1)
PI = field(1, pi_power=1)
TWO_PI_I = field(0, 2, pi_power=1)
INV_SQRT2 = SQRT2.inv()


def sqrt2_power(k: int) -> Scalar:
    """(sqrt2)^k for any integer k, exact."""
    return SQRT2 ** k


def to_complex_mp(x: Scalar, dps: int = 50):
    """High precision evaluation through mpmath."""
    import mpmath

    with mpmath.workdps(dps):
        total = mpmath.mpc(0)
        s2 = mpmath.sqrt(2)
        for k, (a, b, c, d) in x.terms.items():
            re = mpmath.mpf(a.numerator) / a.denominator + s2 * mpmath.mpf(c.numerator) / c.denominator
            im = mpmath.mpf(b.numerator) / b.denominator + s2 * mpmath.mpf(d.numerator) / d.denominator
            total += mpmath.mpc(re, im) * mpmath.pi ** k
        return total


__all__ = [
    "Scalar", "field", "ZERO", "ONE", "I", "SQRT2", "PI", "TWO_PI_I", "INV_SQRT2",
    "sqrt2_power", "to_complex_mp",
]
