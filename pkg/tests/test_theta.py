import math
import random
from fractions import Fraction

import mpmath
import pytest

from thetaforms.liegeom import ParabolicData, QuadSpace
from thetaforms.theta import (
    LatticeCoset, RadiusTooSmall, exact_value, hat_LW, nonvanishing_search, poisson_check, theta_eval, theta_eval_mp,
)
from thetaforms.weil import GaussPoly

x = GaussPoly.variable((1, 1))
one = GaussPoly.constant(1)
JACOBI = 1.0864348112133080146


def test_gaussian_sum_over_integers():
    v = theta_eval(LatticeCoset.standard(1), one)
    assert abs(v.value - JACOBI) < 1e-13
    assert v.tail_bound < 1e-12 and v.terms > 0
    assert abs(mpmath.jtheta(3, 0, mpmath.exp(-mpmath.pi)) - JACOBI) < 1e-15


def test_zero_function():
    assert theta_eval(LatticeCoset.standard(2), GaussPoly({})).value == 0


def test_doubled_radius_within_tail_bound():
    L = LatticeCoset.standard(2, 1, [Fraction(1, 3), Fraction(1, 5)])
    phi = x * x * GaussPoly.variable((2, 1)) + one
    a = theta_eval(L, phi, t=0.7)
    b = theta_eval(L, phi, t=0.7, radius=2 * a.radius, tol=1.0)
    assert abs(a.value - b.value) <= a.tail_bound + 1e-14


def test_radius_too_small():
    with pytest.raises(RadiusTooSmall):
        theta_eval(LatticeCoset.standard(1), one, radius=0.5, tol=1e-12)


def test_high_precision_agrees():
    L = LatticeCoset.standard(1, 1, [Fraction(1, 4)])
    v = theta_eval(L, x, t=4)
    assert abs(complex(theta_eval_mp(L, x, 4, v.radius)) - v.value) < 1e-14


@pytest.mark.parametrize("coset,phi,tol", [
    (LatticeCoset.standard(1), one, 1e-12),
    (LatticeCoset.standard(1, 2), one, 1e-12),
    (LatticeCoset.standard(1, 1, [Fraction(1, 4)]), None, 1e-10),
])
def test_poisson_examples(coset, phi, tol):
    if phi is None:
        phi = x * 2
    assert poisson_check(coset, phi) < tol


def test_poisson_random_suite():
    rng = random.Random(7)
    for _ in range(10):
        phi = GaussPoly({})
        for k in range(rng.randint(0, 3) + 1):
            phi = phi + GaussPoly.monomial(((((1, 1), k),) if k else ()), Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
        if not phi.terms:
            continue
        h = Fraction(rng.randint(0, 7), rng.randint(1, 8))
        L = LatticeCoset.standard(1, Fraction(rng.randint(1, 3), rng.randint(1, 2)), [h])
        assert poisson_check(L, phi) < 1e-10


def test_closing_example():
    v = theta_eval(LatticeCoset.standard(1, 1, [Fraction(1, 4)]), x, t=4)
    direct = math.fsum((k + 0.25) * math.exp(-4 * math.pi * (k + 0.25) ** 2) for k in range(-20, 21))
    assert abs(v.value.real - direct) < 1e-15 and v.value.imag == 0
    assert abs(v.value) > 100 * v.tail_bound


def test_exact_value():
    assert exact_value(x * x, [Fraction(1, 2)]).to_complex() == 0.25


def test_nonvanishing_for_x():
    cert = nonvanishing_search(x)
    assert cert["h"] == ["1/2"] and cert["reverified"]
    cert = nonvanishing_search(x, h=[Fraction(1, 4)])
    assert (cert["h"], cert["N1"]) == (["1/4"], 4) and cert["reverified"]
    assert cert["margin"] > 0
    with pytest.raises(ValueError):
        nonvanishing_search(x, h=[0])


def test_nonvanishing_gaussian_and_odd():
    cert = nonvanishing_search(one)
    assert cert["h"] == ["0"] and cert["N2"] == 1
    cert = nonvanishing_search(x * GaussPoly.variable((2, 1)))
    assert cert["h"] == ["1/2", "1/2"] and cert["reverified"]
    with pytest.raises(ValueError):
        nonvanishing_search(GaussPoly({}))


def test_certificate_implies_nonzero_sum():
    cert = nonvanishing_search(x, h=[Fraction(1, 4)])
    L = LatticeCoset.standard(1, cert["N1"] * cert["N2"], [Fraction(1, 4)])
    assert abs(theta_eval(L, x).value) > 0


def test_hat_LW_hyperbolic_plane():
    P = ParabolicData(QuadSpace(1, 1), 1)
    assert hat_LW(LatticeCoset.standard(2), P) == [LatticeCoset((), (), 1)]
    assert hat_LW(LatticeCoset(((3, 0), (0, 1)), (0, 0)), P, n=2) == [LatticeCoset((), (), Fraction(1, 9))]
    assert hat_LW(LatticeCoset.standard(2, 1, [Fraction(1, 2), 0]), P) == [LatticeCoset((), (), 1)]
    assert hat_LW(LatticeCoset.standard(2, 1, [0, Fraction(1, 2)]), P) == []


def _fiber_weights(coset, P, wrange):
    """Brute force: for each W point, 1/spacing of the E-fiber of L meet E-perp (one E and one W coordinate)."""
    out = {}
    (a1, b1, _), (a2, b2, _), _ = coset.basis
    for i in range(-60, 61):
        for j in range(-60, 61):
            e, w = i * a1 + j * a2, i * b1 + j * b2
            if abs(w) <= wrange:
                out.setdefault(w, set()).add(e)
    weights = {}
    for w, es in out.items():
        es = sorted(es)
        gap = min(b - a for a, b in zip(es, es[1:]))
        weights[w] = Fraction(1, gap)
    return weights


def test_hat_LW_against_brute_force():
    P = ParabolicData(QuadSpace(2, 1), 1)
    L = LatticeCoset(((1, 2, 0), (0, 5, 0), (0, 0, 1)), (0, 0, 0))
    pieces = hat_LW(L, P)
    assert len(pieces) == 5 and all(c.weight == Fraction(1, 5) for c in pieces)
    got = {}
    for c in pieces:
        (step,), (s,) = c.basis[0], c.shift
        for k in range(-10, 11):
            w = s + k * step
            if abs(w) <= 8:
                got[w] = got.get(w, 0) + c.weight
    assert got == _fiber_weights(L, P, 8)
