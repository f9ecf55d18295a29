import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thetaforms.liegeom import ParabolicData, QuadSpace, p_basis, k_basis
from thetaforms.polys import mono_degree
from thetaforms.scalars import I, ONE, PI, sqrt2_power
from thetaforms.weil import (
    DeltaMatrix, FockPoly, GaussPoly, GroupElement, INV_2PI_I, OutOfScope, delta_expansion, evaluate_gauss,
    fock_restrict, fourier_1d, hermite, lie_action, mixed_action, mixed_function, phi_delta, raise_op, reflect,
    schrodinger_action, to_fock, weil_restrict,
)

x11 = GaussPoly.variable((1, 1))
ONE_G = GaussPoly.constant(1)


def test_hermite_examples():
    assert hermite(0, cls=GaussPoly) == ONE_G
    assert hermite(1, cls=GaussPoly) == x11.scale(2)
    assert hermite(2, cls=GaussPoly) == (x11 * x11).scale(4) - GaussPoly.constant(PI.inv())
    with pytest.raises(ValueError):
        hermite(-1)


def test_raise_examples():
    r1 = raise_op(ONE_G, 1, 1)
    assert r1 == x11.scale(2)
    assert raise_op(r1, 1, 1) == hermite(2, cls=GaussPoly)
    assert raise_op(raise_op(ONE_G, 1, 1), 2, 1) == raise_op(raise_op(ONE_G, 2, 1), 1, 1)


def test_raise_builds_hermite_tower():
    f = ONE_G
    for k in range(1, 9):
        f = raise_op(f, 1, 1)
        assert f == hermite(k, cls=GaussPoly)


def test_phi_delta_examples():
    assert phi_delta(DeltaMatrix.zero(2, 1)) == ONE_G
    assert phi_delta({(1, 1): 1}) == x11.scale(2)
    assert phi_delta({(1, 1): 1, (2, 1): 1}) == (x11 * GaussPoly.variable((2, 1))).scale(4)


def test_fourier_examples():
    assert fourier_1d(ONE_G) == ONE_G
    # H_1(-y/sqrt2) = -sqrt2 y transforms to +sqrt2 i xi under exp(-2 pi i y xi)
    g1 = x11.scale(-sqrt2_power(1))
    assert fourier_1d(g1) == x11.scale(sqrt2_power(1) * I)
    assert fourier_1d(g1) == x11.scale(-sqrt2_power(1) * I).scale(-1)


def _g(k):
    return GaussPoly({m: c * sqrt2_power(-mono_degree(m)) * (-1) ** mono_degree(m)
                      for m, c in hermite(k, cls=GaussPoly).terms.items()})


def test_shifted_hermite_transform_is_monomial():
    for k in range(9):
        target = GaussPoly.monomial((((1, 1), k),) if k else (), (sqrt2_power(1) * I) ** k if k else ONE)
        assert fourier_1d(_g(k)) == target
        literal = GaussPoly.monomial((((1, 1), k),) if k else (), (-sqrt2_power(1) * I) ** k if k else ONE)
        # the literal (-sqrt2 i xi)^k differs by (-1)^k
        assert (fourier_1d(_g(k)) == literal) == (k % 2 == 0)


def test_hermite_eigenfunctions():
    for k in range(9):
        H = hermite(k, cls=GaussPoly)
        assert fourier_1d(H) == H.scale((-I) ** k if k else ONE)


def test_fourier_numerically():
    y = np.linspace(-9, 9, 4001)
    f = _g(3)
    vals = np.array([evaluate_gauss(f, {(1, 1): t}) for t in y])
    for xi in (0.3, -0.7, 1.1):
        num = np.trapezoid(vals * np.exp(-2j * np.pi * y * xi), y)
        assert abs(num - evaluate_gauss(fourier_1d(f), {(1, 1): xi})) < 1e-10


polys1 = st.lists(st.tuples(st.integers(0, 6), st.fractions(-3, 3, max_denominator=4)), min_size=1, max_size=4).map(
    lambda items: GaussPoly({((((1, 1), k),) if k else ()): c for k, c in items if c}))


@settings(max_examples=40, deadline=None)
@given(polys1)
def test_fourier_twice_reflects(f):
    assert fourier_1d(fourier_1d(f)) == reflect(f)


def test_weil_restrict_examples():
    P = ParabolicData(QuadSpace(2, 2), 1)
    assert weil_restrict(phi_delta({(1, 1): 1}), P).is_zero()
    assert weil_restrict(phi_delta({(2, 1): 2}), P) == phi_delta({(2, 1): 2})
    assert weil_restrict(ONE_G, P) == ONE_G


def test_to_fock_examples():
    assert to_fock(ONE_G, 2) == FockPoly.constant(1)
    assert to_fock(phi_delta({(1, 1): 1}), 2) == FockPoly.variable((1, 1)).scale(INV_2PI_I)
    assert to_fock(phi_delta({(3, 1): 1}), 2) == FockPoly.variable((3, 1)).scale(-INV_2PI_I)


def test_delta_expansion_roundtrip():
    f = (x11 * x11 * GaussPoly.variable((2, 1))).scale(3) + x11
    assert delta_expansion(f).to_gauss() == f


def test_fock_restrict_examples():
    P = ParabolicData(QuadSpace(2, 2), 1)
    assert fock_restrict(FockPoly.variable((1, 1)), P).is_zero()
    P31 = ParabolicData(QuadSpace(3, 1), 1)
    z = FockPoly.variable((2, 1)) * FockPoly.variable((3, 1))
    assert fock_restrict(z, P31) == z
    assert fock_restrict(FockPoly.constant(1), P31) == FockPoly.constant(1)
    with pytest.raises(OutOfScope):
        fock_restrict(FockPoly.variable((4, 1)), P31)


def test_restriction_commutes_with_intertwiner():
    rng = random.Random(1)
    for p, q, ell, n in [(2, 2, 1, 1), (3, 2, 1, 2), (3, 2, 2, 1), (3, 3, 2, 2), (3, 1, 1, 2)]:
        P = ParabolicData(QuadSpace(p, q), ell)
        for _ in range(6):
            delta = {(rng.randint(1, p), rng.randint(1, n)): rng.randint(0, 2) for _ in range(3)}
            phi = phi_delta(delta)
            assert to_fock(weil_restrict(phi, P), p) == fock_restrict(to_fock(phi, p), P)


def test_raise_matches_fock_multiplication():
    rng = random.Random(2)
    p = 2
    for _ in range(10):
        delta = {(rng.randint(1, 3), 1): rng.randint(0, 2) for _ in range(2)}
        phi = phi_delta(delta)
        for r in (1, 3):
            sign = 1 if r <= p else -1
            lhs = to_fock(raise_op(phi, r, 1), p)
            rhs = to_fock(phi, p) * FockPoly.variable((r, 1)).scale(INV_2PI_I * sign)
            assert lhs == rhs


def _expm(A):
    out, term = np.eye(len(A)), np.eye(len(A))
    for k in range(1, 30):
        term = term @ A / k
        out = out + term
    return out


def test_lie_action_is_derivative_of_group_action():
    space = QuadSpace(2, 1)
    phi = hermite(2, (1, 1), GaussPoly) * GaussPoly.variable((3, 1)) + GaussPoly.variable((2, 1))
    x = np.array([0.3, -0.4, 0.5])
    for _, X in p_basis(space) + k_basis(space):
        M = np.zeros((3, 3))
        for (r, s), c in X.matrix().items():
            M[r - 1, s - 1] = float(c.rational())

        def f(t):
            y = _expm(-t * M) @ x
            return evaluate_gauss(phi, {(r + 1, 1): y[r] for r in range(3)})

        h = 1e-5
        numeric = (f(h) - f(-h)) / (2 * h)
        exact = evaluate_gauss(lie_action(X, phi, 1), {(r + 1, 1): x[r] for r in range(3)})
        assert abs(numeric - exact) < 1e-7


def _mixed_numeric(func, P, xi, xw, up):
    """Partial Fourier transform in y (l = n = 1) of a function of standard coordinates."""
    from thetaforms.weil import _witt_matrix
    B = _witt_matrix(P)
    ys = np.linspace(-9, 9, 3001)
    vals = []
    for y in ys:
        coords = np.concatenate([[y], xw, [up]])
        vals.append(func((B @ coords)[:, None]))
    return np.trapezoid(np.array(vals) * np.exp(-2j * np.pi * ys * xi), ys)


def test_mixed_action_matches_schroedinger_action():
    P = ParabolicData(QuadSpace(2, 2), 1)
    phi = x11 * GaussPoly.variable((2, 1)) + GaussPoly.variable((4, 1)) * GaussPoly.variable((4, 1))
    F = mixed_function(phi, P, 1)
    c, s = math.cosh(0.3), math.sinh(0.3)
    for g in [GroupElement("a", (1.7,)), GroupElement("SO_W", ((c, s), (s, c)))]:
        acted = schrodinger_action(g, phi, P, 1)
        G = mixed_action(g, F)
        for xi, xw, up in [(0.2, [0.1, -0.3], 0.4), (-0.5, [0.6, 0.2], -0.1)]:
            num = _mixed_numeric(acted, P, xi, np.array(xw), up)
            assert abs(num - G([[xi]], np.array(xw)[:, None], [[up]])) < 1e-9


def test_mixed_function_matches_numeric_transform():
    P = ParabolicData(QuadSpace(2, 1), 1)
    phi = x11 * x11 + GaussPoly.variable((3, 1))
    F = mixed_function(phi, P, 1)

    def std(xs):
        return evaluate_gauss(phi, {(r + 1, 1): xs[r, 0] for r in range(3)})

    num = _mixed_numeric(std, P, 0.35, np.array([0.2]), -0.25)
    assert abs(num - F([[0.35]], [[0.2]], [[-0.25]])) < 1e-9


def test_mixed_action_rejects_unknown():
    P = ParabolicData(QuadSpace(2, 1), 1)
    with pytest.raises(ValueError):
        mixed_action(GroupElement("bogus", None), mixed_function(ONE_G, P, 1))
