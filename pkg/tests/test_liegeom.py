import itertools

import pytest
from hypothesis import given, settings, strategies as st

from thetaforms.liegeom import (
    LabelRangeError, LieElement, ParabolicData, QuadSpace, bracket, k_basis, lie_act, nu, omega, p_basis,
    sigma_pullback, wedge,
)
from thetaforms.scalars import INV_SQRT2, ONE, Scalar

V21 = QuadSpace(2, 1)


def test_lie_act_examples():
    X = wedge(V21.e(1), V21.e(3))
    assert lie_act(X, V21.e(1)) == V21.e(3)
    assert lie_act(X, V21.e(2)).is_zero()
    assert lie_act(X, V21.e(3)) == V21.e(1)


def test_p_basis():
    assert [X for _, X in p_basis(QuadSpace(1, 1))] == [wedge(QuadSpace(1, 1).e(1), QuadSpace(1, 1).e(2))]
    assert [lab for lab, _ in p_basis(V21)] == [(1, 3), (2, 3)]
    assert len(p_basis(QuadSpace(3, 2))) == 6


def lie_elements(space):
    pairs = [(a, b) for a in range(1, space.m + 1) for b in range(a + 1, space.m + 1)]
    return st.lists(st.tuples(st.sampled_from(pairs), st.integers(-2, 2)), min_size=1, max_size=3).map(
        lambda items: sum((wedge(space.e(a), space.e(b)) * c for (a, b), c in items[1:]),
                          wedge(space.e(items[0][0][0]), space.e(items[0][0][1])) * items[0][1]))


@settings(max_examples=30, deadline=None)
@given(lie_elements(QuadSpace(2, 2)), lie_elements(QuadSpace(2, 2)), lie_elements(QuadSpace(2, 2)))
def test_jacobi(X, Y, Z):
    total = bracket(X, bracket(Y, Z)) + bracket(Y, bracket(Z, X)) + bracket(Z, bracket(X, Y))
    assert not total
    assert not bracket(X, X)


@settings(max_examples=30, deadline=None)
@given(lie_elements(QuadSpace(3, 1)))
def test_bracket_is_commutator(X):
    space = QuadSpace(3, 1)
    Y = wedge(space.e(1), space.e(4))
    for a in range(1, space.m + 1):
        v = space.e(a)
        lhs = lie_act(bracket(X, Y), v)
        rhs = lie_act(X, lie_act(Y, v)) - lie_act(Y, lie_act(X, v))
        assert lhs == rhs


def test_action_is_infinitesimal_isometry():
    space = QuadSpace(3, 2)
    for _, X in p_basis(space) + k_basis(space):
        for a, b in itertools.product(range(1, space.m + 1), repeat=2):
            v, w = space.e(a), space.e(b)
            assert (space.form(lie_act(X, v), w) + space.form(v, lie_act(X, w))).is_zero()


def test_witt_basis_gram_matrix():
    for p, q, ell in [(2, 2, 1), (3, 2, 2), (3, 1, 1)]:
        P = ParabolicData(QuadSpace(p, q), ell)
        sp = P.space
        for i in range(1, ell + 1):
            for j in range(1, ell + 1):
                assert sp.form(P.u(i), P.uprime(j)) == (ONE if i == j else Scalar())
                assert sp.form(P.u(i), P.u(j)).is_zero()
                assert sp.form(P.uprime(i), P.uprime(j)).is_zero()
            for a in P.w_indices():
                assert sp.form(P.u(i), sp.e(a)).is_zero()


def test_parabolic_range():
    with pytest.raises(ValueError):
        ParabolicData(QuadSpace(2, 1), 2)


def test_n_w_equivariance():
    for p, q, ell in [(2, 2, 1), (3, 2, 1), (3, 2, 2)]:
        P = ParabolicData(QuadSpace(p, q), ell)
        for X in P.o_w_basis():
            for i in range(1, ell + 1):
                for a in P.w_indices():
                    w = P.space.e(a)
                    assert bracket(X, wedge(w, P.u(i))) == wedge(lie_act(X, w), P.u(i))


def test_sigma_pullback_examples():
    P = ParabolicData(QuadSpace(2, 2), 1)
    assert sigma_pullback(omega(2, 4), P) == [(nu(2, 1), -INV_SQRT2)]
    assert sigma_pullback(omega(2, 3), P) == [(omega(2, 3), ONE)]
    assert sigma_pullback(omega(1, 3), P) == [(nu(3, 1), INV_SQRT2)]
    with pytest.raises(LabelRangeError):
        sigma_pullback(omega(3, 4), P)
    # the stated ranges overlap at mu = m + 1 - l; such labels are flagged, not guessed
    with pytest.raises(LabelRangeError):
        sigma_pullback(omega(1, 4), P)
    assert sigma_pullback(omega(1, 5), ParabolicData(QuadSpace(3, 2), 2))[0][0].kind == "gl"


def test_lie_element_antisymmetry_enforced():
    from thetaforms.multitensor import SparseTensor
    with pytest.raises(ValueError):
        LieElement(SparseTensor(V21.space, 2, {(1, 2): 1}))
