from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from thetaforms import tableaux as tb
from thetaforms.multitensor import (
    SparseTensor, TensorSubspace, contract, coordinate_space, harmonic_project, harmonic_schur_image,
    insert_metric, is_harmonic, metric_tensor, pair, quadratic_space, schur_image,
)

V21 = quadratic_space(2, 1)


def e(space, *idx):
    return SparseTensor.basis(space, *idx)


def tensors(space, k, max_terms=4):
    idx = st.tuples(*[st.integers(1, space.dim)] * k)
    return st.lists(st.tuples(idx, st.integers(-3, 3)), max_size=max_terms).map(
        lambda items: sum((e(space, *i) * c for i, c in items), SparseTensor(space, k, {})))


def test_pair_examples():
    assert pair(e(V21, 1, 1), e(V21, 1, 1)) == 1
    assert pair(e(V21, 3, 3), e(V21, 3, 3)) == 1
    assert pair(e(V21, 3), e(V21, 3)) == -1
    assert pair(e(V21, 1), e(V21, 2)).is_zero()
    with pytest.raises(ValueError):
        pair(e(V21, 1), e(V21, 1, 1))


def test_contract_examples():
    assert contract(e(V21, 1, 1), 1, 2) == SparseTensor.scalar(V21, 1)
    assert contract(e(V21, 1, 2), 1, 2).is_zero()
    assert contract(metric_tensor(V21), 1, 2) == SparseTensor.scalar(V21, 3)
    with pytest.raises(IndexError):
        contract(e(V21, 1, 1), 1, 3)


def test_insert_metric_examples():
    g = insert_metric(SparseTensor.scalar(V21), 1, 2)
    assert g == e(V21, 1, 1) + e(V21, 2, 2) - e(V21, 3, 3)
    assert contract(g, 1, 2) == SparseTensor.scalar(V21, 3)
    t = e(V21, 2)
    swapped = insert_metric(t, 1, 3).permuted(tb.Permutation((2, 1, 3)))
    assert swapped == insert_metric(t, 2, 3)


def test_harmonic_project_examples():
    anti = e(V21, 1, 2) - e(V21, 2, 1)
    assert harmonic_project(anti) == anti
    h = harmonic_project(e(V21, 1, 1))
    assert h == e(V21, 1, 1) - (e(V21, 1, 1) + e(V21, 2, 2) - e(V21, 3, 3)) * Fraction(1, 3)


@settings(max_examples=25, deadline=None)
@given(tensors(quadratic_space(2, 2), 3))
def test_harmonic_projection_is_idempotent(t):
    h = harmonic_project(t)
    assert harmonic_project(h) == h
    assert is_harmonic(h)


@settings(max_examples=20, deadline=None)
@given(tensors(quadratic_space(3, 2), 4, 3))
def test_harmonic_projection_kills_all_contractions(t):
    h = harmonic_project(t)
    for i in range(1, 5):
        for j in range(i + 1, 5):
            assert contract(h, i, j).is_zero()


@settings(max_examples=20, deadline=None)
@given(tensors(V21, 1), tensors(V21, 3))
def test_contraction_insertion_adjoint(s, t):
    for i, j in [(1, 2), (1, 3), (2, 3)]:
        assert pair(insert_metric(s, i, j), t) == pair(s, contract(t, i, j))


@settings(max_examples=20, deadline=None)
@given(tensors(V21, 3))
def test_harmonic_projection_commutes_with_permutations(t):
    for perm in [tb.Permutation((2, 1, 3)), tb.Permutation((1, 3, 2))]:
        assert harmonic_project(t.permuted(perm)) == harmonic_project(t).permuted(perm)


def test_schur_image_examples():
    C2 = coordinate_space(2)
    anti = schur_image(tb.Filling.canonical([1, 1]), C2)
    assert anti.dim == 1 and anti.contains(e(C2, 1, 2) - e(C2, 2, 1))
    assert schur_image(tb.Filling.canonical([1, 1, 1]), C2).dim == 0
    assert schur_image(tb.Filling.canonical([2]), C2).dim == 3


def test_harmonic_schur_image_examples():
    assert harmonic_schur_image(tb.Filling.canonical([2, 2]), V21).dim == 0
    assert harmonic_schur_image(tb.Filling.canonical([1]), V21).dim == 3
    assert harmonic_schur_image(tb.Filling.canonical([2]), V21).dim == 5


def test_fillings_of_one_shape_give_equal_dimensions():
    for k in range(1, 6):
        for lam in tb.partitions(k, max_rows=3):
            dims = {schur_image(A, coordinate_space(3)).dim for A in tb.standard_fillings(lam)}
            assert len(dims) == 1
            assert dims.pop() == tb.hook_content_dimension(lam, 3)


def test_tensor_validation():
    with pytest.raises(ValueError):
        SparseTensor(V21, 1, {(4,): 1})
    with pytest.raises(ValueError):
        SparseTensor(V21, 2, {(1,): 1})
    sub = TensorSubspace(V21, 1, [e(V21, 1), e(V21, 1) * 2])
    assert sub.dim == 1
