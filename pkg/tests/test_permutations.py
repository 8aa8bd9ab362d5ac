from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teichlab.errors import DimensionMismatch, NotIrreducible
from teichlab.permutations import (Permutation, basis_vector, build_q_form,
                                   classify_type_w, is_irreducible, is_rotation,
                                   q_evaluate)

perms = st.integers(min_value=2, max_value=12).flatmap(
    lambda d: st.permutations(list(range(1, d + 1)))).map(lambda v: Permutation(tuple(v)))


def test_not_a_bijection_rejected():
    with pytest.raises(ValueError):
        Permutation((1, 1, 3))


def test_irreducible_examples():
    assert is_irreducible(Permutation((2, 1)))
    assert not is_irreducible(Permutation((1, 2)))
    # prefix {1,2} maps to {1,2}
    assert not is_irreducible(Permutation((2, 1, 4, 3)))


def test_rotation_examples():
    assert is_rotation(Permutation((2, 1)))
    assert not is_rotation(Permutation((3, 2, 1)))
    assert is_rotation(Permutation((1, 2, 3)))


def test_type_w_hand_traces():
    res = classify_type_w(Permutation((3, 2, 1)))
    assert res.type_w and res.trace == (1, 3)
    res = classify_type_w(Permutation((4, 3, 2, 1)))
    assert not res.type_w and res.trace == (1, 3, 5)
    # d=2 reversal: stop set {2,3}, a_1 = 3 != 2
    res = classify_type_w(Permutation((2, 1)))
    assert not res.type_w and res.trace == (1, 3)


def test_type_w_reversal_parity():
    for d in (3, 5, 7, 9, 11):
        assert classify_type_w(Permutation.reversal(d)).type_w
    for d in (4, 6, 8, 10):
        assert not classify_type_w(Permutation.reversal(d)).type_w


def test_type_w_requires_irreducible():
    with pytest.raises(NotIrreducible):
        classify_type_w(Permutation((1, 2, 3)))


@given(perms)
@settings(max_examples=300)
def test_type_w_trace_terminates(p):
    if not is_irreducible(p):
        return
    res = classify_type_w(p)
    assert len(res.trace) <= p.d + 1
    assert res.trace[-1] in (p.inverse(1), p.d + 1)


def test_q_form_hand_matrix():
    q = build_q_form(Permutation((3, 2, 1)))
    assert q.matrix == ((0, -1, -1), (1, 0, -1), (1, 1, 0))
    ident = build_q_form(Permutation((1, 2, 3)))
    assert all(v == 0 for row in ident.matrix for v in row)


@given(perms)
@settings(max_examples=1000, deadline=None)
def test_q_form_antisymmetric(p):
    q = build_q_form(p)
    for i in range(p.d):
        assert q.matrix[i][i] == 0
        for j in range(p.d):
            assert q.matrix[i][j] == -q.matrix[j][i]


def test_q_evaluate_examples():
    q = build_q_form(Permutation((2, 1)))
    assert q_evaluate(q, basis_vector(2, 2), basis_vector(2, 1)) == 1
    q3 = build_q_form(Permutation((3, 2, 1)))
    assert q_evaluate(q3, (1, 1, 1), basis_vector(3, 1)) == 2
    v = (Fraction(2, 7), Fraction(1, 3), Fraction(5))
    assert q_evaluate(q3, v, v) == 0


def test_q_evaluate_dimension_mismatch():
    q = build_q_form(Permutation((2, 1)))
    with pytest.raises(DimensionMismatch):
        q_evaluate(q, (1, 2, 3), (1, 2))


@given(perms, st.integers(min_value=1, max_value=100))
@settings(max_examples=200, deadline=None)
def test_q_positive_on_first_basis_vector(p, scale):
    # Q(lam, e_1) > 0 for positive lam and irreducible p
    if not is_irreducible(p):
        return
    q = build_q_form(p)
    lam = tuple(Fraction(scale + i, scale) for i in range(p.d))
    assert q_evaluate(q, lam, basis_vector(p.d, 1)) > 0


def test_json_round_trip():
    p = Permutation((3, 1, 2))
    assert Permutation.from_json(p.to_json()) == p
