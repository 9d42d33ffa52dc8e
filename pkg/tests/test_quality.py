import itertools
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_q_bivariate, random_model
from sigkit.errors import EmptySetList, InvariantViolation, SizeLimitExceeded, SubsetOutOfRange
from sigkit.quality import (
    PermutationModel,
    UniformQuality,
    as_fraction,
    q0,
    q0_multi,
    q_bivariate_from_model,
    q_from_model,
    q_multi_from_model,
    uniform_model,
    uniform_quality,
)
from sigkit.structure import from_mask


def subsets(n):
    return [tuple(sorted(from_mask(m))) for m in range(1 << n)]


def test_uniform_model_small():
    m1 = uniform_model(1)
    assert m1.probs == {(1,): Fraction(1)}
    m3 = uniform_model(3)
    assert len(m3.probs) == 6 and set(m3.probs.values()) == {Fraction(1, 6)}


def test_uniform_model_size_limit():
    with pytest.raises(SizeLimitExceeded):
        uniform_model(9)


def test_model_validation():
    with pytest.raises(InvariantViolation, match="sum"):
        PermutationModel(2, {(1, 2): "1/2"})
    with pytest.raises(InvariantViolation, match="permutation"):
        PermutationModel(2, {(1, 1): 1})
    with pytest.raises(InvariantViolation):
        PermutationModel(2, {(1, 2): 0.5, (2, 1): 0.5})
    with pytest.raises(InvariantViolation):
        PermutationModel(2, {(1, 2): "-1/2", (2, 1): "3/2"})


def test_as_fraction():
    assert as_fraction("3/10") == Fraction(3, 10)
    assert as_fraction(1) == 1
    for bad in (0.3, True, "0.3", "a/b"):
        with pytest.raises(InvariantViolation):
            as_fraction(bad)


def test_uniform_q_is_inverse_binomial():
    n = 4
    q = q_from_model(uniform_model(n))
    for A in subsets(n):
        assert q(A) == Fraction(1, comb(n, len(A)))
        assert uniform_quality(n)(A) == q(A)
    q.check()


def test_point_mass_quality():
    q = q_from_model(PermutationModel(3, {(1, 2, 3): 1}))
    assert q([3]) == 1
    assert q([2]) == 0
    assert q([2, 3]) == 1


def test_two_component_quality():
    q = q_from_model(PermutationModel(2, {(1, 2): "3/10", (2, 1): "7/10"}))
    assert q([2]) == Fraction(3, 10)
    assert q([1]) == Fraction(7, 10)


def test_bivariate_uniform_example():
    q = q_bivariate_from_model(uniform_model(3))
    assert q([2, 3], [3]) == Fraction(1, 6)


def test_bivariate_incomparable_is_zero():
    rng = np.random.default_rng(3)
    for n in (3, 4, 5):
        q = q_bivariate_from_model(random_model(rng, n))
        assert q([1], [2]) == 0


def test_bivariate_uniform_n4_agrees_with_q0():
    q = q_bivariate_from_model(uniform_model(4))
    for A, B in itertools.product(subsets(4), repeat=2):
        assert q(A, B) == q0(4, A, B)


def test_q0_examples():
    assert q0(4, [1, 2], [2]) == Fraction(1, 12)
    assert q0(4, [1, 2], [3, 4]) == 0
    assert q0(4, [1, 2], [1, 2]) == Fraction(1, 6)


def test_q0_boundary_conventions():
    n = 4
    for A in subsets(n):
        qa = Fraction(1, comb(n, len(A)))
        assert q0(n, A, ()) == qa
        assert q0(n, A, range(1, n + 1)) == qa
        assert q0(n, (), A) == qa
        assert q0(n, range(1, n + 1), A) == qa


def test_q0_rejects_bad_subsets():
    with pytest.raises(SubsetOutOfRange):
        q0(3, [4], [1])
    with pytest.raises(SubsetOutOfRange):
        q0(3, 5, [1])


def test_q0_multi_examples():
    assert q0_multi(3, [[1, 2, 3], [2, 3], [3]]) == Fraction(1, 6)
    assert q0_multi(3, [[1], [2], [1, 2]]) == 0
    with pytest.raises(EmptySetList):
        q0_multi(3, [])


def test_q0_multi_reduces_to_q0():
    n = 4
    for A, B in itertools.product(subsets(n), repeat=2):
        assert q0_multi(n, [A, B]) == q0(n, A, B)


def test_q0_multi_order_independent():
    sets = [[1, 2, 3], [2], [2, 3]]
    values = {q0_multi(4, list(p)) for p in itertools.permutations(sets)}
    assert values == {q0_multi(4, sets)}


def test_q_multi_from_uniform_matches_q0_multi():
    n = 4
    model = uniform_model(n)
    rng = np.random.default_rng(11)
    for _ in range(100):
        sets = [tuple(sorted(from_mask(int(m)))) for m in rng.integers(0, 1 << n, size=3)]
        assert q_multi_from_model(model, sets) == q0_multi(n, sets)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_bivariate_matches_enumeration(n, seed):
    rng = np.random.default_rng(seed)
    model = random_model(rng, n)
    q = q_bivariate_from_model(model)
    for A, B in itertools.product(subsets(n), repeat=2):
        if 0 < len(A) < n and 0 < len(B) < n:
            assert q(A, B) == brute_q_bivariate(n, A, B, model)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_bivariate_invariants(n, seed):
    rng = np.random.default_rng(seed)
    model = random_model(rng, n)
    q = q_bivariate_from_model(model)
    marginal = q_from_model(model)
    marginal.check()
    all_sets = subsets(n)
    for A in all_sets:
        assert q(A, A) == marginal(A)
        for B in all_sets:
            assert q(A, B) == q(B, A)
    # each pair of layers is a probability distribution
    by_size = {k: [s for s in all_sets if len(s) == k] for k in range(n + 1)}
    for a in range(n + 1):
        for b in range(n + 1):
            total = sum(q(A, B) for A in by_size[a] for B in by_size[b])
            assert total == 1
    # q(A, B) with B <= A sums over B of fixed size to q(A)
    for A in all_sets:
        for b in range(len(A) + 1):
            assert sum(q(A, B) for B in itertools.combinations(A, b)) == marginal(A)


def test_uniform_quality_object():
    q = UniformQuality(3)
    assert q.source == "q0"
    assert q([1, 2], [2]) == q0(3, [1, 2], [2])
    assert q_bivariate_from_model(uniform_model(3)).source == "model"
