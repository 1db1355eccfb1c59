import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from setrisk.acceptance import (
    AcceptanceSet,
    es_dual_value,
    es_value,
    es_value_lp,
    expectation_set,
    expected_shortfall_set,
    minkowski_augment,
    worst_case,
)
from setrisk.errors import AssumptionError
from setrisk.geometry import LiftedPolyhedron, contains, in_barrier, support
from setrisk.lp import NEG_INF, Constraint, ValidationError
from setrisk.scenario import RandomVector, ScenarioSpace

HALF = ScenarioSpace.uniform(2)


def rv(space, *rows):
    return RandomVector(space, tuple(tuple(r) for r in rows))


def test_worst_case():
    one = worst_case(ScenarioSpace.uniform(1), 1)
    assert one.member(rv(one.space, (0,))) and not one.member(rv(one.space, (-1,)))
    A = worst_case(HALF, 1)
    assert A.is_cone
    assert not A.member(rv(HALF, (1,), (-1,)))
    assert support(A.body, (F(1, 2), F(1, 2))) == 0


def test_expectation_set():
    A = expectation_set(HALF)
    assert A.member(rv(HALF, (1,), (-1,)))
    assert not A.member(rv(HALF, (-1,), (-1,)))
    assert in_barrier(A.body, (F(3, 2), F(3, 2)))
    assert not in_barrier(A.body, (1, 0))
    assert not in_barrier(A.body, (-1, -1))
    with pytest.raises(ValidationError):
        expectation_set(HALF, 2)


def test_expected_shortfall_set():
    A = expected_shortfall_set(HALF, 1, [F(1, 2)])
    assert not A.member(rv(HALF, (1,), (-1,)))
    assert A.member(rv(HALF, (1,), (1,)))
    with pytest.raises(ValidationError):
        expected_shortfall_set(HALF, 1, [1])
    with pytest.raises(ValidationError):
        expected_shortfall_set(HALF, 2, [F(1, 2)])


def test_es_value_examples():
    assert es_value(HALF, [F(3), F(3)], F(1, 3)) == -3
    assert es_value(HALF, [1, -1], F(1, 2)) == 1
    assert es_value(HALF, [1, -1], F(3, 4)) == F(1, 3)


def test_non_monotone_or_improper_sets_are_rejected():
    space = ScenarioSpace.uniform(1)
    down = LiftedPolyhedron(1, 0, (Constraint((1,), "<=", 0),))
    with pytest.raises(AssumptionError):
        AcceptanceSet(space, 1, down, True, "down")
    with pytest.raises(AssumptionError):
        AcceptanceSet(space, 1, LiftedPolyhedron.whole_space(1), True, "all")
    empty = LiftedPolyhedron(1, 0, (Constraint((0,), ">=", 1),))
    with pytest.raises(AssumptionError):
        AcceptanceSet(space, 1, empty, True, "empty")


def test_minkowski_augment():
    A = worst_case(HALF, 1)
    assert minkowski_augment(A, []) is A
    twice = minkowski_augment(A, [A.body])
    assert twice.is_cone
    assert contains(twice.body, A.body) and contains(A.body, twice.body)
    with pytest.raises(ValidationError):
        minkowski_augment(A, [LiftedPolyhedron.orthant(3)])


alphas = st.fractions(min_value=F(1, 10), max_value=F(9, 10), max_denominator=10).filter(lambda a: 0 < a < 1)
values = st.fractions(min_value=-4, max_value=4, max_denominator=3)


@st.composite
def es_instances(draw):
    n = draw(st.integers(1, 4))
    weights = [draw(st.integers(1, 4)) for _ in range(n)]
    space = ScenarioSpace(tuple(F(w, sum(weights)) for w in weights))
    d = draw(st.integers(1, 2))
    X = RandomVector(space, tuple(tuple(draw(values) for _ in range(d)) for _ in range(n)))
    return space, X, tuple(draw(alphas) for _ in range(d))


@given(es_instances())
def test_es_forms_coincide(inst):
    space, X, alpha = inst
    for i in range(X.d):
        col = X.column(i)
        v = es_value(space, col, alpha[i], cross_check=False)
        assert v == es_value_lp(space, col, alpha[i])
        assert v == es_dual_value(space, col, alpha[i])


@given(es_instances())
def test_es_lift_is_exact(inst):
    space, X, alpha = inst
    A = expected_shortfall_set(space, X.d, alpha)
    direct = all(es_value(space, X.column(i), alpha[i]) <= 0 for i in range(X.d))
    assert A.member(X) == direct


def test_cone_supports_are_zero_or_minus_infinity():
    rng = random.Random(3)
    space = ScenarioSpace((F(1, 4), F(1, 4), F(1, 2)))
    sets = [worst_case(space, 2), expected_shortfall_set(space, 2, [F(1, 3), F(1, 2)])]
    for A in sets:
        for _ in range(20):
            Z = tuple(F(rng.randint(-1, 4), rng.randint(1, 2)) for _ in range(A.dim))
            psi = tuple(space.probs[k // 2] * z for k, z in enumerate(Z))
            assert support(A.body, psi) in (0, NEG_INF)
