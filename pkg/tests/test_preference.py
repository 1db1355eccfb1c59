import random
from fractions import Fraction as F

import pytest

from conftest import FIXTURES
from families import FAMILIES, acceptance_sets, instances, random_vector
from setrisk.instance import load_instance
from setrisk.lp import NEG_INF
from setrisk.preference import (
    Relation,
    compare,
    is_pruned,
    multi_utility_check,
    probe_grid,
    utility_value,
)
from setrisk.risk import rho, rho_dual
from setrisk.scenario import RandomVector


def test_masked_orthant_verdicts():
    inst = load_instance(FIXTURES / "masked_orthant.json")
    A, M = inst.acceptance, inst.mask
    zero, y, dom = inst.vector("zero"), inst.vector("y"), inst.vector("dominant")
    verdict = compare(A, zero, y, M)
    assert verdict.relation is Relation.INCOMPARABLE
    for sep in (verdict.not_x_over_y, verdict.not_y_over_x):
        assert sep.rho_better > sep.rho_worse
    assert compare(A, y, y, M).relation is Relation.EQUIVALENT
    assert compare(A, dom, zero, M).relation is Relation.X_PREFERRED
    assert compare(A, zero, dom, M).relation is Relation.Y_PREFERRED
    assert multi_utility_check(A, zero, y, M).agree


def test_half_orthant_pairs_are_comparable():
    inst = load_instance(FIXTURES / "half_orthant.json")
    A, M = inst.acceptance, inst.mask
    assert compare(A, inst.vector("x"), inst.vector("y"), M).relation is Relation.Y_PREFERRED
    rng = random.Random(5)
    for _ in range(10):
        X = random_vector(rng, A.space, 3, 0, 3)
        Y = random_vector(rng, A.space, 3, 0, 3)
        assert compare(A, X, Y, M).relation is not Relation.INCOMPARABLE


def test_probe_grid():
    grid = probe_grid(2, 2)
    assert [d.w for d in grid] == [(0, 1), (F(1, 2), F(1, 2)), (1, 0)]
    assert all(sum(d.w) == 1 for d in probe_grid(3))


def test_utility_is_minus_rho():
    A = acceptance_sets("worst_case")[0]
    X = RandomVector(A.space, ((1, 2), (-1, 0)))
    assert utility_value(A, X, (1, 1)) == -rho(A, X, (1, 1))
    assert utility_value(A, X, (1, 1), dual=True) == -rho_dual(A, X, (1, 1)).value


@pytest.mark.parametrize("family", FAMILIES)
def test_preorder_axioms(family):
    rng = random.Random(family)
    for A, X, Y, _ in instances(family, 5, 21):
        assert compare(A, X, X).relation is Relation.EQUIVALENT
        # adding a nonnegative position never makes things worse
        better = X + random_vector(rng, A.space, A.d, 0, 2)
        assert compare(A, better, X).relation in (Relation.X_PREFERRED, Relation.EQUIVALENT)
        # transitivity along X -> mix -> Y when both steps hold
        Z = random_vector(rng, A.space, A.d)
        xy, yz = compare(A, X, Y).relation, compare(A, Y, Z).relation
        ok = (Relation.X_PREFERRED, Relation.EQUIVALENT)
        if xy in ok and yz in ok:
            assert compare(A, X, Z).relation in ok


@pytest.mark.parametrize("family", FAMILIES)
def test_upper_level_sets_are_convex(family):
    for A, X, Y, _ in instances(family, 4, 22):
        if compare(A, X, Y).relation not in (Relation.X_PREFERRED, Relation.EQUIVALENT):
            continue
        mix = X.scale(F(1, 2)) + Y.scale(F(1, 2))
        assert compare(A, mix, Y).relation in (Relation.X_PREFERRED, Relation.EQUIVALENT)


@pytest.mark.parametrize("family", FAMILIES)
def test_scalar_verdict_agrees_and_pruned_directions_are_inert(family):
    for A, X, Y, _ in instances(family, 5, 23):
        record = multi_utility_check(A, X, Y)
        assert record.agree
        for w in record.pruned:
            assert is_pruned(A, w)
            assert rho(A, X, w) == rho(A, Y, w) == NEG_INF
