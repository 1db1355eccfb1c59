import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from families import random_vector
from setrisk.acceptance import worst_case
from setrisk.errors import ConsistencyError
from setrisk.geometry import Halfspace, LiftedPolyhedron, contains
from setrisk.lp import NEG_INF, ValidationError
from setrisk.risk import facet_directions, rho_dual, risk_region
from setrisk.scenario import RandomVector, ScenarioSpace, expectation, pair
from setrisk.systemic import (
    Aggregator,
    aggregate,
    aggregated_support,
    box_support,
    conjugate,
    conjugate_closed_form,
    preimage_acceptance,
)

L23 = Aggregator.weighted_losses([2, 3])
KINK = Aggregator((((1, 0), (2, -1), (0, 3)),))  # min(x, 2x - 1, 3)
HALF = ScenarioSpace.uniform(2)


def test_aggregate_examples():
    assert aggregate(L23, (0, 0)) == 0
    assert aggregate(L23, (1, -1)) == -2
    assert aggregate(L23, (F(1, 2), 4)) == F(9, 2)
    with pytest.raises(ValidationError):
        aggregate(L23, (1,))


def test_aggregator_validation():
    with pytest.raises(ValidationError):
        Aggregator.weighted_losses([1, 2])
    with pytest.raises(ValidationError):
        Aggregator((((-1, 0),),))
    with pytest.raises(ValidationError):
        Aggregator(((),))
    assert L23.is_positively_homogeneous and not KINK.is_positively_homogeneous


def test_preimage_examples():
    one = ScenarioSpace.uniform(1)
    A = preimage_acceptance(L23, one)
    assert [str(h) for h in risk_region(A, RandomVector.zeros(one, 2)).halfspaces] == [
        "[1 1/2] >= 0",
        "[1 3] >= 0",
    ]
    B = preimage_acceptance(Aggregator.weighted_losses([2]), HALF)
    X = RandomVector(HALF, ((2,), (-2,)))
    assert risk_region(B, X).contains_point((1,))
    assert A.is_cone and not preimage_acceptance(KINK, one).is_cone


def test_conjugate_examples():
    assert conjugate(L23, (1, 1)) == 0
    assert conjugate(L23, (F(1, 2), 1)) == NEG_INF
    assert conjugate(L23, (2, 3)) == 0
    for z, value in [(0, -3), (F(1, 2), F(-3, 2)), (1, 0), (F(3, 2), F(1, 2)), (2, 1), (3, NEG_INF)]:
        assert conjugate(KINK, (z,)) == value == conjugate_closed_form(KINK, (z,))


def test_support_examples():
    L = Aggregator.weighted_losses([2, 2])
    ones = RandomVector.constant(HALF, (1, 1))
    assert aggregated_support(L, HALF, ones) == 0
    assert aggregated_support(L, HALF, RandomVector.zeros(HALF, 2)) == 0
    assert aggregated_support(L, HALF, RandomVector(HALF, ((1, 3), (1, 1)))) == NEG_INF
    with pytest.raises(ValidationError):
        box_support(KINK, RandomVector.zeros(HALF, 1))


def test_other_base_skips_the_box_formula():
    A = preimage_acceptance(Aggregator.weighted_losses([2]), HALF, worst_case(HALF, 1))
    Z = RandomVector(HALF, ((0,), (2,)))
    # worst case base admits scenario-wise densities the expectation base rejects
    assert aggregated_support(Aggregator.weighted_losses([2]), HALF, Z, A) == 0
    assert box_support(Aggregator.weighted_losses([2]), Z) == NEG_INF


def _grid(alpha):
    axes = [sorted({F(0), F(1), (1 + F(a)) / 2, F(a), F(a) + 1}) for a in alpha]
    return itertools.product(*axes)


@pytest.mark.parametrize("alpha", [(2, 3), (F(3, 2), 4), (5, F(5, 4))])
def test_conjugate_matches_box_formula_on_grid(alpha):
    L = Aggregator.weighted_losses(alpha)
    for z in _grid(alpha):
        inside = all(1 <= zi <= a for zi, a in zip(z, alpha))
        assert conjugate(L, z) == (0 if inside else NEG_INF) == conjugate_closed_form(L, z)


slopes = st.integers(0, 4).map(F)
intercepts = st.integers(-3, 3).map(F)


@given(st.lists(st.tuples(slopes, intercepts), min_size=1, max_size=4), st.fractions(-1, 5, max_denominator=3))
def test_conjugate_lp_matches_breakpoint_formula(pieces, z):
    L = Aggregator((tuple(pieces),))
    assert conjugate(L, (z,)) == conjugate_closed_form(L, (z,))


@pytest.mark.parametrize("alpha", [(2, 3), (F(3, 2),), (4, F(5, 4), 2)])
def test_lift_is_exact(alpha):
    L = Aggregator.weighted_losses(alpha)
    space = ScenarioSpace((F(1, 2), F(1, 3), F(1, 6)))
    A = preimage_acceptance(L, space)
    rng = random.Random(len(alpha))
    for _ in range(25):
        X = random_vector(rng, space, L.d, -2, 2)
        direct = sum(p * aggregate(L, row) for p, row in zip(space.probs, X.values)) >= 0
        assert A.member(X) == direct


def test_support_routes_agree_on_random_densities():
    L = Aggregator.weighted_losses([2, 3])
    A = preimage_acceptance(L, HALF)
    rng = random.Random(8)
    for _ in range(30):
        if rng.random() < 0.5:
            lam = F(rng.randint(0, 4), 2)
            Z = RandomVector(HALF, tuple(
                tuple(lam * (1 + F(rng.randint(0, 4), 4) * (a - 1)) for a in L.alpha) for _ in range(2)
            ))
        else:
            Z = random_vector(rng, HALF, 2, 0, 3)
        assert aggregated_support(L, HALF, Z, A) == box_support(L, Z)


def test_disagreement_is_a_hard_failure(monkeypatch):
    import setrisk.systemic as mod

    monkeypatch.setattr(mod, "box_support", lambda L, Z: NEG_INF)
    with pytest.raises(ConsistencyError):
        mod.aggregated_support(L23, HALF, RandomVector.constant(HALF, (1, 1)))


@pytest.mark.parametrize("L", [L23, Aggregator.weighted_losses([F(3, 2), 4])])
def test_dual_representation_of_the_region(L):
    A = preimage_acceptance(L, HALF)
    rng = random.Random(4)
    for _ in range(3):
        X = random_vector(rng, HALF, 2)
        region = risk_region(A, X)
        cuts = []
        for w in facet_directions(region):
            cert = rho_dual(A, X, w).certificate
            assert expectation(cert.Z) == tuple(w.w)
            sigma = aggregated_support(L, HALF, cert.Z, A)
            cuts.append(Halfspace(w.w, sigma - pair(X, cert.Z)))
        P = LiftedPolyhedron.from_halfspaces(2, cuts)
        assert contains(P, region.system) and contains(region.projection, P)
