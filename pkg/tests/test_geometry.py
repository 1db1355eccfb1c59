from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import vertices
from setrisk.geometry import (
    Halfspace,
    LiftedPolyhedron,
    canonical_text,
    contains,
    in_barrier,
    minkowski_sum,
    project,
    qint_member,
    recession_ray_check,
    support,
)
from setrisk.lp import INF, NEG_INF, Constraint, ValidationError


def poly(dim, *hs):
    return LiftedPolyhedron.from_halfspaces(dim, [Halfspace(tuple(a), F(b)) for a, b in hs])


ORTHANT = LiftedPolyhedron.orthant(2)
SIMPLEXISH = poly(2, ((1, 1), 1), ((1, 0), 0), ((0, 1), 0))


def hull(points):
    """Convex hull of ``points`` as a lifted system ``x = sum lam_k p_k``."""
    dim, k = len(points[0]), len(points)
    rows = []
    for i in range(dim):
        rows.append(Constraint(tuple(1 if j == i else 0 for j in range(dim)) + tuple(-p[i] for p in points), "==", 0))
    rows.append(Constraint((0,) * dim + (1,) * k, "==", 1))
    for j in range(k):
        rows.append(Constraint((0,) * dim + tuple(1 if t == j else 0 for t in range(k)), ">=", 0))
    return LiftedPolyhedron(dim, k, tuple(rows))


def cone(gens):
    dim, k = len(gens[0]), len(gens)
    rows = []
    for i in range(dim):
        rows.append(Constraint(tuple(1 if j == i else 0 for j in range(dim)) + tuple(-g[i] for g in gens), "==", 0))
    for j in range(k):
        rows.append(Constraint((0,) * dim + tuple(1 if t == j else 0 for t in range(k)), ">=", 0))
    return LiftedPolyhedron(dim, k, tuple(rows))


def test_support_examples():
    assert support(ORTHANT, (1, 1)) == 0
    assert support(ORTHANT, (1, -1)) == NEG_INF
    assert support(SIMPLEXISH, (2, 3)) == 2
    assert support(poly(1, ((1,), 1), ((-1,), 0)), (1,)) == INF
    with pytest.raises(ValidationError):
        support(ORTHANT, (1,))


def test_barrier_examples():
    box = poly(2, ((1, 0), -1), ((-1, 0), -1), ((0, 1), -1), ((0, -1), -1))
    assert in_barrier(box, (7, -3))
    assert not in_barrier(ORTHANT, (0, -1))
    assert not in_barrier(poly(2, ((1, 0), 0)), (1, 1))


def test_projection_examples():
    # (x, y): y >= x, y >= -x, y <= 1, eliminate y
    P = LiftedPolyhedron(1, 1, (
        Constraint((-1, 1), ">=", 0),
        Constraint((1, 1), ">=", 0),
        Constraint((0, -1), ">=", -1),
    ))
    assert canonical_text(P.projection) == "[-1] >= -1\n[1] >= -1\n"
    redundant = poly(2, ((1, 0), 0), ((0, 1), 0), ((1, 1), -1))
    assert canonical_text(project(redundant)) == "[0 1] >= 0\n[1 0] >= 0\n"
    contradictory = poly(1, ((1,), 1), ((-1,), 0))
    assert project(contradictory).empty
    assert canonical_text(project(contradictory)) == "empty\n"


def test_equalities_survive_projection():
    P = LiftedPolyhedron(2, 1, (
        Constraint((1, 0, -1), "==", 0),
        Constraint((0, 1, -2), "==", 0),
        Constraint((0, 0, 1), ">=", 0),
    ))
    proj = P.projection
    assert any(h.equality for h in proj.halfspaces)
    assert proj.contains_point((1, 2)) and not proj.contains_point((1, 1))


def test_containment_examples():
    P = poly(2, ((1, 0), 0), ((0, 1), 0))
    Q = poly(2, ((1, 0), -1), ((0, 1), 1))
    assert contains(P, P)
    fwd = contains(P, Q)
    assert not fwd
    assert Q.member(fwd.witness) and not P.projection.contains_point(fwd.witness)
    assert fwd.witness == (-1, 1)
    back = contains(Q, P)
    assert not back
    assert P.member(back.witness) and not Q.projection.contains_point(back.witness)
    assert contains(poly(2, ((0, 1), 0)), poly(2, ((0, 1), 1)))


def test_unbounded_witness_is_a_point_outside():
    P = poly(2, ((1, 0), 0))
    Q = poly(2, ((0, 1), 0))
    res = contains(P, Q)
    assert not res and Q.member(res.witness) and not P.projection.contains_point(res.witness)


def test_recession_examples():
    assert recession_ray_check(ORTHANT, (0, 0))
    assert recession_ray_check(ORTHANT, (1, 0))
    assert not recession_ray_check(SIMPLEXISH, (1, -1))
    with pytest.raises(ValidationError):
        recession_ray_check(poly(1, ((1,), 1), ((-1,), 0)), (1,))


def test_qint_examples():
    assert qint_member(ORTHANT, (1, 1))
    assert not qint_member(ORTHANT, (1, 0))
    assert qint_member(poly(2, ((1, 0), 0)), (1, 0))
    with pytest.raises(ValidationError):
        qint_member(SIMPLEXISH, (1, 1))


coords = st.integers(-3, 3).map(F)
points2 = st.lists(st.tuples(coords, coords), min_size=1, max_size=5, unique=True)


def _as_le_rows(halfspaces):
    rows = []
    for h in halfspaces:
        rows.append((tuple(-a for a in h.normal), -h.offset))
        if h.equality:
            rows.append((h.normal, h.offset))
    return rows


@given(points2)
def test_projection_of_hull_matches_vertex_oracle(pts):
    proj = hull(pts).projection
    assert not proj.empty
    for h in proj.halfspaces:
        values = [sum(a * x for a, x in zip(h.normal, p)) for p in pts]
        # valid and tight
        assert min(values) == h.offset
        if h.equality:
            assert max(values) == h.offset
    # bounded case: every vertex of the halfspace description is an input point
    box = [((1, 0), 10), ((-1, 0), 10), ((0, 1), 10), ((0, -1), 10)]
    for v in vertices(_as_le_rows(proj.halfspaces) + box):
        assert v in set(pts)


@given(points2, st.lists(st.tuples(coords, coords), min_size=1, max_size=2))
def test_projection_agrees_with_fibre_membership(pts, probes):
    # hull plus a cone: still lifted, possibly unbounded
    P = minkowski_sum(hull(pts), cone([(1, 0), (1, 1)]))
    proj = P.projection
    for x in probes + [pts[0]]:
        assert proj.contains_point(x) == P.member(x)


@given(points2, st.tuples(coords, coords), st.integers(1, 6))
def test_support_is_positively_homogeneous(pts, psi, lam):
    P = hull(pts)
    assert support(P, tuple(lam * v for v in psi)) == lam * support(P, psi)


@given(points2, points2, st.tuples(coords, coords))
def test_support_is_additive_on_minkowski_sums(a, b, psi):
    P, Q = hull(a), hull(b)
    assert support(minkowski_sum(P, Q), psi) == support(P, psi) + support(Q, psi)


@given(points2, points2)
def test_mutual_containment_is_set_equality(a, b):
    P, Q = hull(a), hull(b)
    p_in_q = all(Q.projection.contains_point(x) for x in a)
    q_in_p = all(P.projection.contains_point(x) for x in b)
    assert bool(contains(P, Q)) == q_in_p
    assert bool(contains(Q, P)) == p_in_q
    if contains(P, Q) and contains(Q, P):
        assert P.projection == Q.projection


gens2 = st.lists(st.tuples(coords, coords).filter(any), min_size=1, max_size=3)


@given(gens2, st.tuples(coords, coords))
def test_cone_support_is_zero_or_minus_infinity(gens, psi):
    C = cone(gens)
    value = support(C, psi)
    assert value in (0, NEG_INF)
    in_dual = all(sum(p * g for p, g in zip(psi, gen)) >= 0 for gen in gens)
    assert in_barrier(C, psi) == in_dual


@given(points2)
def test_facets_are_tight(pts):
    P = minkowski_sum(hull(pts), LiftedPolyhedron.orthant(2))
    for h in P.projection.halfspaces:
        assert support(P, h.normal) == h.offset


def test_canonical_text_is_sorted_and_normalized():
    P = poly(2, ((0, 3), 3), ((2, 0), -4))
    assert canonical_text(P.projection) == "[0 1] >= 1\n[1 0] >= -2\n"
    assert str(Halfspace((F(-2), F(4)), F(6)).normalized()) == "[-1 2] >= 3"
