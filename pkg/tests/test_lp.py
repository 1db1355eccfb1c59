import dataclasses
import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import lp_min_over_polytope
from setrisk.lp import (
    INF,
    NEG_INF,
    Constraint,
    LinearProgram,
    Rel,
    ValidationError,
    Verdict,
    solve,
    to_fraction,
    verify_certificates,
)


def test_single_lower_bound_row():
    lp = LinearProgram((1,), [Constraint((1,), ">=", 3)])
    out = solve(lp)
    assert out.verdict is Verdict.OPTIMAL
    assert out.value == 3
    assert out.dual == (1,)
    assert verify_certificates(lp, out)


def test_empty_interval_is_infeasible_with_farkas():
    lp = LinearProgram((1,), [Constraint((1,), ">=", 3), Constraint((1,), "<=", 2)])
    out = solve(lp)
    assert out.verdict is Verdict.INFEASIBLE
    assert all(out.farkas)
    assert verify_certificates(lp, out)
    assert out.extended_value == INF


def test_triangle_vertex_selected_by_bland():
    lp = LinearProgram(
        (-1, -1), [Constraint((1, 2), "<=", 4)], bounds=((0, None), (0, None))
    )
    out = solve(lp)
    assert out.value == -4
    assert out.primal == (4, 0)
    assert out.dual == (-1,)
    assert verify_certificates(lp, out)


def test_unbounded_has_ray():
    lp = LinearProgram((-1, 0), [Constraint((1, -1), "<=", 1)], bounds=((0, None), (0, None)))
    out = solve(lp)
    assert out.verdict is Verdict.UNBOUNDED
    assert out.extended_value == NEG_INF
    assert verify_certificates(lp, out)


def test_max_sense_and_equality_rows():
    lp = LinearProgram(
        (1, 1, 0),
        [Constraint((1, 1, 1), "==", 2), Constraint((1, -1, 0), "<=", 1)],
        sense="max",
        bounds=((0, None), (0, None), (0, None)),
    )
    out = solve(lp)
    assert out.value == 2
    assert verify_certificates(lp, out)
    unbounded = solve(LinearProgram((1,), [], sense="max"))
    assert unbounded.extended_value == INF


def test_perturbed_certificates_are_rejected():
    lp = LinearProgram((1,), [Constraint((1,), ">=", 3)])
    out = solve(lp)
    assert not verify_certificates(lp, dataclasses.replace(out, value=out.value + 1))
    bad = LinearProgram((1,), [Constraint((1,), ">=", 3), Constraint((1,), "<=", 2)])
    inf = solve(bad)
    assert not verify_certificates(bad, dataclasses.replace(inf, farkas=(F(0), F(0))))


def test_zero_rows_are_dropped_or_detected():
    ok = LinearProgram((1,), [Constraint((0,), ">=", -1), Constraint((1,), ">=", 0)])
    assert solve(ok).value == 0
    bad = LinearProgram((1,), [Constraint((0,), ">=", 1)])
    out = solve(bad)
    assert out.verdict is Verdict.INFEASIBLE
    assert verify_certificates(bad, out)


def test_validation():
    with pytest.raises(ValidationError):
        LinearProgram((1, 2), [Constraint((1,), ">=", 0)])
    with pytest.raises(ValidationError):
        LinearProgram((1,), bounds=((2, 1),))
    with pytest.raises(ValidationError):
        to_fraction(0.5)
    with pytest.raises(ValueError):
        Constraint((1,), "<", 0)


def _random_polytope_lp(rng, n, m):
    """Random rows plus a box, so the feasible set is a bounded polytope."""
    rows = []
    for _ in range(m):
        a = tuple(F(rng.randint(-4, 4)) for _ in range(n))
        rows.append((a, F(rng.randint(-3, 6))))
    for j in range(n):
        e = tuple(F(1 if k == j else 0) for k in range(n))
        rows.append((e, F(5)))
        rows.append((tuple(-v for v in e), F(5)))
    c = tuple(F(rng.randint(-5, 5), rng.randint(1, 3)) for _ in range(n))
    return c, rows


def test_random_polytopes_against_vertex_enumeration():
    rng = random.Random(7)
    for _ in range(60):
        n, m = rng.randint(1, 3), rng.randint(1, 4)
        c, rows = _random_polytope_lp(rng, n, m)
        lp = LinearProgram(c, [Constraint(a, Rel.LE, b) for a, b in rows])
        out = solve(lp)
        assert verify_certificates(lp, out)
        expected = lp_min_over_polytope(c, rows)
        if expected is None:
            assert out.verdict is Verdict.INFEASIBLE
        else:
            assert out.value == expected


small = st.integers(-4, 4).map(F)


@st.composite
def lps(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(0, 4))
    rows = [
        Constraint(
            tuple(draw(small) for _ in range(n)),
            draw(st.sampled_from(list(Rel))),
            draw(small),
        )
        for _ in range(m)
    ]
    bounds = tuple(
        draw(st.sampled_from([(None, None), (0, None), (None, 0), (-1, 2)])) for _ in range(n)
    )
    c = tuple(draw(small) for _ in range(n))
    return LinearProgram(c, rows, sense=draw(st.sampled_from(["min", "max"])), bounds=bounds)


@given(lps())
def test_every_outcome_is_certified(lp):
    assert verify_certificates(lp, solve(lp))


@given(lps())
def test_solve_is_pure(lp):
    assert solve(lp) == solve(lp)


@given(lps(), st.lists(st.integers(1, 6), min_size=5, max_size=5), st.integers(1, 5))
def test_positive_rescaling_changes_nothing(lp, factors, kappa):
    scaled = LinearProgram(
        tuple(F(kappa, 2) * c for c in lp.objective),
        [
            Constraint(tuple(F(f, 3) * a for a in r.coeffs), r.rel, F(f, 3) * r.rhs)
            for f, r in zip(factors, lp.constraints)
        ],
        sense=lp.sense,
        bounds=lp.bounds,
    )
    a, b = solve(lp), solve(scaled)
    assert a.verdict is b.verdict
    assert a.primal == b.primal
