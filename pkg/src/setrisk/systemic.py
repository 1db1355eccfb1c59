"""Systemic risk: capital injected per entity before a concave aggregation.

An aggregator is separable, ``Lambda(x) = sum_i min_j (a_ij x_i + b_ij)``,
with nonnegative slopes.  The acceptable systems are the preimage of a scalar
acceptance set (by default ``E[.] >= 0``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .acceptance import AcceptanceSet, expectation_set
from .errors import ConsistencyError
from .geometry import LiftedPolyhedron, support
from .lp import (
    NEG_INF,
    Constraint,
    ExtendedRational,
    Fraction,
    LinearProgram,
    Rel,
    ValidationError,
    Verdict,
    solve,
    to_fraction,
)
from .scenario import RandomVector, ScenarioSpace

__all__ = [
    "Aggregator",
    "aggregate",
    "preimage_acceptance",
    "conjugate",
    "conjugate_closed_form",
    "aggregated_support",
    "box_support",
]

ZERO = Fraction(0)
ONE = Fraction(1)

Piece = Tuple[Fraction, Fraction]  # slope, intercept


@dataclass(frozen=True)
class Aggregator:
    """Affine pieces per coordinate; coordinate ``i`` contributes their minimum."""

    pieces: Tuple[Tuple[Piece, ...], ...]
    kind: str = "custom"
    alpha: Optional[Tuple[Fraction, ...]] = None

    def __post_init__(self):
        pieces = tuple(
            tuple((to_fraction(a), to_fraction(b)) for a, b in coord) for coord in self.pieces
        )
        if not pieces or any(not coord for coord in pieces):
            raise ValidationError("every coordinate needs at least one affine piece")
        if any(a < 0 for coord in pieces for a, _ in coord):
            raise ValidationError("aggregator must be nondecreasing (slopes >= 0)")
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def weighted_losses(cls, alpha: Sequence) -> "Aggregator":
        """``sum_i max(x_i, 0) + alpha_i min(x_i, 0)`` with every ``alpha_i > 1``."""
        alpha = tuple(to_fraction(a) for a in alpha)
        if not alpha or any(a <= 1 for a in alpha):
            raise ValidationError("loss weights must all exceed 1")
        pieces = tuple(((ONE, ZERO), (a, ZERO)) for a in alpha)
        return cls(pieces, "weighted_losses", alpha)

    @property
    def d(self) -> int:
        return len(self.pieces)

    @property
    def is_positively_homogeneous(self) -> bool:
        return all(b == 0 for coord in self.pieces for _, b in coord)

    def slope_range(self, i: int) -> Tuple[Fraction, Fraction]:
        slopes = [a for a, _ in self.pieces[i]]
        return min(slopes), max(slopes)


def aggregate(L: Aggregator, x: Sequence) -> Fraction:
    x = tuple(to_fraction(v) for v in x)
    if len(x) != L.d:
        raise ValidationError(f"expected {L.d} entries, got {len(x)}")
    return sum((min(a * v + b for a, b in coord) for coord, v in zip(L.pieces, x)), ZERO)


def preimage_acceptance(
    L: Aggregator, space: ScenarioSpace, base: Optional[AcceptanceSet] = None
) -> AcceptanceSet:
    """``{X : Lambda(X) in base}`` with one lift ``y_{s,i} <= Lambda_i(X_{s,i})`` per entry.

    ``base`` is a scalar acceptance set on the same space (default: the
    expectation set).  Its rows are applied to ``sum_i y_{s,i}``.
    """
    base = base or expectation_set(space)
    if base.d != 1 or base.space != space:
        raise ValidationError("base acceptance set must be scalar on the same space")
    n, d = space.n, L.d
    N = n * d
    extra = base.body.lift_dim
    width = N + N + extra
    rows = []
    for s in range(n):
        for i in range(d):
            for a, b in L.pieces[i]:
                row = [ZERO] * width
                row[s * d + i] = a
                row[N + s * d + i] = -ONE
                rows.append(Constraint(tuple(row), Rel.GE, -b))
    for r in base.body.rows:
        row = [ZERO] * width
        for s in range(n):
            for i in range(d):
                row[N + s * d + i] = r.coeffs[s]
        row[2 * N:] = r.coeffs[n:]
        rows.append(Constraint(tuple(row), r.rel, r.rhs))
    body = LiftedPolyhedron(N, N + extra, tuple(rows))
    params = {"aggregator": L, "base": base.label}
    return AcceptanceSet(
        space, d, body, base.is_cone and L.is_positively_homogeneous, "systemic", params
    )


def conjugate(L: Aggregator, z: Sequence) -> ExtendedRational:
    """``inf_x { <x, z> - Lambda(x) }`` as an LP in ``(x, t)`` with ``t_i <= Lambda_i(x_i)``."""
    z = tuple(to_fraction(v) for v in z)
    if len(z) != L.d:
        raise ValidationError(f"expected {L.d} entries, got {len(z)}")
    d = L.d
    obj = z + (-ONE,) * d
    rows = []
    for i in range(d):
        for a, b in L.pieces[i]:
            row = [ZERO] * (2 * d)
            row[i] = a
            row[d + i] = -ONE
            rows.append(Constraint(tuple(row), Rel.GE, -b))
    out = solve(LinearProgram(obj, tuple(rows), bounds=((None, None),) * (2 * d)))
    if out.verdict is Verdict.INFEASIBLE:
        raise ConsistencyError("conjugate LP cannot be infeasible")
    return out.extended_value


def conjugate_closed_form(L: Aggregator, z: Sequence) -> ExtendedRational:
    """Coordinatewise: ``-inf`` unless ``z_i`` lies between the extreme slopes.

    Inside, ``x z_i - Lambda_i(x)`` is convex piecewise linear and its minimum
    sits at a breakpoint (or is ``-b`` for a single slope equal to ``z_i``).
    For weighted losses this is 0 on the box ``[1, alpha_1] x ... x [1, alpha_d]``.
    """
    z = tuple(to_fraction(v) for v in z)
    if len(z) != L.d:
        raise ValidationError(f"expected {L.d} entries, got {len(z)}")
    total = ZERO
    for i, zi in enumerate(z):
        lo, hi = L.slope_range(i)
        if not lo <= zi <= hi:
            return NEG_INF
        coord = L.pieces[i]
        points = set()
        for a1, b1 in coord:
            for a2, b2 in coord:
                if a1 != a2:
                    points.add((b2 - b1) / (a1 - a2))
        if not points:
            # all slopes equal zi; Lambda_i(x) = zi x + min b
            total += -min(b for _, b in coord)
            continue
        total += min(x * zi - min(a * x + b for a, b in coord) for x in points)
    return total


def box_support(L: Aggregator, Z: RandomVector) -> ExtendedRational:
    """0 if some ``lam >= 0`` has ``lam * min_slope <= Z_{s,i} <= lam * max_slope``, else ``-inf``.

    Solved as a one-variable feasibility LP.
    """
    if not L.is_positively_homogeneous:
        raise ValidationError("the box formula needs an aggregator without intercepts")
    rows = []
    for s in range(Z.space.n):
        for i in range(L.d):
            lo, hi = L.slope_range(i)
            z = Z.values[s][i]
            rows.append(Constraint((lo,), Rel.LE, z))
            rows.append(Constraint((hi,), Rel.GE, z))
    out = solve(LinearProgram((ZERO,), tuple(rows), bounds=((ZERO, None),)))
    return ZERO if out.verdict is Verdict.OPTIMAL else NEG_INF


def aggregated_support(
    L: Aggregator, space: ScenarioSpace, Z: RandomVector, A: Optional[AcceptanceSet] = None
) -> ExtendedRational:
    """Support of the preimage set at ``Z``, from the lifted LP and the box formula.

    The two must agree; the box route applies to the default base set and
    aggregators without intercepts, otherwise only the LP value is returned.
    """
    if Z.space != space or Z.d != L.d:
        raise ValidationError("dual element does not match the space or dimension")
    A = A or preimage_acceptance(L, space)
    psi = tuple(space.probs[s] * v for s, row in enumerate(Z.values) for v in row)
    value = support(A.body, psi)
    if L.is_positively_homogeneous and A.params.get("base") == "expectation":
        other = box_support(L, Z)
        if other != value:
            raise ConsistencyError(f"support LP gives {value}, box formula gives {other}")
    return value
