"""Acceptance sets over the scenario coordinates ``(s, i) -> s * d + i``."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Sequence, Tuple

from .errors import AssumptionError, ConsistencyError
from .geometry import LiftedPolyhedron, minkowski_sum, recession_ray_check
from .lp import Constraint, Fraction, LinearProgram, Rel, ValidationError, Verdict, solve, to_fraction
from .scenario import ScenarioSpace

__all__ = [
    "AcceptanceSet",
    "worst_case",
    "expectation_set",
    "expected_shortfall_set",
    "es_value",
    "es_value_lp",
    "es_dual_value",
    "minkowski_augment",
]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class AcceptanceSet:
    """A closed convex set ``A`` of positions with ``A + orthant <= A``.

    Monotonicity and properness are verified on construction (pass
    ``check=False`` to skip when the caller has already done it).
    """

    space: ScenarioSpace
    d: int
    body: LiftedPolyhedron
    is_cone: bool
    label: str
    params: Dict = field(default_factory=dict, compare=False)
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        if self.body.main_dim != self.space.n * self.d:
            raise ValidationError("acceptance body must live on n*d coordinates")
        if self.check:
            self.verify()

    @property
    def dim(self) -> int:
        return self.space.n * self.d

    def unit(self, k: int, sign: int = 1) -> Tuple[Fraction, ...]:
        e = [ZERO] * self.dim
        e[k] = Fraction(sign)
        return tuple(e)

    def verify(self) -> None:
        if not self.body.nonempty:
            raise AssumptionError(f"{self.label}: acceptance set is empty")
        for k in range(self.dim):
            if not recession_ray_check(self.body, self.unit(k)):
                raise AssumptionError(f"{self.label}: not upward closed along coordinate {k}")
        if all(recession_ray_check(self.body, self.unit(k, -1)) for k in range(self.dim)):
            raise AssumptionError(f"{self.label}: acceptance set is the whole space")

    def member(self, X) -> bool:
        return self.body.member(X.flat)

    @cached_property
    def cone(self) -> LiftedPolyhedron:
        """Recession cone of the body."""
        return self.body.homogenized()


def _row(width, entries, rel, rhs) -> Constraint:
    a = [ZERO] * width
    for j, v in entries:
        a[j] += v
    return Constraint(tuple(a), rel, rhs)


def worst_case(space: ScenarioSpace, d: int) -> AcceptanceSet:
    """Positions that are nonnegative in every scenario and coordinate."""
    body = LiftedPolyhedron.orthant(space.n * d)
    return AcceptanceSet(space, d, body, True, "worst_case")


def expectation_set(space: ScenarioSpace, d: int = 1) -> AcceptanceSet:
    """Scalar positions with nonnegative mean."""
    if d != 1:
        raise ValidationError("the expectation acceptance set is scalar (d = 1)")
    row = Constraint(space.probs, Rel.GE, ZERO)
    return AcceptanceSet(space, 1, LiftedPolyhedron(space.n, 0, (row,)), True, "expectation")


def _check_alpha(alpha) -> Fraction:
    alpha = to_fraction(alpha)
    if not 0 < alpha < 1:
        raise ValidationError(f"ES level must lie in (0, 1), got {alpha}")
    return alpha


def expected_shortfall_set(space: ScenarioSpace, d: int, alpha: Sequence) -> AcceptanceSet:
    """``{X : ES_{alpha_i}(X_i) <= 0 for all i}`` in Rockafellar-Uryasev form.

    Lifts per coordinate ``i``: a threshold ``t_i`` and excess variables
    ``u_{s,i} >= max(t_i - X_{s,i}, 0)`` with ``(1/alpha_i) E[u_i] <= t_i``.
    """
    alpha = tuple(_check_alpha(a) for a in alpha)
    if len(alpha) != d:
        raise ValidationError(f"need {d} ES levels, got {len(alpha)}")
    n = space.n
    main = n * d
    width = main + d * (n + 1)
    rows = []
    for i in range(d):
        t = main + i * (n + 1)
        for s in range(n):
            u = t + 1 + s
            rows.append(_row(width, [(u, ONE)], Rel.GE, ZERO))
            rows.append(_row(width, [(u, ONE), (t, -ONE), (s * d + i, ONE)], Rel.GE, ZERO))
        entries = [(t, ONE)] + [(t + 1 + s, -space.probs[s] / alpha[i]) for s in range(n)]
        rows.append(_row(width, entries, Rel.GE, ZERO))
    body = LiftedPolyhedron(main, width - main, tuple(rows))
    return AcceptanceSet(
        space, d, body, True, "expected_shortfall", {"alpha": alpha}
    )


def es_value_lp(space: ScenarioSpace, column: Sequence, alpha) -> Fraction:
    """``min_t { -t + (1/alpha) E[(t - X)^+] }`` solved as an LP."""
    alpha = _check_alpha(alpha)
    x = [to_fraction(v) for v in column]
    n = space.n
    # variables: t, u_1..u_n
    obj = (-ONE,) + tuple(p / alpha for p in space.probs)
    rows = []
    for s in range(n):
        rows.append(_row(n + 1, [(1 + s, ONE), (0, -ONE)], Rel.GE, -x[s]))
    bounds = ((None, None),) + ((ZERO, None),) * n
    out = solve(LinearProgram(obj, tuple(rows), bounds=bounds))
    if out.verdict is not Verdict.OPTIMAL:
        raise ConsistencyError(f"ES minimisation ended {out.verdict.value}")
    return out.value


def es_dual_value(space: ScenarioSpace, column: Sequence, alpha) -> Fraction:
    """``max { E[-X Z] : 0 <= Z <= 1/alpha, E[Z] = 1 }``."""
    alpha = _check_alpha(alpha)
    x = [to_fraction(v) for v in column]
    obj = tuple(-p * v for p, v in zip(space.probs, x))
    rows = (Constraint(space.probs, Rel.EQ, ONE),)
    bounds = ((ZERO, 1 / alpha),) * space.n
    out = solve(LinearProgram(obj, rows, sense="max", bounds=bounds))
    if out.verdict is not Verdict.OPTIMAL:
        raise ConsistencyError(f"ES dual ended {out.verdict.value}")
    return out.value


def es_value(space: ScenarioSpace, column: Sequence, alpha, cross_check: bool = True) -> Fraction:
    """Expected Shortfall from the lower quantile function.

    The atoms are sorted and the left-continuous quantile is integrated over
    ``(0, alpha]``.  With ``cross_check`` the result must match
    :func:`es_value_lp` exactly.
    """
    alpha = _check_alpha(alpha)
    x = [to_fraction(v) for v in column]
    if len(x) != space.n:
        raise ValidationError("column length does not match the space")
    integral = ZERO
    mass = ZERO
    for v, p in sorted(zip(x, space.probs)):
        take = min(p, alpha - mass)
        if take <= 0:
            break
        integral += take * v
        mass += take
    value = -integral / alpha
    if cross_check:
        other = es_value_lp(space, x, alpha)
        if other != value:
            raise ConsistencyError(f"ES quantile form {value} != LP form {other}")
    return value


def minkowski_augment(A: AcceptanceSet, cones: Sequence[LiftedPolyhedron], label: str = None) -> AcceptanceSet:
    """``A + C_1 + ... + C_k`` with one lift block per summand."""
    cones = tuple(cones)
    if not cones:
        return A
    for c in cones:
        if c.main_dim != A.dim:
            raise ValidationError("summand lives on the wrong number of coordinates")
    body = minkowski_sum(A.body, *cones)
    try:
        return AcceptanceSet(
            A.space,
            A.d,
            body,
            A.is_cone and all(c.is_cone for c in cones),
            label or f"{A.label}+{len(cones)}",
            dict(A.params),
        )
    except AssumptionError as exc:
        raise AssumptionError(f"augmented set violates the standing assumptions: {exc}") from exc
