"""Set-valued risk regions, their scalarizations and dual certificates.

For an acceptance set ``A`` and a position ``X`` the risk region is

    R(X) = { m in M : X + m in A },

where ``M`` is the span of the coordinates listed in ``mask`` (all of
``R^d`` by default).  ``rho(A, X, w)`` is the cheapest ``<w, m>`` over
``R(X)``; ``rho_dual`` computes the same number from the other side, as a
supremum over random vectors ``Z`` with ``E[Z] = w`` on the mask.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .acceptance import AcceptanceSet
from .errors import AssumptionError, ConsistencyError
from .geometry import (
    Halfspace,
    LiftedPolyhedron,
    Projection,
    minkowski_sum,
    qint_member,
    recession_ray_check,
    support,
)
from .lp import (
    INF,
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
from .scenario import RandomVector, expectation, pair

__all__ = [
    "Direction",
    "RiskRegion",
    "DualElement",
    "DualResult",
    "FinitenessReport",
    "resolve_mask",
    "risk_region",
    "region_system",
    "rho",
    "rho_dual",
    "dual_feasible",
    "finiteness_report",
    "facet_directions",
]

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Direction:
    """A nonzero nonnegative weight vector on the eligible coordinates."""

    w: Tuple[Fraction, ...]

    def __post_init__(self):
        w = tuple(to_fraction(v) for v in self.w)
        if not w or any(v < 0 for v in w) or not any(w):
            raise ValidationError(f"direction must be nonnegative and nonzero, got {w}")
        object.__setattr__(self, "w", w)

    def normalized(self) -> "Direction":
        total = sum(self.w)
        return Direction(tuple(v / total for v in self.w))

    def __len__(self):
        return len(self.w)

    def __iter__(self):
        return iter(self.w)


def _as_direction(w) -> Direction:
    return w if isinstance(w, Direction) else Direction(tuple(w))


def resolve_mask(d: int, mask: Optional[Sequence[int]]) -> Tuple[int, ...]:
    """Eligible coordinates, 0-based and sorted.  Empty masks violate ``M cap K != {0}``."""
    if mask is None:
        return tuple(range(d))
    out = tuple(sorted(set(int(i) for i in mask)))
    if not out:
        raise AssumptionError("the eligible subspace must contain a nonzero positive vector")
    if out[0] < 0 or out[-1] >= d:
        raise ValidationError(f"mask {list(mask)} out of range for d = {d}")
    return out


def _check_position(A: AcceptanceSet, X: RandomVector):
    if X.space != A.space or X.d != A.d:
        raise ValidationError("position does not match the acceptance set's space or dimension")


def region_system(A: AcceptanceSet, X: RandomVector, mask=None) -> LiftedPolyhedron:
    """Lifted system in ``(m, lifts)`` describing ``R(X)``."""
    _check_position(A, X)
    mask = resolve_mask(A.d, mask)
    d, n, N = A.d, A.space.n, A.dim
    xflat = X.flat
    rows = []
    for r in A.body.rows:
        a = r.coeffs
        m_coef = tuple(sum((a[s * d + i] for s in range(n)), ZERO) for i in mask)
        shift = sum((c * v for c, v in zip(a[:N], xflat) if c and v), ZERO)
        rows.append(Constraint(m_coef + a[N:], r.rel, r.rhs - shift))
    return LiftedPolyhedron(len(mask), A.body.lift_dim, tuple(rows))


@dataclass(frozen=True)
class RiskRegion:
    acceptance: AcceptanceSet
    X: RandomVector
    mask: Tuple[int, ...]
    system: LiftedPolyhedron
    projection: Projection

    @property
    def halfspaces(self) -> Tuple[Halfspace, ...]:
        return self.projection.halfspaces

    @property
    def empty(self) -> bool:
        return self.projection.empty

    def contains_point(self, m) -> bool:
        return self.projection.contains_point(tuple(to_fraction(v) for v in m))


def risk_region(A: AcceptanceSet, X: RandomVector, mask=None) -> RiskRegion:
    mask = resolve_mask(A.d, mask)
    system = region_system(A, X, mask)
    proj = system.projection
    if proj.whole_space:
        raise AssumptionError("risk region is the whole eligible space for this acceptance set")
    return RiskRegion(A, X, mask, system, proj)


def facet_directions(region: RiskRegion) -> Tuple[Direction, ...]:
    """Simplex-normalized normals of the region's inequalities."""
    out = []
    for h in region.halfspaces:
        if h.equality or any(v < 0 for v in h.normal):
            # cannot occur for upward-closed regions
            raise ConsistencyError(f"region facet {h} is not a positive direction")
        out.append(Direction(h.normal).normalized())
    return tuple(out)


def rho(A: AcceptanceSet, X: RandomVector, pi, mask=None) -> ExtendedRational:
    """``inf { <w, m> : m in M, X + m in A }``."""
    w = _as_direction(pi)
    mask = resolve_mask(A.d, mask)
    if len(w) != len(mask):
        raise ValidationError(f"direction has {len(w)} entries for {len(mask)} eligible coordinates")
    return support(region_system(A, X, mask), w.w)


@dataclass(frozen=True)
class DualElement:
    """``Z`` with ``E[Z] = w`` on the eligible coordinates, and ``sigma = sigma_A(Z)``."""

    Z: RandomVector
    w: Direction
    sigma: Fraction
    mask: Tuple[int, ...]

    def functional(self) -> Tuple[Fraction, ...]:
        """``Z`` as a linear functional on the flattened coordinates: ``p_s Z_{s,i}``."""
        probs = self.Z.space.probs
        return tuple(probs[s] * v for s, row in enumerate(self.Z.values) for v in row)

    def check(self, A: AcceptanceSet) -> bool:
        if any(v < 0 for v in self.Z.flat):
            return False
        ez = expectation(self.Z)
        if tuple(ez[i] for i in self.mask) != self.w.w:
            return False
        return support(A.body, self.functional()) == self.sigma


@dataclass(frozen=True)
class DualResult:
    value: ExtendedRational
    certificate: Optional[DualElement] = None


def _dual_program(A: AcceptanceSet, X: RandomVector, w: Direction, mask) -> LinearProgram:
    """Maximize ``sigma - E[<X, Z>]`` over multipliers ``y`` of the acceptance rows.

    ``Z`` is read off as ``y^T`` (rows restricted to the main coordinates);
    lift columns must cancel and ``E[Z] = w`` on the eligible coordinates.
    """
    d, n, N = A.d, A.space.n, A.dim
    rows = A.body.rows
    xflat = X.flat
    obj = tuple(
        r.rhs - sum((c * v for c, v in zip(r.coeffs[:N], xflat) if c and v), ZERO) for r in rows
    )
    cons = []
    for lift in range(A.body.lift_dim):
        col = N + lift
        cons.append(Constraint(tuple(r.coeffs[col] for r in rows), Rel.EQ, ZERO))
    for j, i in enumerate(mask):
        coef = tuple(sum((r.coeffs[s * d + i] for s in range(n)), ZERO) for r in rows)
        cons.append(Constraint(coef, Rel.EQ, w.w[j]))
    bounds = tuple(
        (ZERO, None) if r.rel is Rel.GE else (None, ZERO) if r.rel is Rel.LE else (None, None)
        for r in rows
    )
    return LinearProgram(obj, tuple(cons), sense="max", bounds=bounds)


def dual_feasible(A: AcceptanceSet, pi, mask=None) -> bool:
    """Whether some ``Z`` in the barrier cone has ``E[Z] = w`` on the eligible coordinates."""
    w = _as_direction(pi)
    mask = resolve_mask(A.d, mask)
    if len(w) != len(mask):
        raise ValidationError(f"direction has {len(w)} entries for {len(mask)} eligible coordinates")
    lp = _dual_program(A, RandomVector.zeros(A.space, A.d), w, mask)
    probe = LinearProgram((ZERO,) * len(lp.objective), lp.constraints, bounds=lp.bounds)
    return solve(probe).verdict is not Verdict.INFEASIBLE


def rho_dual(A: AcceptanceSet, X: RandomVector, pi, mask=None) -> DualResult:
    """``sup { sigma_A(Z) - E[<X, Z>] : E[Z] = w on M }`` with an optimal ``Z``.

    The supremum is solved as its own LP over multipliers of the acceptance
    rows, independently of :func:`rho`.  The returned certificate is checked
    by recomputing ``sigma_A(Z)`` with a third LP.
    """
    _check_position(A, X)
    w = _as_direction(pi)
    mask = resolve_mask(A.d, mask)
    if len(w) != len(mask):
        raise ValidationError(f"direction has {len(w)} entries for {len(mask)} eligible coordinates")
    d, n, N = A.d, A.space.n, A.dim
    rows = A.body.rows
    out = solve(_dual_program(A, X, w, mask))
    if out.verdict is Verdict.INFEASIBLE:
        return DualResult(NEG_INF)
    if out.verdict is Verdict.UNBOUNDED:
        return DualResult(INF)
    y = out.primal
    psi = [ZERO] * N
    for yk, r in zip(y, rows):
        if yk:
            for j in range(N):
                if r.coeffs[j]:
                    psi[j] += yk * r.coeffs[j]
    probs = A.space.probs
    Z = RandomVector(A.space, tuple(tuple(psi[s * d + i] / probs[s] for i in range(d)) for s in range(n)))
    sigma = support(A.body, psi)
    if not isinstance(sigma, Fraction):
        raise ConsistencyError(f"dual optimizer lies outside the barrier cone (sigma = {sigma})")
    cert = DualElement(Z, w, sigma, mask)
    if sigma - pair(X, Z) != out.value:
        raise ConsistencyError(f"dual value {out.value} != sigma - E[XZ] = {sigma - pair(X, Z)}")
    if any(v < 0 for v in Z.flat):
        raise ConsistencyError("dual optimizer has negative entries")
    return DualResult(out.value, cert)


# --------------------------------------------------------------------------
# finiteness diagnostics


@dataclass(frozen=True)
class FinitenessReport:
    whole_space_sum: bool  # L = A + M
    meets_qint_orthant: bool  # M cap qint(K) nonempty
    meets_qint_recession: bool  # M cap qint(rec A) nonempty
    witness_orthant: Optional[Tuple[Fraction, ...]] = None
    witness_recession: Optional[Tuple[Fraction, ...]] = None

    @property
    def finite_guaranteed(self) -> bool:
        return self.whole_space_sum or self.meets_qint_orthant or self.meets_qint_recession


def _embedding(A: AcceptanceSet, mask) -> LiftedPolyhedron:
    """The eligible subspace inside the flattened coordinates, lifted by ``m``."""
    d, n, N = A.d, A.space.n, A.dim
    k = len(mask)
    rows = []
    for s in range(n):
        for i in range(d):
            a = [ZERO] * (N + k)
            a[s * d + i] = ONE
            if i in mask:
                a[N + mask.index(i)] = -ONE
            rows.append(Constraint(tuple(a), Rel.EQ, ZERO))
    return LiftedPolyhedron(N, k, tuple(rows))


def _subspace_meets_qint(A: AcceptanceSet, cone: LiftedPolyhedron, mask) -> Optional[Tuple[Fraction, ...]]:
    """An eligible ``m`` in the interior of the upward-closed cone, or None.

    In finite dimensions the quasi interior of a closed cone is its interior
    (empty if the cone is not full-dimensional).  For cones containing the
    orthant, ``x`` is interior iff ``x - eps * 1`` stays in the cone for some
    ``eps > 0``, which is one LP in ``(m, eps, lifts)``.
    """
    d, n, N = A.d, A.space.n, A.dim
    k = len(mask)
    rows = []
    for r in cone.rows:
        a = r.coeffs
        m_coef = tuple(sum((a[s * d + i] for s in range(n)), ZERO) for i in mask)
        eps_coef = -sum(a[:N], ZERO)
        rows.append(Constraint(m_coef + (eps_coef,) + a[N:], r.rel, r.rhs))
    width = k + 1 + cone.lift_dim
    obj = [ZERO] * width
    obj[k] = ONE
    bounds = [(None, None)] * width
    bounds[k] = (None, ONE)
    out = solve(LinearProgram(tuple(obj), tuple(rows), sense="max", bounds=tuple(bounds)))
    if out.verdict is not Verdict.OPTIMAL or out.value <= 0:
        return None
    return out.primal[:k]


def finiteness_report(A: AcceptanceSet, mask=None) -> FinitenessReport:
    """Which sufficient conditions for ``rho_pi < inf`` everywhere hold."""
    mask = resolve_mask(A.d, mask)
    summed = minkowski_sum(A.body, _embedding(A, mask))
    N = A.dim
    whole = True
    for j in range(N):
        e = [ZERO] * N
        e[j] = -ONE
        if not recession_ray_check(summed, e):
            whole = False
            break
    orthant = LiftedPolyhedron.orthant(N)
    w_orth = _subspace_meets_qint(A, orthant, mask)
    w_rec = _subspace_meets_qint(A, A.cone, mask)
    for wit, cone in ((w_orth, orthant), (w_rec, A.cone)):
        if wit is not None and cone.lift_dim == 0:
            x = _embed(A, mask, wit)
            if not qint_member(cone, x):
                raise ConsistencyError("interior witness fails the dual-generator test")
    return FinitenessReport(whole, w_orth is not None, w_rec is not None, w_orth, w_rec)


def _embed(A: AcceptanceSet, mask, m) -> Tuple[Fraction, ...]:
    full = [ZERO] * A.d
    for j, i in enumerate(mask):
        full[i] = m[j]
    return tuple(full) * A.space.n
