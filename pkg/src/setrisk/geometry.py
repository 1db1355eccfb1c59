"""Polyhedra given by lifted linear systems.

A :class:`LiftedPolyhedron` represents the set of main-variable points ``x``
for which auxiliary ``y`` exist with ``(x, y)`` satisfying every row.  Sets
stay in this form until an explicit halfspace description is asked for, which
:func:`project` produces by Fourier-Motzkin elimination with LP pruning.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

from .lp import (
    NEG_INF,
    Constraint,
    ExtendedRational,
    Fraction,
    LinearProgram,
    LpOutcome,
    Rel,
    ValidationError,
    Verdict,
    solve,
    to_fraction,
)

__all__ = [
    "Halfspace",
    "LiftedPolyhedron",
    "Projection",
    "Containment",
    "support",
    "support_outcome",
    "in_barrier",
    "project",
    "contains",
    "recession_ray_check",
    "qint_member",
    "minkowski_sum",
    "canonical_text",
]

ZERO = Fraction(0)


def _vec(v) -> Tuple[Fraction, ...]:
    return tuple(to_fraction(a) for a in v)


def _dot(a, b) -> Fraction:
    return sum((u * w for u, w in zip(a, b) if u and w), ZERO)


@dataclass(frozen=True, order=True)
class Halfspace:
    """``{x : <normal, x> >= offset}``, or ``==`` when ``equality`` is set."""

    normal: Tuple[Fraction, ...]
    offset: Fraction
    equality: bool = False

    def __post_init__(self):
        normal = _vec(self.normal)
        if not any(normal):
            raise ValidationError("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", to_fraction(self.offset))

    def contains(self, x: Sequence) -> bool:
        v = _dot(self.normal, _vec(x))
        return v == self.offset if self.equality else v >= self.offset

    def normalized(self) -> "Halfspace":
        """Scale so the first nonzero coefficient has absolute value one.

        Inequalities keep their orientation; equalities get a positive
        leading coefficient.
        """
        lead = next(a for a in self.normal if a)
        scale = abs(lead)
        if self.equality and lead < 0:
            scale = lead
        return Halfspace(
            tuple(a / scale for a in self.normal), self.offset / scale, self.equality
        )

    def as_row(self, lift_dim: int = 0) -> Constraint:
        return Constraint(
            self.normal + (ZERO,) * lift_dim, Rel.EQ if self.equality else Rel.GE, self.offset
        )

    def __str__(self):
        terms = " ".join(str(a) for a in self.normal)
        return f"[{terms}] {'==' if self.equality else '>='} {self.offset}"


@dataclass(frozen=True)
class LiftedPolyhedron:
    main_dim: int
    lift_dim: int
    rows: Tuple[Constraint, ...]

    def __post_init__(self):
        if self.main_dim < 0 or self.lift_dim < 0:
            raise ValidationError("dimensions must be nonnegative")
        rows = []
        width = self.main_dim + self.lift_dim
        for row in self.rows:
            if not isinstance(row, Constraint):
                row = Constraint(*row)
            if len(row.coeffs) != width:
                raise ValidationError(
                    f"row has {len(row.coeffs)} coefficients, expected {width}"
                )
            rows.append(row)
        object.__setattr__(self, "rows", tuple(rows))

    @classmethod
    def from_halfspaces(cls, dim: int, halfspaces: Iterable[Halfspace]) -> "LiftedPolyhedron":
        return cls(dim, 0, tuple(h.as_row() for h in halfspaces))

    @classmethod
    def orthant(cls, dim: int) -> "LiftedPolyhedron":
        rows = []
        for i in range(dim):
            e = [ZERO] * dim
            e[i] = Fraction(1)
            rows.append(Constraint(tuple(e), Rel.GE, ZERO))
        return cls(dim, 0, tuple(rows))

    @classmethod
    def whole_space(cls, dim: int) -> "LiftedPolyhedron":
        return cls(dim, 0, ())

    @property
    def width(self) -> int:
        return self.main_dim + self.lift_dim

    @property
    def is_cone(self) -> bool:
        return all(row.rhs == 0 for row in self.rows)

    def member(self, x: Sequence) -> bool:
        """Membership of the main-variable point ``x`` (an LP over the lifts)."""
        x = _vec(x)
        if len(x) != self.main_dim:
            raise ValidationError("point has the wrong dimension")
        return self.fix_main(x).nonempty

    def fix_main(self, x: Sequence[Fraction]) -> "LiftedPolyhedron":
        """The lift fibre over ``x`` as a polyhedron in the lift variables."""
        rows = []
        for row in self.rows:
            shift = _dot(row.coeffs[: self.main_dim], x)
            rows.append(Constraint(row.coeffs[self.main_dim:], row.rel, row.rhs - shift))
        return LiftedPolyhedron(self.lift_dim, 0, tuple(rows))

    def lp(self, objective_main: Sequence[Fraction], sense="min") -> LinearProgram:
        obj = _vec(objective_main) + (ZERO,) * self.lift_dim
        return LinearProgram(obj, self.rows, sense=sense)

    @cached_property
    def feasibility(self) -> LpOutcome:
        return solve(self.lp((ZERO,) * self.main_dim))

    @property
    def nonempty(self) -> bool:
        return self.feasibility.verdict is not Verdict.INFEASIBLE

    @cached_property
    def projection(self) -> "Projection":
        return project(self)

    def homogenized(self) -> "LiftedPolyhedron":
        """Recession cone of the lifted system (same lifts, zero right-hand sides)."""
        return LiftedPolyhedron(
            self.main_dim,
            self.lift_dim,
            tuple(Constraint(r.coeffs, r.rel, ZERO) for r in self.rows),
        )

    def scaled(self, lam) -> "LiftedPolyhedron":
        """``{lam * x : x in P}`` for ``lam > 0``."""
        lam = to_fraction(lam)
        if lam <= 0:
            raise ValidationError("scale factor must be positive")
        k = self.main_dim
        rows = tuple(
            Constraint(tuple(a / lam for a in r.coeffs[:k]) + r.coeffs[k:], r.rel, r.rhs)
            for r in self.rows
        )
        return LiftedPolyhedron(k, self.lift_dim, rows)

    def intersect(self, other: "LiftedPolyhedron") -> "LiftedPolyhedron":
        if other.main_dim != self.main_dim:
            raise ValidationError("dimension mismatch")
        k = self.main_dim
        pad_a = (ZERO,) * other.lift_dim
        pad_b = (ZERO,) * self.lift_dim
        rows = [Constraint(r.coeffs + pad_a, r.rel, r.rhs) for r in self.rows]
        rows += [
            Constraint(r.coeffs[:k] + pad_b + r.coeffs[k:], r.rel, r.rhs) for r in other.rows
        ]
        return LiftedPolyhedron(k, self.lift_dim + other.lift_dim, tuple(rows))


def minkowski_sum(*polys: LiftedPolyhedron) -> LiftedPolyhedron:
    """``P_1 + ... + P_k``; each summand after the first gets its own lift block.

    The first summand is eliminated by substitution: ``x - sum(others)`` must
    satisfy its rows.
    """
    if not polys:
        raise ValidationError("need at least one summand")
    k = polys[0].main_dim
    if any(p.main_dim != k for p in polys):
        raise ValidationError("dimension mismatch")
    first, rest = polys[0], polys[1:]
    # lift layout: [first lifts][q_1 main, q_1 lifts][q_2 main, q_2 lifts]...
    offsets = []
    pos = first.lift_dim
    for p in rest:
        offsets.append(pos)
        pos += p.width
    width = k + pos
    rows = []
    for r in first.rows:
        a = list(r.coeffs[:k]) + list(r.coeffs[k:]) + [ZERO] * (pos - first.lift_dim)
        for off, p in zip(offsets, rest):
            for i in range(k):
                a[k + off + i] = -r.coeffs[i]
        rows.append(Constraint(tuple(a), r.rel, r.rhs))
    for off, p in zip(offsets, rest):
        for r in p.rows:
            a = [ZERO] * width
            a[k + off:k + off + p.width] = r.coeffs
            rows.append(Constraint(tuple(a), r.rel, r.rhs))
    return LiftedPolyhedron(k, pos, tuple(rows))


# --------------------------------------------------------------------------
# support function and barrier cone


def _check_arity(P: LiftedPolyhedron, v) -> Tuple[Fraction, ...]:
    v = _vec(v)
    if len(v) != P.main_dim:
        raise ValidationError(f"vector of length {len(v)} for dimension {P.main_dim}")
    return v


def support_outcome(P: LiftedPolyhedron, psi: Sequence) -> LpOutcome:
    return solve(P.lp(_check_arity(P, psi)))


def support(P: LiftedPolyhedron, psi: Sequence) -> ExtendedRational:
    """``inf { <psi, x> : x in P }``: ``NEG_INF`` off the barrier cone, ``INF`` if P is empty."""
    return support_outcome(P, psi).extended_value


def in_barrier(P: LiftedPolyhedron, psi: Sequence) -> bool:
    return support(P, psi) > NEG_INF


# --------------------------------------------------------------------------
# projection


@dataclass(frozen=True)
class Projection:
    """Explicit halfspace form of a projected polyhedron.

    ``empty`` flags the empty set; the whole space is ``halfspaces == ()``.
    """

    dim: int
    halfspaces: Tuple[Halfspace, ...]
    empty: bool = False

    @property
    def whole_space(self) -> bool:
        return not self.empty and not self.halfspaces

    def polyhedron(self) -> LiftedPolyhedron:
        if self.empty:
            # 0 >= 1
            return LiftedPolyhedron(self.dim, 0, (Constraint((ZERO,) * self.dim, Rel.GE, 1),))
        return LiftedPolyhedron.from_halfspaces(self.dim, self.halfspaces)

    def contains_point(self, x) -> bool:
        return not self.empty and all(h.contains(x) for h in self.halfspaces)


class _Row:
    """Working ``a . z >= b`` (or ``==``) over the current variable list."""

    __slots__ = ("a", "b", "eq")

    def __init__(self, a, b, eq=False):
        self.a = a
        self.b = b
        self.eq = eq

    def key(self):
        return (self.eq, self.a, self.b)


def _primitive(a, b):
    """Scale ``(a, b)`` by a positive factor so ``a`` is a primitive integer vector."""
    vals = [v for v in a if v]
    if not vals:
        return a, b
    den = 1
    for v in vals:
        den = den * v.denominator // math.gcd(den, v.denominator)
    g = 0
    for v in vals:
        g = math.gcd(g, v.numerator * (den // v.denominator))
    s = Fraction(den, g)
    if s == 1:
        return a, b
    return tuple(v * s for v in a), b * s


class _Empty(Exception):
    pass


def _tidy(rows: List[_Row]) -> List[_Row]:
    """Drop trivial rows, merge parallel ones, detect equality pairs."""
    ineq = {}
    eqs = {}
    for r in rows:
        if not any(r.a):
            if (r.eq and r.b != 0) or (not r.eq and r.b > 0):
                raise _Empty
            continue
        a, b = _primitive(r.a, r.b)
        if r.eq:
            lead = next(v for v in a if v)
            if lead < 0:
                a, b = tuple(-v for v in a), -b
            if a in eqs and eqs[a] != b:
                raise _Empty
            eqs[a] = b
        elif a not in ineq or b > ineq[a]:
            ineq[a] = b
    # a >= b together with -a >= -b' : need b <= b'
    for a in list(ineq):
        if a not in ineq:
            continue
        neg = tuple(-v for v in a)
        if neg in ineq:
            lo, hi = ineq[a], -ineq[neg]
            if lo > hi:
                raise _Empty
            if lo == hi:
                del ineq[a], ineq[neg]
                lead = next(v for v in a if v)
                ea, eb = (a, lo) if lead > 0 else (neg, -lo)
                if ea in eqs and eqs[ea] != eb:
                    raise _Empty
                eqs[ea] = eb
    out = [_Row(a, b, True) for a, b in eqs.items()]
    out += [_Row(a, b) for a, b in ineq.items()]
    out.sort(key=_Row.key)
    return out


def _as_constraints(rows: List[_Row]) -> List[Constraint]:
    return [Constraint(r.a, Rel.EQ if r.eq else Rel.GE, r.b) for r in rows]


def _implied(cons: List[Constraint], a, b, eq: bool) -> bool:
    """Whether the system ``cons`` (nonempty) implies ``a.z >= b`` (or ``==``)."""
    lo = solve(LinearProgram(a, cons))
    if lo.verdict is not Verdict.OPTIMAL or lo.value < b:
        return False
    if not eq:
        return True
    hi = solve(LinearProgram(a, cons, sense="max"))
    return hi.verdict is Verdict.OPTIMAL and hi.value <= b


def _prune(rows: List[_Row]) -> List[_Row]:
    """Remove LP-redundant rows one at a time, in canonical order."""
    kept = list(rows)
    i = 0
    while i < len(kept):
        others = _as_constraints(kept[:i] + kept[i + 1:])
        r = kept[i]
        if others and _implied(others, r.a, r.b, r.eq):
            del kept[i]
        else:
            i += 1
    return kept


def _substitute(rows: List[_Row], pivot: _Row, k: int) -> List[_Row]:
    """Eliminate variable ``k`` using the equality ``pivot``."""
    ak = pivot.a[k]
    out = []
    for r in rows:
        f = r.a[k]
        if f:
            a = tuple(u - f * v / ak for u, v in zip(r.a, pivot.a))
            out.append(_Row(a[:k] + a[k + 1:], r.b - f * pivot.b / ak, r.eq))
        else:
            out.append(_Row(r.a[:k] + r.a[k + 1:], r.b, r.eq))
    return out


def _eliminate(rows: List[_Row], k: int) -> List[_Row]:
    """One Fourier-Motzkin step on variable ``k`` (no equalities may involve it)."""
    pos, neg, out = [], [], []
    for r in rows:
        c = r.a[k]
        if c > 0:
            pos.append(r)
        elif c < 0:
            neg.append(r)
        else:
            out.append(_Row(r.a[:k] + r.a[k + 1:], r.b, r.eq))
    for p in pos:
        cp = p.a[k]
        for n in neg:
            cn = -n.a[k]
            a = tuple(u / cp + v / cn for u, v in zip(p.a, n.a))
            out.append(_Row(a[:k] + a[k + 1:], p.b / cp + n.b / cn))
    return out


def project(P: LiftedPolyhedron) -> Projection:
    """Eliminate the lift variables of ``P``.

    The result is an irredundant halfspace list (every halfspace is tight and
    dropping any of them enlarges the set), normalized and sorted.
    """
    k = P.main_dim
    if not P.nonempty:
        return Projection(k, (), empty=True)
    rows = []
    for r in P.rows:
        if r.rel is Rel.LE:
            rows.append(_Row(tuple(-a for a in r.coeffs), -r.rhs))
        else:
            rows.append(_Row(r.coeffs, r.rhs, r.rel is Rel.EQ))
    n_lift = P.lift_dim
    try:
        rows = _tidy(rows)
        # equalities touching a lift variable: Gaussian substitution
        while True:
            found = None
            for r in rows:
                if r.eq:
                    j = next((j for j in range(k, k + n_lift) if r.a[j]), None)
                    if j is not None:
                        found = (r, j)
                        break
            if found is None:
                break
            pivot, j = found
            rows = _tidy(_substitute([r for r in rows if r is not pivot], pivot, j))
            n_lift -= 1
        while n_lift:
            best = None
            for j in range(k, k + n_lift):
                npos = sum(1 for r in rows if r.a[j] > 0)
                nneg = sum(1 for r in rows if r.a[j] < 0)
                cost = npos * nneg - npos - nneg
                if best is None or cost < best[0]:
                    best = (cost, j)
            before = len(rows)
            rows = _tidy(_eliminate(rows, best[1]))
            n_lift -= 1
            if len(rows) > before:
                rows = _prune(rows)
        rows = _prune(rows)
    except _Empty:
        # cannot happen for a feasible P, kept as a guard
        return Projection(k, (), empty=True)
    hs = sorted(Halfspace(r.a, r.b, r.eq).normalized() for r in rows)
    return Projection(k, tuple(hs))


def canonical_text(proj: Projection) -> str:
    """Line-per-halfspace text used by golden tests."""
    if proj.empty:
        return "empty\n"
    return "".join(f"{h}\n" for h in proj.halfspaces)


# --------------------------------------------------------------------------
# containment, recession directions, quasi interior


@dataclass(frozen=True)
class Containment:
    holds: bool
    witness: Optional[Tuple[Fraction, ...]] = None
    violated: Optional[Halfspace] = None

    def __bool__(self):
        return self.holds


def _as_projection(P) -> Projection:
    return P if isinstance(P, Projection) else P.projection


def contains(P, Q: LiftedPolyhedron) -> Containment:
    """Decide ``proj(Q) <= proj(P)``.

    ``P`` may be given already projected.  On failure the witness is a point
    of ``Q`` violating the returned halfspace of ``P``.
    """
    HP = _as_projection(P)
    if HP.dim != Q.main_dim:
        raise ValidationError("dimension mismatch")
    if not Q.nonempty:
        return Containment(True)
    if HP.empty:
        x = Q.feasibility.primal[: Q.main_dim]
        return Containment(False, tuple(x), None)
    for h in HP.halfspaces:
        senses = ("min", "max") if h.equality else ("min",)
        for sense in senses:
            out = solve(Q.lp(h.normal, sense=sense))
            x = out.primal[: Q.main_dim]
            if out.verdict is Verdict.OPTIMAL:
                bad = out.value < h.offset if sense == "min" else out.value > h.offset
                if bad:
                    return Containment(False, tuple(x), h)
                continue
            # unbounded: walk along the ray until the halfspace breaks
            d = out.ray[: Q.main_dim]
            hx, hd = _dot(h.normal, x), _dot(h.normal, d)
            gap = (hx - h.offset) / -hd if sense == "min" else (h.offset - hx) / hd
            t = max(gap, ZERO) + 1
            return Containment(False, tuple(a + t * b for a, b in zip(x, d)), h)
    return Containment(True)


def recession_ray_check(P: LiftedPolyhedron, v: Sequence) -> bool:
    """Whether ``v`` is a recession direction of ``proj(P)`` (P nonempty)."""
    v = _check_arity(P, v)
    if not P.nonempty:
        raise ValidationError("recession cone of an empty set is undefined here")
    return P.homogenized().member(v)


def qint_member(C: LiftedPolyhedron, v: Sequence) -> bool:
    """Quasi-interior membership for a polyhedral cone.

    ``v`` must lie in ``C`` and pair strictly positively with every generator
    of the dual cone.  The dual generators are the normals of the projected
    inequalities; an equality puts a line into the dual cone, which no ``v``
    can pair strictly positively with.
    """
    v = _check_arity(C, v)
    if not C.is_cone:
        raise ValidationError("qint_member needs a cone (all right-hand sides zero)")
    if not C.member(v):
        return False
    for h in C.projection.halfspaces:
        if h.equality or _dot(h.normal, v) <= 0:
            return False
    return True
