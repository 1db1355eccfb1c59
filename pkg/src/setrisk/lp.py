"""Exact rational linear programming.

A two-phase tableau simplex over :class:`fractions.Fraction` with Bland's
pivoting rule.  Every outcome carries a certificate that can be checked by
substitution with :func:`verify_certificates`:

* ``OPTIMAL``: a primal point and dual multipliers with zero duality gap,
* ``UNBOUNDED``: a feasible point and an improving feasible ray,
* ``INFEASIBLE``: a Farkas combination of the rows (independent of the
  objective, always in the minimisation sign convention).

Conventions for a minimisation problem ``min c.x`` with rows ``a_i.x REL b_i``
and per-variable bounds ``l_j <= x_j <= u_j``: the multiplier ``y_i`` of a
``>=`` row is ``>= 0``, of a ``<=`` row ``<= 0`` and of an ``==`` row free.
The bound multipliers are implied, ``r = c - A^T y``; ``r_j > 0`` needs a
finite lower bound and ``r_j < 0`` a finite upper bound.  For ``max`` problems
all multiplier signs flip.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple, Union

from gmpy2 import mpq

__all__ = [
    "Fraction",
    "INF",
    "NEG_INF",
    "Infinity",
    "ExtendedRational",
    "to_fraction",
    "Rel",
    "Sense",
    "Constraint",
    "LinearProgram",
    "Verdict",
    "LpOutcome",
    "solve",
    "verify_certificates",
    "ValidationError",
]


class ValidationError(ValueError):
    """Malformed input: wrong arity, bad relation, inconsistent bounds."""


class Infinity:
    """Signed infinity that orders correctly against rationals."""

    __slots__ = ("sign",)

    def __init__(self, sign: int):
        object.__setattr__(self, "sign", 1 if sign > 0 else -1)

    def __setattr__(self, name, value):
        raise AttributeError("Infinity is immutable")

    def __neg__(self):
        return NEG_INF if self.sign > 0 else INF

    def __repr__(self):
        return "INF" if self.sign > 0 else "NEG_INF"

    def __str__(self):
        return "inf" if self.sign > 0 else "-inf"

    def __hash__(self):
        return hash(("Infinity", self.sign))

    def __eq__(self, other):
        return isinstance(other, Infinity) and other.sign == self.sign

    def _key(self, other):
        if isinstance(other, Infinity):
            return self.sign, other.sign
        if isinstance(other, (int, Fraction)):
            return self.sign, 0
        return None

    def __lt__(self, other):
        k = self._key(other)
        return NotImplemented if k is None else k[0] < k[1]

    def __le__(self, other):
        k = self._key(other)
        return NotImplemented if k is None else k[0] <= k[1]

    def __gt__(self, other):
        k = self._key(other)
        return NotImplemented if k is None else k[0] > k[1]

    def __ge__(self, other):
        k = self._key(other)
        return NotImplemented if k is None else k[0] >= k[1]

    def __reduce__(self):
        return (_infinity, (self.sign,))


def _infinity(sign):
    return INF if sign > 0 else NEG_INF


INF = Infinity(1)
NEG_INF = Infinity(-1)

ExtendedRational = Union[Fraction, Infinity]


def to_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to Fraction.

    Floats are rejected: they would silently import rounding error.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {value!r}") from exc
    raise ValidationError(f"not an exact rational: {value!r}")


class Rel(str, enum.Enum):
    GE = ">="
    LE = "<="
    EQ = "=="

    def flip(self) -> "Rel":
        if self is Rel.GE:
            return Rel.LE
        if self is Rel.LE:
            return Rel.GE
        return self


class Sense(str, enum.Enum):
    MIN = "min"
    MAX = "max"


@dataclass(frozen=True)
class Constraint:
    coeffs: Tuple[Fraction, ...]
    rel: Rel
    rhs: Fraction

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(to_fraction(c) for c in self.coeffs))
        object.__setattr__(self, "rel", Rel(self.rel))
        object.__setattr__(self, "rhs", to_fraction(self.rhs))

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((a * v for a, v in zip(self.coeffs, x) if a), Fraction(0))

    def satisfied(self, x: Sequence[Fraction]) -> bool:
        lhs = self.value(x)
        if self.rel is Rel.GE:
            return lhs >= self.rhs
        if self.rel is Rel.LE:
            return lhs <= self.rhs
        return lhs == self.rhs


Bound = Tuple[Optional[Fraction], Optional[Fraction]]


@dataclass(frozen=True)
class LinearProgram:
    """``sense c.x`` subject to ``constraints`` and per-variable ``bounds``.

    ``bounds`` defaults to all-free; ``None`` in a bound pair means infinite.
    """

    objective: Tuple[Fraction, ...]
    constraints: Tuple[Constraint, ...] = ()
    sense: Sense = Sense.MIN
    bounds: Optional[Tuple[Bound, ...]] = None

    def __post_init__(self):
        obj = tuple(to_fraction(c) for c in self.objective)
        object.__setattr__(self, "objective", obj)
        cons = []
        for row in self.constraints:
            if not isinstance(row, Constraint):
                row = Constraint(*row)
            cons.append(row)
        object.__setattr__(self, "constraints", tuple(cons))
        object.__setattr__(self, "sense", Sense(self.sense))
        n = len(obj)
        for i, row in enumerate(cons):
            if len(row.coeffs) != n:
                raise ValidationError(
                    f"constraint {i} has {len(row.coeffs)} coefficients, expected {n}"
                )
        if self.bounds is None:
            bounds = tuple((None, None) for _ in range(n))
        else:
            if len(self.bounds) != n:
                raise ValidationError(f"{len(self.bounds)} bounds for {n} variables")
            bounds = tuple(
                (None if lo is None else to_fraction(lo), None if hi is None else to_fraction(hi))
                for lo, hi in self.bounds
            )
            for j, (lo, hi) in enumerate(bounds):
                if lo is not None and hi is not None and lo > hi:
                    raise ValidationError(f"variable {j}: lower bound exceeds upper bound")
        object.__setattr__(self, "bounds", bounds)

    @property
    def n_vars(self) -> int:
        return len(self.objective)


class Verdict(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpOutcome:
    verdict: Verdict
    value: Optional[Fraction] = None
    primal: Optional[Tuple[Fraction, ...]] = None
    dual: Optional[Tuple[Fraction, ...]] = None
    ray: Optional[Tuple[Fraction, ...]] = None
    farkas: Optional[Tuple[Fraction, ...]] = None
    sense: Sense = Sense.MIN

    @property
    def optimal(self) -> bool:
        return self.verdict is Verdict.OPTIMAL

    @property
    def extended_value(self) -> ExtendedRational:
        """Objective value; inf of an empty set is +inf, sup is -inf."""
        if self.verdict is Verdict.OPTIMAL:
            return self.value
        up = (self.verdict is Verdict.INFEASIBLE) == (self.sense is Sense.MIN)
        return INF if up else NEG_INF


# --------------------------------------------------------------------------
# solver


def _primitive_scale(values: Iterable[Fraction]) -> Fraction:
    """Positive factor turning ``values`` into a primitive integer vector."""
    values = [v for v in values if v]
    if not values:
        return Fraction(1)
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    g = 0
    for v in values:
        g = math.gcd(g, v.numerator * (den // v.denominator))
    return Fraction(den, g)


_MPQ = type(mpq(0))
QZERO = mpq(0)
QONE = mpq(1)


def _q(v) -> mpq:
    if type(v) is _MPQ:
        return v
    return mpq(v.numerator, v.denominator)


def _f(v) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


class _Tableau:
    """Dense simplex tableau ``B^-1 [A | b]`` with one artificial column per row.

    Rows whose slack column is already a unit column start with the slack in
    the basis; the artificial column stays in the tableau (it records
    ``B^-1`` for reading off multipliers) but never enters.
    """

    def __init__(self, rows, rhs, n_struct, start=None):
        # pivoting runs on gmpy2 rationals; callers only see Fractions
        self.m = len(rows)
        self.n_struct = n_struct
        self.n = n_struct + self.m
        zero = mpq(0)
        self.T = []
        for i, row in enumerate(rows):
            full = [_q(v) for v in row] + [zero] * self.m
            full[n_struct + i] = mpq(1)
            self.T.append(full)
        self.b = [_q(v) for v in rhs]
        self.basis = [n_struct + i for i in range(self.m)]
        for i, j in enumerate(start or ()):
            if j is not None:
                self.basis[i] = j

    def is_artificial(self, j):
        return j >= self.n_struct

    def pivot(self, r, j):
        T = self.T
        prow = T[r]
        piv = prow[j]
        if piv != 1:
            inv = 1 / piv
            for k, v in enumerate(prow):
                if v:
                    prow[k] = v * inv
            self.b[r] *= inv
        nz = [k for k, v in enumerate(prow) if v]
        br = self.b[r]
        for i in range(self.m):
            if i == r:
                continue
            row = T[i]
            f = row[j]
            if not f:
                continue
            for k in nz:
                row[k] -= f * prow[k]
            if br:
                self.b[i] -= f * br
        self.basis[r] = j

    def reduced_costs(self, cost):
        """Reduced costs for ``cost`` given as gmpy2 rationals."""
        d = list(cost)
        for i, bj in enumerate(self.basis):
            cb = cost[bj]
            if cb:
                row = self.T[i]
                for k, v in enumerate(row):
                    if v:
                        d[k] -= cb * v
        return d

    def objective(self, cost):
        return _f(sum((_q(cost[bj]) * self.b[i] for i, bj in enumerate(self.basis)), mpq(0)))

    def run(self, cost, allow):
        """Bland's rule.  Returns ``None`` at optimum or the unbounded column."""
        cost = [_q(v) for v in cost]
        while True:
            d = self.reduced_costs(cost)
            enter = None
            for j in range(self.n):
                if d[j] < 0 and allow(j):
                    enter = j
                    break
            if enter is None:
                return None
            best = None
            for i in range(self.m):
                a = self.T[i][enter]
                if a > 0:
                    key = (self.b[i] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return enter
            self.pivot(best[1], enter)


def solve(lp: LinearProgram) -> LpOutcome:
    """Solve ``lp`` exactly.  Deterministic for a fixed instance."""
    if not isinstance(lp, LinearProgram):
        raise ValidationError("solve expects a LinearProgram")
    maximize = lp.sense is Sense.MAX
    c = [(-v if maximize else v) for v in lp.objective]
    n = lp.n_vars
    zero = Fraction(0)

    # objective and rows in primitive form so positive rescaling is invisible
    kappa = _primitive_scale(c)
    c_scaled = [v * kappa for v in c]

    rows = []  # (coeffs, rel, rhs, factor to recover original multiplier, original index)
    for i, con in enumerate(lp.constraints):
        if not any(con.coeffs):
            ok = (
                (con.rel is Rel.GE and con.rhs <= 0)
                or (con.rel is Rel.LE and con.rhs >= 0)
                or (con.rel is Rel.EQ and con.rhs == 0)
            )
            if ok:
                continue
            y = [zero] * len(lp.constraints)
            y[i] = Fraction(1 if con.rhs > 0 else -1)
            return LpOutcome(Verdict.INFEASIBLE, farkas=tuple(y), sense=lp.sense)
        k = _primitive_scale(list(con.coeffs) + [con.rhs])
        qk = _q(k)
        coeffs = [_q(a) * qk if a else QZERO for a in con.coeffs]
        rows.append((coeffs, con.rel, _q(con.rhs) * qk, k, i))

    # variable substitution: x_j = shift_j + sum(mult * col)
    cols = []  # per structural std column: (orig var, multiplier)
    var_cols = []
    shift = []
    bound_rows = []
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is not None:
            var_cols.append([(len(cols), 1)])
            cols.append((j, 1))
            shift.append(lo)
            if hi is not None:
                bound_rows.append((len(cols) - 1, hi - lo))
        elif hi is not None:
            var_cols.append([(len(cols), -1)])
            cols.append((j, -1))
            shift.append(hi)
        else:
            var_cols.append([(len(cols), 1), (len(cols) + 1, -1)])
            cols.append((j, 1))
            cols.append((j, -1))
            shift.append(zero)
    n_x = len(cols)

    qshift = [_q(v) for v in shift]
    std_rows = []
    std_rhs = []
    slack_of = []
    n_slack = sum(1 for r in rows if r[1] is not Rel.EQ) + len(bound_rows)
    n_struct = n_x + n_slack
    s_idx = n_x
    signs = []
    start = []  # initial basic column per row, None where an artificial is needed
    for coeffs, rel, rhs, _k, _i in rows:
        row = [QZERO] * n_struct
        b = rhs
        for j, a in enumerate(coeffs):
            if not a:
                continue
            if qshift[j]:
                b -= a * qshift[j]
            for col, mult in var_cols[j]:
                row[col] = a if mult == 1 else -a
        if rel is Rel.LE:
            row[s_idx] = QONE
            slack_of.append(s_idx)
            s_idx += 1
        elif rel is Rel.GE:
            row[s_idx] = -QONE
            slack_of.append(s_idx)
            s_idx += 1
        else:
            slack_of.append(None)
        sign = 1
        if b < 0:
            sign = -1
            row = [-v if v else v for v in row]
            b = -b
        signs.append(sign)
        sj = slack_of[-1]
        start.append(sj if sj is not None and row[sj] == 1 else None)
        std_rows.append(row)
        std_rhs.append(b)
    for col, width in bound_rows:
        row = [QZERO] * n_struct
        row[col] = QONE
        row[s_idx] = QONE
        start.append(s_idx)
        s_idx += 1
        signs.append(1)
        std_rows.append(row)
        std_rhs.append(_q(width))

    tab = _Tableau(std_rows, std_rhs, n_struct, start)
    m = tab.m

    def original_x(values):
        x = list(shift)
        for col, (j, mult) in enumerate(cols):
            if values[col]:
                x[j] += mult * values[col]
        return x

    def basic_values():
        vals = [zero] * tab.n
        for i, bj in enumerate(tab.basis):
            vals[bj] = _f(tab.b[i])
        return vals

    def row_duals(cost):
        d = tab.reduced_costs([_q(v) for v in cost])
        y_std = [cost[n_struct + i] - _f(d[n_struct + i]) for i in range(m)]
        y = [zero] * len(lp.constraints)
        for r, (_coeffs, _rel, _rhs, k, orig) in enumerate(rows):
            y[orig] = y_std[r] * signs[r] * k
        return y

    # phase 1
    cost1 = [zero] * n_struct + [Fraction(1)] * m
    tab.run(cost1, lambda j: j < n_struct)
    if tab.objective(cost1) > 0:
        return LpOutcome(Verdict.INFEASIBLE, farkas=tuple(row_duals(cost1)), sense=lp.sense)

    # drive zero-level artificials out of the basis where possible
    for r in range(m):
        if tab.is_artificial(tab.basis[r]):
            row = tab.T[r]
            for j in range(n_struct):
                if row[j]:
                    tab.pivot(r, j)
                    break

    # phase 2
    cost2 = [zero] * tab.n
    for col, (j, mult) in enumerate(cols):
        cost2[col] = c_scaled[j] * mult
    enter = tab.run(cost2, lambda j: j < n_struct)
    vals = basic_values()
    x = original_x(vals)
    if enter is not None:
        dvals = [zero] * tab.n
        dvals[enter] = Fraction(1)
        for i, bj in enumerate(tab.basis):
            dvals[bj] = -_f(tab.T[i][enter])
        ray = [zero] * n
        for col, (j, mult) in enumerate(cols):
            if dvals[col]:
                ray[j] += mult * dvals[col]
        return LpOutcome(
            Verdict.UNBOUNDED,
            primal=tuple(x),
            ray=tuple(ray),
            sense=lp.sense,
        )
    y = [v / kappa for v in row_duals(cost2)]
    value = sum((a * v for a, v in zip(lp.objective, x) if a), Fraction(0))
    if maximize:
        y = [-v for v in y]
    return LpOutcome(Verdict.OPTIMAL, value=value, primal=tuple(x), dual=tuple(y), sense=lp.sense)


# --------------------------------------------------------------------------
# certificate checking


def _dot(a, b):
    return sum((u * v for u, v in zip(a, b) if u and v), Fraction(0))


def _transpose_apply(lp, y):
    out = [Fraction(0)] * lp.n_vars
    for yi, con in zip(y, lp.constraints):
        if yi:
            for j, a in enumerate(con.coeffs):
                if a:
                    out[j] += yi * a
    return out


def _row_signs_ok(lp, y):
    for yi, con in zip(y, lp.constraints):
        if con.rel is Rel.GE and yi < 0:
            return False
        if con.rel is Rel.LE and yi > 0:
            return False
    return True


def _bound_term(lp, r):
    """``sum r_j l_j`` (r_j > 0) + ``sum r_j u_j`` (r_j < 0); None if it needs an infinite bound."""
    total = Fraction(0)
    for rj, (lo, hi) in zip(r, lp.bounds):
        if rj > 0:
            if lo is None:
                return None
            total += rj * lo
        elif rj < 0:
            if hi is None:
                return None
            total += rj * hi
    return total


def _primal_feasible(lp, x):
    if x is None or len(x) != lp.n_vars:
        return False
    for (lo, hi), v in zip(lp.bounds, x):
        if lo is not None and v < lo:
            return False
        if hi is not None and v > hi:
            return False
    return all(con.satisfied(x) for con in lp.constraints)


def verify_certificates(lp: LinearProgram, out: LpOutcome) -> bool:
    """Check ``out`` against ``lp`` by direct substitution, exactly."""
    maximize = lp.sense is Sense.MAX
    c = [(-v if maximize else v) for v in lp.objective]
    ncons = len(lp.constraints)

    if out.verdict is Verdict.OPTIMAL:
        if out.value is None or out.dual is None or len(out.dual) != ncons:
            return False
        x = out.primal
        if not _primal_feasible(lp, x):
            return False
        if _dot(lp.objective, x) != out.value:
            return False
        y = [(-v if maximize else v) for v in out.dual]
        if not _row_signs_ok(lp, y):
            return False
        aty = _transpose_apply(lp, y)
        r = [cj - v for cj, v in zip(c, aty)]
        bt = _bound_term(lp, r)
        if bt is None:
            return False
        dual_value = _dot([con.rhs for con in lp.constraints], y) + bt
        primal_value = -out.value if maximize else out.value
        return dual_value == primal_value

    if out.verdict is Verdict.UNBOUNDED:
        x, d = out.primal, out.ray
        if not _primal_feasible(lp, x) or d is None or len(d) != lp.n_vars:
            return False
        for (lo, hi), dj in zip(lp.bounds, d):
            if lo is not None and dj < 0:
                return False
            if hi is not None and dj > 0:
                return False
        for con in lp.constraints:
            v = con.value(d)
            if con.rel is Rel.GE and v < 0:
                return False
            if con.rel is Rel.LE and v > 0:
                return False
            if con.rel is Rel.EQ and v != 0:
                return False
        return _dot(c, d) < 0

    if out.verdict is Verdict.INFEASIBLE:
        y = out.farkas
        if y is None or len(y) != ncons or not any(y):
            return False
        if not _row_signs_ok(lp, y):
            return False
        r = [-v for v in _transpose_apply(lp, y)]
        bt = _bound_term(lp, r)
        if bt is None:
            return False
        return _dot([con.rhs for con in lp.constraints], y) + bt > 0

    return False
