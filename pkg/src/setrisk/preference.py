"""The preference ``X >= Y  iff  R(X) contains R(Y)`` and its utility representation."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

from .acceptance import AcceptanceSet
from .errors import ConsistencyError
from .geometry import contains
from .lp import ExtendedRational, Fraction
from .risk import (
    Direction,
    RiskRegion,
    dual_feasible,
    facet_directions,
    resolve_mask,
    rho,
    rho_dual,
    risk_region,
)
from .scenario import RandomVector

__all__ = [
    "Relation",
    "Separation",
    "PreferenceVerdict",
    "MultiUtilityRecord",
    "compare",
    "multi_utility_check",
    "probe_grid",
    "utility_value",
    "is_pruned",
]


class Relation(str, enum.Enum):
    X_PREFERRED = "X_preferred"
    Y_PREFERRED = "Y_preferred"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"

    @classmethod
    def from_flags(cls, x_ge_y: bool, y_ge_x: bool) -> "Relation":
        if x_ge_y and y_ge_x:
            return cls.EQUIVALENT
        if x_ge_y:
            return cls.X_PREFERRED
        if y_ge_x:
            return cls.Y_PREFERRED
        return cls.INCOMPARABLE


@dataclass(frozen=True)
class Separation:
    """Why ``R(better)`` fails to contain ``R(worse)``.

    ``point`` lies in ``R(worse)`` but not in ``R(better)``, and the
    utility in ``direction`` ranks them the wrong way round:
    ``rho_better > rho_worse``.
    """

    point: Tuple[Fraction, ...]
    direction: Direction
    rho_better: ExtendedRational
    rho_worse: ExtendedRational


@dataclass(frozen=True)
class PreferenceVerdict:
    relation: Relation
    not_x_over_y: Optional[Separation] = None
    not_y_over_x: Optional[Separation] = None
    region_x: Optional[RiskRegion] = None
    region_y: Optional[RiskRegion] = None


def _separation(A, better: RiskRegion, worse: RiskRegion, result, mask) -> Separation:
    point = result.witness
    if not worse.system.member(point) or better.system.member(point):
        raise ConsistencyError("containment witness fails direct membership substitution")
    if result.violated is not None:
        w = Direction(result.violated.normal).normalized()
    else:
        w = Direction((Fraction(1),) * len(mask)).normalized()
    rb, rw = rho(A, better.X, w, mask), rho(A, worse.X, w, mask)
    if not rb > rw:
        raise ConsistencyError(f"separating direction does not separate: {rb} <= {rw}")
    return Separation(tuple(point), w, rb, rw)


def compare(A: AcceptanceSet, X: RandomVector, Y: RandomVector, mask=None) -> PreferenceVerdict:
    """Geometric verdict by mutual containment of the two risk regions."""
    mask = resolve_mask(A.d, mask)
    RX, RY = risk_region(A, X, mask), risk_region(A, Y, mask)
    x_ge = contains(RX.projection, RY.system)
    y_ge = contains(RY.projection, RX.system)
    sep_xy = None if x_ge else _separation(A, RX, RY, x_ge, mask)
    sep_yx = None if y_ge else _separation(A, RY, RX, y_ge, mask)
    return PreferenceVerdict(Relation.from_flags(x_ge.holds, y_ge.holds), sep_xy, sep_yx, RX, RY)


def probe_grid(k: int, max_den: int = 4) -> Tuple[Direction, ...]:
    """Simplex points in dimension ``k`` with denominators up to ``max_den``."""
    seen = set()
    out = []
    for q in range(1, max_den + 1):
        for combo in itertools.product(range(q + 1), repeat=k):
            if sum(combo) != q:
                continue
            w = tuple(Fraction(a, q) for a in combo)
            if w not in seen:
                seen.add(w)
                out.append(Direction(w))
    return tuple(sorted(out, key=lambda d: d.w))


def is_pruned(A: AcceptanceSet, w, mask=None) -> bool:
    """No ``Z`` in the barrier cone extends ``w``: such utilities are ``-inf`` throughout."""
    return not dual_feasible(A, w, mask)


@dataclass(frozen=True)
class MultiUtilityRecord:
    geometric: Relation
    scalar: Relation
    directions: Tuple[Direction, ...]
    values: Tuple[Tuple[ExtendedRational, ExtendedRational], ...]
    pruned: Tuple[Direction, ...]

    @property
    def agree(self) -> bool:
        return self.geometric is self.scalar


def multi_utility_check(
    A: AcceptanceSet,
    X: RandomVector,
    Y: RandomVector,
    mask=None,
    extra: Iterable = (),
    verdict: Optional[PreferenceVerdict] = None,
) -> MultiUtilityRecord:
    """Recompute the verdict from scalar risk measures alone.

    Directions: facet normals of both regions, the probe grid and ``extra``.
    Directions whose extension set misses the barrier cone are set aside.
    """
    mask = resolve_mask(A.d, mask)
    verdict = verdict or compare(A, X, Y, mask)
    candidates: List[Direction] = []
    for region in (verdict.region_x, verdict.region_y):
        candidates.extend(facet_directions(region))
    candidates.extend(probe_grid(len(mask)))
    candidates.extend(Direction(tuple(w)).normalized() for w in extra)
    unique = sorted({d.w: d for d in candidates}.values(), key=lambda d: d.w)
    kept, pruned, values = [], [], []
    for w in unique:
        if is_pruned(A, w, mask):
            pruned.append(w)
            continue
        kept.append(w)
        values.append((rho(A, X, w, mask), rho(A, Y, w, mask)))
    x_ge = all(rx <= ry for rx, ry in values)
    y_ge = all(ry <= rx for rx, ry in values)
    return MultiUtilityRecord(
        verdict.relation,
        Relation.from_flags(x_ge, y_ge),
        tuple(kept),
        tuple(values),
        tuple(pruned),
    )


def utility_value(A: AcceptanceSet, X: RandomVector, pi, mask=None, dual: bool = False) -> ExtendedRational:
    """``u = -rho`` (or ``-rho*`` with ``dual``)."""
    if dual:
        return -rho_dual(A, X, pi, mask).value
    return -rho(A, X, pi, mask)
