"""Multi-period currency markets with proportional transaction costs.

Each tree node carries a polyhedral solvency cone ``K`` (positions that can
be exchanged into nonnegative ones at that node).  Trading at date ``t`` adds
the cone ``C_t`` of ``F_t``-measurable selections of ``K_t``, and the risk
region of a terminal position ``X`` is

    R(X) = { m : X + m in A + C_0 + ... + C_T }.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

from .acceptance import AcceptanceSet, minkowski_augment, worst_case
from .errors import AssumptionError, ConsistencyError
from .geometry import Halfspace, LiftedPolyhedron, minkowski_sum, support
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
from .risk import DualElement, RiskRegion, risk_region
from .scenario import AdaptedProcess, EventTree, RandomVector, expectation, tree_to_terminal_space

__all__ = [
    "SolvencyCone",
    "MarketModel",
    "PricingSystem",
    "SigmaDecomposition",
    "superreplication_region",
    "sigma_decomposition",
    "find_pricing_system",
    "pricing_bound",
    "check_pricing_system",
    "flow_superreplication_value",
    "binomial_market",
]

ZERO = Fraction(0)
ONE = Fraction(1)


def _cone_from_generators(d: int, gens) -> LiftedPolyhedron:
    """``{ sum_k lam_k g_k : lam >= 0 }`` as a lifted system."""
    g = len(gens)
    rows = []
    for i in range(d):
        a = [ZERO] * (d + g)
        a[i] = ONE
        for k, gen in enumerate(gens):
            a[d + k] = -gen[i]
        rows.append(Constraint(tuple(a), Rel.EQ, ZERO))
    for k in range(g):
        a = [ZERO] * (d + g)
        a[d + k] = ONE
        rows.append(Constraint(tuple(a), Rel.GE, ZERO))
    return LiftedPolyhedron(d, g, tuple(rows))


def _cone_from_halfspaces(d: int, hs) -> LiftedPolyhedron:
    """Dual cone of ``{x : h.x >= 0}``: nonnegative combinations of the normals (free for equalities)."""
    g = len(hs)
    rows = []
    for i in range(d):
        a = [ZERO] * (d + g)
        a[i] = ONE
        for k, h in enumerate(hs):
            a[d + k] = -h.normal[i]
        rows.append(Constraint(tuple(a), Rel.EQ, ZERO))
    for k, h in enumerate(hs):
        if not h.equality:
            a = [ZERO] * (d + g)
            a[d + k] = ONE
            rows.append(Constraint(tuple(a), Rel.GE, ZERO))
    return LiftedPolyhedron(d, g, tuple(rows))


@dataclass(frozen=True)
class SolvencyCone:
    """Polyhedral cone ``K`` containing the orthant, with its dual ``K^+``.

    Build with :meth:`from_generators` (exchange vectors) or
    :meth:`from_inequalities`; the other description is derived by projection.
    """

    d: int
    halfspaces: Tuple[Halfspace, ...]  # K = {x : h.x >= 0}
    dual_halfspaces: Tuple[Halfspace, ...]  # K^+ = {z : g.z >= 0}
    generators: Optional[Tuple[Tuple[Fraction, ...], ...]] = None

    def __post_init__(self):
        for h in self.halfspaces + self.dual_halfspaces:
            if h.offset != 0 or len(h.normal) != self.d:
                raise ValidationError("cone halfspaces must pass through the origin")
        for i in range(self.d):
            e = tuple(ONE if j == i else ZERO for j in range(self.d))
            if not self.contains(e):
                raise AssumptionError(f"solvency cone misses the unit vector e_{i + 1}")

    @classmethod
    def from_generators(cls, gens: Sequence[Sequence]) -> "SolvencyCone":
        gens = tuple(tuple(to_fraction(v) for v in g) for g in gens)
        if not gens:
            raise ValidationError("need at least one generator")
        d = len(gens[0])
        if any(len(g) != d for g in gens):
            raise ValidationError("generators of different lengths")
        proj = _cone_from_generators(d, gens).projection
        dual = tuple(Halfspace(g, ZERO) for g in gens if any(g))
        return cls(d, proj.halfspaces, dual, gens)

    @classmethod
    def from_inequalities(cls, normals: Sequence[Sequence]) -> "SolvencyCone":
        hs = tuple(Halfspace(tuple(n), ZERO) for n in normals)
        if not hs:
            raise ValidationError("need at least one inequality")
        d = len(hs[0].normal)
        dual = _cone_from_halfspaces(d, hs).projection.halfspaces
        return cls(d, hs, dual)

    @classmethod
    def orthant(cls, d: int) -> "SolvencyCone":
        return cls.from_inequalities([[ONE if j == i else ZERO for j in range(d)] for i in range(d)])

    def contains(self, x) -> bool:
        return all(h.contains(x) for h in self.halfspaces)

    def dual_contains(self, z) -> bool:
        return all(h.contains(z) for h in self.dual_halfspaces)


@dataclass(frozen=True)
class MarketModel:
    tree: EventTree
    d: int
    cones: Tuple[SolvencyCone, ...]
    acceptance: AcceptanceSet
    prices: Optional[Tuple[Fraction, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.cones) != len(self.tree.nodes):
            raise ValidationError("need one solvency cone per tree node")
        if any(c.d != self.d for c in self.cones):
            raise ValidationError("solvency cone of the wrong dimension")
        space, _ = tree_to_terminal_space(self.tree)
        if self.acceptance.space != space or self.acceptance.d != self.d:
            raise ValidationError("acceptance set must live on the terminal space of the tree")

    @property
    def space(self):
        return self.acceptance.space

    def nodes_at(self, t: int) -> Tuple[int, ...]:
        return tuple(k for k in range(len(self.tree.nodes)) if self.tree.date(k) == t)

    def date_cone(self, t: int) -> LiftedPolyhedron:
        """``C_t`` embedded in the terminal coordinates, one lift block per date-``t`` node."""
        tree, d = self.tree, self.d
        nodes = self.nodes_at(t)
        N = self.space.n * d
        width = N + len(nodes) * d
        rows = []
        for b, k in enumerate(nodes):
            base = N + b * d
            for h in self.cones[k].halfspaces:
                a = [ZERO] * width
                a[base:base + d] = h.normal
                rows.append(Constraint(tuple(a), Rel.EQ if h.equality else Rel.GE, ZERO))
            for atom in tree.leaves_below(k):
                for i in range(d):
                    a = [ZERO] * width
                    a[atom * d + i] = ONE
                    a[base + i] = -ONE
                    rows.append(Constraint(tuple(a), Rel.EQ, ZERO))
        return LiftedPolyhedron(N, len(nodes) * d, tuple(rows))

    @cached_property
    def date_cones(self) -> Tuple[LiftedPolyhedron, ...]:
        return tuple(self.date_cone(t) for t in range(self.tree.horizon + 1))

    @cached_property
    def augmented(self) -> AcceptanceSet:
        return minkowski_augment(self.acceptance, self.date_cones, label="market")


def superreplication_region(model: MarketModel, X: RandomVector) -> RiskRegion:
    if X.space != model.space or X.d != model.d:
        raise ValidationError("position does not live on the terminal space of the tree")
    return risk_region(model.augmented, X)


@dataclass(frozen=True)
class SigmaDecomposition:
    acceptance: ExtendedRational
    initial: ExtendedRational
    later: ExtendedRational
    total: ExtendedRational


def _functional(Z) -> Tuple[Fraction, ...]:
    if isinstance(Z, DualElement):
        return Z.functional()
    probs = Z.space.probs
    return tuple(probs[s] * v for s, row in enumerate(Z.values) for v in row)


def _add(*vals) -> ExtendedRational:
    if any(v == NEG_INF for v in vals):
        return NEG_INF
    return sum(vals, ZERO)


def sigma_decomposition(model: MarketModel, Z) -> SigmaDecomposition:
    """Support of ``A``, ``C_0`` and ``C_1 + ... + C_T`` at ``Z``, computed separately.

    Their sum must equal the support of the augmented set; a mismatch raises.
    """
    Zrv = Z.Z if isinstance(Z, DualElement) else Z
    if Zrv.space != model.space or Zrv.d != model.d:
        raise ValidationError("dual element does not live on the terminal space")
    psi = _functional(Z)
    s_acc = support(model.acceptance.body, psi)
    cones = model.date_cones
    s_init = support(cones[0], psi)
    s_later = support(minkowski_sum(*cones[1:]), psi) if len(cones) > 1 else ZERO
    total = support(model.augmented.body, psi)
    if _add(s_acc, s_init, s_later) != total:
        raise ConsistencyError(f"support of the sum {total} != sum of supports")
    return SigmaDecomposition(s_acc, s_init, s_later, total)


@dataclass(frozen=True)
class PricingSystem:
    """Terminal density ``Z`` and its conditional expectations along the tree."""

    Z: RandomVector
    process: AdaptedProcess


def _conditional_process(model: MarketModel, Z: RandomVector) -> AdaptedProcess:
    """Backward recursion: leaf values, then probability-weighted child averages."""
    tree = model.tree
    vals: List[Optional[Tuple[Fraction, ...]]] = [None] * len(tree.nodes)
    for atom, k in enumerate(tree.leaves):
        vals[k] = Z.values[atom]
    for k in reversed(range(len(tree.nodes))):
        kids = tree.children[k]
        if kids:
            vals[k] = tuple(
                sum((tree.nodes[c].prob * vals[c][i] for c in kids), ZERO) for i in range(model.d)
            )
    return AdaptedProcess(tree, tuple(vals))


def check_pricing_system(model: MarketModel, ps: PricingSystem, w=None) -> bool:
    """Invariants by substitution: ``Z >= 0``, martingale consistency, dual-cone membership."""
    if any(v < 0 for v in ps.Z.flat):
        return False
    if _conditional_process(model, ps.Z) != ps.process:
        return False
    if not all(model.cones[k].dual_contains(v) for k, v in enumerate(ps.process.values)):
        return False
    if w is not None and expectation(ps.Z) != tuple(to_fraction(v) for v in w):
        return False
    return True


def _pricing_lp(model: MarketModel, w, X: Optional[RandomVector]) -> Tuple[LinearProgram, int]:
    A = model.acceptance
    if not A.is_cone:
        raise ValidationError("pricing systems are defined for conic acceptance sets")
    w = tuple(to_fraction(v) for v in w)
    if len(w) != model.d:
        raise ValidationError("direction has the wrong dimension")
    tree, d, space = model.tree, model.d, model.space
    n = space.n
    N = n * d
    probs = tree.absolute_probs
    rows_A = A.body.rows
    # variables: Z (N entries, Z >= 0), then multipliers y for A's rows (Z in A^+)
    width = N + len(rows_A)
    cons = []
    for i in range(d):
        a = [ZERO] * width
        for s in range(n):
            a[s * d + i] = space.probs[s]
        cons.append(Constraint(tuple(a), Rel.EQ, w[i]))
    for k in range(len(tree.nodes)):
        below = tree.leaves_below(k)
        for h in model.cones[k].dual_halfspaces:
            a = [ZERO] * width
            for atom in below:
                weight = space.probs[atom] / probs[k]
                for i in range(d):
                    a[atom * d + i] += weight * h.normal[i]
            cons.append(Constraint(tuple(a), Rel.EQ if h.equality else Rel.GE, ZERO))
    # p_s Z_s = sum_k y_k a_k (main part), sum_k y_k a_k (lift part) = 0
    for j in range(N):
        a = [ZERO] * width
        a[j] = space.probs[j // d]
        for k, r in enumerate(rows_A):
            a[N + k] = -r.coeffs[j]
        cons.append(Constraint(tuple(a), Rel.EQ, ZERO))
    for lift in range(A.body.lift_dim):
        a = [ZERO] * width
        for k, r in enumerate(rows_A):
            a[N + k] = r.coeffs[N + lift]
        cons.append(Constraint(tuple(a), Rel.EQ, ZERO))
    bounds = [(ZERO, None)] * N
    for r in rows_A:
        bounds.append((ZERO, None) if r.rel is Rel.GE else (None, ZERO) if r.rel is Rel.LE else (None, None))
    obj = [ZERO] * width
    if X is not None:
        for s in range(n):
            for i in range(d):
                obj[s * d + i] = -space.probs[s] * X.values[s][i]
    return LinearProgram(tuple(obj), tuple(cons), sense="max", bounds=tuple(bounds)), N


def _system_from(model: MarketModel, primal, N) -> PricingSystem:
    Z = RandomVector.from_flat(model.space, model.d, primal[:N])
    ps = PricingSystem(Z, _conditional_process(model, Z))
    if not check_pricing_system(model, ps):
        raise ConsistencyError("LP returned an inconsistent pricing system")
    return ps


def find_pricing_system(model: MarketModel, w) -> Optional[PricingSystem]:
    """Some consistent pricing system with ``E[Z] = w``, or None if there is none."""
    lp, N = _pricing_lp(model, w, None)
    out = solve(lp)
    if out.verdict is Verdict.INFEASIBLE:
        return None
    return _system_from(model, out.primal, N)


def pricing_bound(model: MarketModel, X: RandomVector, w) -> Tuple[ExtendedRational, Optional[PricingSystem]]:
    """``sup { -E[<X, Z>] }`` over pricing systems with ``E[Z] = w``, with a maximizer."""
    lp, N = _pricing_lp(model, w, X)
    out = solve(lp)
    if out.verdict is not Verdict.OPTIMAL:
        return out.extended_value, None
    return out.value, _system_from(model, out.primal, N)


def flow_superreplication_value(model: MarketModel, X: RandomVector, w) -> ExtendedRational:
    """``min <w, m>`` over explicit admissible portfolio flows.

    Variables: initial endowment ``m``, one portfolio per node, and a final
    adjustment per leaf.  Exchanges ``m - m_root``, ``m_parent - m_node`` and
    ``m_leaf - n_leaf`` must be solvent in the node's cone, and ``X + n`` must
    be acceptable.
    """
    tree, d, A = model.tree, model.d, model.acceptance
    n = model.space.n
    n_nodes = len(tree.nodes)
    N = n * d
    # layout: m | m_node (n_nodes*d) | n_leaf (N) | A lifts
    base_node = d
    base_leaf = d + n_nodes * d
    base_lift = base_leaf + N
    width = base_lift + A.body.lift_dim
    rows = []

    def solvent(k, plus, minus):
        for h in model.cones[k].halfspaces:
            a = [ZERO] * width
            for i in range(d):
                a[plus + i] += h.normal[i]
                a[minus + i] -= h.normal[i]
            rows.append(Constraint(tuple(a), Rel.EQ if h.equality else Rel.GE, ZERO))

    solvent(0, 0, base_node)
    for k in range(1, n_nodes):
        solvent(k, base_node + tree.nodes[k].parent * d, base_node + k * d)
    for atom, k in enumerate(tree.leaves):
        solvent(k, base_node + k * d, base_leaf + atom * d)
    xflat = X.flat
    for r in A.body.rows:
        a = [ZERO] * width
        a[base_leaf:base_leaf + N] = r.coeffs[:N]
        a[base_lift:] = r.coeffs[N:]
        shift = sum((c * v for c, v in zip(r.coeffs[:N], xflat) if c and v), ZERO)
        rows.append(Constraint(tuple(a), r.rel, r.rhs - shift))
    obj = list(to_fraction(v) for v in w) + [ZERO] * (width - d)
    return solve(LinearProgram(tuple(obj), tuple(rows))).extended_value


def binomial_market(
    s0=1,
    up=2,
    down=Fraction(1, 2),
    p=Fraction(1, 2),
    spread=0,
    periods: int = 1,
    acceptance=None,
) -> MarketModel:
    """Cash/stock binomial tree with bid/ask ``(1 -+ spread) * S`` at every node.

    Solvency cones are generated by the unit vectors and the two exchange
    vectors ``(ask, -1)`` (buy one share) and ``(-bid, 1)`` (sell one share).
    """
    s0, up, down, p, spread = (to_fraction(v) for v in (s0, up, down, p, spread))
    tree = EventTree.from_branching([(p, 1 - p)] * periods)
    prices = []
    for k, node in enumerate(tree.nodes):
        if node.parent is None:
            prices.append(s0)
        else:
            factor = up if node.name.endswith(".0") else down
            prices.append(prices[node.parent] * factor)
    cones = []
    for S in prices:
        bid, ask = (1 - spread) * S, (1 + spread) * S
        cones.append(SolvencyCone.from_generators([(ONE, ZERO), (ZERO, ONE), (ask, -ONE), (-bid, ONE)]))
    space, _ = tree_to_terminal_space(tree)
    A = acceptance(space) if acceptance is not None else worst_case(space, 2)
    return MarketModel(tree, 2, tuple(cones), A, tuple(prices))
