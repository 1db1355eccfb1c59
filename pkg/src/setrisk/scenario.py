"""Finite probability spaces, event trees and random vectors."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

from .lp import Fraction, ValidationError, to_fraction

__all__ = [
    "ScenarioSpace",
    "RandomVector",
    "EventTree",
    "AdaptedProcess",
    "pair",
    "expectation",
    "tree_to_terminal_space",
]


@dataclass(frozen=True)
class ScenarioSpace:
    """``n`` atoms with strictly positive probabilities summing to one."""

    probs: Tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(to_fraction(p) for p in self.probs)
        if not probs:
            raise ValidationError("a scenario space needs at least one atom")
        if any(p <= 0 for p in probs):
            raise ValidationError("atom probabilities must be strictly positive")
        if sum(probs) != 1:
            raise ValidationError(f"probabilities sum to {sum(probs)}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, n: int) -> "ScenarioSpace":
        return cls(tuple(Fraction(1, n) for _ in range(n)))

    @property
    def n(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class RandomVector:
    """An ``n x d`` array of rationals on ``space``; row ``s`` is the value at atom ``s``."""

    space: ScenarioSpace
    values: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in row) for row in self.values)
        if len(rows) != self.space.n:
            raise ValidationError(f"{len(rows)} rows for {self.space.n} scenarios")
        if not rows[0]:
            raise ValidationError("random vectors need d >= 1")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValidationError("ragged random vector")
        object.__setattr__(self, "values", rows)

    @classmethod
    def constant(cls, space: ScenarioSpace, m: Sequence) -> "RandomVector":
        return cls(space, tuple(tuple(m) for _ in range(space.n)))

    @classmethod
    def zeros(cls, space: ScenarioSpace, d: int) -> "RandomVector":
        return cls.constant(space, (0,) * d)

    @classmethod
    def from_flat(cls, space: ScenarioSpace, d: int, flat: Sequence) -> "RandomVector":
        return cls(space, tuple(tuple(flat[s * d:(s + 1) * d]) for s in range(space.n)))

    @property
    def d(self) -> int:
        return len(self.values[0])

    @property
    def flat(self) -> Tuple[Fraction, ...]:
        """Scenario-major flattening, coordinate ``(s, i)`` at ``s * d + i``."""
        return tuple(v for row in self.values for v in row)

    def column(self, i: int) -> Tuple[Fraction, ...]:
        return tuple(row[i] for row in self.values)

    def _check(self, other: "RandomVector"):
        if other.space != self.space or other.d != self.d:
            raise ValidationError("random vectors live on different spaces or dimensions")

    def __add__(self, other):
        if isinstance(other, RandomVector):
            self._check(other)
            return RandomVector(
                self.space,
                tuple(tuple(a + b for a, b in zip(r, q)) for r, q in zip(self.values, other.values)),
            )
        m = tuple(to_fraction(v) for v in other)
        if len(m) != self.d:
            raise ValidationError("constant has the wrong dimension")
        return RandomVector(self.space, tuple(tuple(a + b for a, b in zip(r, m)) for r in self.values))

    def __sub__(self, other):
        return self + (-other if isinstance(other, RandomVector) else [-to_fraction(v) for v in other])

    def __neg__(self):
        return self.scale(-1)

    def scale(self, lam) -> "RandomVector":
        lam = to_fraction(lam)
        return RandomVector(self.space, tuple(tuple(lam * a for a in r) for r in self.values))

    def __ge__(self, other: "RandomVector") -> bool:
        self._check(other)
        return all(a >= b for a, b in zip(self.flat, other.flat))


def pair(X: RandomVector, Z: RandomVector) -> Fraction:
    """``E[<X, Z>]``."""
    X._check(Z)
    total = Fraction(0)
    for p, x, z in zip(X.space.probs, X.values, Z.values):
        total += p * sum((a * b for a, b in zip(x, z)), Fraction(0))
    return total


def expectation(Z: RandomVector) -> Tuple[Fraction, ...]:
    return tuple(
        sum((p * row[i] for p, row in zip(Z.space.probs, Z.values)), Fraction(0))
        for i in range(Z.d)
    )


@dataclass(frozen=True)
class TreeNode:
    name: str
    parent: Optional[int]
    prob: Fraction  # conditional on the parent


@dataclass(frozen=True)
class EventTree:
    """Filtration on a finite set of leaves, stored as parent links.

    Nodes are listed parents-first; node 0 is the deterministic root at date 0.
    Every leaf must sit at the final date ``T``.
    """

    nodes: Tuple[TreeNode, ...]

    def __post_init__(self):
        nodes = []
        for k, node in enumerate(self.nodes):
            if not isinstance(node, TreeNode):
                node = TreeNode(*node)
            node = TreeNode(str(node.name), node.parent, to_fraction(node.prob))
            if k == 0:
                if node.parent is not None or node.prob != 1:
                    raise ValidationError("node 0 must be the root with probability 1")
            elif node.parent is None or not 0 <= node.parent < k:
                raise ValidationError(f"node {node.name!r}: parent must precede it")
            elif node.prob <= 0:
                raise ValidationError(f"node {node.name!r}: conditional probability must be positive")
            nodes.append(node)
        if not nodes:
            raise ValidationError("empty tree")
        object.__setattr__(self, "nodes", tuple(nodes))
        for k, kids in enumerate(self.children):
            if kids and sum(self.nodes[c].prob for c in kids) != 1:
                raise ValidationError(f"children of node {self.nodes[k].name!r} do not sum to 1")
        dates = {self.date(k) for k in self.leaves}
        if len(dates) != 1:
            raise ValidationError("all leaves must be at the terminal date")
        if len({n.name for n in self.nodes}) != len(self.nodes):
            raise ValidationError("duplicate node names")

    @classmethod
    def single(cls) -> "EventTree":
        return cls((TreeNode("root", None, Fraction(1)),))

    @classmethod
    def from_branching(cls, cond_probs: Sequence[Sequence]) -> "EventTree":
        """Recombining-free tree where every node at date ``t`` splits by ``cond_probs[t]``."""
        nodes = [TreeNode("root", None, Fraction(1))]
        frontier = [0]
        for probs in cond_probs:
            nxt = []
            for parent in frontier:
                for j, p in enumerate(probs):
                    nodes.append(TreeNode(f"{nodes[parent].name}.{j}", parent, to_fraction(p)))
                    nxt.append(len(nodes) - 1)
            frontier = nxt
        return cls(tuple(nodes))

    @cached_property
    def children(self) -> Tuple[Tuple[int, ...], ...]:
        kids: List[List[int]] = [[] for _ in self.nodes]
        for k, node in enumerate(self.nodes):
            if node.parent is not None:
                kids[node.parent].append(k)
        return tuple(tuple(c) for c in kids)

    @cached_property
    def leaves(self) -> Tuple[int, ...]:
        return tuple(k for k, c in enumerate(self.children) if not c)

    def date(self, k: int) -> int:
        t = 0
        while self.nodes[k].parent is not None:
            k = self.nodes[k].parent
            t += 1
        return t

    @property
    def horizon(self) -> int:
        return self.date(self.leaves[0])

    def path(self, k: int) -> Tuple[int, ...]:
        """Nodes from the root down to ``k``, inclusive."""
        out = [k]
        while self.nodes[k].parent is not None:
            k = self.nodes[k].parent
            out.append(k)
        return tuple(reversed(out))

    @cached_property
    def absolute_probs(self) -> Tuple[Fraction, ...]:
        probs: List[Fraction] = []
        for node in self.nodes:
            probs.append(Fraction(1) if node.parent is None else probs[node.parent] * node.prob)
        return tuple(probs)

    def leaves_below(self, k: int) -> Tuple[int, ...]:
        """Atom indices (positions in :attr:`leaves`) under node ``k``."""
        return tuple(a for a, leaf in enumerate(self.leaves) if k in self.path(leaf))

    def index(self, name: str) -> int:
        for k, node in enumerate(self.nodes):
            if node.name == name:
                return k
        raise KeyError(name)


@dataclass(frozen=True)
class AdaptedProcess:
    """One ``d``-vector per tree node."""

    tree: EventTree
    values: Tuple[Tuple[Fraction, ...], ...]

    def __post_init__(self):
        vals = tuple(tuple(to_fraction(v) for v in row) for row in self.values)
        if len(vals) != len(self.tree.nodes):
            raise ValidationError("adapted process needs exactly one vector per node")
        object.__setattr__(self, "values", vals)

    def at(self, name: str) -> Tuple[Fraction, ...]:
        return self.values[self.tree.index(name)]


def tree_to_terminal_space(tree: EventTree) -> Tuple[ScenarioSpace, Dict[int, int]]:
    """Terminal space with one atom per leaf, and the map leaf node -> atom."""
    probs = tree.absolute_probs
    space = ScenarioSpace(tuple(probs[k] for k in tree.leaves))
    return space, {k: a for a, k in enumerate(tree.leaves)}
