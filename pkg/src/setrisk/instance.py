"""JSON instance files: schema, loading and exact serialization."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple

import jsonschema

from .acceptance import AcceptanceSet, expectation_set, expected_shortfall_set, worst_case
from .geometry import Halfspace, LiftedPolyhedron
from .lp import INF, NEG_INF, ValidationError, to_fraction
from .markets import MarketModel, SolvencyCone
from .risk import Direction
from .scenario import EventTree, RandomVector, ScenarioSpace, TreeNode, tree_to_terminal_space
from .systemic import Aggregator, preimage_acceptance

__all__ = ["SCHEMA", "Instance", "load_instance", "parse_instance", "fmt", "fmt_vec", "parse_rational"]

_RATIONAL = {
    "oneOf": [
        {"type": "integer"},
        {"type": "string", "pattern": r"^\s*[+-]?\d+(\s*/\s*[1-9]\d*)?\s*$"},
    ]
}
_VECTOR = {"type": "array", "items": _RATIONAL, "minItems": 1}
_MATRIX = {"type": "array", "items": _VECTOR, "minItems": 1}

_AGGREGATOR = {
    "type": "object",
    "oneOf": [
        {
            "properties": {"kind": {"const": "weighted_losses"}, "alpha": _VECTOR},
            "required": ["kind", "alpha"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "kind": {"const": "custom"},
                "pieces": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "array",
                        "minItems": 1,
                        "items": {"type": "array", "items": _RATIONAL, "minItems": 2, "maxItems": 2},
                    },
                },
            },
            "required": ["kind", "pieces"],
            "additionalProperties": False,
        },
    ],
}

_BASE_ACCEPTANCE = {
    "type": "object",
    "oneOf": [
        {
            "properties": {"label": {"enum": ["worst_case", "expectation"]}},
            "required": ["label"],
            "additionalProperties": False,
        },
        {
            "properties": {"label": {"const": "expected_shortfall"}, "alpha": _VECTOR},
            "required": ["label", "alpha"],
            "additionalProperties": False,
        },
        {
            "properties": {"label": {"const": "systemic"}, "aggregator": _AGGREGATOR},
            "required": ["label", "aggregator"],
            "additionalProperties": False,
        },
        {
            "properties": {
                "label": {"const": "polyhedral"},
                "halfspaces": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "properties": {"normal": _VECTOR, "offset": _RATIONAL},
                        "required": ["normal", "offset"],
                        "additionalProperties": False,
                    },
                },
            },
            "required": ["label", "halfspaces"],
            "additionalProperties": False,
        },
    ],
}

_CONE = {
    "type": "object",
    "properties": {
        "node": {"type": "string"},
        "generators": _MATRIX,
        "inequalities": _MATRIX,
    },
    "required": ["node"],
    "oneOf": [{"required": ["generators"]}, {"required": ["inequalities"]}],
    "additionalProperties": False,
}

_MARKET = {
    "type": "object",
    "properties": {
        "label": {"const": "market"},
        "base": _BASE_ACCEPTANCE,
        "cones": {"type": "array", "items": _CONE, "minItems": 1},
    },
    "required": ["label", "cones"],
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "properties": {
        "space": {
            "type": "object",
            "properties": {"probs": _VECTOR},
            "required": ["probs"],
            "additionalProperties": False,
        },
        "tree": {
            "type": "object",
            "properties": {
                "nodes": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "properties": {
                            "name": {"type": "string"},
                            "parent": {"type": ["string", "null"]},
                            "prob": _RATIONAL,
                        },
                        "required": ["name", "parent", "prob"],
                        "additionalProperties": False,
                    },
                }
            },
            "required": ["nodes"],
            "additionalProperties": False,
        },
        "d": {"type": "integer", "minimum": 1},
        "acceptance": {"oneOf": [_BASE_ACCEPTANCE, _MARKET]},
        "M_mask": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "vectors": {"type": "object", "additionalProperties": _MATRIX},
        "directions": {"type": "object", "additionalProperties": _VECTOR},
        "points": {"type": "object", "additionalProperties": _VECTOR},
        "description": {"type": "string"},
    },
    "required": ["d", "acceptance"],
    "oneOf": [{"required": ["space"]}, {"required": ["tree"]}],
    "additionalProperties": False,
}


def parse_rational(v) -> Fraction:
    if isinstance(v, str):
        try:
            return Fraction(v.replace(" ", ""))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"not a rational: {v!r}") from exc
    return to_fraction(v)


def fmt(v) -> str:
    if v == INF:
        return "inf"
    if v == NEG_INF:
        return "-inf"
    return str(Fraction(v))


def fmt_vec(v) -> list:
    return [fmt(x) for x in v]


@dataclass
class Instance:
    space: ScenarioSpace
    d: int
    acceptance: AcceptanceSet
    mask: Optional[Tuple[int, ...]]  # 0-based
    vectors: Dict[str, RandomVector]
    directions: Dict[str, Tuple[Fraction, ...]]
    points: Dict[str, Tuple[Fraction, ...]] = field(default_factory=dict)
    tree: Optional[EventTree] = None
    market: Optional[MarketModel] = None
    aggregator: Optional[Aggregator] = None

    def vector(self, name: str) -> RandomVector:
        if name not in self.vectors:
            raise ValidationError(f"no vector named {name!r}")
        return self.vectors[name]

    def direction(self, name: str) -> Direction:
        if name not in self.directions:
            raise ValidationError(f"no direction named {name!r}")
        return Direction(self.directions[name])

    @property
    def region_acceptance(self) -> AcceptanceSet:
        """The set whose risk regions the commands report (markets add the trading cones)."""
        return self.market.augmented if self.market is not None else self.acceptance


def _tree(doc) -> EventTree:
    names = {}
    nodes = []
    for k, node in enumerate(doc["nodes"]):
        parent = node["parent"]
        if parent is not None and parent not in names:
            raise ValidationError(f"node {node['name']!r}: unknown or later parent {parent!r}")
        nodes.append(TreeNode(node["name"], None if parent is None else names[parent], parse_rational(node["prob"])))
        names[node["name"]] = k
    return EventTree(tuple(nodes))


def _base_acceptance(doc, space: ScenarioSpace, d: int):
    label = doc["label"]
    if label == "worst_case":
        return worst_case(space, d), None
    if label == "expectation":
        return expectation_set(space, d), None
    if label == "expected_shortfall":
        return expected_shortfall_set(space, d, [parse_rational(a) for a in doc["alpha"]]), None
    if label == "polyhedral":
        hs = [Halfspace(tuple(parse_rational(v) for v in h["normal"]), parse_rational(h["offset"])) for h in doc["halfspaces"]]
        if any(len(h.normal) != space.n * d for h in hs):
            raise ValidationError(f"polyhedral halfspaces need n*d = {space.n * d} coefficients")
        body = LiftedPolyhedron.from_halfspaces(space.n * d, hs)
        return AcceptanceSet(space, d, body, all(h.offset == 0 for h in hs), "polyhedral"), None
    agg = doc["aggregator"]
    if agg["kind"] == "weighted_losses":
        L = Aggregator.weighted_losses([parse_rational(a) for a in agg["alpha"]])
    else:
        L = Aggregator(tuple(tuple((parse_rational(a), parse_rational(b)) for a, b in coord) for coord in agg["pieces"]))
    if L.d != d:
        raise ValidationError(f"aggregator has {L.d} coordinates, instance has d = {d}")
    return preimage_acceptance(L, space), L


def parse_instance(doc) -> Instance:
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc), key=lambda e: list(e.path))
    if errors:
        raise ValidationError("; ".join(f"{'/'.join(map(str, e.path)) or '<root>'}: {e.message}" for e in errors))
    d = doc["d"]
    tree = None
    if "tree" in doc:
        tree = _tree(doc["tree"])
        space, _ = tree_to_terminal_space(tree)
    else:
        space = ScenarioSpace(tuple(parse_rational(p) for p in doc["space"]["probs"]))
    acc_doc = doc["acceptance"]
    market = None
    if acc_doc["label"] == "market":
        if tree is None:
            raise ValidationError("market instances need a tree")
        base, L = _base_acceptance(acc_doc.get("base", {"label": "worst_case"}), space, d)
        by_node = {}
        for c in acc_doc["cones"]:
            rows = [[parse_rational(v) for v in row] for row in c.get("generators", c.get("inequalities"))]
            cone = SolvencyCone.from_generators(rows) if "generators" in c else SolvencyCone.from_inequalities(rows)
            by_node[c["node"]] = cone
        missing = [n.name for n in tree.nodes if n.name not in by_node]
        if missing or len(by_node) != len(tree.nodes):
            raise ValidationError(f"need exactly one cone per node; missing {missing}")
        market = MarketModel(tree, d, tuple(by_node[n.name] for n in tree.nodes), base)
        acceptance = base
    else:
        acceptance, L = _base_acceptance(acc_doc, space, d)
    mask = None
    if "M_mask" in doc:
        mask = tuple(k - 1 for k in doc["M_mask"])
        if any(k >= d for k in mask) or len(set(mask)) != len(mask):
            raise ValidationError(f"M_mask entries must be distinct and within 1..{d}")
    vectors = {}
    for name, rows in doc.get("vectors", {}).items():
        vectors[name] = RandomVector(space, tuple(tuple(parse_rational(v) for v in row) for row in rows))
        if vectors[name].d != d:
            raise ValidationError(f"vector {name!r} has the wrong dimension")
    dirs = {name: tuple(parse_rational(v) for v in w) for name, w in doc.get("directions", {}).items()}
    points = {name: tuple(parse_rational(v) for v in z) for name, z in doc.get("points", {}).items()}
    return Instance(space, d, acceptance, mask, vectors, dirs, points, tree, market, L)


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid JSON: {exc}") from exc
    return parse_instance(doc)
