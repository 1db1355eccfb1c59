"""Exact set-valued risk measures on finite probability spaces."""
from .acceptance import (
    AcceptanceSet,
    es_value,
    expectation_set,
    expected_shortfall_set,
    minkowski_augment,
    worst_case,
)
from .errors import AssumptionError, ConsistencyError, ValidationError
from .geometry import Halfspace, LiftedPolyhedron, canonical_text, contains, project, support
from .lp import INF, NEG_INF, Fraction, LinearProgram, solve
from .markets import (
    MarketModel,
    SolvencyCone,
    find_pricing_system,
    binomial_market,
    pricing_bound,
    superreplication_region,
)
from .preference import Relation, compare, multi_utility_check
from .risk import Direction, finiteness_report, rho, rho_dual, risk_region
from .scenario import EventTree, RandomVector, ScenarioSpace
from .systemic import Aggregator, aggregate, aggregated_support, conjugate, preimage_acceptance

__all__ = [
    "AcceptanceSet",
    "aggregate",
    "aggregated_support",
    "Aggregator",
    "AssumptionError",
    "canonical_text",
    "compare",
    "conjugate",
    "ConsistencyError",
    "contains",
    "Direction",
    "es_value",
    "EventTree",
    "expectation_set",
    "expected_shortfall_set",
    "find_pricing_system",
    "finiteness_report",
    "Fraction",
    "Halfspace",
    "INF",
    "binomial_market",
    "LiftedPolyhedron",
    "LinearProgram",
    "MarketModel",
    "minkowski_augment",
    "multi_utility_check",
    "NEG_INF",
    "preimage_acceptance",
    "pricing_bound",
    "project",
    "RandomVector",
    "Relation",
    "rho",
    "rho_dual",
    "risk_region",
    "ScenarioSpace",
    "solve",
    "SolvencyCone",
    "superreplication_region",
    "support",
    "ValidationError",
    "worst_case",
]

__version__ = "0.1.0"
