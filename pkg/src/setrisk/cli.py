"""Command line interface.

Every command reads one JSON instance and prints one JSON document with
sorted keys and rationals as ``"p/q"`` strings.  Exit codes: 0 success,
2 bad input, 3 a standing assumption fails, 4 internal inconsistency.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .errors import AssumptionError, ConsistencyError, ValidationError
from .instance import Instance, fmt, fmt_vec, load_instance
from .markets import check_pricing_system, find_pricing_system, pricing_bound
from .preference import compare, multi_utility_check
from .risk import finiteness_report, resolve_mask, rho, rho_dual, risk_region
from .systemic import aggregated_support, conjugate, conjugate_closed_form

EXIT_INPUT = 2
EXIT_ASSUMPTION = 3
EXIT_CONSISTENCY = 4


def _mask(inst: Instance, args) -> tuple:
    if args.mask:
        try:
            mask = [int(v) - 1 for v in args.mask.split(",")]
        except ValueError as exc:
            raise ValidationError(f"bad --mask {args.mask!r}") from exc
        if any(k < 0 for k in mask):
            raise ValidationError("--mask entries are 1-based")
        return resolve_mask(inst.d, mask)
    return resolve_mask(inst.d, inst.mask)


def _coords(mask) -> list:
    return [k + 1 for k in mask]


def _halfspace(h) -> dict:
    return {"normal": fmt_vec(h.normal), "offset": fmt(h.offset), "relation": "==" if h.equality else ">="}


def cmd_region(inst: Instance, args) -> dict:
    mask = _mask(inst, args)
    region = risk_region(inst.region_acceptance, inst.vector(args.vector), mask)
    if region.empty:
        return {"empty": True}
    return {"empty": False, "mask": _coords(mask), "halfspaces": [_halfspace(h) for h in region.halfspaces]}


def _separation(sep) -> Optional[dict]:
    if sep is None:
        return None
    return {
        "point": fmt_vec(sep.point),
        "direction": fmt_vec(sep.direction.w),
        "rho_better": fmt(sep.rho_better),
        "rho_worse": fmt(sep.rho_worse),
    }


def cmd_compare(inst: Instance, args) -> dict:
    mask = _mask(inst, args)
    A = inst.region_acceptance
    X, Y = inst.vector(args.x), inst.vector(args.y)
    verdict = compare(A, X, Y, mask)
    record = multi_utility_check(A, X, Y, mask, verdict=verdict)
    if not record.agree:
        raise ConsistencyError(
            f"geometric verdict {verdict.relation.value} but scalar verdict {record.scalar.value}"
        )
    return {
        "relation": verdict.relation.value,
        "mask": _coords(mask),
        "witnesses": {
            "not_x_over_y": _separation(verdict.not_x_over_y),
            "not_y_over_x": _separation(verdict.not_y_over_x),
        },
        "multi_utility": {
            "directions": len(record.directions),
            "pruned": len(record.pruned),
            "agree": True,
        },
    }


def cmd_scalar(inst: Instance, args) -> dict:
    mask = _mask(inst, args)
    A = inst.region_acceptance
    X, w = inst.vector(args.vector), inst.direction(args.direction)
    value = rho(A, X, w, mask)
    out = {"direction": fmt_vec(w.w), "mask": _coords(mask), "value": fmt(value)}
    if args.dual:
        res = rho_dual(A, X, w, mask)
        if res.value != value:
            raise ConsistencyError(f"primal value {value} != dual value {res.value}")
        cert = res.certificate
        if cert is not None and not cert.check(A):
            raise ConsistencyError("dual certificate fails its own check")
        out["certificate"] = None if cert is None else {
            "Z": [fmt_vec(row) for row in cert.Z.values],
            "sigma": fmt(cert.sigma),
        }
    return out


def cmd_cps(inst: Instance, args) -> dict:
    model = inst.market
    if model is None:
        raise ValidationError("cps needs a market instance")
    w = inst.direction(args.direction).w
    if args.vector:
        value, ps = pricing_bound(model, inst.vector(args.vector), w)
    else:
        value, ps = None, find_pricing_system(model, w)
    out = {"expectation": fmt_vec(w)}
    if value is not None:
        out["bound"] = fmt(value)
    if ps is None:
        out["system"] = "none"
        return out
    if not check_pricing_system(model, ps, w):
        raise ConsistencyError("emitted pricing system fails validation")
    tree = model.tree
    out["system"] = {
        "Z": [fmt_vec(row) for row in ps.Z.values],
        "process": {node.name: fmt_vec(v) for node, v in zip(tree.nodes, ps.process.values)},
    }
    return out


def cmd_conjugate(inst: Instance, args) -> dict:
    L = inst.aggregator
    if L is None:
        raise ValidationError("conjugate needs a systemic instance")
    points = {}
    for name, z in sorted(inst.points.items()):
        lp_value, closed = conjugate(L, z), conjugate_closed_form(L, z)
        if lp_value != closed:
            raise ConsistencyError(f"conjugate at {name}: LP {lp_value} != closed form {closed}")
        points[name] = fmt(lp_value)
    out = {"conjugate": points}
    if args.vector:
        out["support"] = fmt(aggregated_support(L, inst.space, inst.vector(args.vector), inst.acceptance))
    return out


def cmd_diag(inst: Instance, args) -> dict:
    mask = _mask(inst, args)
    rep = finiteness_report(inst.region_acceptance, mask)
    return {
        "mask": _coords(mask),
        "whole_space_sum": rep.whole_space_sum,
        "meets_qint_orthant": rep.meets_qint_orthant,
        "meets_qint_recession": rep.meets_qint_recession,
        "finite_guaranteed": rep.finite_guaranteed,
        "witness_orthant": None if rep.witness_orthant is None else fmt_vec(rep.witness_orthant),
        "witness_recession": None if rep.witness_recession is None else fmt_vec(rep.witness_recession),
    }


COMMANDS = {
    "region": cmd_region,
    "compare": cmd_compare,
    "scalar": cmd_scalar,
    "cps": cmd_cps,
    "conjugate": cmd_conjugate,
    "diag": cmd_diag,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="setrisk", description="Exact set-valued risk computations.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--instance", required=True, help="JSON instance file")
    common.add_argument("--output", default="-", help="output file (default: stdout)")
    common.add_argument("--mask", help="eligible coordinates, 1-based and comma separated")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("region", parents=[common], help="risk region of a position")
    p.add_argument("vector")
    p = sub.add_parser("compare", parents=[common], help="compare two positions")
    p.add_argument("x")
    p.add_argument("y")
    p = sub.add_parser("scalar", parents=[common], help="scalar risk measure in a direction")
    p.add_argument("vector")
    p.add_argument("direction")
    p.add_argument("--dual", action="store_true", help="also solve the dual and emit its certificate")
    p = sub.add_parser("cps", parents=[common], help="consistent pricing system with given expectation")
    p.add_argument("direction")
    p.add_argument("--vector", help="also maximize the price of this claim")
    p = sub.add_parser("conjugate", parents=[common], help="aggregator conjugate at the named points")
    p.add_argument("--vector", help="also report the support of the preimage set at this Z")
    sub.add_parser("diag", parents=[common], help="finiteness diagnostics")
    return parser


def _emit(doc, target: str) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if target == "-":
        sys.stdout.write(text)
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)


def _fail(kind: str, exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}, sort_keys=True) + "\n")
    return code


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        inst = load_instance(args.instance)
        doc = COMMANDS[args.command](inst, args)
    except OSError as exc:
        return _fail("input", exc, EXIT_INPUT)
    except AssumptionError as exc:
        return _fail("assumption", exc, EXIT_ASSUMPTION)
    except ValidationError as exc:
        return _fail("input", exc, EXIT_INPUT)
    except ConsistencyError as exc:
        return _fail("consistency", exc, EXIT_CONSISTENCY)
    _emit(doc, args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
