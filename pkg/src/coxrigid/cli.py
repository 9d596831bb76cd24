"""Command line interface: ``coxrigid <command> ...``."""
from __future__ import annotations

import argparse
import json
import sys

from .crystal import CrystalGroup, group_from_json
from .engine import (DEFAULT_SEARCH_BUDGET, bc_case_report, decompose_product, distinguish,
                     feit_scan, fingerprint, group_from_graph, match_factors)
from .graphs import GraphError, classify_component, components, graph_from_json

EXIT_OK, EXIT_ERROR, EXIT_NON_AFFINE, EXIT_INDISTINGUISHABLE = 0, 1, 2, 3


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: malformed JSON: {exc}") from exc


def _group(path: str) -> CrystalGroup:
    """A graph document gives the affine Coxeter group, anything else is read as group data."""
    doc = _load(path)
    if isinstance(doc, dict) and "vertices" in doc:
        return group_from_graph(graph_from_json(doc))
    return group_from_json(doc)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_classify(args) -> int:
    g = graph_from_json(_load(args.graph))
    rows = []
    for comp in components(g):
        t = classify_component(comp)
        rows.append({"vertices": list(comp.vertices), "type": t.to_json()})
    _emit({"components": rows})
    return EXIT_OK if all(r["type"]["family"] == "affine" for r in rows) else EXIT_NON_AFFINE


def cmd_fingerprint(args) -> int:
    g = _group(args.input)
    _emit(fingerprint(g, budget=args.budget, cf=True if args.cf else None).to_json())
    return EXIT_OK


def cmd_distinguish(args) -> int:
    rep = distinguish(_group(args.a), _group(args.b), budget=args.budget)
    _emit(rep.to_json())
    return EXIT_OK if rep.distinguished else EXIT_INDISTINGUISHABLE


def cmd_feit_scan(args) -> int:
    rows = feit_scan(args.type, args.rank)
    if args.pretty:
        print(f"{'lattice':<8} {'[L:Q]':>6}  abelianization")
        for r in rows:
            mark = "  <- Z_2" if r["is_z2"] else ""
            print(f"{r['lattice']:<8} {r['index_over_Q']:>6}  {r['abelianization']}{mark}")
    else:
        _emit(rows)
    return EXIT_OK


def cmd_bc_report(args) -> int:
    rep = bc_case_report(args.rank, search_budget=args.search_budget)
    _emit(rep)
    return EXIT_OK if rep["all_passed"] else EXIT_ERROR


def cmd_match_products(args) -> int:
    a = decompose_product(graph_from_json(_load(args.a)))
    b = decompose_product(graph_from_json(_load(args.b)))
    sigma = match_factors(a, b)
    if sigma is None:
        print("no matching")
    else:
        _emit({"sigma": sigma, "a": a.names(), "b": b.names()})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coxrigid", description="Invariants of affine Coxeter groups.")
    parser.add_argument("--seed", type=int, default=None, help="accepted and ignored; output is deterministic")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
        p.set_defaults(func=fn)
        return p

    p = add("classify", cmd_classify, "classify the components of a Coxeter graph")
    p.add_argument("graph")
    p = add("fingerprint", cmd_fingerprint, "invariant fingerprint of a graph or group document")
    p.add_argument("input")
    p.add_argument("--budget", type=int, default=DEFAULT_SEARCH_BUDGET)
    p.add_argument("--cf", action="store_true", help="compute finite subgroup classes regardless of size")
    p = add("distinguish", cmd_distinguish, "find the cheapest invariant that separates two groups")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--budget", type=int, default=DEFAULT_SEARCH_BUDGET)
    p = add("feit-scan", cmd_feit_scan, "abelianizations over the invariant lattices of type A, D or E")
    p.add_argument("--type", required=True, choices=["A", "D", "E"])
    p.add_argument("--rank", required=True, type=int)
    p.add_argument("--pretty", action="store_true")
    p = add("bc-report", cmd_bc_report, "check the claims separating ~B_n from ~C_n")
    p.add_argument("--rank", required=True, type=int)
    p.add_argument("--search-budget", type=int, default=DEFAULT_SEARCH_BUDGET)
    p = add("match-products", cmd_match_products, "match the factors of two products of affine graphs")
    p.add_argument("a")
    p.add_argument("b")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GraphError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
