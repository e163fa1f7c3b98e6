"""Command-line front end.

Exit codes: 0 success, 2 usage, 3 unreadable or invalid input, 4 coverage
failure, 5 size cap, 6 verification failure (or a bound that was not
reached when ``--expect-tight`` is given), 7 region violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .lp import CoverageError
from .pauli import PartitionCertificate, PauliError, verify_certificate
from .relations import (MonogamyRelation, RelationError, all_embeddings_relation, catalog_lookup,
                        deserialize, optimal_fractional_cover, required_observables,
                        select_catalog)
from .simulator import RegionError, SimulatorError, chain_grid, star_grid
from .tightness import (TIGHT, OptimizeConfig, SearchConfig, cyclic_obstruction, elementary_search,
                        optimize_relation, seed_witness_value)
from .topology import (Hypergraph, SizeError, TopologyError, cyclic_hypergraph, export_dot,
                       line_graph)

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_COVERAGE, EXIT_SIZE, EXIT_VERIFY, EXIT_REGION = 0, 2, 3, 4, 5, 6, 7


class InputError(ValueError):
    pass


def _read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return json.loads(text)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def load_network(source: str) -> Hypergraph:
    """A network file, or ``cycle:H`` / ``pattern:NAME`` for built-in shapes."""
    if source.startswith("cycle:"):
        return cyclic_hypergraph(int(source[6:]))
    if source.startswith("pattern:"):
        return catalog_lookup(source[8:]).pattern
    d = _read_json(source)
    if isinstance(d, dict) and "network" in d and "edges" not in d:
        d = d["network"]
    return Hypergraph.from_dict(d)


def load_relation(source: str, form: str = "optimal") -> MonogamyRelation:
    """A relation file, a ``derive`` output (choosing ``form``), or ``pattern:NAME``."""
    if source.startswith("pattern:"):
        return catalog_lookup(source[8:]).as_relation()
    d = _read_json(source)
    if isinstance(d, dict) and "derived" in d:
        key = {"optimal": "normalized", "raw": "derived", "naive": "naive"}[form]
        d = d[key]
        if d is None:
            raise InputError(f"derive output has no {form} relation")
    return deserialize(d)


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _catalog_names(value: str | None):
    return [s.strip() for s in value.split(",") if s.strip()] if value else None


def cmd_derive(args) -> int:
    G = load_network(args.network)
    catalog = select_catalog(_catalog_names(args.catalog))
    rel = optimal_fractional_cover(G, catalog, subpatterns=not args.no_subpatterns)
    norm = rel.normalized()
    try:
        naive = all_embeddings_relation(G, catalog)
        naive = naive.normalized() if naive.uniform_bound is not None else naive
    except RelationError:
        naive = None
    witness = None if args.no_witness else seed_witness_value(norm, args.seed)
    out = {"network": G.to_dict(), "catalog": [r.name for r in catalog],
           "derived": rel.to_dict(), "normalized": norm.to_dict(),
           "naive": None if naive is None else naive.to_dict(), "seed_witness_value": witness}
    wv = "n/a" if witness is None else f"{witness:.6f}"
    print(f"{norm.summary()}    (best seeded witness: {wv})")
    if naive is not None:
        print(f"all-embeddings sum: {naive.summary()}")
    print(f"status: {norm.status}")
    if args.out:
        Path(args.out).write_text(_dumps(out))
    return EXIT_OK


def cmd_verify_cert(args) -> int:
    cert = PartitionCertificate.from_dict(_read_json(args.certificate))
    if args.relation:
        rel_source = args.relation
        if rel_source.startswith("pattern:"):
            er = catalog_lookup(rel_source[8:])
            network, claimed = er.pattern, er.bound
        else:
            d = _read_json(rel_source)
            if "coefficients" in d:
                r = deserialize(d)
                network, claimed = r.network, r.uniform_bound
            else:
                network, claimed = Hypergraph.from_dict(d.get("network", d)), None
        required = required_observables(network)
    else:
        required, claimed = cert.observables(), None
    report = verify_certificate(cert, required)
    ok = report.passed and (claimed is None or report.bound <= claimed)
    out = report.to_dict()
    out["claimed_bound"] = None if claimed is None else str(claimed)
    out["passed"] = ok
    print(f"{'PASS' if ok else 'FAIL'}: {len(cert.groups)} groups, bound {report.bound}"
          + ("" if claimed is None else f", claimed {claimed}"))
    for v in report.violations[:20]:
        print(f"  {v}")
    if args.out:
        Path(args.out).write_text(_dumps(out))
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_optimize(args) -> int:
    rel = load_relation(args.relation, args.form)
    cfg = OptimizeConfig(seed=args.seed, restarts=args.restarts, tight_tol=args.tight_tol,
                         plane=args.plane)
    verdict = optimize_relation(rel, cfg)
    bound = rel.uniform_bound if rel.uniform_bound is not None else rel.bound
    print(f"{rel.summary()}    best found: {verdict.best_lhs:.9f}    {verdict.status}"
          f" (gap {verdict.gap:.3g}, bound {bound})")
    _emit_json = _dumps(verdict.to_dict())
    if args.out:
        Path(args.out).write_text(_emit_json)
    if args.expect_tight and verdict.status != TIGHT:
        return EXIT_VERIFY
    return EXIT_OK


def cmd_search(args) -> int:
    cfg = SearchConfig(seed=args.seed, restarts=args.restarts, tight_tol=args.tight_tol,
                       h_max=args.h_max)
    log = elementary_search(args.n_max, args.m, cfg)
    _emit(args, log.to_jsonl())
    for e in log.added():
        print(f"added {e['name']}: {e['network']} bound {e['bound']} ({e['status_of_new']})",
              file=sys.stderr)
    return EXIT_OK


def cmd_steinmetz(args) -> int:
    if args.config == "star":
        noise = [float(x) for x in args.noise.split(",")] if args.noise else None
        points = star_grid(args.observers, args.points, noise, seed=args.seed)
    else:
        points = []
        for region in args.regions.split(","):
            points.extend(chain_grid(region.strip(), args.per_axis, seed=args.seed))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    k = len(points[0].edges) if points else 0
    edge_names = ["B" + "".join(str(q) for q in e) for e in points[0].edges] if points else []
    w.writerow(["config", "params"] + [f"target_{e}" for e in edge_names]
               + [f"achieved_{e}" for e in edge_names] + ["deviation", "max_pair_sum"])
    for p in points:
        w.writerow([p.config, " ".join(repr(float(x)) for x in p.params)]
                   + [repr(float(x)) for x in p.targets[:k]] + [repr(float(x)) for x in p.achieved]
                   + [repr(float(p.deviation)), repr(float(max(p.relation_sums(), default=0.0)))])
    _emit(args, buf.getvalue())
    dev = max((p.deviation for p in points), default=0.0)
    worst = max((s for p in points for s in p.relation_sums()), default=0.0)
    print(f"{len(points)} points; max deviation {dev:.3g}; max pairwise sum {worst:.12f} (limit 2)",
          file=sys.stderr)
    return EXIT_OK


def cmd_cyclic(args) -> int:
    report = cyclic_obstruction(args.h)
    _emit(args, _dumps(report.to_dict()))
    print(f"h={args.h}: checks {'pass' if report.passed else 'FAIL'}; "
          f"1/2 + 1/2 + {report.lemma_bound:.4f} > 1: {report.contradiction}", file=sys.stderr)
    return EXIT_OK if report.contradiction else EXIT_VERIFY


def cmd_export_dot(args) -> int:
    G = load_network(args.network)
    _emit(args, export_dot(line_graph(G) if args.line else G))
    return EXIT_OK


def cmd_catalog(args) -> int:
    rows = [r.to_dict() for r in select_catalog(None)]
    if args.out:
        Path(args.out).write_text(_dumps(rows))
    for r in select_catalog(None):
        print(f"{r.name:8s} n={r.pattern.n} bound={r.bound} groups={len(r.certificate.groups)} {r.pattern}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bellmono", description="Bell monogamy relations for qubit networks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True, restarts=None):
        sp.add_argument("--out", help="write the machine-readable result here")
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        if restarts is not None:
            sp.add_argument("--restarts", type=int, default=restarts)
            sp.add_argument("--tight-tol", type=float, default=1e-4)
            sp.add_argument("--plane", choices=["xy", "xz"], default="xy")

    sp = sub.add_parser("derive", help="derive a relation for a network")
    sp.add_argument("network", help="network JSON, cycle:H or pattern:NAME")
    sp.add_argument("--catalog", help="comma-separated built-in relation names")
    sp.add_argument("--no-subpatterns", action="store_true")
    sp.add_argument("--no-witness", action="store_true", help="skip the seeded witness evaluation")
    common(sp)
    sp.set_defaults(func=cmd_derive)

    sp = sub.add_parser("verify-cert", help="check an anti-commutation certificate")
    sp.add_argument("certificate")
    sp.add_argument("relation", nargs="?", help="relation/network JSON or pattern:NAME")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_verify_cert)

    sp = sub.add_parser("optimize", help="numerically test a relation for tightness")
    sp.add_argument("relation", help="relation JSON, derive output, or pattern:NAME")
    sp.add_argument("--form", choices=["optimal", "raw", "naive"], default="optimal")
    sp.add_argument("--expect-tight", action="store_true")
    common(sp, restarts=32)
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("search", help="brute-force search for elementary relations")
    sp.add_argument("--n-max", type=int, default=4)
    sp.add_argument("--m", type=int, default=3)
    sp.add_argument("--h-max", type=int)
    common(sp, restarts=8)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("steinmetz", help="star/chain states across their achievable regions (CSV)")
    sp.add_argument("config", choices=["star", "chain"])
    sp.add_argument("--observers", type=int, default=4)
    sp.add_argument("--points", type=int, default=17)
    sp.add_argument("--noise", help="comma-separated leaf noise values for leaves 2..")
    sp.add_argument("--regions", default="P1,P2,P3")
    sp.add_argument("--per-axis", type=int, default=5)
    common(sp)
    sp.set_defaults(func=cmd_steinmetz)

    sp = sub.add_parser("cyclic", help="obstruction report for the ring of h tripartite tests")
    sp.add_argument("h", type=int)
    common(sp, seed=False)
    sp.set_defaults(func=cmd_cyclic)

    sp = sub.add_parser("export-dot", help="Graphviz DOT for a network or its line graph")
    sp.add_argument("network")
    sp.add_argument("--line", action="store_true", help="export the line graph (pairwise tests only)")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_export_dot)

    sp = sub.add_parser("catalog", help="list built-in elementary relations")
    common(sp, seed=False)
    sp.set_defaults(func=cmd_catalog)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", 0) < 0:
        print("error: seed must be nonnegative", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except CoverageError as exc:
        print(f"coverage error: {exc}", file=sys.stderr)
        return EXIT_COVERAGE
    except SizeError as exc:
        print(f"size cap: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except RegionError as exc:
        print(f"region error: {exc}", file=sys.stderr)
        return EXIT_REGION
    except (InputError, TopologyError, RelationError, PauliError, SimulatorError,
            KeyError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
