"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error (bad documents, unknown
ids), 3 analysis error (disconnected totals, I/O failures during a run).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .expand import expand, to_dot
from .flows import flows_csv, flows_geojson, redistribution, section_flows
from .metrics import nri, nri_pair, redundancy_sweep
from .model import (
    NetworkFormatError,
    RawNetwork,
    WeightKind,
    parse_network,
    validate,
)
from .report import (
    ConfigError,
    comparison_json_payload,
    comparison_summary_block,
    parse_weight,
    redundancy_json_payload,
    run_report,
)
from .routing import (
    DisconnectedNetworkError,
    ZeroCostPairError,
    all_pairs,
    shortest_path,
    total_cost,
)
from .scenario import compare_scenarios, parse_scenario


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are exit 1
        raise _UsageError(message)


def _load_network(path: str, lenient: bool) -> RawNetwork:
    return parse_network(Path(path).read_text(encoding="utf-8"), lenient=lenient)


def _single_kind(value: str) -> WeightKind:
    try:
        return WeightKind(value)
    except ValueError:
        raise _UsageError(f"--weight must be 'time' or 'distance', got {value!r}") from None


def build_parser() -> _Parser:
    parser = _Parser(prog="railnet", description="Railway network resilience toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lenient", action="store_true", help="ignore unknown document keys")
    common.add_argument("--threads", type=int, default=None, metavar="N", help="worker threads")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a network document and report structure")
    p.add_argument("network")
    p.add_argument("--dot", metavar="FILE", help="write the expanded graph as DOT text")
    p.add_argument("--weight", default="time", help="weighting for the DOT export")

    p = sub.add_parser("route", parents=[common], help="shortest path between two stations")
    p.add_argument("network")
    p.add_argument("--from", dest="origin", required=True, metavar="STATION")
    p.add_argument("--to", dest="dest", required=True, metavar="STATION")
    p.add_argument("--weight", default="time", choices=["time", "distance"])

    p = sub.add_parser("flows", parents=[common], help="per-section shortest-path counts")
    p.add_argument("network")
    p.add_argument("--weight", default="time", choices=["time", "distance"])
    p.add_argument("--csv", metavar="FILE", help="write counts as CSV")
    p.add_argument("--geojson", metavar="FILE", help="write a GeoJSON feature collection")

    p = sub.add_parser("nri", parents=[common], help="network robustness index of a section")
    p.add_argument("network")
    p.add_argument("--section", required=True)
    p.add_argument("--pair", metavar="SECTION", help="delete this section together with --section")
    p.add_argument("--weight", default="time", choices=["time", "distance"])

    p = sub.add_parser("redundancy", parents=[common], help="redundancy indices for target sections")
    p.add_argument("network")
    p.add_argument("--targets", required=True, metavar="ID,ID,...")
    p.add_argument("--weight", default="time", choices=["time", "distance"])
    p.add_argument("--unrestricted", action="store_true", help="sum over all pairs, not just those avoiding the target at baseline")
    p.add_argument("--per-v", action="store_true", dest="per_v", help="include the per-disruption breakdown")

    p = sub.add_parser("compare", parents=[common], help="compare what-if scenarios against a base network")
    p.add_argument("network")
    p.add_argument("--scenario", action="append", required=True, metavar="FILE", help="scenario JSON (repeatable)")
    p.add_argument("--busiest", default="auto", help="section to track, or 'auto' for the baseline busiest")
    p.add_argument("--weight", default="both", choices=["time", "distance", "both"])

    p = sub.add_parser("report", parents=[common], help="run a configured analysis bundle")
    p.add_argument("config")
    p.add_argument("--figures", action="store_true", default=None, help="force figure rendering on")

    return parser


def _cmd_validate(args) -> int:
    net = _load_network(args.network, args.lenient)
    report = validate(net)
    if args.dot:
        kinds = parse_weight(args.weight)
        Path(args.dot).write_text(to_dot(expand(net, kinds[0])), encoding="utf-8")
    if args.json:
        payload = {
            "stations": report.station_count,
            "sections": report.section_count,
            "eligible": report.eligible_count,
            "wyes": report.wye_count,
            "auxiliary": report.auxiliary_count,
            "components": report.component_count,
            "degree_histogram": {str(k): v for k, v in sorted(report.degree_histogram.items())},
            "contractible_joints": list(report.contractible_joints),
        }
        print(json.dumps(payload, indent=2))
    else:
        print(report.summary())
    return 0


def _cmd_route(args) -> int:
    net = _load_network(args.network, args.lenient)
    kind = _single_kind(args.weight)
    result = shortest_path(expand(net, kind), args.origin, args.dest, threads=args.threads)
    if args.json:
        payload = {
            "from": args.origin,
            "to": args.dest,
            "weight": kind.value,
            "reachable": result.reachable,
            "cost": result.cost if result.reachable else None,
            "sections": list(result.sections),
            "reversals": result.reversals,
        }
        print(json.dumps(payload, indent=2))
    else:
        print(f"{args.origin} -> {args.dest}  [{kind.value}]")
        if result.reachable:
            print(f"cost: {result.cost:g} {kind.unit}")
            print(f"sections: {', '.join(result.sections) if result.sections else '(none)'}")
            print(f"reversals: {result.reversals}")
        else:
            print("cost: UNREACHABLE")
    return 0


def _cmd_flows(args) -> int:
    net = _load_network(args.network, args.lenient)
    kind = _single_kind(args.weight)
    matrix = all_pairs(expand(net, kind), threads=args.threads)
    usage = section_flows(matrix)
    csv_text = flows_csv(usage)
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
    if args.geojson:
        geo = flows_geojson(net, usage)
        if geo is not None:
            Path(args.geojson).write_text(json.dumps(geo, indent=2) + "\n", encoding="utf-8")
        else:
            print("warning: GeoJSON export skipped (missing station coordinates)", file=sys.stderr)
    if args.json:
        payload = {
            "weight": kind.value,
            "pairs": usage.n_pairs,
            "counts": {sid: usage.counts[sid] for sid in sorted(usage.counts)},
        }
        print(json.dumps(payload, indent=2))
    elif not args.csv:
        print(csv_text, end="")
    return 0


def _cmd_nri(args) -> int:
    net = _load_network(args.network, args.lenient)
    kind = _single_kind(args.weight)
    g = expand(net, kind)
    if args.pair:
        result = nri_pair(g, args.section, args.pair, threads=args.threads)
        label = f"{args.section}+{args.pair}"
        q, finite = result.q, result.finite
    else:
        result = nri(g, args.section, threads=args.threads)
        label = args.section
        q, finite = result.q, result.finite
    if args.json:
        payload = {
            "section": args.section,
            "pair_with": args.pair,
            "weight": kind.value,
            "q": q if finite else None,
            "finite": finite,
        }
        print(json.dumps(payload, indent=2))
    else:
        value = "INFINITE (deletion disconnects the network)" if not finite else f"{q:,.3f} {kind.unit}"
        print(f"q[{label}] = {value}")
    return 0


def _cmd_redundancy(args) -> int:
    net = _load_network(args.network, args.lenient)
    kind = _single_kind(args.weight)
    targets = [t for t in args.targets.split(",") if t]
    if not targets:
        raise _UsageError("--targets needs at least one section id")
    results = redundancy_sweep(
        expand(net, kind),
        targets,
        restricted=not args.unrestricted,
        include_per_v=args.per_v,
        threads=args.threads,
    )
    if args.json:
        print(redundancy_json_payload(results), end="")
    else:
        for r in results:
            plain = f"{r.r_plain:,.6f}" if r.plain_finite else "INFINITE"
            print(
                f"r'[{r.section}] = {r.r_reciprocal_normalized:.6f}"
                f"  (reciprocal {r.r_reciprocal:.6f}, plain {plain})"
            )
            if r.per_v is not None:
                for t in r.per_v:
                    tp = f"{t.plain:,.6f}" if t.finite else "INFINITE"
                    print(f"  v={t.v}: reciprocal {t.reciprocal:.6f}, plain {tp}")
    return 0


def _cmd_compare(args) -> int:
    net = _load_network(args.network, args.lenient)
    kinds = parse_weight(args.weight)
    scenarios = [
        parse_scenario(Path(p).read_text(encoding="utf-8"), lenient=args.lenient)
        for p in args.scenario
    ]
    report = compare_scenarios(
        net, scenarios, busiest=args.busiest, weight_kinds=kinds, threads=args.threads
    )
    if args.json:
        print(comparison_json_payload(report), end="")
    else:
        print(comparison_summary_block(report))
    return 0


def _cmd_report(args) -> int:
    bundle = run_report(args.config, threads=args.threads, figures=args.figures)
    print(f"report written to {bundle.output_dir}")
    for name in bundle.files:
        print(f"  {name}")
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "route": _cmd_route,
    "flows": _cmd_flows,
    "nri": _cmd_nri,
    "redundancy": _cmd_redundancy,
    "compare": _cmd_compare,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (NetworkFormatError, ConfigError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (DisconnectedNetworkError, ZeroCostPairError, OSError, RuntimeError) as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
