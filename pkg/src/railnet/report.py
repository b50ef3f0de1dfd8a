"""Config-driven report runs: every analysis to files in one output folder.

The config is a single JSON document naming the network, the weightings,
the analyses to run and their parameters.  Outputs are deterministic:
fixed orderings, fixed decimal formatting, so identical inputs produce
byte-identical files.  Optionally the delimited outputs are accompanied by
rendered figures (bar charts of flows, scenario deltas and redundancy);
map-style rendering stays downstream of the GeoJSON/CSV exports.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from .expand import expand, to_dot
from .flows import SectionUsage, flows_csv, flows_geojson, redistribution, section_flows
from .metrics import RedundancyResult, nri, nri_pair, redundancy_sweep
from .model import (
    NetworkFormatError,
    RawNetwork,
    WeightKind,
    parse_network,
    validate,
)
from .routing import all_pairs, total_cost
from .scenario import (
    ComparisonReport,
    ScenarioSpec,
    compare_scenarios,
    parse_scenario,
    scenario_from_obj,
)


class ConfigError(ValueError):
    """The report configuration document is invalid."""


_ANALYSES = ("flows", "nri", "redundancy", "compare", "redistribution")
_CONFIG_KEYS = {
    "network",
    "weight",
    "output_dir",
    "analyses",
    "lenient",
    "scenarios",
    "busiest",
    "nri",
    "redundancy",
    "redistribution",
    "figures",
    "geojson",
    "dot",
    "threads",
}


def parse_weight(s: str) -> tuple[WeightKind, ...]:
    if s == "both":
        return (WeightKind.DISTANCE, WeightKind.TIME)
    try:
        return (WeightKind(s),)
    except ValueError:
        raise ConfigError(f"unknown weight {s!r} (expected time, distance or both)") from None


@dataclass(frozen=True)
class ReportConfig:
    network_path: Path
    output_dir: Path
    weight_kinds: tuple[WeightKind, ...]
    analyses: tuple[str, ...]
    lenient: bool
    scenarios: tuple[ScenarioSpec, ...]
    busiest: str
    nri_sections: tuple[str, ...]
    nri_pairs: tuple[tuple[str, str], ...]
    redundancy_targets: tuple[str, ...]
    redundancy_unrestricted: bool
    redundancy_per_v: bool
    redistribution_disrupted: tuple[str, ...]
    redistribution_watched: tuple[str, ...]
    figures: bool
    geojson: bool
    dot: bool
    threads: int | None


def load_config(config_path: str | Path) -> ReportConfig:
    path = Path(config_path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config syntax error at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, Mapping):
        raise ConfigError("config root must be an object")
    unknown = sorted(set(data) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}")
    base_dir = path.parent

    network = data.get("network")
    if not isinstance(network, str) or not network:
        raise ConfigError("config needs a 'network' path")
    analyses_raw = data.get("analyses")
    if not isinstance(analyses_raw, list) or not analyses_raw:
        raise ConfigError("config needs a non-empty 'analyses' list")
    seen: list[str] = []
    for name in analyses_raw:
        if name not in _ANALYSES:
            raise ConfigError(f"unknown analysis {name!r} (expected one of {', '.join(_ANALYSES)})")
        if name not in seen:
            seen.append(name)

    lenient = bool(data.get("lenient", False))
    scenarios: list[ScenarioSpec] = []
    for item in data.get("scenarios", []):
        if isinstance(item, str):
            scenarios.append(
                parse_scenario((base_dir / item).read_text(encoding="utf-8"), lenient=lenient)
            )
        else:
            scenarios.append(scenario_from_obj(item, lenient=lenient))

    nri_cfg = data.get("nri", {})
    red_cfg = data.get("redundancy", {})
    rdt_cfg = data.get("redistribution", {})
    for name, section in (("nri", nri_cfg), ("redundancy", red_cfg), ("redistribution", rdt_cfg)):
        if not isinstance(section, Mapping):
            raise ConfigError(f"config key {name!r} must be an object")

    def _str_list(cfg: Mapping, key: str, where: str) -> tuple[str, ...]:
        value = cfg.get(key, [])
        if not isinstance(value, list) or any(not isinstance(x, str) for x in value):
            raise ConfigError(f"{where}.{key} must be a list of ids")
        return tuple(value)

    pairs_raw = nri_cfg.get("pairs", [])
    pairs: list[tuple[str, str]] = []
    for p in pairs_raw:
        if not isinstance(p, list) or len(p) != 2 or any(not isinstance(x, str) for x in p):
            raise ConfigError("nri.pairs must be a list of [u, v] id pairs")
        pairs.append((p[0], p[1]))

    if "compare" in seen and not scenarios:
        raise ConfigError("the 'compare' analysis needs at least one scenario")
    if "redundancy" in seen and not red_cfg.get("targets"):
        raise ConfigError("the 'redundancy' analysis needs explicit targets")
    if "nri" in seen and not (nri_cfg.get("sections") or pairs):
        raise ConfigError("the 'nri' analysis needs sections and/or pairs")
    if "redistribution" in seen and not (
        rdt_cfg.get("disrupted") and rdt_cfg.get("watched")
    ):
        raise ConfigError("the 'redistribution' analysis needs disrupted and watched sections")

    threads = data.get("threads")
    if threads is not None and (isinstance(threads, bool) or not isinstance(threads, int) or threads < 1):
        raise ConfigError("'threads' must be a positive integer")

    return ReportConfig(
        network_path=base_dir / network,
        output_dir=base_dir / str(data.get("output_dir", "report")),
        weight_kinds=parse_weight(str(data.get("weight", "both"))),
        analyses=tuple(seen),
        lenient=lenient,
        scenarios=tuple(scenarios),
        busiest=str(data.get("busiest", "auto")),
        nri_sections=_str_list(nri_cfg, "sections", "nri"),
        nri_pairs=tuple(pairs),
        redundancy_targets=_str_list(red_cfg, "targets", "redundancy"),
        redundancy_unrestricted=bool(red_cfg.get("unrestricted", False)),
        redundancy_per_v=bool(red_cfg.get("per_v", False)),
        redistribution_disrupted=_str_list(rdt_cfg, "disrupted", "redistribution"),
        redistribution_watched=_str_list(rdt_cfg, "watched", "redistribution"),
        figures=bool(data.get("figures", False)),
        geojson=bool(data.get("geojson", False)),
        dot=bool(data.get("dot", False)),
        threads=threads,
    )


@dataclass(frozen=True)
class ReportBundle:
    output_dir: Path
    files: tuple[str, ...]
    summary_path: Path


def _kind_suffix(kinds: tuple[WeightKind, ...], kind: WeightKind) -> str:
    return "" if len(kinds) == 1 else f"_{kind.value}"


def _fmt_q(q: float, unit: str) -> str:
    return "INFINITE" if math.isinf(q) else f"{q:,.3f} {unit}"


def nri_csv_payload(rows: list[dict]) -> str:
    lines = ["weight_kind,section,pair_with,q,finite"]
    for r in rows:
        lines.append(
            f"{r['weight_kind']},{r['section']},{r.get('pair_with', '')},{r['q']!r},{str(r['finite']).lower()}"
        )
    return "\n".join(lines) + "\n"


def redundancy_json_payload(results: list[RedundancyResult]) -> str:
    """Canonical JSON for redundancy results; infinite values become null."""

    def _num(x: float):
        return None if math.isinf(x) else x

    out = []
    for r in results:
        entry: dict[str, Any] = {
            "section": r.section,
            "weight_kind": r.weight_kind.value,
            "restricted": r.restricted,
            "r_plain": _num(r.r_plain),
            "plain_finite": r.plain_finite,
            "r_reciprocal": r.r_reciprocal,
            "r_u_prime": r.r_reciprocal_normalized,
            "reciprocal_baseline": r.reciprocal_baseline,
        }
        if r.per_v is not None:
            entry["per_v"] = [
                {"v": t.v, "plain": _num(t.plain), "reciprocal": t.reciprocal} for t in r.per_v
            ]
        out.append(entry)
    return json.dumps({"results": out}, indent=2) + "\n"


def comparison_csv_payload(report: ComparisonReport) -> str:
    lines = [
        "scenario,weight_kind,total_before,total_after,decrease_percent,"
        "busiest_section,busiest_share_before,busiest_share_after,"
        "busiest_pp_delta,busiest_relative_delta,error"
    ]
    for outcome in report.outcomes:
        if outcome.error is not None:
            lines.append(f"{outcome.name},,,,,,,,,,\"{outcome.error}\"")
            continue
        for m in outcome.metrics:
            lines.append(
                f"{outcome.name},{m.weight_kind.value},{m.total_before!r},{m.total_after!r},"
                f"{m.decrease_percent!r},{m.busiest_section},{m.busiest_share_before!r},"
                f"{m.busiest_share_after!r},{m.busiest_pp_delta!r},{m.busiest_relative_delta!r},"
            )
    return "\n".join(lines) + "\n"


def comparison_json_payload(report: ComparisonReport) -> str:
    out: list[dict[str, Any]] = []
    for outcome in report.outcomes:
        entry: dict[str, Any] = {"scenario": outcome.name, "error": outcome.error, "metrics": []}
        for m in outcome.metrics:
            entry["metrics"].append(
                {
                    "weight_kind": m.weight_kind.value,
                    "total_before": m.total_before,
                    "total_after": m.total_after,
                    "decrease_percent": m.decrease_percent,
                    "busiest_section": m.busiest_section,
                    "busiest_share_before": m.busiest_share_before,
                    "busiest_share_after": m.busiest_share_after,
                    "busiest_pp_delta": m.busiest_pp_delta,
                    "busiest_relative_delta": m.busiest_relative_delta,
                }
            )
        out.append(entry)
    return json.dumps({"scenarios": out}, indent=2) + "\n"


def comparison_summary_block(report: ComparisonReport) -> str:
    """Fixed-width per-scenario table of percent decreases, two decimals."""
    named = [o for o in report.outcomes if o.error is None]
    lines = ["[scenario comparison]"]
    for kind, sid in sorted(report.busiest_by_kind.items(), key=lambda kv: kv[0].value):
        lines.append(f"busiest baseline section ({kind.value}): {sid}")
    if named:
        label_w = 44
        col_w = max(10, max(len(o.name) for o in named) + 2)
        header = "metric".ljust(label_w) + "".join(o.name.rjust(col_w) for o in named)
        lines.append(header)
        kinds = [m.weight_kind for m in named[0].metrics]
        for i, kind in enumerate(kinds):
            rows = [
                (f"total {kind.value} decrease (%)", [o.metrics[i].decrease_percent for o in named]),
                (
                    f"busiest-share decrease (pp, {kind.value})",
                    [o.metrics[i].busiest_pp_delta for o in named],
                ),
                (
                    f"busiest-share decrease (rel %, {kind.value})",
                    [o.metrics[i].busiest_relative_delta for o in named],
                ),
            ]
            for label, values in rows:
                lines.append(
                    label.ljust(label_w) + "".join(f"{v:.2f}".rjust(col_w) for v in values)
                )
    for outcome in report.outcomes:
        if outcome.error is not None:
            lines.append(f"scenario {outcome.name!r}: ERROR - {outcome.error}")
    return "\n".join(lines)


def redistribution_summary_block(tables: list, kind: WeightKind) -> str:
    """Per-disruption rows of count change and own-baseline percent."""
    lines = [f"[redistribution {kind.value}]"]
    for table in tables:
        lines.append(f"disruption of {table.disrupted}:")
        width = max(len(r.section) for r in table.rows)
        for row in table.rows:
            lines.append(
                f"  {row.section.ljust(width)}  baseline {row.baseline_count:>8,}  {row.formatted()}"
            )
    return "\n".join(lines)


class _Writer:
    def __init__(self, outdir: Path):
        self.outdir = outdir
        self.files: list[str] = []

    def write(self, name: str, text: str) -> None:
        (self.outdir / name).write_text(text, encoding="utf-8")
        self.files.append(name)

    def note(self, name: str) -> None:
        self.files.append(name)


def run_report(
    config_path: str | Path,
    *,
    threads: int | None = None,
    figures: bool | None = None,
) -> ReportBundle:
    """Run every configured analysis and write the artifact bundle.

    On an analysis failure, a partial-output manifest is written next to the
    finished files and the error propagates to the caller.
    """
    cfg = load_config(config_path)
    threads = threads if threads is not None else cfg.threads
    want_figures = cfg.figures if figures is None else figures

    net = parse_network(cfg.network_path.read_text(encoding="utf-8"), lenient=cfg.lenient)
    outdir = cfg.output_dir
    outdir.mkdir(parents=True, exist_ok=True)
    w = _Writer(outdir)

    report_blocks: list[str] = []
    vr = validate(net)
    report_blocks.append(
        f"railway network report: {cfg.network_path.name}\n"
        + vr.summary()
        + "\nweightings: "
        + ", ".join(k.value for k in cfg.weight_kinds)
    )

    graphs = {kind: expand(net, kind) for kind in cfg.weight_kinds}
    flows_by_kind: dict[WeightKind, SectionUsage] = {}
    comparison: ComparisonReport | None = None
    redundancy_results: list[RedundancyResult] = []

    current = "setup"
    try:
        for analysis in cfg.analyses:
            current = analysis
            if analysis == "flows":
                for kind in cfg.weight_kinds:
                    matrix = all_pairs(graphs[kind], threads=threads)
                    usage = section_flows(matrix)
                    flows_by_kind[kind] = usage
                    suffix = _kind_suffix(cfg.weight_kinds, kind)
                    w.write(f"flows{suffix}.csv", flows_csv(usage))
                    if cfg.geojson:
                        geo = flows_geojson(net, usage)
                        if geo is not None:
                            w.write(f"flows{suffix}.geojson", json.dumps(geo, indent=2) + "\n")
                    busiest = usage.busiest()
                    block = [
                        f"[flows {kind.value}]",
                        f"pairs: {usage.n_pairs:,}",
                        f"total network cost: {total_cost(matrix):,.1f} {kind.unit}"
                        if not any(math.isinf(c) for c in matrix.condensed_costs())
                        else "total network cost: undefined (unreachable pairs)",
                        f"busiest section: {busiest} "
                        f"(count {usage.counts[busiest]:,}, share {usage.share_percent(busiest):.2f}%)",
                    ]
                    report_blocks.append("\n".join(block))
            elif analysis == "nri":
                rows = []
                for kind in cfg.weight_kinds:
                    for sid in cfg.nri_sections:
                        res = nri(graphs[kind], sid, threads=threads)
                        rows.append(
                            {
                                "weight_kind": kind.value,
                                "section": sid,
                                "q": res.q,
                                "finite": res.finite,
                            }
                        )
                    for u, v in cfg.nri_pairs:
                        res = nri_pair(graphs[kind], u, v, threads=threads)
                        rows.append(
                            {
                                "weight_kind": kind.value,
                                "section": u,
                                "pair_with": v,
                                "q": res.q,
                                "finite": res.finite,
                            }
                        )
                w.write("nri.csv", nri_csv_payload(rows))
                block = ["[network robustness index]"]
                for r in rows:
                    unit = "km" if r["weight_kind"] == "distance" else "min"
                    label = r["section"] + (f"+{r['pair_with']}" if r.get("pair_with") else "")
                    block.append(f"{r['weight_kind']} {label}: q = {_fmt_q(r['q'], unit)}")
                report_blocks.append("\n".join(block))
            elif analysis == "redundancy":
                redundancy_results = []
                for kind in cfg.weight_kinds:
                    redundancy_results.extend(
                        redundancy_sweep(
                            graphs[kind],
                            list(cfg.redundancy_targets),
                            restricted=not cfg.redundancy_unrestricted,
                            include_per_v=cfg.redundancy_per_v,
                            threads=threads,
                        )
                    )
                w.write("redundancy.json", redundancy_json_payload(redundancy_results))
                block = [
                    "[redundancy]"
                    + (" (unrestricted)" if cfg.redundancy_unrestricted else " (restricted)")
                ]
                for r in redundancy_results:
                    plain = "INFINITE" if not r.plain_finite else f"{r.r_plain:,.6f}"
                    block.append(
                        f"{r.weight_kind.value} {r.section}: r' = {r.r_reciprocal_normalized:.6f}"
                        f"  (reciprocal {r.r_reciprocal:.6f} / baseline {r.reciprocal_baseline:.6f},"
                        f" plain {plain})"
                    )
                report_blocks.append("\n".join(block))
            elif analysis == "compare":
                comparison = compare_scenarios(
                    net,
                    list(cfg.scenarios),
                    busiest=cfg.busiest,
                    weight_kinds=cfg.weight_kinds,
                    threads=threads,
                )
                w.write("compare.csv", comparison_csv_payload(comparison))
                w.write("compare.json", comparison_json_payload(comparison))
                for outcome in comparison.outcomes:
                    if outcome.error is not None:
                        continue
                    safe = "".join(c if c.isalnum() or c in "-_" else "_" for c in outcome.name)
                    for m in outcome.metrics:
                        suffix = _kind_suffix(cfg.weight_kinds, m.weight_kind)
                        lines = ["section_id,count_delta,share_delta"]
                        for sid in sorted(m.flow_deltas):
                            d = m.flow_deltas[sid]
                            lines.append(f"{sid},{d.count_delta},{d.share_delta:.6f}")
                        w.write(f"flow_delta_{safe}{suffix}.csv", "\n".join(lines) + "\n")
                report_blocks.append(comparison_summary_block(comparison))
            elif analysis == "redistribution":
                for kind in cfg.weight_kinds:
                    suffix = _kind_suffix(cfg.weight_kinds, kind)
                    tables = []
                    baseline = all_pairs(graphs[kind], threads=threads)
                    lines = ["disrupted,section,baseline_count,delta_count,delta_percent"]
                    for disrupted in cfg.redistribution_disrupted:
                        table = redistribution(
                            graphs[kind],
                            disrupted,
                            list(cfg.redistribution_watched),
                            threads=threads,
                            baseline=baseline,
                        )
                        tables.append(table)
                        for row in table.rows:
                            pct = "" if row.delta_percent is None else repr(row.delta_percent)
                            lines.append(
                                f"{disrupted},{row.section},{row.baseline_count},{row.delta_count},{pct}"
                            )
                    w.write(f"redistribution{suffix}.csv", "\n".join(lines) + "\n")
                    report_blocks.append(redistribution_summary_block(tables, kind))
        current = "export"
        if cfg.dot:
            for kind in cfg.weight_kinds:
                suffix = _kind_suffix(cfg.weight_kinds, kind)
                w.write(f"network{suffix}.dot", to_dot(graphs[kind]))
        if want_figures:
            current = "figures"
            for name in _render_figures(
                outdir,
                weight_kinds=cfg.weight_kinds,
                flows_by_kind=flows_by_kind,
                comparison=comparison,
                redundancy_results=redundancy_results,
            ):
                w.note(name)
    except Exception as exc:
        manifest = {
            "completed": sorted(w.files),
            "failed_analysis": current,
            "error": str(exc),
        }
        (outdir / "manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        raise

    w.write("summary.txt", "\n\n".join(report_blocks) + "\n")
    return ReportBundle(
        output_dir=outdir,
        files=tuple(sorted(w.files)),
        summary_path=outdir / "summary.txt",
    )


def _render_figures(
    outdir: Path,
    *,
    weight_kinds: tuple[WeightKind, ...],
    flows_by_kind: dict[WeightKind, SectionUsage],
    comparison: ComparisonReport | None,
    redundancy_results: list[RedundancyResult],
) -> list[str]:
    """Bar-chart companions for the delimited outputs (PNG, Agg backend)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written: list[str] = []
    for kind, usage in flows_by_kind.items():
        top = sorted(usage.counts, key=lambda sid: (-usage.counts[sid], sid))[:15]
        fig, ax = plt.subplots(figsize=(8, 4.5))
        ax.bar(range(len(top)), [usage.share_percent(s) for s in top], color="#33658a")
        ax.set_xticks(range(len(top)))
        ax.set_xticklabels(top, rotation=60, ha="right", fontsize=8)
        ax.set_ylabel("share of shortest paths (%)")
        ax.set_title(f"busiest sections ({kind.value})")
        fig.tight_layout()
        name = f"flows{_kind_suffix(weight_kinds, kind)}.png"
        fig.savefig(outdir / name, dpi=150)
        plt.close(fig)
        written.append(name)

    if comparison is not None:
        named = [o for o in comparison.outcomes if o.error is None]
        if named:
            fig, ax = plt.subplots(figsize=(7, 4))
            kinds = [m.weight_kind for m in named[0].metrics]
            width = 0.8 / len(kinds)
            for ki, kind in enumerate(kinds):
                xs = [i + ki * width for i in range(len(named))]
                ax.bar(
                    xs,
                    [o.metrics[ki].decrease_percent for o in named],
                    width=width,
                    label=kind.value,
                )
            ax.set_xticks([i + width * (len(kinds) - 1) / 2 for i in range(len(named))])
            ax.set_xticklabels([o.name for o in named], rotation=30, ha="right", fontsize=8)
            ax.set_ylabel("total cost decrease (%)")
            ax.set_title("scenario comparison")
            ax.legend()
            fig.tight_layout()
            fig.savefig(outdir / "compare.png", dpi=150)
            plt.close(fig)
            written.append("compare.png")

    if redundancy_results:
        fig, ax = plt.subplots(figsize=(7, 4))
        by_kind: dict[WeightKind, list[RedundancyResult]] = {}
        for r in redundancy_results:
            by_kind.setdefault(r.weight_kind, []).append(r)
        kinds = sorted(by_kind, key=lambda k: k.value)
        targets = [r.section for r in by_kind[kinds[0]]]
        width = 0.8 / len(kinds)
        for ki, kind in enumerate(kinds):
            xs = [i + ki * width for i in range(len(targets))]
            ax.bar(
                xs,
                [r.r_reciprocal_normalized for r in by_kind[kind]],
                width=width,
                label=kind.value,
            )
        ax.set_xticks([i + width * (len(kinds) - 1) / 2 for i in range(len(targets))])
        ax.set_xticklabels(targets, rotation=30, ha="right", fontsize=8)
        ax.set_ylabel("normalized redundancy")
        ax.set_title("section redundancy")
        ax.legend()
        fig.tight_layout()
        fig.savefig(outdir / "redundancy.png", dpi=150)
        plt.close(fig)
        written.append("redundancy.png")
    return written
