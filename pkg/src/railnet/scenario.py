"""What-if scenarios: candidate new lines and comparative reporting.

A scenario adds stations and sections to a base network and/or removes
existing sections.  Comparison recomputes the all-pairs totals and section
flows for every scenario under both weightings and reports the percentage
decreases against the base network, including how much traffic leaves the
base network's busiest section.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .expand import expand
from .flows import FlowDelta, SectionUsage, flow_delta, section_flows
from .model import (
    NetworkFormatError,
    RawNetwork,
    SectionSpec,
    StationSpec,
    UnknownIdError,
    WeightKind,
    build_network,
    section_from_obj,
    station_from_obj,
)
from .routing import DisconnectedNetworkError, all_pairs, total_cost


class ScenarioError(ValueError):
    """A scenario is inconsistent with the network it is applied to."""


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    add_stations: tuple[StationSpec, ...] = ()
    add_sections: tuple[SectionSpec, ...] = ()
    remove_sections: tuple[str, ...] = ()


_SCENARIO_KEYS = {"name", "add_stations", "add_sections", "remove_sections"}


def scenario_from_obj(obj: Any, *, lenient: bool = False) -> ScenarioSpec:
    if not isinstance(obj, Mapping):
        raise NetworkFormatError("scenario: expected an object")
    if not lenient:
        unknown = sorted(set(obj) - _SCENARIO_KEYS)
        if unknown:
            raise NetworkFormatError(f"scenario: unknown keys {unknown}")
    name = obj.get("name")
    if not isinstance(name, str) or not name:
        raise NetworkFormatError("scenario: 'name' must be a non-empty string")
    stations = tuple(
        station_from_obj(o, f"scenario {name!r} station #{i}", lenient=lenient)
        for i, o in enumerate(obj.get("add_stations", []))
    )
    sections = tuple(
        section_from_obj(o, f"scenario {name!r} section #{i}", lenient=lenient)
        for i, o in enumerate(obj.get("add_sections", []))
    )
    removes = obj.get("remove_sections", [])
    if not isinstance(removes, list) or any(not isinstance(r, str) for r in removes):
        raise NetworkFormatError(f"scenario {name!r}: 'remove_sections' must be a list of ids")
    return ScenarioSpec(
        name=name, add_stations=stations, add_sections=sections, remove_sections=tuple(removes)
    )


def parse_scenario(doc: str, *, lenient: bool = False) -> ScenarioSpec:
    try:
        data = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(
            f"scenario syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return scenario_from_obj(data, lenient=lenient)


def apply_scenario(net: RawNetwork, sc: ScenarioSpec) -> RawNetwork:
    """Apply additions and removals; contraction is not re-run."""
    for st in sc.add_stations:
        if st.id in net.station_map or st.id in net.section_map:
            raise ScenarioError(f"scenario {sc.name!r}: id {st.id!r} already exists")
    for sid in sc.remove_sections:
        if sid not in net.section_map:
            raise ScenarioError(f"scenario {sc.name!r}: cannot remove unknown section {sid!r}")
    removed = set(sc.remove_sections)
    stations = net.stations + sc.add_stations
    sections = tuple(s for s in net.sections if s.id not in removed) + sc.add_sections
    try:
        return build_network(stations, sections)
    except NetworkFormatError as exc:
        raise ScenarioError(f"scenario {sc.name!r}: {exc}") from exc


@dataclass(frozen=True)
class ScenarioMetrics:
    """Comparison of one scenario against the base, for one weighting."""

    weight_kind: WeightKind
    total_before: float
    total_after: float
    decrease_percent: float
    busiest_section: str
    busiest_share_before: float
    busiest_share_after: float
    busiest_pp_delta: float  # percentage points: before - after
    busiest_relative_delta: float  # percent of the before share
    flow_deltas: dict[str, FlowDelta]


@dataclass(frozen=True)
class ScenarioOutcome:
    name: str
    metrics: tuple[ScenarioMetrics, ...]
    error: str | None = None


@dataclass(frozen=True)
class ComparisonReport:
    busiest_by_kind: dict[WeightKind, str]
    baseline_usage: dict[WeightKind, SectionUsage]
    outcomes: tuple[ScenarioOutcome, ...]


def _resolve_busiest(usage: SectionUsage, requested: str) -> str:
    if requested == "auto":
        return usage.busiest()
    if requested not in usage.counts:
        raise UnknownIdError(f"unknown busiest section {requested!r}")
    return requested


def compare_scenarios(
    base: RawNetwork,
    scenarios: list[ScenarioSpec] | tuple[ScenarioSpec, ...],
    *,
    busiest: str = "auto",
    weight_kinds: tuple[WeightKind, ...] = (WeightKind.DISTANCE, WeightKind.TIME),
    threads: int | None = None,
) -> ComparisonReport:
    """Compare each scenario's totals and flows against the base network.

    The base network must be connected.  A scenario that disconnects the
    eligible stations is flagged in its outcome; the others still report.
    """
    names = [sc.name for sc in scenarios]
    if len(set(names)) != len(names):
        raise ScenarioError("scenario names must be unique within a comparison")

    baselines: dict[WeightKind, tuple[float, SectionUsage, np.ndarray]] = {}
    busiest_by_kind: dict[WeightKind, str] = {}
    for kind in weight_kinds:
        matrix = all_pairs(expand(base, kind), threads=threads)
        total = total_cost(matrix)  # raises DisconnectedNetworkError on a broken base
        usage = section_flows(matrix)
        baselines[kind] = (total, usage, matrix.condensed_costs())
        busiest_by_kind[kind] = _resolve_busiest(usage, busiest)

    outcomes: list[ScenarioOutcome] = []
    for sc in scenarios:
        try:
            applied = apply_scenario(base, sc)
            metrics = []
            for kind in weight_kinds:
                base_total, base_usage, base_cond = baselines[kind]
                matrix = all_pairs(expand(applied, kind), threads=threads)
                total = total_cost(matrix)
                usage = section_flows(matrix)
                if not sc.remove_sections:
                    _check_supergraph_monotonicity(base, base_cond, matrix, sc.name)
                target = busiest_by_kind[kind]
                share_before = base_usage.share_percent(target)
                share_after = usage.share_percent(target)
                pp = share_before - share_after
                rel = 100.0 * pp / share_before if share_before > 0 else 0.0
                metrics.append(
                    ScenarioMetrics(
                        weight_kind=kind,
                        total_before=base_total,
                        total_after=total,
                        decrease_percent=100.0 * (base_total - total) / base_total,
                        busiest_section=target,
                        busiest_share_before=share_before,
                        busiest_share_after=share_after,
                        busiest_pp_delta=pp,
                        busiest_relative_delta=rel,
                        flow_deltas=flow_delta(base_usage, usage),
                    )
                )
            outcomes.append(ScenarioOutcome(name=sc.name, metrics=tuple(metrics)))
        except (DisconnectedNetworkError, ScenarioError) as exc:
            outcomes.append(ScenarioOutcome(name=sc.name, metrics=(), error=str(exc)))
    return ComparisonReport(
        busiest_by_kind=busiest_by_kind,
        baseline_usage={k: baselines[k][1] for k in weight_kinds},
        outcomes=tuple(outcomes),
    )


def _check_supergraph_monotonicity(
    base: RawNetwork, base_cond: np.ndarray, matrix, name: str
) -> None:
    """Adding sections must never increase any pair cost."""
    base_ids = set(base.eligible_station_ids)
    rows = [i for i, sid in enumerate(matrix.origins) if sid in base_ids]
    if len(rows) < 2:
        return
    sub = matrix.costs[np.ix_(rows, rows)]
    iu, ju = np.triu_indices(len(rows), k=1)
    after = sub[iu, ju]
    tol = 1e-9 * (1.0 + np.abs(base_cond))
    if (after > base_cond + tol).any():
        raise RuntimeError(
            f"internal error: scenario {name!r} added sections but increased a pair cost"
        )
