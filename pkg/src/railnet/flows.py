"""Artificial flow: how many shortest paths traverse each line section.

Every unordered pair of eligible stations contributes one path (the
tie-broken one from the routing engine), so per-section counts are exact
integers and shares are counts over the number of pairs.  Deltas between
two network states and bridge-style redistribution tables are built from
the same counts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .expand import ExpandedGraph, remove_sections
from .model import RawNetwork, UnknownIdError, WeightKind
from .routing import PathMatrix, all_pairs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SectionUsage:
    """Per-section shortest-path counts for one network state."""

    weight_kind: WeightKind
    n_pairs: int
    counts: dict[str, int]

    def count(self, section_id: str) -> int:
        try:
            return self.counts[section_id]
        except KeyError:
            raise UnknownIdError(f"unknown section {section_id!r}") from None

    def share_percent(self, section_id: str) -> float:
        if self.n_pairs == 0:
            return 0.0
        return 100.0 * self.count(section_id) / self.n_pairs

    def busiest(self) -> str:
        """Section with the highest count; ties go to the smaller id."""
        if not self.counts:
            raise UnknownIdError("network has no sections")
        return min(self.counts, key=lambda sid: (-self.counts[sid], sid))


def section_flows(m: PathMatrix) -> SectionUsage:
    """Count, for every section, the pairs whose chosen path traverses it."""
    used = m.path_sections[m.path_sections >= 0]
    totals = np.bincount(used, minlength=len(m.section_ids)) if used.size else np.zeros(
        len(m.section_ids), dtype=np.int64
    )
    counts = {sid: int(totals[k]) for k, sid in enumerate(m.section_ids)}
    return SectionUsage(weight_kind=m.weight_kind, n_pairs=m.n_pairs, counts=counts)


@dataclass(frozen=True)
class FlowDelta:
    count_delta: int
    share_delta: float  # percentage points


def flow_delta(base: SectionUsage, alt: SectionUsage) -> dict[str, FlowDelta]:
    """Per-section change from *base* to *alt* over the same pair universe.

    Sections present in only one state are treated as 0 in the other, so
    scenario additions show up as plain positive deltas.
    """
    if base.n_pairs != alt.n_pairs:
        raise ValueError(
            f"pair universes differ ({base.n_pairs} vs {alt.n_pairs}); counts not comparable"
        )
    out: dict[str, FlowDelta] = {}
    for sid in sorted(set(base.counts) | set(alt.counts)):
        b = base.counts.get(sid, 0)
        a = alt.counts.get(sid, 0)
        share_b = 100.0 * b / base.n_pairs if base.n_pairs else 0.0
        share_a = 100.0 * a / alt.n_pairs if alt.n_pairs else 0.0
        out[sid] = FlowDelta(count_delta=a - b, share_delta=share_a - share_b)
    return out


@dataclass(frozen=True)
class RedistributionRow:
    section: str
    baseline_count: int
    delta_count: int
    delta_percent: float | None  # None when the baseline count is 0

    def formatted(self) -> str:
        pct = "n/a" if self.delta_percent is None else f"{self.delta_percent:+.1f}%"
        return f"{self.delta_count:+,d} ({pct})"


@dataclass(frozen=True)
class RedistributionTable:
    """Flow changes on watched sections when one section is disrupted."""

    disrupted: str
    weight_kind: WeightKind
    rows: tuple[RedistributionRow, ...]


def redistribution(
    g: ExpandedGraph,
    disrupted: str,
    watched: list[str] | tuple[str, ...],
    *,
    threads: int | None = None,
    baseline: PathMatrix | None = None,
) -> RedistributionTable:
    """Recompute all pairs without *disrupted* and report watched deltas.

    Percentages are relative to each watched section's own baseline count;
    a zero baseline makes the percentage undefined (reported as None).
    """
    if not watched:
        raise ValueError("watched section list must not be empty")
    known = g.network.section_map
    for sid in [disrupted, *watched]:
        if sid not in known:
            raise UnknownIdError(f"unknown section {sid!r}")
    base_m = baseline if baseline is not None else all_pairs(g, threads=threads)
    alt_m = all_pairs(remove_sections(g, {disrupted}), threads=threads)
    base_u = section_flows(base_m)
    alt_u = section_flows(alt_m)
    rows = []
    for sid in watched:
        b = base_u.count(sid)
        delta = alt_u.count(sid) - b
        pct = 100.0 * delta / b if b > 0 else None
        rows.append(RedistributionRow(section=sid, baseline_count=b, delta_count=delta, delta_percent=pct))
    return RedistributionTable(disrupted=disrupted, weight_kind=g.weight_kind, rows=tuple(rows))


def flows_csv(usage: SectionUsage) -> str:
    """Delimited export: section_id, count, share_percent (6 decimals)."""
    lines = ["section_id,count,share_percent"]
    for sid in sorted(usage.counts):
        lines.append(f"{sid},{usage.counts[sid]},{usage.share_percent(sid):.6f}")
    return "\n".join(lines) + "\n"


def flows_geojson(
    net: RawNetwork,
    usage: SectionUsage,
    *,
    deltas: dict[str, FlowDelta] | None = None,
) -> dict | None:
    """GeoJSON FeatureCollection of sections styled by flow, or None.

    Requires a coord on every station referenced by a section; when any is
    missing the export is disabled with a warning instead of failing.
    """
    missing = sorted(
        {
            end.station
            for sec in net.sections
            for end in (sec.a, sec.b)
            if net.station_map[end.station].coord is None
        }
    )
    if missing:
        logger.warning(
            "GeoJSON export disabled: stations without coordinates: %s", ", ".join(missing)
        )
        return None
    features = []
    for sec in sorted(net.sections, key=lambda s: s.id):
        props: dict[str, object] = {
            "section_id": sec.id,
            "count": usage.counts.get(sec.id, 0),
            "share_percent": usage.share_percent(sec.id) if sec.id in usage.counts else 0.0,
        }
        if deltas is not None and sec.id in deltas:
            props["delta_count"] = deltas[sec.id].count_delta
            props["delta_share"] = deltas[sec.id].share_delta
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [
                        list(net.station_map[sec.a.station].coord),
                        list(net.station_map[sec.b.station].coord),
                    ],
                },
                "properties": props,
            }
        )
    return {"type": "FeatureCollection", "features": features}
