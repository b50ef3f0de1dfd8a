"""Domain model of a railway network: stations, line sections, weights.

A network document is UTF-8 JSON with two top-level arrays, ``stations``
and ``sections``.  A station carries a reversal penalty in minutes that
applies whenever a train changes direction there.  A section connects a
specific side (L or R) of one station to a specific side of another and
carries a length and a line speed; the traversal time is derived from the
two.  Which side a section meets a station on decides whether a train can
pass straight through or has to reverse, so sides are part of the input
format rather than inferred.
"""

from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterable, Mapping


class NetworkFormatError(ValueError):
    """A network document is syntactically or semantically invalid."""


class UnknownIdError(ValueError):
    """An operation referenced a station or section id that does not exist."""


class WeightKind(enum.Enum):
    DISTANCE = "distance"
    TIME = "time"

    @property
    def unit(self) -> str:
        return "km" if self is WeightKind.DISTANCE else "min"


class StationKind(enum.Enum):
    STATION = "station"
    WYE = "wye"
    AUXILIARY = "auxiliary"


class Side(enum.Enum):
    L = "L"
    R = "R"

    @property
    def opposite(self) -> "Side":
        return Side.R if self is Side.L else Side.L


DEFAULT_REVERSAL_PENALTY_MIN = 15.0


@dataclass(frozen=True)
class StationSpec:
    """A station, terminus, wye or auxiliary pass-through node.

    Wyes allow trains to bypass the associated station without entering it,
    so reversing there is impossible.  Auxiliary stations can be passed
    through but are never origins or destinations.  ``keep`` pins a station
    through joint-node contraction even when it would otherwise qualify.
    """

    id: str
    name: str = ""
    kind: StationKind = StationKind.STATION
    reversal_penalty_min: float = DEFAULT_REVERSAL_PENALTY_MIN
    keep: bool = False
    coord: tuple[float, float] | None = None

    @property
    def eligible(self) -> bool:
        """True when the station may be an origin or destination of a trip."""
        return self.kind is StationKind.STATION


@dataclass(frozen=True)
class SectionEnd:
    station: str
    side: Side


@dataclass(frozen=True)
class SectionSpec:
    """A line section between two adjacent stations."""

    id: str
    a: SectionEnd
    b: SectionEnd
    length_km: float
    speed_kmh: float

    def end_at(self, station_id: str) -> SectionEnd:
        if self.a.station == station_id:
            return self.a
        if self.b.station == station_id:
            return self.b
        raise UnknownIdError(f"section {self.id!r} does not touch station {station_id!r}")

    def far_end(self, station_id: str) -> SectionEnd:
        if self.a.station == station_id:
            return self.b
        if self.b.station == station_id:
            return self.a
        raise UnknownIdError(f"section {self.id!r} does not touch station {station_id!r}")


def travel_time_minutes(section: SectionSpec) -> float:
    """Traversal time of a section in minutes."""
    # length * 60 / speed keeps integer-valued minutes exact in binary floats
    return section.length_km * 60.0 / section.speed_kmh


def section_weight(section: SectionSpec, kind: WeightKind) -> float:
    if kind is WeightKind.DISTANCE:
        return section.length_km
    return travel_time_minutes(section)


@dataclass(frozen=True)
class RawNetwork:
    """Validated domain-level network, prior to port-graph expansion."""

    stations: tuple[StationSpec, ...]
    sections: tuple[SectionSpec, ...]

    @cached_property
    def station_map(self) -> dict[str, StationSpec]:
        return {s.id: s for s in self.stations}

    @cached_property
    def section_map(self) -> dict[str, SectionSpec]:
        return {s.id: s for s in self.sections}

    @cached_property
    def sections_at(self) -> dict[str, tuple[SectionSpec, ...]]:
        at: dict[str, list[SectionSpec]] = {s.id: [] for s in self.stations}
        for sec in self.sections:
            at[sec.a.station].append(sec)
            at[sec.b.station].append(sec)
        return {k: tuple(v) for k, v in at.items()}

    @property
    def eligible_station_ids(self) -> tuple[str, ...]:
        return tuple(sorted(s.id for s in self.stations if s.eligible))


def build_network(stations: Iterable[StationSpec], sections: Iterable[SectionSpec]) -> RawNetwork:
    """Assemble a RawNetwork, enforcing the cross-reference invariants."""
    stations = tuple(stations)
    sections = tuple(sections)
    seen: set[str] = set()
    for st in stations:
        if st.id in seen:
            raise NetworkFormatError(f"duplicate id {st.id!r}")
        seen.add(st.id)
    station_ids = set(seen)
    for sec in sections:
        if sec.id in seen:
            raise NetworkFormatError(f"duplicate id {sec.id!r}")
        seen.add(sec.id)
        for end in (sec.a, sec.b):
            if end.station not in station_ids:
                raise NetworkFormatError(
                    f"section {sec.id!r} references unknown station {end.station!r}"
                )
        if sec.a.station == sec.b.station:
            raise NetworkFormatError(f"section {sec.id!r} is a self-loop at {sec.a.station!r}")
        if not sec.length_km > 0:
            raise NetworkFormatError(f"section {sec.id!r} has non-positive length")
        if not sec.speed_kmh > 0:
            raise NetworkFormatError(f"section {sec.id!r} has non-positive speed")
    for st in stations:
        if st.reversal_penalty_min < 0:
            raise NetworkFormatError(f"station {st.id!r} has negative reversal penalty")
    return RawNetwork(stations, sections)


_STATION_KEYS = {"id", "name", "kind", "reversal_penalty_min", "keep", "coord"}
_SECTION_KEYS = {"id", "a", "b", "length_km", "speed_kmh"}
_END_KEYS = {"station", "side"}


def _require_str(obj: Mapping[str, Any], key: str, where: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value:
        raise NetworkFormatError(f"{where}: {key!r} must be a non-empty string")
    return value


def _require_number(obj: Mapping[str, Any], key: str, where: str, default: float | None = None) -> float:
    value = obj.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise NetworkFormatError(f"{where}: {key!r} must be a number")
    return float(value)


def _check_keys(obj: Mapping[str, Any], allowed: set[str], where: str, lenient: bool) -> None:
    if lenient:
        return
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise NetworkFormatError(f"{where}: unknown keys {unknown} (use --lenient to ignore)")


def station_from_obj(obj: Any, where: str = "station", *, lenient: bool = False) -> StationSpec:
    if not isinstance(obj, Mapping):
        raise NetworkFormatError(f"{where}: expected an object")
    _check_keys(obj, _STATION_KEYS, where, lenient)
    sid = _require_str(obj, "id", where)
    name = obj.get("name", "")
    if not isinstance(name, str):
        raise NetworkFormatError(f"{where} {sid!r}: 'name' must be a string")
    kind_raw = obj.get("kind", "station")
    try:
        kind = StationKind(kind_raw)
    except ValueError:
        raise NetworkFormatError(f"{where} {sid!r}: unknown kind {kind_raw!r}") from None
    penalty = _require_number(obj, "reversal_penalty_min", f"{where} {sid!r}", DEFAULT_REVERSAL_PENALTY_MIN)
    if penalty < 0:
        raise NetworkFormatError(f"{where} {sid!r}: reversal penalty must be >= 0")
    keep = obj.get("keep", False)
    if not isinstance(keep, bool):
        raise NetworkFormatError(f"{where} {sid!r}: 'keep' must be a boolean")
    coord_raw = obj.get("coord")
    coord: tuple[float, float] | None = None
    if coord_raw is not None:
        if (
            not isinstance(coord_raw, (list, tuple))
            or len(coord_raw) != 2
            or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in coord_raw)
        ):
            raise NetworkFormatError(f"{where} {sid!r}: 'coord' must be [lon, lat]")
        coord = (float(coord_raw[0]), float(coord_raw[1]))
    return StationSpec(id=sid, name=name, kind=kind, reversal_penalty_min=penalty, keep=keep, coord=coord)


def _end_from_obj(obj: Any, where: str, lenient: bool) -> SectionEnd:
    if not isinstance(obj, Mapping):
        raise NetworkFormatError(f"{where}: endpoint must be an object")
    _check_keys(obj, _END_KEYS, where, lenient)
    station = _require_str(obj, "station", where)
    side_raw = obj.get("side")
    try:
        side = Side(side_raw)
    except ValueError:
        raise NetworkFormatError(f"{where}: side must be 'L' or 'R', got {side_raw!r}") from None
    return SectionEnd(station=station, side=side)


def section_from_obj(obj: Any, where: str = "section", *, lenient: bool = False) -> SectionSpec:
    if not isinstance(obj, Mapping):
        raise NetworkFormatError(f"{where}: expected an object")
    _check_keys(obj, _SECTION_KEYS, where, lenient)
    sid = _require_str(obj, "id", where)
    a = _end_from_obj(obj.get("a"), f"{where} {sid!r} end 'a'", lenient)
    b = _end_from_obj(obj.get("b"), f"{where} {sid!r} end 'b'", lenient)
    length = _require_number(obj, "length_km", f"{where} {sid!r}")
    speed = _require_number(obj, "speed_kmh", f"{where} {sid!r}")
    return SectionSpec(id=sid, a=a, b=b, length_km=length, speed_kmh=speed)


def parse_network(doc: str, *, lenient: bool = False) -> RawNetwork:
    """Parse a JSON network document into a validated RawNetwork."""
    try:
        data = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise NetworkFormatError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, Mapping):
        raise NetworkFormatError("document root must be an object")
    _check_keys(data, {"stations", "sections"}, "document", lenient)
    stations_raw = data.get("stations")
    sections_raw = data.get("sections")
    if not isinstance(stations_raw, list) or not isinstance(sections_raw, list):
        raise NetworkFormatError("document must contain 'stations' and 'sections' arrays")
    stations = [
        station_from_obj(obj, f"station #{i}", lenient=lenient) for i, obj in enumerate(stations_raw)
    ]
    sections = [
        section_from_obj(obj, f"section #{i}", lenient=lenient) for i, obj in enumerate(sections_raw)
    ]
    return build_network(stations, sections)


def station_to_obj(st: StationSpec) -> dict[str, Any]:
    obj: dict[str, Any] = {"id": st.id}
    if st.name:
        obj["name"] = st.name
    if st.kind is not StationKind.STATION:
        obj["kind"] = st.kind.value
    if st.reversal_penalty_min != DEFAULT_REVERSAL_PENALTY_MIN:
        obj["reversal_penalty_min"] = st.reversal_penalty_min
    if st.keep:
        obj["keep"] = True
    if st.coord is not None:
        obj["coord"] = list(st.coord)
    return obj


def section_to_obj(sec: SectionSpec) -> dict[str, Any]:
    return {
        "id": sec.id,
        "a": {"station": sec.a.station, "side": sec.a.side.value},
        "b": {"station": sec.b.station, "side": sec.b.side.value},
        "length_km": sec.length_km,
        "speed_kmh": sec.speed_kmh,
    }


def render_network(net: RawNetwork, *, indent: int = 2) -> str:
    """Serialize a RawNetwork back to document text (inverse of parse)."""
    doc = {
        "stations": [station_to_obj(s) for s in net.stations],
        "sections": [section_to_obj(s) for s in net.sections],
    }
    return json.dumps(doc, indent=indent) + "\n"


def _contractible_joint(net: RawNetwork, st: StationSpec) -> tuple[SectionSpec, SectionSpec] | None:
    """Return the joint's two sections when the station can be contracted."""
    if st.kind is not StationKind.STATION or st.keep:
        return None
    incident = net.sections_at.get(st.id, ())
    if len(incident) != 2:
        return None
    s1, s2 = sorted(incident, key=lambda s: s.id)
    # same-side attachment means a forced reversal; merging would erase it
    if s1.end_at(st.id).side == s2.end_at(st.id).side:
        return None
    # merging sections that lead to the same far station would self-loop
    if s1.far_end(st.id).station == s2.far_end(st.id).station:
        return None
    return s1, s2


def contract_joint_nodes(net: RawNetwork) -> RawNetwork:
    """Remove pass-through stations with exactly two sections, iteratively.

    The two sections are replaced by one whose length is the sum of the two
    lengths and whose synthetic speed reproduces the summed travel time, so
    both weightings are preserved exactly.  Runs to a fixed point.
    """
    stations = list(net.stations)
    sections = list(net.sections)
    current = build_network(stations, sections)
    while True:
        joint = None
        for st in sorted(current.stations, key=lambda s: s.id):
            found = _contractible_joint(current, st)
            if found is not None:
                joint = (st, *found)
                break
        if joint is None:
            return current
        st, s1, s2 = joint
        merged_len = s1.length_km + s2.length_km
        merged_time = travel_time_minutes(s1) + travel_time_minutes(s2)
        merged_speed = merged_len * 60.0 / merged_time
        existing = set(current.station_map) | set(current.section_map)
        merged_id = f"{s1.id}+{s2.id}"
        while merged_id in existing:
            merged_id += "'"
        merged = SectionSpec(
            id=merged_id,
            a=s1.far_end(st.id),
            b=s2.far_end(st.id),
            length_km=merged_len,
            speed_kmh=merged_speed,
        )
        stations = [s for s in current.stations if s.id != st.id]
        sections = [s for s in current.sections if s.id not in (s1.id, s2.id)]
        sections.append(merged)
        current = build_network(stations, sections)


@dataclass(frozen=True)
class ValidationReport:
    """Structural summary of a network; informational, never a rejection."""

    station_count: int
    section_count: int
    eligible_count: int
    wye_count: int
    auxiliary_count: int
    component_count: int
    degree_histogram: dict[int, int]
    contractible_joints: tuple[str, ...]

    def summary(self) -> str:
        lines = [
            f"{self.eligible_count:,} + {self.auxiliary_count:,} stations"
            f" (+ {self.wye_count:,} wyes), {self.section_count:,} line sections",
            f"connected components: {self.component_count}",
            "degree histogram: "
            + ", ".join(f"{d}:{c}" for d, c in sorted(self.degree_histogram.items())),
            f"contractible joints: {len(self.contractible_joints)}"
            + (f" ({', '.join(self.contractible_joints)})" if self.contractible_joints else ""),
        ]
        return "\n".join(lines)


def validate(net: RawNetwork) -> ValidationReport:
    """Report component structure, counts and contraction candidates."""
    parent: dict[str, str] = {s.id: s.id for s in net.stations}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for sec in net.sections:
        ra, rb = find(sec.a.station), find(sec.b.station)
        if ra != rb:
            parent[ra] = rb
    components = {find(s.id) for s in net.stations}

    degree: dict[str, int] = defaultdict(int)
    for sec in net.sections:
        degree[sec.a.station] += 1
        degree[sec.b.station] += 1
    histogram: dict[int, int] = defaultdict(int)
    for st in net.stations:
        histogram[degree.get(st.id, 0)] += 1

    joints = tuple(
        st.id
        for st in sorted(net.stations, key=lambda s: s.id)
        if _contractible_joint(net, st) is not None
    )
    return ValidationReport(
        station_count=len(net.stations),
        section_count=len(net.sections),
        eligible_count=sum(1 for s in net.stations if s.kind is StationKind.STATION),
        wye_count=sum(1 for s in net.stations if s.kind is StationKind.WYE),
        auxiliary_count=sum(1 for s in net.stations if s.kind is StationKind.AUXILIARY),
        component_count=len(components),
        degree_histogram=dict(histogram),
        contractible_joints=joints,
    )
