"""Expansion of a railway network into its directed port-node graph.

Every station (wyes and auxiliary nodes included) becomes four port nodes:
an arrival and a departure port on each side.  Arrival ports connect to
departure ports inside the station; crossing to the opposite side is free,
staying on the same side is a locomotive reversal and costs the station's
penalty in time mode (nothing in distance mode).  Wyes have no same-side
connection, so trains can only pass through them.  Each line section
contributes one directed arc per direction, from the attached departure
port of one end to the attached arrival port of the other, with the same
weight both ways.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Iterator

from .model import (
    RawNetwork,
    Side,
    StationKind,
    UnknownIdError,
    WeightKind,
    section_weight,
)

INTERNAL_ORIGIN = "internal"


class PortRole(enum.Enum):
    ARRIVAL = "arrival"
    DEPARTURE = "departure"


# node index offsets within a station's block of four
_OFFSET = {
    (Side.L, PortRole.ARRIVAL): 0,
    (Side.L, PortRole.DEPARTURE): 1,
    (Side.R, PortRole.ARRIVAL): 2,
    (Side.R, PortRole.DEPARTURE): 3,
}


@dataclass(frozen=True)
class PortNode:
    station: str
    side: Side
    role: PortRole
    node_index: int


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    weight: float
    origin: str  # section id, or INTERNAL_ORIGIN for in-station arcs
    is_reversal: bool = False


@dataclass(frozen=True)
class ExpandedGraph:
    """Directed weighted port graph; immutable and shareable across threads.

    ``arcs`` lists the two directed arcs of section k at positions 2k and
    2k+1, followed by all in-station arcs.  ``removed`` is an overlay mask:
    arcs of removed sections are skipped by :meth:`active_arcs` without
    rebuilding anything, which keeps deletion sweeps cheap.
    """

    network: RawNetwork
    weight_kind: WeightKind
    nodes: tuple[PortNode, ...]
    arcs: tuple[Arc, ...]
    removed: frozenset[str] = frozenset()

    @cached_property
    def station_index(self) -> dict[str, tuple[PortNode, PortNode, PortNode, PortNode]]:
        """Station id -> its four ports as (L-arr, L-dep, R-arr, R-dep)."""
        out = {}
        for i, st in enumerate(self.network.stations):
            base = 4 * i
            out[st.id] = (
                self.nodes[base],
                self.nodes[base + 1],
                self.nodes[base + 2],
                self.nodes[base + 3],
            )
        return out

    def port(self, station_id: str, side: Side, role: PortRole) -> PortNode:
        if station_id not in self.network.station_map:
            raise UnknownIdError(f"unknown station {station_id!r}")
        pos = list(self.network.station_map).index(station_id)
        return self.nodes[4 * pos + _OFFSET[(side, role)]]

    def active_arcs(self) -> Iterator[Arc]:
        if not self.removed:
            yield from self.arcs
            return
        for arc in self.arcs:
            if arc.origin not in self.removed:
                yield arc

    @property
    def node_count(self) -> int:
        return len(self.nodes)


def expand(net: RawNetwork, kind: WeightKind) -> ExpandedGraph:
    """Build the port graph of *net* under the given weighting."""
    nodes: list[PortNode] = []
    station_pos: dict[str, int] = {}
    for i, st in enumerate(net.stations):
        station_pos[st.id] = i
        base = 4 * i
        for (side, role), off in _OFFSET.items():
            nodes.append(PortNode(station=st.id, side=side, role=role, node_index=base + off))

    arcs: list[Arc] = []
    for sec in net.sections:
        w = section_weight(sec, kind)
        tail_a = 4 * station_pos[sec.a.station] + _OFFSET[(sec.a.side, PortRole.DEPARTURE)]
        head_b = 4 * station_pos[sec.b.station] + _OFFSET[(sec.b.side, PortRole.ARRIVAL)]
        tail_b = 4 * station_pos[sec.b.station] + _OFFSET[(sec.b.side, PortRole.DEPARTURE)]
        head_a = 4 * station_pos[sec.a.station] + _OFFSET[(sec.a.side, PortRole.ARRIVAL)]
        arcs.append(Arc(tail=tail_a, head=head_b, weight=w, origin=sec.id))
        arcs.append(Arc(tail=tail_b, head=head_a, weight=w, origin=sec.id))

    for st in net.stations:
        base = 4 * station_pos[st.id]
        arr_l, dep_l = base + 0, base + 1
        arr_r, dep_r = base + 2, base + 3
        if st.kind is not StationKind.WYE:
            penalty = st.reversal_penalty_min if kind is WeightKind.TIME else 0.0
            arcs.append(Arc(arr_l, dep_l, penalty, INTERNAL_ORIGIN, is_reversal=True))
            arcs.append(Arc(arr_r, dep_r, penalty, INTERNAL_ORIGIN, is_reversal=True))
        arcs.append(Arc(arr_l, dep_r, 0.0, INTERNAL_ORIGIN))
        arcs.append(Arc(arr_r, dep_l, 0.0, INTERNAL_ORIGIN))

    return ExpandedGraph(
        network=net,
        weight_kind=kind,
        nodes=tuple(nodes),
        arcs=tuple(arcs),
    )


def remove_sections(g: ExpandedGraph, dead: Iterable[str]) -> ExpandedGraph:
    """Return a view of *g* with both arcs of each dead section absent."""
    dead = frozenset(dead)
    unknown = dead - set(g.network.section_map)
    if unknown:
        raise UnknownIdError(f"unknown section(s): {', '.join(sorted(unknown))}")
    if not dead:
        return g
    return replace(g, removed=g.removed | dead)


def to_dot(g: ExpandedGraph) -> str:
    """Render the active graph as DOT text for debugging."""
    lines = ["digraph railnet {", "  rankdir=LR;"]
    for node in g.nodes:
        role = "arr" if node.role is PortRole.ARRIVAL else "dep"
        lines.append(
            f'  n{node.node_index} [label="{node.station}/{node.side.value}/{role}"];'
        )
    for arc in g.active_arcs():
        label = f"{arc.weight:g}"
        if arc.origin != INTERNAL_ORIGIN:
            label += f" {arc.origin}"
        elif arc.is_reversal:
            label += " rev"
        lines.append(f'  n{arc.tail} -> n{arc.head} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
