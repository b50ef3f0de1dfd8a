"""Seeded random network generation for property and oracle tests."""

from __future__ import annotations

import random

from railnet.model import (
    RawNetwork,
    SectionEnd,
    SectionSpec,
    Side,
    StationKind,
    StationSpec,
    build_network,
)

SIDES = (Side.L, Side.R)


def random_network(
    rng: random.Random,
    *,
    min_stations: int = 3,
    max_stations: int = 12,
    max_sections: int = 20,
    speeds: tuple[float, ...] = (60.0,),
    penalties: tuple[float, ...] = (0.0, 15.0),
    decorate: bool = False,
) -> RawNetwork:
    """Random connected network: a spanning tree plus extra sections.

    With the default speed of 60 km/h every section's travel time equals its
    integer length, so costs stay exact in floating point.  ``decorate``
    sprinkles names, coordinates, keep flags and non-station kinds for
    serialization tests (wyes and auxiliaries change routing semantics, so
    routing oracles should leave it off).
    """
    n = rng.randint(min_stations, max_stations)
    ids = [f"st{i:02d}" for i in range(n)]
    stations = []
    for i, sid in enumerate(ids):
        kind = StationKind.STATION
        coord = None
        name = ""
        keep = False
        if decorate:
            roll = rng.random()
            if roll < 0.10 and i >= 2:
                kind = StationKind.WYE
            elif roll < 0.15 and i >= 2:
                kind = StationKind.AUXILIARY
            if rng.random() < 0.5:
                coord = (round(rng.uniform(16.0, 23.0), 4), round(rng.uniform(45.7, 48.6), 4))
            if rng.random() < 0.3:
                name = f"Station {sid.upper()}"
            keep = rng.random() < 0.1
        stations.append(
            StationSpec(
                id=sid,
                name=name,
                kind=kind,
                reversal_penalty_min=float(rng.choice(penalties)),
                keep=keep,
                coord=coord,
            )
        )

    sections: list[SectionSpec] = []

    def add(i: int, j: int) -> None:
        sections.append(
            SectionSpec(
                id=f"e{len(sections):02d}",
                a=SectionEnd(ids[i], rng.choice(SIDES)),
                b=SectionEnd(ids[j], rng.choice(SIDES)),
                length_km=float(rng.randint(1, 40)),
                speed_kmh=float(rng.choice(speeds)),
            )
        )

    for i in range(1, n):
        add(rng.randrange(i), i)
    extra = rng.randint(0, max(0, max_sections - len(sections)))
    for _ in range(extra):
        i, j = rng.sample(range(n), 2)
        add(i, j)
    return build_network(stations, sections)


def subdivide_sections(rng: random.Random, net: RawNetwork, count: int) -> RawNetwork:
    """Insert contractible joints into up to *count* random sections."""
    sections = list(net.sections)
    stations = list(net.stations)
    inserted = 0
    attempts = 0
    while inserted < count and attempts < 10 * count:
        attempts += 1
        k = rng.randrange(len(sections))
        sec = sections[k]
        if sec.length_km < 2:
            continue
        jid = f"j{inserted:02d}"
        first = float(rng.randint(1, int(sec.length_km) - 1))
        side = rng.choice(SIDES)
        sections[k : k + 1] = [
            SectionSpec(
                id=f"{sec.id}a",
                a=sec.a,
                b=SectionEnd(jid, side),
                length_km=first,
                speed_kmh=sec.speed_kmh,
            ),
            SectionSpec(
                id=f"{sec.id}b",
                a=SectionEnd(jid, side.opposite),
                b=sec.b,
                length_km=sec.length_km - first,
                speed_kmh=sec.speed_kmh,
            ),
        ]
        stations.append(StationSpec(id=jid))
        inserted += 1
    return build_network(stations, sections)


def grid_network(
    rng: random.Random,
    n_stations: int,
    n_sections: int,
    *,
    speeds: tuple[float, ...] = (60.0, 80.0, 100.0, 120.0),
) -> RawNetwork:
    """Sparse network at a chosen size: random tree plus shortcut sections.

    Sides are assigned so traversal through a station is usually possible,
    mirroring a real network where reversals are the exception.
    """
    ids = [f"n{i:03d}" for i in range(n_stations)]
    stations = [StationSpec(id=sid) for sid in ids]
    sections: list[SectionSpec] = []

    def add(i: int, j: int) -> None:
        sections.append(
            SectionSpec(
                id=f"s{len(sections):03d}",
                a=SectionEnd(ids[i], rng.choice(SIDES)),
                b=SectionEnd(ids[j], rng.choice(SIDES)),
                length_km=float(rng.randint(3, 60)),
                speed_kmh=float(rng.choice(speeds)),
            )
        )

    for i in range(1, n_stations):
        # bias towards recent stations for a large-diameter, railway-like tree
        lo = max(0, i - 8)
        add(rng.randrange(lo, i), i)
    while len(sections) < n_sections:
        i, j = rng.sample(range(n_stations), 2)
        add(i, j)
    return build_network(stations, sections)
