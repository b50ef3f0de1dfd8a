"""Shared fixtures: the small hand-checked networks used across the suite."""

from __future__ import annotations

import json

import pytest

from railnet import parse_network

# Ring of three stations; every through-move crosses sides, so no path in
# the ring ever needs a reversal.  A-B is s1 (10 km), B-C is s2 (20 km),
# A-C direct is s3 (40 km); at 60 km/h times equal lengths.
TRIANGLE_DOC = {
    "stations": [{"id": "A"}, {"id": "B"}, {"id": "C"}],
    "sections": [
        {"id": "s1", "a": {"station": "A", "side": "R"}, "b": {"station": "B", "side": "L"},
         "length_km": 10, "speed_kmh": 60},
        {"id": "s2", "a": {"station": "B", "side": "R"}, "b": {"station": "C", "side": "L"},
         "length_km": 20, "speed_kmh": 60},
        {"id": "s3", "a": {"station": "A", "side": "L"}, "b": {"station": "C", "side": "R"},
         "length_km": 40, "speed_kmh": 60},
    ],
}

# Line X-Y-Z where both sections meet Y on its L side: continuing past Y
# forces a reversal there (15 min), and a wye at Y forbids it entirely.
SPUR_DOC = {
    "stations": [{"id": "X"}, {"id": "Y"}, {"id": "Z"}],
    "sections": [
        {"id": "s4", "a": {"station": "X", "side": "R"}, "b": {"station": "Y", "side": "L"},
         "length_km": 10, "speed_kmh": 60},
        {"id": "s5", "a": {"station": "Y", "side": "L"}, "b": {"station": "Z", "side": "L"},
         "length_km": 10, "speed_kmh": 60},
    ],
}

# Ring of four equal 10 km sections, all pass-through.
FOUR_CYCLE_DOC = {
    "stations": [{"id": "P"}, {"id": "Q"}, {"id": "R"}, {"id": "S"}],
    "sections": [
        {"id": "pq", "a": {"station": "P", "side": "R"}, "b": {"station": "Q", "side": "L"},
         "length_km": 10, "speed_kmh": 60},
        {"id": "qr", "a": {"station": "Q", "side": "R"}, "b": {"station": "R", "side": "L"},
         "length_km": 10, "speed_kmh": 60},
        {"id": "rs", "a": {"station": "R", "side": "R"}, "b": {"station": "S", "side": "L"},
         "length_km": 10, "speed_kmh": 60},
        {"id": "sp", "a": {"station": "S", "side": "R"}, "b": {"station": "P", "side": "L"},
         "length_km": 10, "speed_kmh": 60},
    ],
}


def doc_with_wye(doc: dict, station_id: str) -> dict:
    out = json.loads(json.dumps(doc))
    for st in out["stations"]:
        if st["id"] == station_id:
            st["kind"] = "wye"
    return out


@pytest.fixture
def triangle():
    return parse_network(json.dumps(TRIANGLE_DOC))


@pytest.fixture
def spur():
    return parse_network(json.dumps(SPUR_DOC))


@pytest.fixture
def spur_wye():
    return parse_network(json.dumps(doc_with_wye(SPUR_DOC, "Y")))


@pytest.fixture
def four_cycle():
    return parse_network(json.dumps(FOUR_CYCLE_DOC))
