"""Brute-force reference implementations, independent of the engine.

Everything here works directly on the RawNetwork: costs come from an
exhaustive depth-first enumeration of walks over (station, arrival-side)
states, applying the reversal rules from first principles.  A walk may
revisit a station through its other side but never repeats a state, which
is enough because any cheaper walk repeating a state would contain a
positive-cost cycle.  Only small networks are feasible; that is the point.
"""

from __future__ import annotations

import math
from itertools import combinations

from railnet.model import RawNetwork, StationKind, WeightKind, section_weight


def best_paths(net: RawNetwork, kind: WeightKind, a: str, b: str):
    """(cost, optimal paths) where each path is (section-id tuple, reversals).

    cost is math.inf and the list empty when b is unreachable from a.
    """
    adj: dict[str, list] = {st.id: [] for st in net.stations}
    for sec in sorted(net.sections, key=lambda s: s.id):
        w = section_weight(sec, kind)
        adj[sec.a.station].append((sec.id, w, sec.a.side, sec.b.station, sec.b.side))
        adj[sec.b.station].append((sec.id, w, sec.b.side, sec.a.station, sec.a.side))
    stations = net.station_map
    best = math.inf
    found: list[tuple[tuple[str, ...], int]] = []

    def walk(station, arrived_side, cost, visited, path, reversals):
        nonlocal best, found
        for sec_id, w, here_side, far, far_side in adj[station]:
            extra = 0.0
            rev = 0
            if arrived_side is not None and here_side == arrived_side:
                st = stations[station]
                if st.kind is StationKind.WYE:
                    continue
                rev = 1
                if kind is WeightKind.TIME:
                    extra = st.reversal_penalty_min
            new_cost = cost + extra + w
            if new_cost > best:
                continue
            new_path = path + (sec_id,)
            if far == b:
                if new_cost < best:
                    best = new_cost
                    found = [(new_path, reversals + rev)]
                else:
                    found.append((new_path, reversals + rev))
                continue
            state = (far, far_side)
            if state in visited:
                continue
            walk(far, far_side, new_cost, visited | {state}, new_path, reversals + rev)

    walk(a, None, 0.0, frozenset(), (), 0)
    return best, found


def pair_cost(net: RawNetwork, kind: WeightKind, a: str, b: str) -> float:
    return best_paths(net, kind, a, b)[0]


def lex_path(net: RawNetwork, kind: WeightKind, a: str, b: str) -> tuple[str, ...]:
    """The optimal path whose section-id sequence sorts first."""
    _, found = best_paths(net, kind, a, b)
    return min(p for p, _ in found) if found else ()


def eligible_ids(net: RawNetwork) -> list[str]:
    return sorted(st.id for st in net.stations if st.kind is StationKind.STATION)


def all_pair_costs(net: RawNetwork, kind: WeightKind) -> dict[tuple[str, str], float]:
    return {
        (a, b): pair_cost(net, kind, a, b) for a, b in combinations(eligible_ids(net), 2)
    }


def total(costs: dict) -> float:
    if any(math.isinf(c) for c in costs.values()):
        return math.inf
    return sum(costs.values())


def reciprocal(costs: dict) -> float:
    return sum(0.0 if math.isinf(c) else 1.0 / c for c in costs.values())


def without(net: RawNetwork, dead: set[str]) -> RawNetwork:
    return RawNetwork(net.stations, tuple(s for s in net.sections if s.id not in dead))


def nri_value(net: RawNetwork, kind: WeightKind, u: str) -> float:
    base = total(all_pair_costs(net, kind))
    return total(all_pair_costs(without(net, {u}), kind)) - base


def nri_pair_value(net: RawNetwork, kind: WeightKind, u: str, v: str) -> float:
    base = total(all_pair_costs(net, kind))
    return total(all_pair_costs(without(net, {u, v}), kind)) - base


def redundancy_values(
    net: RawNetwork, kind: WeightKind, u: str, *, restricted: bool = True
):
    """Per-v (plain, reciprocal) terms plus the normalized total for u."""
    pairs = list(combinations(eligible_ids(net), 2))
    base_costs = all_pair_costs(net, kind)
    if restricted:
        kept = [p for p in pairs if u not in lex_path(net, kind, *p)]
    else:
        kept = pairs
    c_prime = reciprocal(base_costs)
    per_v: dict[str, tuple[float, float]] = {}
    for v in sorted(s.id for s in net.sections):
        if v == u:
            continue
        cv = all_pair_costs(without(net, {v}), kind)
        cuv = all_pair_costs(without(net, {u, v}), kind)
        rec = sum(
            (0.0 if math.isinf(cv[p]) else 1.0 / cv[p])
            - (0.0 if math.isinf(cuv[p]) else 1.0 / cuv[p])
            for p in kept
        )
        if any(math.isinf(cuv[p]) for p in kept):
            plain = math.inf
        else:
            plain = sum(cuv[p] - cv[p] for p in kept)
        per_v[v] = (plain, rec)
    rec_total = sum(r for _, r in per_v.values())
    plain_total = (
        math.inf
        if any(math.isinf(p) for p, _ in per_v.values())
        else sum(p for p, _ in per_v.values())
    )
    normalized = rec_total / c_prime if c_prime > 0 else 0.0
    return per_v, plain_total, rec_total, normalized
