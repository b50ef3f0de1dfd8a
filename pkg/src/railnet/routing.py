"""Shortest paths over the expanded port graph.

Pair costs come from multi-source Dijkstra runs (scipy's sparse csgraph).
The per-pair section sequence is reconstructed afterwards by a greedy walk
that, among all arcs staying on some shortest path, always follows the one
whose section id sorts first.  That makes the chosen path the one with the
lexicographically smallest section-id sequence, so path membership and the
flow counts built on it are reproducible bit for bit across runs, thread
counts and platforms.

A trip may start from either departure port of its origin (leaving needs no
reversal) and end at either arrival port of its destination; pair costs are
the minimum over those four combinations.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from .expand import INTERNAL_ORIGIN, ExpandedGraph
from .model import UnknownIdError, WeightKind

EPS_REL = 1e-9


class DisconnectedNetworkError(Exception):
    """A total over all pairs was requested but some pair is unreachable."""


class ZeroCostPairError(Exception):
    """A reciprocal total was requested but some finite pair cost is zero."""


@dataclass(frozen=True)
class PathResult:
    """One shortest path: cost, traversed sections in order, reversal count."""

    cost: float  # math.inf when unreachable
    sections: tuple[str, ...]
    reversals: int

    @property
    def reachable(self) -> bool:
        return math.isfinite(self.cost)


@dataclass(frozen=True)
class Layout:
    """Eligible stations in sorted order with their port node indices."""

    station_ids: tuple[str, ...]
    rows: dict[str, int]
    dep_nodes: np.ndarray  # (n, 2): L and R departure ports
    arr_nodes: np.ndarray  # (n, 2): L and R arrival ports


def station_layout(g: ExpandedGraph) -> Layout:
    net = g.network
    pos = {st.id: i for i, st in enumerate(net.stations)}
    ids = tuple(sorted(st.id for st in net.stations if st.eligible))
    n = len(ids)
    dep = np.empty((n, 2), dtype=np.int64)
    arr = np.empty((n, 2), dtype=np.int64)
    for row, sid in enumerate(ids):
        base = 4 * pos[sid]
        arr[row] = (base + 0, base + 2)
        dep[row] = (base + 1, base + 3)
    return Layout(station_ids=ids, rows={sid: i for i, sid in enumerate(ids)}, dep_nodes=dep, arr_nodes=arr)


def _numeric_arcs(g: ExpandedGraph):
    """Active arcs as flat arrays: tails, heads, weights, section index (-1
    for in-station arcs), reversal flags."""
    sec_pos = {sid: k for k, sid in enumerate(g.network.section_map)}
    m = len(g.arcs)
    tails = np.empty(m, dtype=np.int64)
    heads = np.empty(m, dtype=np.int64)
    weights = np.empty(m, dtype=np.float64)
    sec_idx = np.full(m, -1, dtype=np.int32)
    is_rev = np.zeros(m, dtype=bool)
    for i, arc in enumerate(g.arcs):
        tails[i] = arc.tail
        heads[i] = arc.head
        weights[i] = arc.weight
        if arc.origin != INTERNAL_ORIGIN:
            sec_idx[i] = sec_pos[arc.origin]
        is_rev[i] = arc.is_reversal
    if g.removed:
        active = np.ones(m, dtype=bool)
        for sid in g.removed:
            k = sec_pos[sid]
            active[2 * k] = False
            active[2 * k + 1] = False
        return tails[active], heads[active], weights[active], sec_idx[active], is_rev[active]
    return tails, heads, weights, sec_idx, is_rev


def build_csr(g: ExpandedGraph) -> csr_matrix:
    """Adjacency of the active graph; parallel arcs collapse to the cheapest."""
    tails, heads, weights, _, _ = _numeric_arcs(g)
    order = np.lexsort((weights, heads, tails))
    t, h, w = tails[order], heads[order], weights[order]
    keep = np.ones(len(t), dtype=bool)
    keep[1:] = (t[1:] != t[:-1]) | (h[1:] != h[:-1])
    n = g.node_count
    return csr_matrix((w[keep], (t[keep], h[keep])), shape=(n, n))


def dijkstra_rows(csr, indices, threads: int | None = None) -> np.ndarray:
    """Distance rows from each source node, in the given source order."""
    indices = np.asarray(indices, dtype=np.int64).ravel()
    if indices.size == 0:
        return np.empty((0, csr.shape[0]))
    if threads and threads > 1 and indices.size > 1:
        chunks = np.array_split(indices, min(threads, indices.size))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ix: _sp_dijkstra(csr, directed=True, indices=ix), chunks))
        return np.vstack(parts)
    return _sp_dijkstra(csr, directed=True, indices=indices)


def pair_cost_matrix(g: ExpandedGraph, *, threads: int | None = None) -> tuple[Layout, np.ndarray]:
    """Station-to-station shortest costs as a symmetric (n, n) matrix."""
    layout = station_layout(g)
    n = len(layout.station_ids)
    if n == 0:
        return layout, np.zeros((0, 0))
    csr = build_csr(g)
    d = dijkstra_rows(csr, layout.dep_nodes.ravel(), threads)
    dmin = np.minimum(d[0::2], d[1::2])
    c = np.minimum(dmin[:, layout.arr_nodes[:, 0]], dmin[:, layout.arr_nodes[:, 1]])
    # the two directions are equal-cost by construction; enforce it exactly
    c = np.minimum(c, c.T)
    np.fill_diagonal(c, 0.0)
    return layout, c


@dataclass(frozen=True)
class _Tables:
    """Padded candidate arrays for the greedy walk.

    Row = a current position (an arrival port, or an origin station for the
    first hop); column = one way to traverse the next section, already
    ordered by section id.  A candidate bundles the optional in-station arc
    with the following section arc: head is the arrival port reached, w the
    combined weight, sec the section index, rev whether a reversal was used.
    """

    node_head: np.ndarray
    node_w: np.ndarray
    node_sec: np.ndarray
    node_rev: np.ndarray
    start_head: np.ndarray
    start_w: np.ndarray
    start_sec: np.ndarray
    start_rev: np.ndarray


def _pad(rows: list[list[tuple]], width: int, count: int):
    head = np.full((count, width), -1, dtype=np.int64)
    w = np.full((count, width), np.inf)
    sec = np.full((count, width), -1, dtype=np.int32)
    rev = np.zeros((count, width), dtype=np.int32)
    for r, cands in enumerate(rows):
        for c, (_, h, cw, cs, crev) in enumerate(cands):
            head[r, c] = h
            w[r, c] = cw
            sec[r, c] = cs
            rev[r, c] = crev
    return head, w, sec, rev


def _candidate_tables(g: ExpandedGraph, layout: Layout) -> _Tables:
    n_nodes = g.node_count
    section_ids = list(g.network.section_map)
    rank = {k: r for r, k in enumerate(sorted(range(len(section_ids)), key=lambda k: section_ids[k]))}

    by_dep: dict[int, list[tuple]] = {}
    internal: dict[int, list[tuple]] = {}
    sec_pos = {sid: k for k, sid in enumerate(g.network.section_map)}
    for arc in g.active_arcs():
        if arc.origin == INTERNAL_ORIGIN:
            internal.setdefault(arc.tail, []).append((arc.head, arc.weight, int(arc.is_reversal)))
        else:
            k = sec_pos[arc.origin]
            by_dep.setdefault(arc.tail, []).append((rank[k], arc.head, arc.weight, k))

    node_rows: list[list[tuple]] = [[] for _ in range(n_nodes)]
    for arr_node, links in internal.items():
        cands = node_rows[arr_node]
        for dep_node, wi, rev in links:
            for rk, h, ws, k in by_dep.get(dep_node, ()):
                cands.append((rk, h, wi + ws, k, rev))
        cands.sort(key=lambda item: item[0])

    start_rows: list[list[tuple]] = []
    for row in range(len(layout.station_ids)):
        cands: list[tuple] = []
        for dep_node in layout.dep_nodes[row]:
            for rk, h, ws, k in by_dep.get(int(dep_node), ()):
                cands.append((rk, h, ws, k, 0))
        cands.sort(key=lambda item: item[0])
        start_rows.append(cands)

    node_width = max(1, max((len(r) for r in node_rows), default=1))
    start_width = max(1, max((len(r) for r in start_rows), default=1))
    node_head, node_w, node_sec, node_rev = _pad(node_rows, node_width, n_nodes)
    start_head, start_w, start_sec, start_rev = _pad(start_rows, start_width, len(start_rows))
    return _Tables(node_head, node_w, node_sec, node_rev, start_head, start_w, start_sec, start_rev)


def _walk(
    tables: _Tables,
    start_rows: np.ndarray,
    tgt_rows: np.ndarray,
    rmin: np.ndarray,
    totals: np.ndarray,
    max_sections: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Greedy lexicographic walk for a batch of (origin, target) pairs.

    rmin[t, x] is the remaining shortest cost from node x to target row t's
    arrival ports; an arc stays on a shortest path iff accumulated + arc +
    remaining still meets the pair total (within a relative epsilon, since
    the same weights are summed in a different order).
    """
    p = len(start_rows)
    cap = 16
    paths = np.full((p, cap), -1, dtype=np.int32)
    revs = np.zeros(p, dtype=np.int32)
    if p == 0:
        return paths[:, :0], revs
    acc = np.zeros(p)
    cur = np.zeros(p, dtype=np.int64)
    bound = totals + EPS_REL * (1.0 + np.abs(totals))
    live = np.arange(p)
    step = 0
    max_steps = 2 * max_sections + 4
    while live.size:
        if step == 0:
            rows = start_rows[live]
            ch, cw = tables.start_head[rows], tables.start_w[rows]
            cs, cr = tables.start_sec[rows], tables.start_rev[rows]
        else:
            rows = cur[live]
            ch, cw = tables.node_head[rows], tables.node_w[rows]
            cs, cr = tables.node_sec[rows], tables.node_rev[rows]
        rem = rmin[tgt_rows[live][:, None], np.maximum(ch, 0)]
        feasible = (ch >= 0) & (acc[live][:, None] + cw + rem <= bound[live][:, None])
        k = feasible.argmax(axis=1)
        sel = np.arange(live.size)
        if not feasible[sel, k].all():
            raise RuntimeError("internal error: shortest-path walk stalled")
        if step >= cap:
            paths = np.hstack([paths, np.full((p, cap), -1, dtype=np.int32)])
            cap *= 2
        paths[live, step] = cs[sel, k]
        acc[live] += cw[sel, k]
        revs[live] += cr[sel, k]
        nxt = ch[sel, k]
        cur[live] = nxt
        done = rmin[tgt_rows[live], nxt] == 0.0
        live = live[~done]
        step += 1
        if step > max_steps:
            raise RuntimeError("internal error: shortest-path walk exceeded arc budget")
    return paths[:, :step], revs


@dataclass(frozen=True, eq=False)
class PathMatrix:
    """All-pairs shortest costs plus per-pair section membership.

    ``origins`` are the eligible stations in sorted order; ``costs`` is the
    symmetric (n, n) cost matrix with +inf for unreachable pairs.  Paths are
    stored per unordered pair, walked from the smaller station id to the
    larger, as section indices into ``section_ids`` (-1 padding).
    """

    weight_kind: WeightKind
    origins: tuple[str, ...]
    section_ids: tuple[str, ...]
    costs: np.ndarray
    path_sections: np.ndarray
    path_reversals: np.ndarray

    @cached_property
    def _rows(self) -> dict[str, int]:
        return {sid: i for i, sid in enumerate(self.origins)}

    @property
    def n_pairs(self) -> int:
        n = len(self.origins)
        return n * (n - 1) // 2

    def pair_row(self, a: str, b: str) -> int:
        try:
            i, j = self._rows[a], self._rows[b]
        except KeyError as exc:
            raise UnknownIdError(f"unknown or non-eligible station {exc.args[0]!r}") from None
        if i == j:
            raise ValueError("a pair needs two distinct stations")
        if i > j:
            i, j = j, i
        n = len(self.origins)
        return i * n - (i * (i + 1)) // 2 + (j - i - 1)

    def cost(self, a: str, b: str) -> float:
        try:
            return float(self.costs[self._rows[a], self._rows[b]])
        except KeyError as exc:
            raise UnknownIdError(f"unknown or non-eligible station {exc.args[0]!r}") from None

    def sections(self, a: str, b: str) -> tuple[str, ...]:
        row = self.path_sections[self.pair_row(a, b)]
        return tuple(self.section_ids[k] for k in row if k >= 0)

    def usage(self, a: str, b: str) -> frozenset[str]:
        return frozenset(self.sections(a, b))

    def reversals(self, a: str, b: str) -> int:
        return int(self.path_reversals[self.pair_row(a, b)])

    def iter_pairs(self):
        n = len(self.origins)
        for i in range(n):
            for j in range(i + 1, n):
                yield self.origins[i], self.origins[j]

    def condensed_costs(self) -> np.ndarray:
        n = len(self.origins)
        iu, ju = np.triu_indices(n, k=1)
        return self.costs[iu, ju]

    def pairs_using(self, section_id: str) -> np.ndarray:
        """Boolean vector over pair rows: does the chosen path use the section."""
        try:
            k = self.section_ids.index(section_id)
        except ValueError:
            raise UnknownIdError(f"unknown section {section_id!r}") from None
        if self.path_sections.shape[1] == 0:
            return np.zeros(len(self.path_sections), dtype=bool)
        return (self.path_sections == k).any(axis=1)


def _empty_matrix(g: ExpandedGraph, layout: Layout) -> PathMatrix:
    n = len(layout.station_ids)
    return PathMatrix(
        weight_kind=g.weight_kind,
        origins=layout.station_ids,
        section_ids=tuple(g.network.section_map),
        costs=np.zeros((n, n)),
        path_sections=np.empty((n * (n - 1) // 2, 0), dtype=np.int32),
        path_reversals=np.zeros(n * (n - 1) // 2, dtype=np.int32),
    )


def all_pairs(g: ExpandedGraph, *, threads: int | None = None) -> PathMatrix:
    """Shortest costs and tie-broken paths for every unordered eligible pair."""
    layout = station_layout(g)
    n = len(layout.station_ids)
    if n < 2:
        return _empty_matrix(g, layout)
    csr = build_csr(g)
    d = dijkstra_rows(csr, layout.dep_nodes.ravel(), threads)
    dmin = np.minimum(d[0::2], d[1::2])
    costs = np.minimum(dmin[:, layout.arr_nodes[:, 0]], dmin[:, layout.arr_nodes[:, 1]])
    costs = np.minimum(costs, costs.T)
    np.fill_diagonal(costs, 0.0)

    rcsr = csr.T.tocsr()
    r = dijkstra_rows(rcsr, layout.arr_nodes.ravel(), threads)
    rmin = np.minimum(r[0::2], r[1::2])

    tables = _candidate_tables(g, layout)
    iu, ju = np.triu_indices(n, k=1)
    totals = costs[iu, ju]
    finite = np.isfinite(totals)
    walked, walked_revs = _walk(
        tables, iu[finite], ju[finite], rmin, totals[finite], len(g.network.sections)
    )
    paths = np.full((len(totals), walked.shape[1]), -1, dtype=np.int32)
    paths[finite] = walked
    revs = np.zeros(len(totals), dtype=np.int32)
    revs[finite] = walked_revs
    return PathMatrix(
        weight_kind=g.weight_kind,
        origins=layout.station_ids,
        section_ids=tuple(g.network.section_map),
        costs=costs,
        path_sections=paths,
        path_reversals=revs,
    )


def shortest_path(g: ExpandedGraph, origin: str, dest: str, *, threads: int | None = None) -> PathResult:
    """Tie-broken shortest path from *origin* to *dest*."""
    net = g.network
    for sid in (origin, dest):
        st = net.station_map.get(sid)
        if st is None:
            raise UnknownIdError(f"unknown station {sid!r}")
        if not st.eligible:
            raise UnknownIdError(
                f"station {sid!r} is not an eligible origin/destination (kind={st.kind.value})"
            )
    if origin == dest:
        raise ValueError("origin and destination must differ")
    layout = station_layout(g)
    csr = build_csr(g)
    i, j = layout.rows[origin], layout.rows[dest]
    d = dijkstra_rows(csr, layout.dep_nodes[i], threads)
    dmin = np.minimum(d[0], d[1])
    total = float(min(dmin[layout.arr_nodes[j, 0]], dmin[layout.arr_nodes[j, 1]]))
    if not math.isfinite(total):
        return PathResult(cost=math.inf, sections=(), reversals=0)
    r = dijkstra_rows(csr.T.tocsr(), layout.arr_nodes[j], threads)
    rmin = np.minimum(r[0], r[1])[None, :]
    tables = _candidate_tables(g, layout)
    paths, revs = _walk(
        tables,
        np.array([i]),
        np.array([0]),
        rmin,
        np.array([total]),
        len(net.sections),
    )
    section_ids = tuple(net.section_map)
    secs = tuple(section_ids[k] for k in paths[0] if k >= 0)
    return PathResult(cost=total, sections=secs, reversals=int(revs[0]))


def total_cost(m: PathMatrix) -> float:
    """Sum of shortest costs over all unordered pairs."""
    v = m.condensed_costs()
    if np.isinf(v).any():
        raise DisconnectedNetworkError(
            f"{int(np.isinf(v).sum())} station pair(s) unreachable; total cost undefined"
        )
    return float(v.sum())


def reciprocal_total(m: PathMatrix) -> float:
    """Sum of 1/cost over all pairs, counting unreachable pairs as zero."""
    v = m.condensed_costs()
    finite = np.isfinite(v)
    if np.any(v[finite] <= 0.0):
        raise ZeroCostPairError("a finite pair cost is zero; reciprocal total undefined")
    if v.size == 0:
        return 0.0
    r = 1.0 / v
    r[~finite] = 0.0
    return float(r.sum())
