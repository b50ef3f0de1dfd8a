"""Network robustness and redundancy metrics over section deletions.

The network robustness index of a section is the growth of the total
network cost when that section is removed (infinite when the removal cuts
some pair off).  The redundancy a backup section provides to another is
the further growth when the backup is removed too, summed over the pairs
that did not use the backup originally; computing it in reciprocal space
(unreachable pairs contribute zero) keeps it finite on networks that
contain bridges, and dividing by the undisrupted reciprocal total makes
values comparable within one network.

The deletion sweep never rebuilds graphs; it reuses the arc-mask overlay
and skips the double-deletion run entirely for backup/target combinations
where no surviving shortest path can route through the target, which is
what makes full sweeps affordable.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .expand import ExpandedGraph, remove_sections
from .model import UnknownIdError, WeightKind
from .routing import (
    EPS_REL,
    DisconnectedNetworkError,
    all_pairs,
    build_csr,
    dijkstra_rows,
    pair_cost_matrix,
    reciprocal_total,
    station_layout,
)


@dataclass(frozen=True)
class NriResult:
    """Robustness index of one section: q = total(without u) - total(baseline)."""

    section: str
    weight_kind: WeightKind
    q: float  # math.inf when the deletion disconnects some pair

    @property
    def finite(self) -> bool:
        return math.isfinite(self.q)


@dataclass(frozen=True)
class PairNriResult:
    """Robustness index of a simultaneous two-section deletion."""

    sections: tuple[str, str]
    weight_kind: WeightKind
    q: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.q)


@dataclass(frozen=True)
class RedundancyTerm:
    """Contribution of one disrupted section v to a target's redundancy."""

    v: str
    plain: float  # math.inf when a restricted pair disconnects
    reciprocal: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.plain)


@dataclass(frozen=True)
class RedundancyResult:
    section: str
    weight_kind: WeightKind
    restricted: bool
    r_plain: float
    r_reciprocal: float
    r_reciprocal_normalized: float
    reciprocal_baseline: float
    per_v: tuple[RedundancyTerm, ...] | None

    @property
    def plain_finite(self) -> bool:
        return math.isfinite(self.r_plain)


def _active_section_ids(g: ExpandedGraph) -> list[str]:
    return sorted(set(g.network.section_map) - g.removed)


def _check_section(g: ExpandedGraph, sid: str) -> None:
    if sid not in g.network.section_map:
        raise UnknownIdError(f"unknown section {sid!r}")
    if sid in g.removed:
        raise UnknownIdError(f"section {sid!r} is already removed from this graph")


def _condensed(c: np.ndarray) -> np.ndarray:
    iu, ju = np.triu_indices(c.shape[0], k=1)
    return c[iu, ju]


def _total(cond: np.ndarray) -> float:
    if np.isinf(cond).any():
        return math.inf
    return float(cond.sum())


def nri(g: ExpandedGraph, u: str, *, threads: int | None = None) -> NriResult:
    """Robustness index of section *u* for the graph's weight kind."""
    _check_section(g, u)
    _, c0 = pair_cost_matrix(g, threads=threads)
    base = _total(_condensed(c0))
    if not math.isfinite(base):
        raise DisconnectedNetworkError("baseline network has unreachable pairs")
    _, cu = pair_cost_matrix(remove_sections(g, {u}), threads=threads)
    q = _total(_condensed(cu)) - base
    return NriResult(section=u, weight_kind=g.weight_kind, q=_clamp_q(q, base))


def nri_pair(g: ExpandedGraph, u: str, v: str, *, threads: int | None = None) -> PairNriResult:
    """Robustness index of deleting sections *u* and *v* together."""
    if u == v:
        raise ValueError("pair deletion needs two distinct sections")
    _check_section(g, u)
    _check_section(g, v)
    _, c0 = pair_cost_matrix(g, threads=threads)
    base = _total(_condensed(c0))
    if not math.isfinite(base):
        raise DisconnectedNetworkError("baseline network has unreachable pairs")
    _, cuv = pair_cost_matrix(remove_sections(g, {u, v}), threads=threads)
    q = _total(_condensed(cuv)) - base
    return PairNriResult(
        sections=tuple(sorted((u, v))), weight_kind=g.weight_kind, q=_clamp_q(q, base)
    )


def _clamp_q(q: float, scale: float) -> float:
    # deletion can only lengthen paths; tiny negatives are float noise
    if q < 0.0:
        if q < -1e-6 * (1.0 + abs(scale)):
            raise RuntimeError(f"internal error: negative robustness index {q}")
        return 0.0
    return q


@dataclass(frozen=True)
class _TargetArcs:
    """The two directed arcs of a target section in node-index terms."""

    section: str
    tails: tuple[int, int]
    heads: tuple[int, int]
    weight: float


def _target_arcs(g: ExpandedGraph, u: str) -> _TargetArcs:
    k = list(g.network.section_map).index(u)
    fwd, bwd = g.arcs[2 * k], g.arcs[2 * k + 1]
    return _TargetArcs(section=u, tails=(fwd.tail, bwd.tail), heads=(fwd.head, bwd.head), weight=fwd.weight)


def _scan_variant(
    g: ExpandedGraph,
    layout,
    iu: np.ndarray,
    ju: np.ndarray,
    v_id: str,
    targets: list[_TargetArcs],
    restricted_rows: dict[str, np.ndarray],
) -> dict[str, tuple[float, float]]:
    """Per-target (plain, reciprocal) redundancy contributions of variant v.

    One forward Dijkstra per variant covers both the variant cost matrix and
    the on-a-shortest-path test for every target arc; the double-deletion
    run happens only for origins with at least one affected pair.
    """
    gv = remove_sections(g, {v_id})
    csr = build_csr(gv)
    dep_sources = layout.dep_nodes.ravel()
    extra_heads = sorted({h for t in targets if t.section != v_id for h in t.heads})
    sources = np.concatenate([dep_sources, np.asarray(extra_heads, dtype=np.int64)])
    d = dijkstra_rows(csr, sources)
    n_dep = dep_sources.size
    dmin = np.minimum(d[0:n_dep:2], d[1:n_dep:2])
    cv = np.minimum(dmin[:, layout.arr_nodes[:, 0]], dmin[:, layout.arr_nodes[:, 1]])
    cv = np.minimum(cv, cv.T)
    cv_cond = cv[iu, ju]
    finite_cv = np.isfinite(cv_cond)
    eps = EPS_REL * (1.0 + np.where(finite_cv, np.abs(cv_cond), 0.0))
    head_row = {h: n_dep + i for i, h in enumerate(extra_heads)}

    out: dict[str, tuple[float, float]] = {}
    for t in targets:
        if t.section == v_id:
            continue
        mask = restricted_rows[t.section]
        may_use = np.zeros(len(cv_cond), dtype=bool)
        for tail, head in zip(t.tails, t.heads):
            q_to_arr = np.minimum(
                d[head_row[head], layout.arr_nodes[:, 0]],
                d[head_row[head], layout.arr_nodes[:, 1]],
            )
            via = dmin[:, tail][iu] + t.weight + q_to_arr[ju]
            may_use |= via <= cv_cond + eps
        affected = may_use & finite_cv & mask
        restricted_inf = bool((mask & ~finite_cv).any())
        if not affected.any():
            out[t.section] = (math.inf if restricted_inf else 0.0, 0.0)
            continue
        rows = iu[affected]
        cols = ju[affected]
        origins = np.unique(rows)
        guv = remove_sections(gv, {t.section})
        d2 = dijkstra_rows(build_csr(guv), layout.dep_nodes[origins].ravel())
        d2min = np.minimum(d2[0::2], d2[1::2])
        c2 = np.minimum(d2min[:, layout.arr_nodes[:, 0]], d2min[:, layout.arr_nodes[:, 1]])
        cuv = c2[np.searchsorted(origins, rows), cols]
        cv_aff = cv_cond[affected]
        rec_uv = 1.0 / cuv
        rec_uv[~np.isfinite(cuv)] = 0.0
        reciprocal = float((1.0 / cv_aff - rec_uv).sum())
        if restricted_inf or not np.isfinite(cuv).all():
            plain = math.inf
        else:
            plain = float((cuv - cv_aff).sum())
        out[t.section] = (plain, max(0.0, reciprocal))
    return out


def redundancy_sweep(
    g: ExpandedGraph,
    targets: list[str] | tuple[str, ...],
    *,
    restricted: bool = True,
    include_per_v: bool = False,
    threads: int | None = None,
) -> list[RedundancyResult]:
    """Redundancy of each target section, sharing all per-variant work.

    With ``restricted`` (the default) only pairs whose baseline shortest
    path avoids the target are summed; disabling it computes the literal
    unrestricted totals.
    """
    if not targets:
        raise ValueError("target list must not be empty")
    for u in targets:
        _check_section(g, u)
    baseline = all_pairs(g, threads=threads)
    c_prime = reciprocal_total(baseline)
    layout = station_layout(g)
    n = len(layout.station_ids)
    iu, ju = np.triu_indices(n, k=1)

    unique_targets = sorted(set(targets))
    target_arcs = [_target_arcs(g, u) for u in unique_targets]
    if restricted:
        restricted_rows = {u: ~baseline.pairs_using(u) for u in unique_targets}
    else:
        restricted_rows = {u: np.ones(len(iu), dtype=bool) for u in unique_targets}

    variant_ids = _active_section_ids(g)

    def job(v_id: str):
        return v_id, _scan_variant(g, layout, iu, ju, v_id, target_arcs, restricted_rows)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            scans = dict(pool.map(job, variant_ids))
    else:
        scans = dict(job(v) for v in variant_ids)

    by_target: dict[str, RedundancyResult] = {}
    for u in unique_targets:
        terms = tuple(
            RedundancyTerm(v=v, plain=scans[v][u][0], reciprocal=scans[v][u][1])
            for v in variant_ids
            if v != u
        )
        rec_total = float(sum(t.reciprocal for t in terms))
        plain_total = (
            math.inf if any(not t.finite for t in terms) else float(sum(t.plain for t in terms))
        )
        by_target[u] = RedundancyResult(
            section=u,
            weight_kind=g.weight_kind,
            restricted=restricted,
            r_plain=plain_total,
            r_reciprocal=rec_total,
            r_reciprocal_normalized=rec_total / c_prime if c_prime > 0 else 0.0,
            reciprocal_baseline=c_prime,
            per_v=terms if include_per_v else None,
        )
    return [by_target[u] for u in targets]


def redundancy_reciprocal(
    g: ExpandedGraph,
    u: str,
    *,
    restricted: bool = True,
    include_per_v: bool = False,
    threads: int | None = None,
) -> RedundancyResult:
    """Reciprocal-space redundancy of one section (always finite)."""
    return redundancy_sweep(
        g, [u], restricted=restricted, include_per_v=include_per_v, threads=threads
    )[0]


def redundancy_plain(
    g: ExpandedGraph,
    u: str,
    *,
    restricted: bool = True,
    threads: int | None = None,
) -> RedundancyResult:
    """Plain-space redundancy of one section; infinite entries propagate."""
    return redundancy_sweep(g, [u], restricted=restricted, include_per_v=True, threads=threads)[0]
