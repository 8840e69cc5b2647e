"""Per-page feature extraction for the downstream learning harness.

Each anti/pro page gets one record: polarity, community label, collapsed
bow-tie roles (SCC/IN/OUT, everything else folded to NA), fan count and its
log transform, weighted in/out degrees, same-polarity and same-community
weighted-degree shares, PageRank, betweenness, and the fan-count change to
the next snapshot. Neutral pages are excluded from the output but their
edges still contribute to every degree and share.

Shares with a zero denominator carry None (spelled as an empty CSV field),
never a silent zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Mapping, Optional

from .bowtie import BowtieDecomposition, BowtieRole
from .community import Partition, stationary_flow
from .graph import DirectedGraph, Polarity, ValidationError

SCHEMA_VERSION = "bowtienet-features/1"

FEATURE_COLUMNS = [
    "id", "p", "c", "wbt", "abt", "f", "log_f", "k_in", "k_out",
    "kps_in", "kps_out", "kcs_in", "kcs_out", "pagerank", "betweenness",
    "fan_delta",
]

_MAIN = {BowtieRole.SCC, BowtieRole.IN, BowtieRole.OUT}


def collapse_role(role: BowtieRole) -> str:
    """SCC/IN/OUT pass through; every other role becomes NA."""
    return role.value if role in _MAIN else "NA"


@dataclass(frozen=True)
class FeatureRecord:
    id: str
    polarity: str
    community: str
    wbt: str
    abt: str
    fans: int
    log_fans: float
    k_in: int
    k_out: int
    kps_in: Optional[float]
    kps_out: Optional[float]
    kcs_in: Optional[float]
    kcs_out: Optional[float]
    pagerank: float
    betweenness: float
    fan_delta: int


def log_fan(f: int) -> float:
    """log10(1 + f); defined at zero, rejects negatives."""
    if f < 0:
        raise ValidationError(f"fan count must be >= 0, got {f}")
    return math.log10(1 + f)


def betweenness(graph: DirectedGraph, weighted: bool = False) -> dict[str, float]:
    """Directed shortest-path betweenness, normalized by (n-1)(n-2).

    Unweighted geodesics by default; the weighted variant treats weight as
    closeness (distance 1/w) and exists for sensitivity checks only.
    """
    ids = graph.node_ids
    n = len(ids)
    centrality = {nid: 0.0 for nid in ids}
    if n < 3:
        return centrality
    for s in ids:
        if weighted:
            order, preds, sigma = _dijkstra_dag(graph, s)
        else:
            order, preds, sigma = _bfs_dag(graph, s)
        delta = {nid: 0.0 for nid in order}
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != s:
                centrality[w] += delta[w]
    scale = 1.0 / ((n - 1) * (n - 2))
    return {nid: val * scale for nid, val in centrality.items()}


def _bfs_dag(graph: DirectedGraph, s: str):
    sigma = {s: 1.0}
    dist = {s: 0}
    preds: dict[str, list[str]] = {s: []}
    order = [s]
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        for w in graph.successors(v):
            if w == v:
                continue
            if w not in dist:
                dist[w] = dist[v] + 1
                sigma[w] = 0.0
                preds[w] = []
                order.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return order, preds, sigma


def _dijkstra_dag(graph: DirectedGraph, s: str):
    import heapq

    sigma = {s: 1.0}
    dist: dict[str, float] = {}
    seen = {s: 0.0}
    preds: dict[str, list[str]] = {s: []}
    order: list[str] = []
    heap = [(0.0, s)]
    while heap:
        d, v = heapq.heappop(heap)
        if v in dist:
            continue
        dist[v] = d
        order.append(v)
        for w, weight in graph.successors(v).items():
            if w == v or weight <= 0:
                continue
            alt = d + 1.0 / weight
            if w not in dist and (w not in seen or alt < seen[w] - 1e-15):
                seen[w] = alt
                sigma[w] = sigma[v]
                preds[w] = [v]
                heapq.heappush(heap, (alt, w))
            elif w not in dist and abs(alt - seen[w]) <= 1e-15:
                sigma[w] += sigma[v]
                preds[w].append(v)
    return order, preds, sigma


def degree_composition(graph: DirectedGraph) -> dict[str, dict[str, Optional[tuple[float, float, float]]]]:
    """Per page, (anti, pro, neutral) shares of weighted in- and out-degree.

    Pages with zero degree on a side get None for that side.
    """
    out: dict[str, dict[str, Optional[tuple[float, float, float]]]] = {}
    for nid in graph.node_ids:
        entry: dict[str, Optional[tuple[float, float, float]]] = {}
        for side, nbrs in (("in", graph.predecessors(nid)), ("out", graph.successors(nid))):
            total = sum(nbrs.values())
            if total == 0:
                entry[side] = None
                continue
            sums = {Polarity.ANTI: 0, Polarity.PRO: 0, Polarity.NEUTRAL: 0}
            for other, w in nbrs.items():
                sums[graph.polarity(other)] += w
            entry[side] = (sums[Polarity.ANTI] / total, sums[Polarity.PRO] / total,
                           sums[Polarity.NEUTRAL] / total)
        out[nid] = entry
    return out


def _share(nbrs: Mapping[str, int], match) -> Optional[float]:
    total = sum(nbrs.values())
    if total == 0:
        return None
    return sum(w for other, w in nbrs.items() if match(other)) / total


def extract_features(graph: DirectedGraph, partition: Partition,
                     wbt: BowtieDecomposition, abt: BowtieDecomposition,
                     next_snapshot_fans: Mapping[str, int],
                     damping: float = 0.85) -> list[FeatureRecord]:
    """One record per anti/pro page, in canonical id order."""
    for name, mapping in (("partition", partition.assignment),
                          ("within-group roles", wbt.roles),
                          ("across-group roles", abt.roles)):
        if set(mapping) != set(graph.node_ids):
            raise ValidationError(f"{name} does not cover the graph's node set")

    flow = stationary_flow(graph, damping=damping)
    pagerank = dict(zip(flow.ids, (float(p) for p in flow.probs)))
    btw = betweenness(graph)

    records = []
    for nid in graph.node_ids:
        pol = graph.polarity(nid)
        if pol is Polarity.NEUTRAL:
            continue
        if nid not in next_snapshot_fans:
            raise ValidationError(f"missing next-snapshot fan count for page {nid!r}")
        fans = graph.fans(nid)
        preds = graph.predecessors(nid)
        succs = graph.successors(nid)
        same_pol = lambda other: graph.polarity(other) is pol  # noqa: E731
        my_part = partition.assignment[nid]
        same_part = lambda other: partition.assignment[other] == my_part  # noqa: E731
        records.append(FeatureRecord(
            id=nid,
            polarity=pol.value,
            community=my_part,
            wbt=collapse_role(wbt.roles[nid]),
            abt=collapse_role(abt.roles[nid]),
            fans=fans,
            log_fans=log_fan(fans),
            k_in=sum(preds.values()),
            k_out=sum(succs.values()),
            kps_in=_share(preds, same_pol),
            kps_out=_share(succs, same_pol),
            kcs_in=_share(preds, same_part),
            kcs_out=_share(succs, same_part),
            pagerank=pagerank[nid],
            betweenness=btw[nid],
            fan_delta=next_snapshot_fans[nid] - fans,
        ))
    return records


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_features_csv(records: list[FeatureRecord], path) -> None:
    """Schema-versioned CSV; identical inputs give byte-identical output."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FEATURE_COLUMNS)
        for r in records:
            writer.writerow([
                r.id, r.polarity, r.community, r.wbt, r.abt, r.fans,
                _fmt(r.log_fans), r.k_in, r.k_out,
                _fmt(r.kps_in), _fmt(r.kps_out), _fmt(r.kcs_in), _fmt(r.kcs_out),
                _fmt(r.pagerank), _fmt(r.betweenness), r.fan_delta,
            ])


def write_ternary_csv(graph: DirectedGraph, path) -> None:
    """Weighted-degree polarity composition per page, for ternary plots."""
    comp = degree_composition(graph)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "polarity", "fans", "side", "anti_share", "pro_share",
                         "neutral_share"])
        for nid in graph.node_ids:
            for side in ("in", "out"):
                triple = comp[nid][side]
                shares = ["", "", ""] if triple is None else [_fmt(v) for v in triple]
                writer.writerow([nid, graph.polarity(nid).value, graph.fans(nid), side] + shares)
