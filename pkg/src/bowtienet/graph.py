"""Directed attributed snapshot networks: data model, CSV ingestion, basic ops.

Nodes are pages carrying a polarity (anti "r" / pro "b" / neutral "g") and a
per-snapshot fan count. Edge weights are fixed at load time as the product of
both endpoints' fan counts for the requested snapshot. Graphs are immutable
after construction; every operation returns a new graph.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping

log = logging.getLogger(__name__)


class GraphError(Exception):
    """Base class for graph-layer failures."""


class IngestionError(GraphError):
    """Malformed or inconsistent input files."""


class ValidationError(GraphError):
    """Invalid field values or broken invariants."""


class NodeLookupError(GraphError, KeyError):
    """Referenced node id does not exist in the graph."""


class Polarity(str, Enum):
    ANTI = "r"
    PRO = "b"
    NEUTRAL = "g"

    @classmethod
    def parse(cls, code: str) -> "Polarity":
        try:
            return cls(code)
        except ValueError:
            raise ValidationError(f"unknown polarity code {code!r} (expected r/b/g)") from None


class Direction(Enum):
    IN = "in"
    OUT = "out"


@dataclass(frozen=True)
class SnapshotLabel:
    """A named snapshot with a strict temporal ordering index."""

    name: str
    index: int

    @property
    def fans_column(self) -> str:
        return f"fans_{self.name}"


@dataclass(frozen=True)
class PageNode:
    """One page: opaque id, fixed polarity, fan count per snapshot."""

    id: str
    polarity: Polarity
    fans: Mapping[str, int]

    def __post_init__(self):
        for snap, count in self.fans.items():
            if count < 0:
                raise ValidationError(f"node {self.id}: negative fan count {count} for {snap}")
        object.__setattr__(self, "fans", MappingProxyType(dict(self.fans)))

    def __reduce__(self):
        return (PageNode, (self.id, self.polarity, dict(self.fans)))

    def fans_at(self, snapshot: SnapshotLabel) -> int:
        try:
            return self.fans[snapshot.name]
        except KeyError:
            raise ValidationError(f"node {self.id}: no fan count for snapshot {snapshot.name!r}") from None


class DirectedGraph:
    """Immutable directed weighted graph over PageNodes.

    Adjacency maps u -> v -> weight with weight >= 0 (zero-weight edges stay in
    the topology; flow-based computations are expected to skip them). Node ids
    are kept in lexicographic order wherever a canonical order is needed.
    """

    __slots__ = ("_nodes", "_succ", "_pred", "_snapshot", "_n_edges", "__weakref__")

    def __init__(self, nodes: Iterable[PageNode], edges: Mapping[str, Mapping[str, int]],
                 snapshot: SnapshotLabel):
        node_map = {n.id: n for n in nodes}
        succ: dict[str, dict[str, int]] = {nid: {} for nid in node_map}
        pred: dict[str, dict[str, int]] = {nid: {} for nid in node_map}
        n_edges = 0
        for u, targets in edges.items():
            if u not in node_map:
                raise NodeLookupError(u)
            for v, w in targets.items():
                if v not in node_map:
                    raise NodeLookupError(v)
                succ[u][v] = w
                pred[v][u] = w
                n_edges += 1
        self._nodes = node_map
        self._succ = succ
        self._pred = pred
        self._snapshot = snapshot
        self._n_edges = n_edges

    @property
    def snapshot(self) -> SnapshotLabel:
        return self._snapshot

    @property
    def node_ids(self) -> list[str]:
        return sorted(self._nodes)

    @property
    def n_nodes(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        return self._n_edges

    def has_node(self, nid: str) -> bool:
        return nid in self._nodes

    def node(self, nid: str) -> PageNode:
        try:
            return self._nodes[nid]
        except KeyError:
            raise NodeLookupError(nid) from None

    def polarity(self, nid: str) -> Polarity:
        return self.node(nid).polarity

    def fans(self, nid: str) -> int:
        return self.node(nid).fans_at(self._snapshot)

    def successors(self, nid: str) -> Mapping[str, int]:
        if nid not in self._succ:
            raise NodeLookupError(nid)
        return self._succ[nid]

    def predecessors(self, nid: str) -> Mapping[str, int]:
        if nid not in self._pred:
            raise NodeLookupError(nid)
        return self._pred[nid]

    def has_edge(self, u: str, v: str) -> bool:
        return u in self._succ and v in self._succ[u]

    def weight(self, u: str, v: str) -> int:
        try:
            return self._succ[u][v]
        except KeyError:
            raise NodeLookupError(f"edge {u}->{v}") from None

    def edges(self):
        """Yield (u, v, weight) in canonical (lexicographic) order."""
        for u in self.node_ids:
            for v in sorted(self._succ[u]):
                yield u, v, self._succ[u][v]

    def to_dict(self) -> dict:
        return {
            "snapshot": {"name": self._snapshot.name, "index": self._snapshot.index},
            "nodes": [
                {"id": n.id, "polarity": n.polarity.value, "fans": dict(n.fans)}
                for n in (self._nodes[i] for i in self.node_ids)
            ],
            "edges": [{"src": u, "dst": v, "weight": w} for u, v, w in self.edges()],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "DirectedGraph":
        snap = SnapshotLabel(name=payload["snapshot"]["name"], index=payload["snapshot"]["index"])
        nodes = [
            PageNode(id=n["id"], polarity=Polarity.parse(n["polarity"]), fans=n["fans"])
            for n in payload["nodes"]
        ]
        adjacency: dict[str, dict[str, int]] = {}
        for e in payload["edges"]:
            adjacency.setdefault(e["src"], {})[e["dst"]] = e["weight"]
        return cls(nodes, adjacency, snap)

    def __reduce__(self):
        return (DirectedGraph.from_dict, (self.to_dict(),))


class MultiGraphReplica:
    """Degree-preserving rewired multigraph: adjacency stores edge multiplicities.

    Exposes the same traversal surface as DirectedGraph (node_ids, successors,
    predecessors) so reachability code runs on either; weights are absent.
    """

    __slots__ = ("_succ", "_pred", "_node_ids", "_n_edges")

    def __init__(self, node_ids: Iterable[str], multi_edges: Iterable[tuple[str, str]]):
        ids = sorted(node_ids)
        succ: dict[str, dict[str, int]] = {nid: {} for nid in ids}
        pred: dict[str, dict[str, int]] = {nid: {} for nid in ids}
        n = 0
        for u, v in multi_edges:
            succ[u][v] = succ[u].get(v, 0) + 1
            pred[v][u] = pred[v].get(u, 0) + 1
            n += 1
        self._succ = succ
        self._pred = pred
        self._node_ids = ids
        self._n_edges = n

    @property
    def node_ids(self) -> list[str]:
        return list(self._node_ids)

    @property
    def n_nodes(self) -> int:
        return len(self._node_ids)

    @property
    def n_edges(self) -> int:
        return self._n_edges

    def successors(self, nid: str) -> Mapping[str, int]:
        return self._succ[nid]

    def predecessors(self, nid: str) -> Mapping[str, int]:
        return self._pred[nid]

    def in_degrees(self) -> dict[str, int]:
        return {nid: sum(self._pred[nid].values()) for nid in self._node_ids}

    def out_degrees(self) -> dict[str, int]:
        return {nid: sum(self._succ[nid].values()) for nid in self._node_ids}

    def multiplicity_stats(self) -> tuple[int, int]:
        """(self-loop edge count, surplus edges beyond the first per pair)."""
        loops = sum(self._succ[u].get(u, 0) for u in self._node_ids)
        multi = sum(
            count - 1 for u in self._node_ids for count in self._succ[u].values() if count > 1
        )
        return loops, multi


def _read_nodes_csv(nodes_path) -> tuple[list[PageNode], list[str]]:
    with open(nodes_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "id" not in reader.fieldnames or "polarity" not in reader.fieldnames:
            raise IngestionError(f"{nodes_path}: expected header with id,polarity,fans_<label> columns")
        fan_cols = [c for c in reader.fieldnames if c.startswith("fans_")]
        if not fan_cols:
            raise IngestionError(f"{nodes_path}: no fans_<label> columns found")
        nodes = []
        seen = set()
        for lineno, row in enumerate(reader, start=2):
            nid = row["id"]
            if nid in seen:
                raise IngestionError(f"{nodes_path}:{lineno}: duplicate node id {nid!r}")
            seen.add(nid)
            try:
                fans = {c[len("fans_"):]: int(row[c]) for c in fan_cols}
            except (TypeError, ValueError):
                raise IngestionError(f"{nodes_path}:{lineno}: non-integer fan count for {nid!r}") from None
            nodes.append(PageNode(id=nid, polarity=Polarity.parse(row["polarity"]), fans=fans))
        return nodes, fan_cols


def load_snapshot(nodes_path, edges_path, snapshot: SnapshotLabel) -> DirectedGraph:
    """Load one snapshot from a nodes CSV and an edges CSV.

    Edge weights are products of the endpoints' fan counts at `snapshot`.
    Exact duplicate edge rows are collapsed to a single edge with a warning.
    """
    nodes, fan_cols = _read_nodes_csv(nodes_path)
    if snapshot.fans_column not in fan_cols:
        raise IngestionError(f"{nodes_path}: missing column {snapshot.fans_column!r}")
    by_id = {n.id: n for n in nodes}

    adjacency: dict[str, dict[str, int]] = {}
    duplicates = 0
    with open(edges_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "source_id" not in reader.fieldnames or "target_id" not in reader.fieldnames:
            raise IngestionError(f"{edges_path}: expected header with source_id,target_id columns")
        for lineno, row in enumerate(reader, start=2):
            u, v = row["source_id"], row["target_id"]
            for endpoint in (u, v):
                if endpoint not in by_id:
                    raise IngestionError(f"{edges_path}:{lineno}: unknown endpoint id {endpoint!r}")
            targets = adjacency.setdefault(u, {})
            if v in targets:
                duplicates += 1
                continue
            targets[v] = by_id[u].fans_at(snapshot) * by_id[v].fans_at(snapshot)
    if duplicates:
        log.warning("%s: collapsed %d duplicate edge rows", edges_path, duplicates)
    return DirectedGraph(nodes, adjacency, snapshot)


def weighted_degree(graph: DirectedGraph, node: str, direction: Direction) -> int:
    """Sum of incident edge weights on one side; self-loops count on both."""
    if direction is Direction.IN:
        return sum(graph.predecessors(node).values())
    return sum(graph.successors(node).values())


def induced_subgraph(graph: DirectedGraph, keep: Iterable[str]) -> DirectedGraph:
    keep = set(keep)
    for nid in keep:
        if not graph.has_node(nid):
            raise NodeLookupError(nid)
    edges = {
        u: {v: w for v, w in graph.successors(u).items() if v in keep}
        for u in keep
    }
    return DirectedGraph((graph.node(i) for i in keep), edges, graph.snapshot)


def reverse(graph: DirectedGraph) -> DirectedGraph:
    edges: dict[str, dict[str, int]] = {nid: {} for nid in graph.node_ids}
    for u, v, w in graph.edges():
        edges[v][u] = w
    return DirectedGraph((graph.node(i) for i in graph.node_ids), edges, graph.snapshot)


@dataclass(frozen=True)
class EdgeSummary:
    """Per polarity-pair edge counts / mean weights and reciprocation shares."""

    counts: Mapping[tuple[str, str], int]
    mean_weights: Mapping[tuple[str, str], float]
    two_way_share: float
    self_share: float
    n_edges: int


def edge_summary(graph: DirectedGraph) -> EdgeSummary:
    """Summarize edges by endpoint polarity.

    two_way_share = fraction of all edges (u,v), u != v, whose reverse (v,u)
    also exists; self_share = fraction of edges that are self-loops. Both use
    the total edge count (self-loops included) as denominator.
    """
    counts: dict[tuple[str, str], int] = {}
    sums: dict[tuple[str, str], int] = {}
    two_way = 0
    selfloops = 0
    for u, v, w in graph.edges():
        key = (graph.polarity(u).value, graph.polarity(v).value)
        counts[key] = counts.get(key, 0) + 1
        sums[key] = sums.get(key, 0) + w
        if u == v:
            selfloops += 1
        elif graph.has_edge(v, u):
            two_way += 1
    n = graph.n_edges
    mean_weights = {k: sums[k] / counts[k] for k in counts}
    return EdgeSummary(
        counts=MappingProxyType(counts),
        mean_weights=MappingProxyType(mean_weights),
        two_way_share=two_way / n if n else 0.0,
        self_share=selfloops / n if n else 0.0,
        n_edges=n,
    )


def write_graph_json(graph: DirectedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_graph_json(path) -> DirectedGraph:
    with open(path, encoding="utf-8") as fh:
        return DirectedGraph.from_dict(json.load(fh))


def graphs_equal(a: DirectedGraph, b: DirectedGraph) -> bool:
    """Structural equality: snapshot, node set with attributes, weighted edges."""
    return a.to_dict() == b.to_dict()
