"""Bow-tie decomposition of directed graphs.

Roles are assigned relative to the largest strongly connected component S:
IN reaches S, OUT is reachable from S, and the leftover nodes split into
TUBES / INTENDRILS / OUTTENDRILS / OTHERS by whether they sit downstream of
IN and/or upstream of OUT. The recursive variant decomposes each part of a
partition independently, ignoring edges across parts.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

from .graph import DirectedGraph, GraphError, NodeLookupError, ValidationError, induced_subgraph


class BowtieRole(str, Enum):
    SCC = "SCC"
    IN = "IN"
    OUT = "OUT"
    TUBES = "TUBES"
    INTENDRILS = "INTENDRILS"
    OUTTENDRILS = "OUTTENDRILS"
    OTHERS = "OTHERS"
    UNASSIGNED = "UNASSIGNED"


# The seven whole-graph roles, in reporting order.
CORE_ROLES = (
    BowtieRole.SCC,
    BowtieRole.IN,
    BowtieRole.OUT,
    BowtieRole.TUBES,
    BowtieRole.INTENDRILS,
    BowtieRole.OUTTENDRILS,
    BowtieRole.OTHERS,
)

ALL_ROLES = CORE_ROLES + (BowtieRole.UNASSIGNED,)


@dataclass(frozen=True)
class BowtieDecomposition:
    """Node -> role assignment plus per-role sizes."""

    roles: Mapping[str, BowtieRole]
    sizes: Mapping[BowtieRole, int] = field(default=None)  # type: ignore[assignment]
    part_of: Optional[Mapping[str, str]] = None  # set for recursive decompositions

    def __post_init__(self):
        if self.sizes is None:
            sizes = {role: 0 for role in ALL_ROLES}
            for role in self.roles.values():
                sizes[role] += 1
            object.__setattr__(self, "sizes", sizes)

    def members(self, role: BowtieRole) -> set[str]:
        return {nid for nid, r in self.roles.items() if r is role}

    def node_ids(self) -> list[str]:
        return sorted(self.roles)


def strongly_connected_components(graph) -> list[set[str]]:
    """All strongly connected components, via an iterative Tarjan walk.

    Works on anything exposing node_ids and successors(). Uses an explicit
    stack so deep graphs cannot overflow the interpreter's recursion limit.
    """
    index: dict[str, int] = {}
    lowlink: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[set[str]] = []
    counter = 0

    for root in graph.node_ids:
        if root in index:
            continue
        # work items: (node, iterator over successors, child-to-merge-or-None)
        work = [(root, iter(graph.successors(root)), None)]
        while work:
            v, it, child = work[-1]
            if child is not None and lowlink[child] < lowlink[v]:
                lowlink[v] = lowlink[child]
            if v not in index:
                index[v] = lowlink[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            advanced = False
            for w in it:
                if w not in index:
                    work[-1] = (v, it, None)
                    work.append((w, iter(graph.successors(w)), None))
                    advanced = True
                    break
                if w in on_stack and index[w] < lowlink[v]:
                    lowlink[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                work[-1] = (work[-1][0], work[-1][1], v)
            if lowlink[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                components.append(comp)
    return components


def largest_scc(graph) -> set[str]:
    """Maximum-cardinality SCC; ties go to the component holding the
    lexicographically smallest node id."""
    if graph.n_nodes == 0:
        raise GraphError("largest_scc: empty graph")
    components = strongly_connected_components(graph)
    best_size = max(len(c) for c in components)
    tied = [c for c in components if len(c) == best_size]
    return min(tied, key=min)


def reachable_from(graph, sources: Iterable[str]) -> set[str]:
    """All nodes with a path from some source (sources included: self-paths)."""
    nodes = set(graph.node_ids)
    frontier = []
    seen = set()
    for s in sources:
        if s not in nodes:
            raise NodeLookupError(s)
        if s not in seen:
            seen.add(s)
            frontier.append(s)
    while frontier:
        u = frontier.pop()
        for v in graph.successors(u):
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    return seen


def _reverse_reachable(graph, sources: Iterable[str]) -> set[str]:
    seen = set(sources)
    frontier = list(seen)
    while frontier:
        u = frontier.pop()
        for v in graph.predecessors(u):
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    return seen


def decompose(graph) -> BowtieDecomposition:
    """Assign each node exactly one of the seven bow-tie roles."""
    if graph.n_nodes == 0:
        raise GraphError("decompose: empty graph")
    scc = largest_scc(graph)
    downstream = reachable_from(graph, scc)           # scc plus everything it reaches
    upstream = _reverse_reachable(graph, scc)         # scc plus everything reaching it
    out_set = downstream - scc
    in_set = upstream - scc

    assigned = scc | in_set | out_set
    remaining = set(graph.node_ids) - assigned

    from_in = reachable_from(graph, in_set) if in_set else set()
    to_out = _reverse_reachable(graph, out_set) if out_set else set()

    roles: dict[str, BowtieRole] = {}
    for nid in scc:
        roles[nid] = BowtieRole.SCC
    for nid in in_set:
        roles[nid] = BowtieRole.IN
    for nid in out_set:
        roles[nid] = BowtieRole.OUT
    for nid in remaining:
        hears_in = nid in from_in
        feeds_out = nid in to_out
        if hears_in and feeds_out:
            roles[nid] = BowtieRole.TUBES
        elif hears_in:
            roles[nid] = BowtieRole.INTENDRILS
        elif feeds_out:
            roles[nid] = BowtieRole.OUTTENDRILS
        else:
            roles[nid] = BowtieRole.OTHERS
    return BowtieDecomposition(roles=roles)


def recursive_decompose(graph: DirectedGraph, partition, min_size: int = 5) -> BowtieDecomposition:
    """Decompose each partition part's induced subgraph independently.

    Edges across parts are disregarded. Parts smaller than min_size get the
    UNASSIGNED sentinel instead of a decomposition.
    """
    assignment = partition.assignment
    node_set = set(graph.node_ids)
    covered = set(assignment)
    if covered != node_set:
        missing = sorted(node_set - covered)[:5]
        extra = sorted(covered - node_set)[:5]
        raise ValidationError(
            f"partition does not cover the graph exactly (missing={missing}, extra={extra})"
        )

    parts: dict[str, set[str]] = {}
    for nid, label in assignment.items():
        parts.setdefault(label, set()).add(nid)

    roles: dict[str, BowtieRole] = {}
    part_of: dict[str, str] = dict(assignment)
    for label in sorted(parts):
        members = parts[label]
        if len(members) < min_size:
            for nid in members:
                roles[nid] = BowtieRole.UNASSIGNED
            continue
        sub = induced_subgraph(graph, members)
        for nid, role in decompose(sub).roles.items():
            roles[nid] = role
    return BowtieDecomposition(roles=roles, part_of=part_of)


def write_roles_csv(decomposition: BowtieDecomposition, graph: DirectedGraph, path) -> None:
    """Export id,polarity,partition_part,role rows in canonical id order."""
    part_of = decomposition.part_of or {}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "polarity", "partition_part", "role"])
        for nid in decomposition.node_ids():
            writer.writerow([
                nid,
                graph.polarity(nid).value,
                part_of.get(nid, ""),
                decomposition.roles[nid].value,
            ])


def summary_by_part(decomposition: BowtieDecomposition) -> dict:
    """Role sizes, overall and per part when the decomposition is recursive."""
    overall = {role.value: decomposition.sizes[role] for role in ALL_ROLES}
    payload: dict = {"overall": overall}
    if decomposition.part_of is not None:
        per_part: dict[str, dict[str, int]] = {}
        for nid, role in decomposition.roles.items():
            part = decomposition.part_of[nid]
            per_part.setdefault(part, {r.value: 0 for r in ALL_ROLES})[role.value] += 1
        payload["parts"] = {label: per_part[label] for label in sorted(per_part)}
    return payload


def write_summary_json(decomposition: BowtieDecomposition, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary_by_part(decomposition), fh, indent=1, sort_keys=True)
        fh.write("\n")
