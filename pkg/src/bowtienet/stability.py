"""Temporal role comparison across snapshots: transition counts and stability."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bowtie import ALL_ROLES, BowtieDecomposition
from .graph import DirectedGraph, Polarity, ValidationError

_ROLE_INDEX = {role: i for i, role in enumerate(ALL_ROLES)}


@dataclass(frozen=True)
class RoleFlow:
    """Contingency table of role assignments at two timestamps.

    counts[i, j] = pages with role ALL_ROLES[i] at t1 and ALL_ROLES[j] at t2.
    stability = trace / total. Pages present at only one timestamp are not
    counted; their number is reported in only_t1/only_t2.
    """

    counts: np.ndarray
    stability: float
    total: int
    only_t1: int = 0
    only_t2: int = 0

    def count(self, role_t1, role_t2) -> int:
        return int(self.counts[_ROLE_INDEX[role_t1], _ROLE_INDEX[role_t2]])


def role_flows(roles_t1: BowtieDecomposition, roles_t2: BowtieDecomposition,
               graph: Optional[DirectedGraph] = None,
               polarity_filter: Optional[Polarity] = None,
               allow_partial: bool = False) -> RoleFlow:
    """Count role transitions between two decompositions.

    A polarity filter needs `graph` for the node attributes. Non-shared
    nodes raise unless allow_partial is set, in which case they are excluded
    and counted separately.
    """
    ids_t1 = set(roles_t1.roles)
    ids_t2 = set(roles_t2.roles)
    if ids_t1 != ids_t2 and not allow_partial:
        raise ValidationError("decompositions cover different node sets "
                              f"({len(ids_t1 - ids_t2)} only in t1, {len(ids_t2 - ids_t1)} only in t2)")
    shared = ids_t1 & ids_t2
    if polarity_filter is not None:
        if graph is None:
            raise ValidationError("polarity_filter requires the graph")
        shared = {nid for nid in shared if graph.polarity(nid) is polarity_filter}

    k = len(ALL_ROLES)
    counts = np.zeros((k, k), dtype=np.int64)
    for nid in shared:
        counts[_ROLE_INDEX[roles_t1.roles[nid]], _ROLE_INDEX[roles_t2.roles[nid]]] += 1
    total = int(counts.sum())
    stability = float(np.trace(counts) / total) if total else 0.0
    only_t1 = len(ids_t1 - ids_t2)
    only_t2 = len(ids_t2 - ids_t1)
    if polarity_filter is not None and graph is not None:
        pass  # excluded-by-filter nodes are not "missing", so not reported
    return RoleFlow(counts=counts, stability=stability, total=total,
                    only_t1=only_t1, only_t2=only_t2)


def sankey_payload(slices: list[tuple[str, RoleFlow]]) -> dict:
    """{slices: [{polarity, flows: [{from, to, count}], stability}]}."""
    out = []
    for label, flow in slices:
        flows = []
        for i, r1 in enumerate(ALL_ROLES):
            for j, r2 in enumerate(ALL_ROLES):
                c = int(flow.counts[i, j])
                if c:
                    flows.append({"from": r1.value, "to": r2.value, "count": c})
        out.append({"polarity": label, "flows": flows, "stability": flow.stability,
                    "total": flow.total})
    return {"slices": out}


def write_sankey_json(slices: list[tuple[str, RoleFlow]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sankey_payload(slices), fh, indent=1, sort_keys=True)
        fh.write("\n")
