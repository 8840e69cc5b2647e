"""Agent-based discrete-time SIR information cascades.

An edge u -> v records that page u recommends page v, so a piece of
information created at v travels against the stored edges: at every step
each infectious node w independently infects each susceptible u with
A[u][w] > 0 with probability beta, then the step's infectious nodes recover
with probability gamma. Propagation along stored edge direction is available
for sensitivity checks. The impacted set of a piece is the recovered set at
termination; its influence splits into a within-stance part (fans of
impacted pages sharing the seed's polarity) and an across part (fans of
impacted neutral pages). Opposite-stance pages count toward neither.
"""

from __future__ import annotations

import csv
import json
import math
import weakref
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional, Sequence

import numpy as np

from .bowtie import BowtieDecomposition, BowtieRole
from .graph import DirectedGraph, NodeLookupError, Polarity, ValidationError
from .rng import derive_rng

_POL_CODE = {Polarity.ANTI: 0, Polarity.PRO: 1, Polarity.NEUTRAL: 2}
_NEUTRAL = 2


@dataclass(frozen=True)
class SirParams:
    beta: float
    gamma: float
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValidationError(f"beta must be in [0,1], got {self.beta}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValidationError(f"gamma must be in (0,1], got {self.gamma}")


class PageFilter(Enum):
    ALL = "all"
    EXPANDING = "expanding"
    NONEXPANDING = "nonexpanding"


class InfluenceKind(Enum):
    WITHIN = "within"
    ACROSS = "across"


@dataclass(frozen=True)
class CascadeOutcome:
    seed_page: str
    impacted: frozenset[str]
    w_influence: int
    a_influence: int


@dataclass(frozen=True)
class InitialiserDistribution:
    """Seeding distribution over pages; zero mass on every neutral page."""

    ids: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        total = float(self.probs.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"initialiser probabilities sum to {total!r}, not 1")
        if (self.probs < 0).any():
            raise ValidationError("initialiser probabilities must be non-negative")


@dataclass
class PageInfluence:
    """Accumulated per-page influence over a batch of simulated pieces."""

    ids: tuple[str, ...]
    w_influence: np.ndarray
    a_influence: np.ndarray
    pieces: int


class _Engine:
    """Flat-array view of a graph for fast repeated cascades."""

    def __init__(self, graph: DirectedGraph, reverse: bool):
        ids = graph.node_ids
        self.ids = ids
        self.index = {nid: i for i, nid in enumerate(ids)}
        self.polarity = np.array([_POL_CODE[graph.polarity(nid)] for nid in ids], dtype=np.int8)
        self.fans = np.array([graph.fans(nid) for nid in ids], dtype=np.int64)
        indptr = [0]
        indices: list[int] = []
        weights: list[int] = []
        for nid in ids:
            nbrs = graph.predecessors(nid) if reverse else graph.successors(nid)
            for other in sorted(nbrs):
                indices.append(self.index[other])
                weights.append(nbrs[other])
            indptr.append(len(indices))
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.max_weight = float(self.weights.max()) if len(self.weights) else 1.0

    def targets_of(self, node: int) -> np.ndarray:
        return self.indices[self.indptr[node]:self.indptr[node + 1]]

    def simulate(self, seed_idx: int, beta: float, gamma: float,
                 rng: np.random.Generator, weighted: bool = False) -> np.ndarray:
        """Run one cascade; returns sorted indices of the recovered set."""
        status = np.zeros(len(self.ids), dtype=np.int8)  # 0=S 1=I 2=R
        status[seed_idx] = 1
        infectious = np.array([seed_idx], dtype=np.int64)
        while len(infectious):
            newly = self._transmit(infectious, beta, rng, weighted, status)
            recovers = rng.random(len(infectious)) < gamma
            status[infectious[recovers]] = 2
            infectious = np.concatenate([infectious[~recovers], newly])
        return np.flatnonzero(status == 2)

    def _transmit(self, infectious, beta, rng, weighted, status) -> np.ndarray:
        if beta <= 0.0:
            return np.empty(0, dtype=np.int64)
        spans = [slice(self.indptr[w], self.indptr[w + 1]) for w in infectious]
        cand = np.concatenate([self.indices[s] for s in spans]) if spans else np.empty(0, np.int64)
        if not len(cand):
            return np.empty(0, dtype=np.int64)
        if weighted:
            wts = np.concatenate([self.weights[s] for s in spans])
            keep = status[cand] == 0
            cand, wts = cand[keep], wts[keep]
            if not len(cand):
                return np.empty(0, dtype=np.int64)
            contact_p = np.clip(beta * wts / self.max_weight, 0.0, 1.0)
            targets = np.unique(cand)
            log_miss = np.zeros(len(self.ids))
            np.add.at(log_miss, cand, np.log1p(-np.minimum(contact_p, 1 - 1e-15)))
            p_hit = 1.0 - np.exp(log_miss[targets])
        else:
            cand = cand[status[cand] == 0]
            if not len(cand):
                return np.empty(0, dtype=np.int64)
            targets, counts = np.unique(cand, return_counts=True)
            p_hit = 1.0 - (1.0 - beta) ** counts
        hit = rng.random(len(targets)) < p_hit
        newly = targets[hit]
        status[newly] = 1
        return newly

    def influence(self, seed_idx: int, recovered: np.ndarray) -> tuple[int, int]:
        pol = self.polarity[recovered]
        seed_pol = self.polarity[seed_idx]
        w = int(self.fans[recovered[pol == seed_pol]].sum())
        a = int(self.fans[recovered[pol == _NEUTRAL]].sum())
        return w, a


_engines: "weakref.WeakKeyDictionary[DirectedGraph, dict[bool, _Engine]]" = weakref.WeakKeyDictionary()


def _engine_for(graph: DirectedGraph, reverse: bool) -> _Engine:
    per_graph = _engines.setdefault(graph, {})
    if reverse not in per_graph:
        per_graph[reverse] = _Engine(graph, reverse)
    return per_graph[reverse]


def run_sir(graph: DirectedGraph, seed_page: str, params: SirParams,
            reverse: bool = True, weighted: bool = False) -> CascadeOutcome:
    """Simulate one information piece seeded at a non-neutral page."""
    if not graph.has_node(seed_page):
        raise NodeLookupError(seed_page)
    if graph.polarity(seed_page) is Polarity.NEUTRAL:
        raise ValidationError(f"seed page {seed_page!r} is neutral; pieces start on anti/pro pages")
    engine = _engine_for(graph, reverse)
    rng = derive_rng(params.seed, "sir-piece")
    recovered = engine.simulate(engine.index[seed_page], params.beta, params.gamma, rng,
                                weighted=weighted)
    w, a = engine.influence(engine.index[seed_page], recovered)
    return CascadeOutcome(
        seed_page=seed_page,
        impacted=frozenset(engine.ids[i] for i in recovered),
        w_influence=w,
        a_influence=a,
    )


def influence_of(outcome: CascadeOutcome, graph: DirectedGraph) -> tuple[int, int]:
    """Recompute (within, across) influence of an outcome from first principles."""
    seed_pol = graph.polarity(outcome.seed_page)
    w = sum(graph.fans(j) for j in outcome.impacted if graph.polarity(j) is seed_pol)
    a = sum(graph.fans(j) for j in outcome.impacted if graph.polarity(j) is Polarity.NEUTRAL)
    return w, a


@dataclass(frozen=True)
class InfluenceSample:
    piece_id: int
    component: BowtieRole
    seed_id: str
    w_influence: int
    a_influence: int


MAIN_COMPONENTS = (BowtieRole.SCC, BowtieRole.OUT, BowtieRole.IN)


def component_influence_experiment(graph: DirectedGraph, roles: BowtieDecomposition,
                                   pieces_per_component: int = 1000,
                                   params: SirParams = None,
                                   components: Sequence[BowtieRole] = MAIN_COMPONENTS,
                                   reverse: bool = True) -> dict[BowtieRole, list[InfluenceSample]]:
    """Seed `pieces_per_component` pieces uniformly from each component's
    anti/pro pages and record every piece's within/across influence.

    Components with no eligible seed page come back as empty lists.
    """
    if params is None:
        raise ValidationError("params is required")
    engine = _engine_for(graph, reverse)
    results: dict[BowtieRole, list[InfluenceSample]] = {}
    for comp in components:
        pool = sorted(
            nid for nid, role in roles.roles.items()
            if role is comp and graph.polarity(nid) is not Polarity.NEUTRAL
        )
        samples: list[InfluenceSample] = []
        if pool:
            pool_idx = np.array([engine.index[nid] for nid in pool], dtype=np.int64)
            for k in range(pieces_per_component):
                rng = derive_rng(params.seed, "component-piece", comp.value, k)
                seed_idx = int(pool_idx[rng.integers(len(pool_idx))])
                recovered = engine.simulate(seed_idx, params.beta, params.gamma, rng)
                w, a = engine.influence(seed_idx, recovered)
                samples.append(InfluenceSample(k, comp, engine.ids[seed_idx], w, a))
        results[comp] = samples
    return results


def build_initialiser(graph: DirectedGraph, roles: BowtieDecomposition,
                      comp_x: BowtieRole, comp_y: BowtieRole,
                      x: float, y: float) -> InitialiserDistribution:
    """P(seed = i) proportional to x / y / 1 by component, zero on neutral pages."""
    ids = tuple(graph.node_ids)
    mass = np.zeros(len(ids))
    for i, nid in enumerate(ids):
        if graph.polarity(nid) is Polarity.NEUTRAL:
            continue
        role = roles.roles[nid]
        mass[i] = x if role is comp_x else y if role is comp_y else 1.0
    total = mass.sum()
    if total <= 0:
        raise ValidationError("initialiser distribution has no eligible page")
    return InitialiserDistribution(ids=ids, probs=mass / total)


def accumulate_influence(graph: DirectedGraph, init: InitialiserDistribution, n_pieces: int,
                         params: SirParams, stream: tuple = (),
                         reverse: bool = True) -> PageInfluence:
    """Simulate n_pieces seeded from `init` and total per-page influences."""
    engine = _engine_for(graph, reverse)
    w_tot = np.zeros(len(init.ids), dtype=np.int64)
    a_tot = np.zeros(len(init.ids), dtype=np.int64)
    eligible = np.flatnonzero(init.probs > 0)
    probs = init.probs[eligible]
    probs = probs / probs.sum()
    for k in range(n_pieces):
        rng = derive_rng(params.seed, "influence-piece", *stream, k)
        seed_idx = int(eligible[rng.choice(len(eligible), p=probs)])
        recovered = engine.simulate(seed_idx, params.beta, params.gamma, rng)
        w, a = engine.influence(seed_idx, recovered)
        w_tot[seed_idx] += w
        a_tot[seed_idx] += a
    return PageInfluence(ids=init.ids, w_influence=w_tot, a_influence=a_tot, pieces=n_pieces)


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float((xc * xc).sum()) * float((yc * yc).sum()))
    if denom == 0.0:
        return float("nan")
    return float((xc * yc).sum() / denom)


@dataclass(frozen=True)
class SweepResult:
    comp_x: BowtieRole
    comp_y: BowtieRole
    multipliers: tuple[float, ...]
    cc: np.ndarray                      # cc[iy, ix]; NaN where undefined
    undefined_cells: tuple[tuple[int, int], ...]
    kind: InfluenceKind
    page_filter: PageFilter


def _filter_pages(graph: DirectedGraph, fan_delta: Mapping[str, int],
                  page_filter: PageFilter) -> list[str]:
    pages = []
    for nid in graph.node_ids:
        if graph.polarity(nid) is Polarity.NEUTRAL or nid not in fan_delta:
            continue
        delta = fan_delta[nid]
        if page_filter is PageFilter.EXPANDING and delta <= 0:
            continue
        if page_filter is PageFilter.NONEXPANDING and delta > 0:
            continue
        pages.append(nid)
    return pages


def _sweep_cell(graph, roles, comp_x, comp_y, x, y, ix, iy, n_pieces, params, kind,
                pages, deltas, reverse):
    init = build_initialiser(graph, roles, comp_x, comp_y, x, y)
    acc = accumulate_influence(graph, init, n_pieces, params, stream=("sweep", ix, iy),
                               reverse=reverse)
    per_page = acc.w_influence if kind is InfluenceKind.WITHIN else acc.a_influence
    idx = {nid: i for i, nid in enumerate(acc.ids)}
    infl = np.array([per_page[idx[nid]] for nid in pages], dtype=np.float64)
    return _pearson(infl, deltas)


def sweep_heatmap(graph: DirectedGraph, roles: BowtieDecomposition,
                  comp_x: BowtieRole, comp_y: BowtieRole,
                  multipliers: Sequence[float] = (0.1, 0.5, 1.0, 2.0, 10.0),
                  n_pieces: int = 3000, params: SirParams = None,
                  fan_delta: Mapping[str, int] = None,
                  page_filter: PageFilter = PageFilter.ALL,
                  kind: InfluenceKind = InfluenceKind.WITHIN,
                  reverse: bool = True,
                  workers: int = 1) -> SweepResult:
    """Correlation between accumulated page influence and fan-count change,
    per (x, y) seeding-multiplier cell.

    Cells whose filter leaves fewer than 3 pages, or where either series has
    zero variance, are reported as undefined (NaN) rather than fabricated.
    """
    if comp_x is comp_y:
        raise ValidationError("comp_x and comp_y must differ")
    if any(m <= 0 for m in multipliers):
        raise ValidationError("multipliers must be positive")
    if params is None or fan_delta is None:
        raise ValidationError("params and fan_delta are required")

    pages = _filter_pages(graph, fan_delta, page_filter)
    deltas = np.array([fan_delta[nid] for nid in pages], dtype=np.float64)
    k = len(multipliers)
    cc = np.full((k, k), np.nan)
    cells = [(ix, iy) for iy in range(k) for ix in range(k)]

    if len(pages) >= 3:
        args = [
            (graph, roles, comp_x, comp_y, multipliers[ix], multipliers[iy], ix, iy,
             n_pieces, params, kind, pages, deltas, reverse)
            for ix, iy in cells
        ]
        if workers > 1:
            from concurrent.futures import ProcessPoolExecutor
            with ProcessPoolExecutor(max_workers=workers) as pool:
                values = list(pool.map(_sweep_cell_star, args))
        else:
            values = [_sweep_cell(*a) for a in args]
        for (ix, iy), value in zip(cells, values):
            cc[iy, ix] = value

    undefined = tuple((ix, iy) for ix, iy in cells if math.isnan(cc[iy, ix]))
    return SweepResult(comp_x=comp_x, comp_y=comp_y, multipliers=tuple(multipliers),
                       cc=cc, undefined_cells=undefined, kind=kind, page_filter=page_filter)


def _sweep_cell_star(args):
    return _sweep_cell(*args)


def write_influence_csv(results: Mapping[BowtieRole, list[InfluenceSample]], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["piece_id", "component", "seed_id", "w_influence", "a_influence"])
        for comp in sorted(results, key=lambda r: r.value):
            for s in results[comp]:
                writer.writerow([s.piece_id, s.component.value, s.seed_id,
                                 s.w_influence, s.a_influence])


def write_heatmap_json(result: SweepResult, path) -> None:
    payload = {
        "comp_x": result.comp_x.value,
        "comp_y": result.comp_y.value,
        "kind": result.kind.value,
        "page_filter": result.page_filter.value,
        "multipliers": list(result.multipliers),
        "cc_matrix": [[None if math.isnan(v) else v for v in row] for row in result.cc],
        "undefined_cells": [list(c) for c in result.undefined_cells],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
