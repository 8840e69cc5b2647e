"""October fan counts for the bundled dataset.

Which pages expand is essentially idiosyncratic (the published classifier
numbers sit at the no-signal operating point), but how much an expanding
page grows tracks its size and the information influence its cascades
achieve. Growth therefore mixes a size-driven term with an across-stance
influence term; shrinkage of non-expanding pages scales with size. The
exponents and noise levels below are calibrated against the published
correlation levels between fan-count change, fan count, and simulated page
influence.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bowtienet.cascade import SirParams, _engine_for  # noqa: E402
from bowtienet.graph import DirectedGraph, PageNode, Polarity, SnapshotLabel  # noqa: E402
from bowtienet.rng import derive_rng  # noqa: E402

from make_dataset import MASTER_SEED, N_EXPANDING  # noqa: E402

REF_PIECES = 24
REF_BETA, REF_GAMMA = 0.5, 0.3

# growth composition for expanding pages (log-space exponents)
SIZE_EXP = 0.85          # fan-count term f^SIZE_EXP
ACROSS_EXP = 0.9        # across-influence term (1+EA)^ACROSS_EXP
WITHIN_DAMP = 0.3       # ... damped by (1+EW)^-WITHIN_DAMP
NOISE_SD = 0.3          # lognormal noise on both terms
INFLUENCE_MIX = 0.9     # weight of the influence term vs the size term
GROWTH_SCALE = 2500.0   # overall growth magnitude (fans)

# shrinkage model for non-expanding pages
SHRINK_EXP = 0.5
SHRINK_NOISE = 1.7
SHRINK_SCALE = 8.0
ZERO_SHARE = 0.12


def build_feb_graph(state, feb_edges, feb_fans) -> DirectedGraph:
    snap = SnapshotLabel("feb2019", 0)
    nodes = [
        PageNode(nid, Polarity(state["polarity"][nid]), {"feb2019": feb_fans[nid]})
        for nid in state["ids"]
    ]
    adjacency: dict[str, dict[str, int]] = {}
    for u, v in feb_edges:
        adjacency.setdefault(u, {})[v] = feb_fans[u] * feb_fans[v]
    return DirectedGraph(nodes, adjacency, snap)


def reference_influence(graph: DirectedGraph):
    """Mean within/across influence of pieces seeded at each anti/pro page."""
    engine = _engine_for(graph, reverse=True)
    params = SirParams(beta=REF_BETA, gamma=REF_GAMMA, seed=MASTER_SEED)
    ew, ea = {}, {}
    for nid in graph.node_ids:
        if graph.polarity(nid) is Polarity.NEUTRAL:
            continue
        idx = engine.index[nid]
        w_acc = a_acc = 0
        for k in range(REF_PIECES):
            rng = derive_rng(MASTER_SEED, "ref-influence", nid, k)
            recovered = engine.simulate(idx, params.beta, params.gamma, rng)
            w, a = engine.influence(idx, recovered)
            w_acc += w
            a_acc += a
        ew[nid] = w_acc / REF_PIECES
        ea[nid] = a_acc / REF_PIECES
    return ew, ea


def assign_october_fans(state, feb_edges, feb_fans) -> dict[str, int]:
    graph = build_feb_graph(state, feb_edges, feb_fans)
    ew, ea = reference_influence(graph)
    rng = derive_rng(MASTER_SEED, "october-fans")

    pages = sorted(ew)  # all anti/pro ids
    f = np.array([feb_fans[nid] for nid in pages], dtype=float)
    log_f = np.log1p(f)
    log_a = np.log1p(np.array([ea[nid] for nid in pages]))
    log_w = np.log1p(np.array([ew[nid] for nid in pages]))

    expanding_idx = set(rng.choice(len(pages), size=N_EXPANDING, replace=False).tolist())

    size_term = np.exp(SIZE_EXP * log_f + NOISE_SD * rng.normal(size=len(pages)))
    size_term /= size_term.mean()
    infl_term = np.exp(ACROSS_EXP * log_a - WITHIN_DAMP * log_w
                       + NOISE_SD * rng.normal(size=len(pages)))
    infl_term /= infl_term.mean()
    growth = GROWTH_SCALE * ((1 - INFLUENCE_MIX) * size_term + INFLUENCE_MIX * infl_term)

    oct_fans: dict[str, int] = {}
    for i, nid in enumerate(pages):
        fi = f[i]
        if i in expanding_idx:
            delta = max(1, int(round(growth[i])))
        else:
            if rng.random() < ZERO_SHARE:
                delta = 0
            else:
                drop = SHRINK_SCALE * (fi + 50.0) ** SHRINK_EXP * np.exp(
                    SHRINK_NOISE * rng.normal())
                delta = -min(int(round(drop)), max(int(fi) - 1, 0))
        new = int(fi) + delta
        if state["polarity"][nid] == "r":
            new = min(new, 990_000)  # anti pages stay below a million fans
        oct_fans[nid] = max(new, 0)

    # neutral pages drift mildly; six of them lose their fan base entirely
    neutral = [nid for nid in state["ids"] if state["polarity"][nid] == "g"]
    zero_candidates = [nid for nid in state["groups"]["pairs"][4:] if feb_fans[nid] > 0]
    goes_dark = set(zero_candidates[:6])
    for nid in neutral:
        fi = feb_fans[nid]
        if nid in goes_dark or fi == 0:
            oct_fans[nid] = 0
        else:
            drift = rng.normal(0.05, 0.25)
            oct_fans[nid] = max(1, int(round(fi * (1.0 + drift))))
    return oct_fans
