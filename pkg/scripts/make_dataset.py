#!/usr/bin/env python3
"""Generate the bundled recommendation-network dataset.

Produces data/nodes.csv, data/edges_feb2019.csv and data/edges_oct2019.csv:
two cumulative snapshots of a 1326-page recommendation network (317 anti,
124 pro, 885 neutral) whose aggregate statistics match the published
figures this toolkit targets: 5163 / 7484 edges, 8.5% / 10.2% two-way
recommendation shares, <0.2% self-recommendations, 4 / 10 zero-fan pages,
73.0% expanding anti+pro pages, a pro group dominated by a reciprocated
strongly connected core, an anti group dominated by downstream (OUT) pages,
a neutral group dominated by detached structure (OTHERS), and an
across-group community landscape of a few large mixed communities plus a
long tail of small ones.

Communities are built as flow traps: recommendation chains inside each one
cycle back through its neutral members, so a weighted random walk stays
inside. Anti-to-anti edges remain feed-forward (core to periphery), which
is what keeps the anti group's within-stance decomposition OUT-dominated.

Everything derives from one fixed master seed; the files are reproducible
byte for byte.
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from bowtienet.rng import derive_rng  # noqa: E402

MASTER_SEED = 74_2019

N_ANTI, N_PRO, N_NEUTRAL = 317, 124, 885
N_TOTAL = N_ANTI + N_PRO + N_NEUTRAL

FEB_EDGES = 5163
OCT_EDGES = 7484
FEB_MUTUAL_PAIRS = 220      # 440/5163 = 8.52% two-way share
OCT_MUTUAL_PAIRS = 382      # 764/7484 = 10.21%
FEB_SELF_LOOPS = 6
OCT_SELF_LOOPS = 10
N_EXPANDING = 322           # of 441 anti+pro pages = 73.02%


class Builder:
    """Edge bookkeeping with exact mutual-pair and self-loop accounting."""

    def __init__(self):
        self.edges: set[tuple[str, str]] = set()
        self.mutual_pairs = 0
        self.self_loops = 0

    def add(self, u, v):
        if (u, v) in self.edges:
            return False
        if u == v:
            self.self_loops += 1
        elif (v, u) in self.edges:
            self.mutual_pairs += 1
        self.edges.add((u, v))
        return True

    def add_oneway(self, u, v):
        """Add only if it creates neither a loop nor a reciprocation."""
        if u == v or (v, u) in self.edges or (u, v) in self.edges:
            return False
        return self.add(u, v)

    def add_pair(self, u, v):
        if u == v or (u, v) in self.edges or (v, u) in self.edges:
            return False
        self.add(u, v)
        self.add(v, u)
        return True

    def __len__(self):
        return len(self.edges)


def ring(builder, nodes):
    for i, u in enumerate(nodes):
        builder.add(u, nodes[(i + 1) % len(nodes)])


def scc_cluster(builder, rng, nodes, extra_chords=0, recip_pairs=0):
    """Strongly connected cluster: ring + random chords + reciprocated pairs."""
    ring(builder, nodes)
    n = len(nodes)
    added = 0
    while added < extra_chords:
        u, v = rng.choice(n, size=2, replace=False)
        if builder.add_oneway(nodes[u], nodes[v]):
            added += 1
    added = 0
    while added < recip_pairs:
        u, v = rng.choice(n, size=2, replace=False)
        if builder.add_pair(nodes[u], nodes[v]):
            added += 1


def attach_downstream(builder, rng, sources, layer, per_node):
    """Give every layer node `per_node` in-edges from random sources."""
    for v in layer:
        added = 0
        for _ in range(20 * per_node):
            if added >= min(per_node, len(sources)):
                break
            if builder.add_oneway(sources[int(rng.integers(len(sources)))], v):
                added += 1


def attach_upstream(builder, rng, layer, targets, per_node):
    for u in layer:
        added = 0
        for _ in range(20 * per_node):
            if added >= min(per_node, len(targets)):
                break
            if builder.add_oneway(u, targets[int(rng.integers(len(targets)))]):
                added += 1


def build_structure():
    """Lay out pages, communities and the February edge skeleton."""
    rng = derive_rng(MASTER_SEED, "structure")

    # --- page ids: global numbering, polarity interleaved ----------------
    polarity = np.array(["r"] * N_ANTI + ["b"] * N_PRO + ["g"] * N_NEUTRAL)
    rng.shuffle(polarity)
    ids = []
    for k, pol in enumerate(polarity, start=1):
        prefix = {"r": "a", "b": "p", "g": "n"}[pol]
        ids.append(f"{prefix}_{k:05d}")
    ids = np.array(ids)
    anti = list(ids[polarity == "r"])
    pro = list(ids[polarity == "b"])
    neutral = list(ids[polarity == "g"])

    groups: dict[str, list[str]] = {}

    def take(pool, n, name):
        part = pool[:n]
        del pool[:n]
        groups[name] = part
        return part

    # --- anti pages: core, pod periphery, relay periphery, listeners -----
    a_core = take(anti, 18, "a_core")
    a_pod_members = take(anti, 144, "a_pod_members")   # 6 rich pods x 24
    a_quiet = take(anti, 88, "a_quiet")                # 4 quiet pods x 22
    a_in = take(anti, 25, "a_in")
    a_rest = take(anti, len(anti), "a_rest")           # 42 pages in blobs
    n_c1 = take(neutral, 60, "n_c1")
    quiet_n = take(neutral, 40, "quiet_n")             # 4 quiet pods x 10

    # --- pro pages: nucleus+rim core, pods, listeners ---------------------
    p_core = take(pro, 70, "p_core")
    p_out = take(pro, 30, "p_out")
    p_in = take(pro, 24, "p_in")
    n_c2 = take(neutral, 60, "n_c2")

    # --- neutral-only communities and detached texture --------------------
    c3 = take(neutral, 110, "c3")
    c4 = take(neutral, 85, "c4")
    c5 = take(neutral, 70, "c5")
    n0 = take(neutral, 14, "n0")
    dag_nodes = take(neutral, 96, "dag")               # 8 branching fragments
    pair_nodes = take(neutral, 22, "pairs")            # 11 two-page fragments
    blob_neutral = take(neutral, len(neutral), "blob_neutral")  # 342 pages

    b = Builder()

    # anti community: feed-forward among anti pages; information circulates
    # only through neutral audience pages, organized as pods
    scc_cluster(b, rng, a_core, extra_chords=60, recip_pairs=16)
    attach_upstream(b, rng, a_in, a_core, per_node=3)

    def make_pod(tag, members_a, members_n, n_cyclers, n_speakers):
        cyclers = members_a[:n_cyclers]
        speakers = members_a[n_cyclers:n_cyclers + n_speakers]
        sinks = members_a[n_cyclers + n_speakers:]
        attach_downstream(b, rng, a_core, cyclers, per_node=1)
        attach_downstream(b, rng, a_core, sinks, per_node=1)
        attach_upstream(b, rng, cyclers, members_n, per_node=2)
        attach_downstream(b, rng, members_n, cyclers, per_node=2)
        attach_upstream(b, rng, speakers, members_n, per_node=2)
        attach_downstream(b, rng, members_n, sinks, per_node=5)
        pod = {"anti": members_a, "neutral": members_n, "cyclers": cyclers,
               "speakers": speakers, "sinks": sinks}
        groups[tag] = members_a + members_n
        return pod

    a_pods = []
    for k in range(6):
        a_pods.append(make_pod(f"apod{k}", a_pod_members[k * 24:(k + 1) * 24],
                               n_c1[k * 10:(k + 1) * 10], 15, 5))
    # quiet pods: the same circulation pattern around a small, low-profile
    # audience, holding mostly downstream pages; cascades seeded here reach
    # only that audience's modest fan mass
    quiet_pods = []
    for k in range(4):
        quiet_pods.append(make_pod(f"qpod{k}", a_quiet[k * 22:(k + 1) * 22],
                                   quiet_n[k * 10:(k + 1) * 10], 8, 0))
    a_pods_all = a_pods + quiet_pods

    # pro community: dense reciprocated nucleus plus a rim of pages tied in
    # by a single recommendation each way; the rim keeps the observed core
    # strongly connected while degree-preserving rewires usually strand a
    # few rim pages, which is what the significance rank picks up
    p_nucleus = p_core[:40]
    p_rim = p_core[40:]
    groups["p_nucleus"] = p_nucleus
    groups["p_rim"] = p_rim
    scc_cluster(b, rng, p_nucleus, extra_chords=50, recip_pairs=55)
    for mega in p_nucleus[:3]:
        picks = rng.choice(len(p_nucleus) - 3, size=12, replace=False)
        for j in picks:
            b.add_oneway(mega, p_nucleus[3 + int(j)])
    for i, u in enumerate(p_rim):
        host = (7 * i) % len(p_nucleus)
        b.add_oneway(p_nucleus[host], u)
        b.add_oneway(p_nucleus[(host + 1) % len(p_nucleus)], u)
        b.add_oneway(u, p_nucleus[(host + 3) % len(p_nucleus)])
    attach_downstream(b, rng, p_nucleus, p_out, per_node=1)
    attach_upstream(b, rng, p_in, p_nucleus, per_node=2)
    # the nucleus has its own neutral audience
    for i, v in enumerate(n_c2[:15]):
        b.add_pair(v, p_nucleus[(3 * i + 1) % len(p_nucleus)])

    p_pods = []
    for k in range(2):
        members_p = p_out[k * 15:(k + 1) * 15]
        members_n = n_c2[k * 30:(k + 1) * 30]
        cyclers, speakers, sinks = members_p[:6], members_p[6:10], members_p[10:]
        attach_upstream(b, rng, cyclers, members_n, per_node=2)
        attach_downstream(b, rng, members_n, cyclers, per_node=2)
        attach_upstream(b, rng, speakers, members_n, per_node=2)
        attach_downstream(b, rng, members_n, sinks, per_node=5)
        p_pods.append({"pro": members_p, "neutral": members_n, "cyclers": cyclers,
                       "speakers": speakers, "sinks": sinks})
        groups[f"ppod{k}"] = members_p + members_n

    # neutral communities: core + downstream layer that cycles back
    for name, nodes, core_n, recip, out_n in (
        ("c3", c3, 20, 8, 75), ("c4", c4, 16, 6, 60), ("c5", c5, 12, 4, 50),
    ):
        core = nodes[:core_n]
        out_layer = nodes[core_n:core_n + out_n]
        loose = nodes[core_n + out_n:]
        scc_cluster(b, rng, core, extra_chords=core_n // 2, recip_pairs=recip)
        attach_downstream(b, rng, core, out_layer, per_node=2)
        attach_upstream(b, rng, out_layer, core, per_node=1)
        for i in range(0, len(loose) - 1, 2):
            b.add_oneway(loose[i], loose[i + 1])
        groups[f"{name}_loose"] = loose

    # pod speakers: a within-stance listener recommends them, anchoring
    # their flow without opening a cascade path into any pod
    for k, pod in enumerate(a_pods):
        for i, u in enumerate(pod["speakers"]):
            b.add_oneway(a_in[(k * 5 + i) % len(a_in)], u)
    for k, pod in enumerate(p_pods):
        for i, u in enumerate(pod["speakers"]):
            b.add_oneway(p_in[(k * 4 + i) % len(p_in)], u)

    # within-stance listeners: recommend their community's core; dead-end
    # fragment pages also recommend them, so their walk-flow is anchored
    for i, u in enumerate(a_in):
        b.add_oneway(pair_nodes[2 * (i % 11)], u)
    for i, u in enumerate(p_in):
        b.add_oneway(pair_nodes[2 * (i % 11)], u)

    # detached reciprocal neutral cluster
    scc_cluster(b, rng, n0, extra_chords=4, recip_pairs=10)

    # branching acyclic fragments
    for f in range(8):
        frag = dag_nodes[f * 12:(f + 1) * 12]
        for i, u in enumerate(frag[:-1]):
            b.add_oneway(u, frag[i + 1])
            if i + 3 < len(frag):
                b.add_oneway(u, frag[i + 3])

    # two-page fragments
    for i in range(0, len(pair_nodes), 2):
        b.add_oneway(pair_nodes[i], pair_nodes[i + 1])

    # small single-polarity blobs: cycles with one extra chord
    def blobs(pool, size, name, closed=True):
        out = []
        k = 0
        while pool:
            blob = pool[:size] if len(pool) >= size + 3 else pool[:]
            del pool[:len(blob)]
            if closed:
                ring(b, blob)
            else:
                for i in range(len(blob) - 1):
                    b.add_oneway(blob[i], blob[i + 1])
            if len(blob) > 3:
                b.add_oneway(blob[0], blob[2])
            out.append(blob)
            groups[f"{name}{k}"] = blob
            k += 1
        return out

    anti_blobs = blobs(a_rest, 4, "ablob", closed=False)
    neutral_blobs = blobs(blob_neutral, 12, "nblob")

    # faint anti-pro contact in the first snapshot
    all_a_out = a_pod_members + a_quiet
    for u, v in zip(rng.choice(all_a_out, 3, replace=False), rng.choice(p_out, 3, replace=False)):
        b.add_oneway(u, v)
    for u, v in zip(rng.choice(p_nucleus, 2, replace=False), rng.choice(all_a_out, 2, replace=False)):
        b.add_oneway(u, v)

    # self-recommendations
    for u in rng.choice(all_a_out, 2, replace=False):
        b.add(u, u)
    for u in rng.choice(c3, 2, replace=False):
        b.add(u, u)
    b.add(p_nucleus[5], p_nucleus[5])
    b.add(n0[3], n0[3])

    groups["a_out"] = all_a_out
    return {
        "ids": list(ids), "polarity": dict(zip(ids, polarity)),
        "builder": b, "groups": groups, "a_pods": a_pods, "p_pods": p_pods,
        "quiet_pods": quiet_pods,
        "anti": list(ids[polarity == "r"]), "pro": list(ids[polarity == "b"]),
        "neutral": list(ids[polarity == "g"]),
        "anti_blobs": anti_blobs, "neutral_blobs": neutral_blobs,
    }


def top_up_february(state):
    """Fill to the exact February edge / mutual-pair / self-loop budget.

    Densification stays inside the planted communities (that is where real
    recommendation activity concentrates), with a thin inter-community
    spray. Anti-to-anti additions only ever point from the core to the
    downstream layer, keeping the within-stance decomposition intact.
    """
    b: Builder = state["builder"]
    g = state["groups"]
    rng = derive_rng(MASTER_SEED, "feb-fill")

    recip_hosts = (
        [(g["a_core"], g["a_core"])] * 2
        + [(g["p_nucleus"], g["p_nucleus"])] * 4
        + [(g["c3"][:20], g["c3"][:20]), (g["c4"][:16], g["c4"][:16])]
        + [(pod["cyclers"], pod["neutral"]) for pod in state["a_pods"]]
        + [(pod["cyclers"], pod["neutral"]) for pod in state["p_pods"]]
        + [(g["p_nucleus"], g["n_c2"][:15]), (g["n0"], g["n0"])]
    )
    guard = 0
    while b.mutual_pairs < FEB_MUTUAL_PAIRS:
        guard += 1
        assert guard < 100_000, "mutual-pair budget unreachable"
        side_a, side_b = recip_hosts[int(rng.integers(len(recip_hosts)))]
        u = side_a[int(rng.integers(len(side_a)))]
        v = side_b[int(rng.integers(len(side_b)))]
        b.add_pair(u, v)

    lanes = []
    for pod in state["a_pods"] + state["quiet_pods"]:  # anti pod traffic
        lanes.append((pod["cyclers"], pod["neutral"], 10))
        lanes.append((pod["neutral"], pod["cyclers"], 8))
        lanes.append((pod["speakers"], pod["neutral"], 3))
        lanes.append((pod["neutral"], pod["sinks"], 3))
    for pod in state["p_pods"]:                       # pro pod traffic
        lanes.append((pod["cyclers"], pod["neutral"], 5))
        lanes.append((pod["neutral"], pod["cyclers"], 4))
        lanes.append((pod["speakers"], pod["neutral"], 2))
        lanes.append((pod["neutral"], pod["sinks"], 2))
    lanes += [
        (g["c3"][:95], g["c3"], 26),                  # neutral communities
        (g["c4"][:76], g["c4"], 17),
        (g["c5"][:62], g["c5"], 11),
        (g["a_out"], g["c3"] + g["c4"], 5),           # one-sided outward spray
        (g["p_out"], g["c5"], 2),
    ]
    lanes = [lane for lane in lanes if lane[0] and lane[1]]
    lane_weights = np.array([w for *_x, w in lanes], dtype=float)
    lane_weights /= lane_weights.sum()
    guard = 0
    while len(b) < FEB_EDGES:
        guard += 1
        assert guard < 600_000, "edge budget unreachable"
        lane = lanes[int(rng.choice(len(lanes), p=lane_weights))]
        src_ = lane[0][int(rng.integers(len(lane[0])))]
        dst_ = lane[1][int(rng.integers(len(lane[1])))]
        b.add_oneway(src_, dst_)

    assert len(b) == FEB_EDGES
    assert b.mutual_pairs == FEB_MUTUAL_PAIRS, b.mutual_pairs
    assert b.self_loops == FEB_SELF_LOOPS
    return sorted(b.edges)


def draw_fans(state):
    """February fan counts.

    Fans follow structural role: community cores are the high-fan hubs
    (which is also what keeps the weighted random walk circulating inside
    them), peripheries and detached fragments are small. Three pro pages
    exceed a million fans; no anti page does. Four pages have none.
    """
    rng = derive_rng(MASTER_SEED, "fans")
    g = state["groups"]
    fans: dict[str, int] = {}

    def draw(members, mu, sigma, cap):
        for nid in members:
            fans[nid] = int(min(rng.lognormal(mu, sigma), cap)) + 1

    draw(g["a_core"], 9.9, 0.5, 790_000)
    draw(g["a_pod_members"], 7.9, 0.7, 790_000)
    draw(g["a_quiet"], 7.9, 0.7, 790_000)
    draw(g["a_in"], 7.3, 0.6, 790_000)
    draw(g["p_core"], 10.0, 0.5, 850_000)
    draw(g["p_out"], 8.0, 0.7, 850_000)
    draw(g["p_in"], 7.3, 0.6, 850_000)
    draw(g["n_c1"], 8.6, 0.6, 600_000)
    draw(g["n_c2"], 8.6, 0.6, 600_000)
    draw(g["quiet_n"], 7.6, 0.4, 600_000)
    for name, core_n in (("c3", 20), ("c4", 16), ("c5", 12)):
        draw(g[name][:core_n], 9.9, 0.6, 2_400_000)
        draw(g[name][core_n:], 8.4, 0.7, 600_000)
    draw(g["n0"], 8.5, 0.8, 600_000)
    draw(g["dag"], 7.6, 0.8, 200_000)
    draw(g["pairs"], 7.3, 0.6, 200_000)
    for key, members in g.items():
        if key.startswith("ablob"):
            draw(members, 7.4, 0.7, 400_000)
        elif key.startswith("nblob") or key == "leftover":
            draw(members, 7.4, 0.7, 400_000)
    for nid, mega in zip(g["p_core"][:3], (1_250_000, 1_680_000, 2_150_000)):
        fans[nid] = mega
    # four pages without fans in February
    for nid in g["pairs"][:4]:
        fans[nid] = 0
    assert set(fans) == set(state["ids"])
    return fans


def grow_october(state, feb_edges):
    """October = February plus densification; exact counts enforced."""
    b = Builder()
    for u, v in feb_edges:
        b.add(u, v)
    g = state["groups"]
    rng = derive_rng(MASTER_SEED, "oct-fill")

    # anti-pro interaction picks up sharply
    ap_lanes = [
        (g["a_core"] + g["a_out"], g["p_nucleus"] + g["p_out"]),
        (g["p_nucleus"], g["a_core"] + g["a_out"]),
    ]
    added = 0
    while added < 150:
        lane = ap_lanes[int(rng.integers(2))]
        u = lane[0][int(rng.integers(len(lane[0])))]
        v = lane[1][int(rng.integers(len(lane[1])))]
        if b.add_oneway(u, v):
            added += 1

    hosts = (
        [(g["p_nucleus"], g["p_nucleus"])] * 3
        + [(g["a_core"], g["a_core"])]
        + [(pod["cyclers"], pod["neutral"]) for pod in state["a_pods"]]
        + [(pod["cyclers"], pod["neutral"]) for pod in state["p_pods"]]
        + [(g["c3"][:20], g["c3"][:20]), (g["c5"][:12], g["c5"][:12])]
        + [(g["a_core"], g["p_nucleus"])]
    )
    guard = 0
    while b.mutual_pairs < OCT_MUTUAL_PAIRS:
        guard += 1
        assert guard < 100_000
        side_a, side_b = hosts[int(rng.integers(len(hosts)))]
        u = side_a[int(rng.integers(len(side_a)))]
        v = side_b[int(rng.integers(len(side_b)))]
        b.add_pair(u, v)

    for u in (g["a_out"][7], g["c4"][0], g["p_nucleus"][9], g["n0"][5]):
        b.add(u, u)

    # role churn between the snapshots: some pro periphery pages join the
    # reciprocated core, and parts of the detached neutral texture get
    # referenced by the big neutral community's core
    churned = 0
    for i, u in enumerate(g["p_out"]):
        if churned >= 12:
            break
        if b.add_oneway(u, g["p_nucleus"][(3 * i + 5) % len(g["p_nucleus"])]):
            churned += 1
    texture = g["dag"] + g["pairs"] + g["nblob0"] + g["nblob1"] + g["nblob2"]
    for i, v in enumerate(texture[:115]):
        b.add_oneway(g["c3"][i % 20], v)

    lanes = [
        (g["a_core"], g["a_out"], 5),
        (g["c3"][:95], g["c3"], 5),
        (g["c4"][:76], g["c4"], 3),
        (g["c5"][:62], g["c5"], 2),
        (g["a_out"], g["c3"] + g["c4"], 3),
        (g["dag"], g["dag"], 1),
    ]
    for pod in state["a_pods"] + state["quiet_pods"]:
        lanes.append((pod["cyclers"], pod["neutral"], 3))
        lanes.append((pod["neutral"], pod["anti"], 2))
    for pod in state["p_pods"]:
        lanes.append((pod["cyclers"], pod["neutral"], 2))
        lanes.append((pod["neutral"], pod["pro"], 1))
    lanes = [lane for lane in lanes if lane[0] and lane[1]]
    lane_weights = np.array([w for *_x, w in lanes], dtype=float)
    lane_weights /= lane_weights.sum()
    guard = 0
    while len(b) < OCT_EDGES:
        guard += 1
        assert guard < 800_000
        lane = lanes[int(rng.choice(len(lanes), p=lane_weights))]
        src_ = lane[0][int(rng.integers(len(lane[0])))]
        dst_ = lane[1][int(rng.integers(len(lane[1])))]
        b.add_oneway(src_, dst_)

    assert len(b) == OCT_EDGES
    assert b.mutual_pairs == OCT_MUTUAL_PAIRS
    assert b.self_loops == OCT_SELF_LOOPS
    return sorted(b.edges)


def write_dataset(out_dir: Path, ids, polarity, feb_fans, oct_fans, feb_edges, oct_edges):
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "nodes.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "polarity", "fans_feb2019", "fans_oct2019"])
        for nid in sorted(ids):
            w.writerow([nid, polarity[nid], feb_fans[nid], oct_fans[nid]])
    for name, edges in (("edges_feb2019.csv", feb_edges), ("edges_oct2019.csv", oct_edges)):
        with open(out_dir / name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["source_id", "target_id"])
            w.writerows(edges)


def main():
    from fan_dynamics import assign_october_fans  # sibling module

    state = build_structure()
    feb_edges = top_up_february(state)
    feb_fans = draw_fans(state)
    oct_edges = grow_october(state, feb_edges)
    oct_fans = assign_october_fans(state, feb_edges, feb_fans)
    out = Path(__file__).resolve().parent.parent / "data"
    write_dataset(out, state["ids"], state["polarity"], feb_fans, oct_fans,
                  feb_edges, oct_edges)
    print(f"wrote {out}/nodes.csv with {len(state['ids'])} pages, "
          f"{len(feb_edges)} Feb edges, {len(oct_edges)} Oct edges")


if __name__ == "__main__":
    main()
