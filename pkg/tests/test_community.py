import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bowtienet.community import (
    UNASSIGNED,
    Partition,
    Provenance,
    collapse_small,
    detect_communities,
    map_equation_codelength,
    partition_agreement,
    polarity_partition,
    read_partition_csv,
    stationary_flow,
    write_partition_csv,
)
from bowtienet.graph import DirectedGraph, PageNode, Polarity, ValidationError

from conftest import SNAP, make_graph, random_graph
from oracles import solve_flow


def weighted(edges_with_weights, node_ids=None):
    """Graph with explicit edge weights (bypasses the product kernel)."""
    ids = set(node_ids or [])
    for u, v, _ in edges_with_weights:
        ids.add(u)
        ids.add(v)
    nodes = [PageNode(nid, Polarity.ANTI, {SNAP.name: 1}) for nid in sorted(ids)]
    adjacency: dict[str, dict[str, int]] = {}
    for u, v, w in edges_with_weights:
        adjacency.setdefault(u, {})[v] = w
    return DirectedGraph(nodes, adjacency, SNAP)


def trivial_partition(graph, label="1"):
    return Partition({nid: label for nid in graph.node_ids}, Provenance.EXTERNAL)


def singleton_partition(graph):
    return Partition({nid: nid for nid in graph.node_ids}, Provenance.EXTERNAL)


class TestStationaryFlow:
    def test_symmetric_two_cycle(self):
        g = make_graph([("a", "b"), ("b", "a")])
        flow = stationary_flow(g)
        assert flow.probs == pytest.approx([0.5, 0.5], abs=1e-9)

    def test_single_self_loop(self):
        g = make_graph([("a", "a")])
        flow = stationary_flow(g)
        assert flow.probs == pytest.approx([1.0], abs=1e-12)

    def test_matches_dense_solve(self):
        g = weighted([
            ("a", "b", 3), ("b", "c", 2), ("c", "a", 5), ("c", "d", 1),
            ("d", "e", 4), ("e", "a", 2),
        ])
        flow = stationary_flow(g, damping=0.85, tol=1e-12)
        expected = solve_flow(g, damping=0.85)
        for nid, p in flow.as_dict().items():
            assert p == pytest.approx(expected[nid], abs=1e-8)

    def test_dangling_nodes_match_solve(self, rng):
        g = random_graph(rng, 12, 0.12)  # sparse enough to leave dangling nodes
        flow = stationary_flow(g, tol=1e-12)
        expected = solve_flow(g, damping=0.85)
        for nid, p in flow.as_dict().items():
            assert p == pytest.approx(expected[nid], abs=1e-8)

    def test_zero_weight_edges_carry_no_flow(self):
        with_zero = weighted([("a", "b", 5), ("b", "a", 5), ("a", "c", 0)])
        without = weighted([("a", "b", 5), ("b", "a", 5)], node_ids=["c"])
        f1 = stationary_flow(with_zero, tol=1e-12)
        f2 = stationary_flow(without, tol=1e-12)
        assert f1.probs == pytest.approx(f2.probs, abs=1e-12)

    def test_distribution_properties(self, rng):
        g = random_graph(rng, 30, 0.1)
        flow = stationary_flow(g)
        assert float(flow.probs.sum()) == pytest.approx(1.0, abs=1e-9)
        assert (flow.probs >= 0).all()

    def test_bad_damping(self):
        g = make_graph([("a", "b")])
        with pytest.raises(ValidationError):
            stationary_flow(g, damping=1.5)


class TestMapEquation:
    def test_one_module_equals_visit_entropy(self, rng):
        g = random_graph(rng, 10, 0.25)
        flow = stationary_flow(g, tol=1e-12)
        L = map_equation_codelength(g, trivial_partition(g), flow)
        entropy = -sum(p * np.log2(p) for p in flow.probs if p > 0)
        assert L == pytest.approx(entropy, abs=1e-9)

    def test_singletons_worse_on_two_cycle(self):
        g = make_graph([("a", "b"), ("b", "a")])
        flow = stationary_flow(g, tol=1e-12)
        L1 = map_equation_codelength(g, trivial_partition(g), flow)
        L2 = map_equation_codelength(g, singleton_partition(g), flow)
        assert L2 > L1

    def test_two_blocks_beat_one_module(self):
        edges = []
        for block, names in enumerate((list("abcde"), list("fghij"))):
            for i, u in enumerate(names):
                for j, v in enumerate(names):
                    if i != j:
                        edges.append((u, v, 10))
        g = weighted(edges)
        flow = stationary_flow(g, tol=1e-12)
        two = Partition(
            {nid: ("L" if nid in "abcde" else "R") for nid in g.node_ids},
            Provenance.EXTERNAL,
        )
        L2 = map_equation_codelength(g, two, flow)
        L1 = map_equation_codelength(g, trivial_partition(g), flow)
        assert L2 < L1

    def test_partition_must_cover(self, rng):
        g = random_graph(rng, 6, 0.3)
        flow = stationary_flow(g)
        bad = Partition({g.node_ids[0]: "x"}, Provenance.EXTERNAL)
        with pytest.raises(ValidationError):
            map_equation_codelength(g, bad, flow)


def two_blob_graph(weak=1, strong=50):
    """Two strongly connected 6-node blobs joined by one weak edge."""
    edges = []
    for prefix in ("a", "b"):
        names = [f"{prefix}{i}" for i in range(6)]
        for i in range(6):
            edges.append((names[i], names[(i + 1) % 6], strong))
            edges.append((names[i], names[(i + 2) % 6], strong))
    edges.append(("a0", "b0", weak))
    edges.append(("b3", "a3", weak))
    return weighted(edges)


class TestDetectCommunities:
    def test_planted_two_blobs(self):
        g = two_blob_graph()
        part = detect_communities(g, trials=5, seed=7)
        labels = {nid: part.assignment[nid] for nid in g.node_ids}
        blob_a = {labels[f"a{i}"] for i in range(6)}
        blob_b = {labels[f"b{i}"] for i in range(6)}
        assert len(blob_a) == 1 and len(blob_b) == 1
        assert blob_a != blob_b
        assert part.n_parts == 2

    def test_never_worse_than_baselines(self):
        ring = make_graph([(f"n{i:02d}", f"n{(i + 1) % 30:02d}") for i in range(30)])
        flow = stationary_flow(ring, tol=1e-12)
        part = detect_communities(ring, trials=3, seed=1)
        L = map_equation_codelength(ring, part, flow)
        L_singletons = map_equation_codelength(ring, singleton_partition(ring), flow)
        L_one = map_equation_codelength(ring, trivial_partition(ring), flow)
        assert L <= L_singletons + 1e-9
        assert L <= L_one + 1e-9

    def test_deterministic_given_seed(self):
        g = two_blob_graph()
        p1 = detect_communities(g, trials=4, seed=42)
        p2 = detect_communities(g, trials=4, seed=42)
        assert p1.assignment == p2.assignment

    def test_labels_are_size_ranked(self):
        g = two_blob_graph()
        extra = make_graph([], node_ids=["z1"])
        # attach an isolated node: own community, ranked after the blobs
        nodes = [g.node(nid) for nid in g.node_ids] + [extra.node("z1")]
        merged = DirectedGraph(
            nodes, {u: dict(g.successors(u)) for u in g.node_ids}, SNAP)
        part = detect_communities(merged, trials=3, seed=3)
        sizes = {label: len(m) for label, m in part.parts().items()}
        assert sizes[part.assignment["z1"]] == 1
        ranked = sorted(sizes.items(), key=lambda kv: int(kv[0]))
        assert [s for _, s in ranked] == sorted(sizes.values(), reverse=True)

    def test_trials_validated(self):
        g = make_graph([("a", "b")])
        with pytest.raises(ValidationError):
            detect_communities(g, trials=0, seed=1)


class TestCollapseSmall:
    def test_identity_when_all_large(self):
        part = Partition({f"n{i}": "A" if i < 5 else "B" for i in range(10)},
                         Provenance.DETECTED)
        assert collapse_small(part, 5).assignment == part.assignment

    def test_threshold_edge(self):
        part = Partition({"a": "A", "b": "A", "c": "A", "d": "A"}, Provenance.DETECTED)
        collapsed = collapse_small(part, 5)
        assert set(collapsed.assignment.values()) == {UNASSIGNED}

    def test_mixed_sizes(self):
        assignment = {}
        for label, size in (("A", 6), ("B", 5), ("C", 4), ("D", 1)):
            for i in range(size):
                assignment[f"{label}{i}"] = label
        collapsed = collapse_small(Partition(assignment, Provenance.DETECTED), 5)
        relabeled = [nid for nid, lab in collapsed.assignment.items() if lab == UNASSIGNED]
        assert len(relabeled) == 5
        assert collapsed.assignment["A0"] == "A"

    @given(st.dictionaries(st.text(min_size=1, max_size=3), st.sampled_from("ABCDE"),
                           min_size=1, max_size=30))
    @settings(max_examples=30, deadline=None)
    def test_idempotent(self, assignment):
        part = Partition(assignment, Provenance.DETECTED)
        once = collapse_small(part, 3)
        twice = collapse_small(once, 3)
        assert once.assignment == twice.assignment


class TestPartitionAgreement:
    def test_identical_runs_give_blocks(self):
        p = Partition({"a": "1", "b": "1", "c": "2"}, Provenance.DETECTED)
        ids, mat = partition_agreement([p, p, p])
        assert ids == ("a", "b", "c")
        assert mat[0, 1] == 1.0 and mat[0, 2] == 0.0
        assert np.allclose(np.diag(mat), 1.0)

    def test_half_agreement(self):
        p1 = Partition({"u": "1", "v": "1"}, Provenance.DETECTED)
        p2 = Partition({"u": "1", "v": "2"}, Provenance.DETECTED)
        _, mat = partition_agreement([p1, p2])
        assert mat[0, 1] == 0.5

    def test_symmetry(self, rng):
        runs = []
        for seed in range(4):
            r = np.random.default_rng(seed)
            runs.append(Partition(
                {f"n{i}": str(int(r.integers(3))) for i in range(12)},
                Provenance.DETECTED,
            ))
        _, mat = partition_agreement(runs)
        assert np.allclose(mat, mat.T)

    def test_mismatched_node_sets(self):
        p1 = Partition({"a": "1"}, Provenance.DETECTED)
        p2 = Partition({"b": "1"}, Provenance.DETECTED)
        with pytest.raises(ValidationError):
            partition_agreement([p1, p2])


def test_partition_csv_round_trip(tmp_path):
    part = Partition({"a": "1", "b": UNASSIGNED, "c": "2"}, Provenance.DETECTED)
    path = tmp_path / "partition.csv"
    write_partition_csv(part, path)
    loaded = read_partition_csv(path)
    assert loaded.assignment == part.assignment
    assert loaded.provenance is Provenance.EXTERNAL
    assert "UNASSIGNED" in path.read_text()


def test_polarity_partition(rng):
    g = make_graph(
        [("a", "b")],
        polarities={"a": Polarity.ANTI, "b": Polarity.NEUTRAL},
    )
    part = polarity_partition(g)
    assert part.assignment == {"a": "anti", "b": "neutral"}
    assert part.provenance is Provenance.METADATA_GROUPS
