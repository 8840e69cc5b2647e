import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bowtienet.bowtie import (
    ALL_ROLES,
    CORE_ROLES,
    BowtieRole,
    decompose,
    largest_scc,
    reachable_from,
    recursive_decompose,
    strongly_connected_components,
    summary_by_part,
)
from bowtienet.community import Partition, Provenance
from bowtienet.graph import GraphError, NodeLookupError, ValidationError

from conftest import make_graph, random_graph
from oracles import brute_bowtie, brute_sccs, closure_matrix


def as_value_map(decomposition):
    return {nid: role.value for nid, role in decomposition.roles.items()}


class TestSccs:
    def test_cycle_is_one_component(self):
        g = make_graph([("a", "b"), ("b", "c"), ("c", "a")])
        comps = strongly_connected_components(g)
        assert sorted(map(len, comps)) == [3]

    def test_path_gives_singletons(self):
        g = make_graph([("a", "b"), ("b", "c")])
        comps = strongly_connected_components(g)
        assert sorted(map(len, comps)) == [1, 1, 1]

    def test_matches_closure_oracle(self, rng):
        for _ in range(25):
            g = random_graph(rng, 10, float(rng.uniform(0.05, 0.4)))
            mine = {frozenset(c) for c in strongly_connected_components(g)}
            brute = {frozenset(c) for c in brute_sccs(g)}
            assert mine == brute

    def test_deep_chain_no_recursion_limit(self):
        n = 30_000
        edges = [(f"n{i:06d}", f"n{i + 1:06d}") for i in range(n - 1)]
        edges.append((f"n{n - 1:06d}", "n000000"))  # close the loop
        g = make_graph(edges)
        comps = strongly_connected_components(g)
        assert sorted(map(len, comps)) == [n]


class TestLargestScc:
    def test_single_node_no_edges(self):
        g = make_graph([], node_ids=["a"])
        assert largest_scc(g) == {"a"}

    def test_tie_breaks_to_smallest_id(self):
        g = make_graph([("a", "b"), ("b", "a"), ("c", "d"), ("d", "c")])
        assert largest_scc(g) == {"a", "b"}

    def test_self_loop_singleton_same_as_bare(self):
        bare = make_graph([], node_ids=["a"])
        looped = make_graph([("a", "a")])
        assert largest_scc(bare) == largest_scc(looped) == {"a"}

    def test_empty_graph_raises(self):
        g = make_graph([], node_ids=[])
        with pytest.raises(GraphError):
            largest_scc(g)


class TestReachableFrom:
    def test_isolated_source_self_path(self):
        g = make_graph([("a", "b")], node_ids=["a", "b", "x"])
        assert reachable_from(g, {"x"}) == {"x"}

    def test_chain(self):
        g = make_graph([("a", "b"), ("b", "c")])
        assert reachable_from(g, {"a"}) == {"a", "b", "c"}

    def test_matches_closure_oracle(self, rng):
        for _ in range(20):
            g = random_graph(rng, 12, 0.15)
            reach, pos = closure_matrix(g.node_ids, g.successors)
            sources = set(rng.choice(g.node_ids, size=3))
            expected = {
                v for v in g.node_ids if any(reach[pos[s], pos[v]] for s in sources)
            }
            assert reachable_from(g, sources) == expected

    def test_unknown_source(self):
        g = make_graph([("a", "b")])
        with pytest.raises(NodeLookupError):
            reachable_from(g, {"zz"})


class TestDecompose:
    def test_pure_cycle_all_scc(self):
        g = make_graph([("a", "b"), ("b", "c"), ("c", "a")])
        d = decompose(g)
        assert d.sizes[BowtieRole.SCC] == 3
        assert all(d.sizes[r] == 0 for r in CORE_ROLES if r is not BowtieRole.SCC)

    def test_textbook_shape(self):
        g = make_graph(
            [("a", "s1"), ("s1", "s2"), ("s2", "s1"), ("s2", "b")], node_ids=["x"]
        )
        assert as_value_map(decompose(g)) == {
            "a": "IN", "s1": "SCC", "s2": "SCC", "b": "OUT", "x": "OTHERS",
        }

    def test_single_edge_tie_break(self):
        g = make_graph([("a", "b")])
        assert as_value_map(decompose(g)) == {"a": "SCC", "b": "OUT"}

    def test_tubes_and_tendrils(self):
        # in -> scc(2) -> out, plus: in -> tube -> out, in -> intend, outt -> out
        g = make_graph([
            ("in", "s1"), ("s1", "s2"), ("s2", "s1"), ("s2", "out"),
            ("in", "tube"), ("tube", "out"),
            ("in", "intend"),
            ("outt", "out"),
        ])
        assert as_value_map(decompose(g)) == {
            "in": "IN", "s1": "SCC", "s2": "SCC", "out": "OUT",
            "tube": "TUBES", "intend": "INTENDRILS", "outt": "OUTTENDRILS",
        }

    def test_empty_graph_raises(self):
        with pytest.raises(GraphError):
            decompose(make_graph([], node_ids=[]))

    def test_matches_brute_oracle_small_random(self, rng):
        for _ in range(60):
            n = int(rng.integers(2, 13))
            g = random_graph(rng, n, float(rng.uniform(0.0, 0.45)))
            assert as_value_map(decompose(g)) == brute_bowtie(g)

    def test_determinism(self, rng):
        g = random_graph(rng, 40, 0.08)
        assert as_value_map(decompose(g)) == as_value_map(decompose(g))


@given(st.integers(2, 40), st.floats(0.0, 0.4), st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_partition_law(n, p, seed):
    g = random_graph(np.random.default_rng(seed), n, p)
    d = decompose(g)
    assert set(d.roles) == set(g.node_ids)
    assert sum(d.sizes[r] for r in CORE_ROLES) == g.n_nodes
    assert d.sizes[BowtieRole.UNASSIGNED] == 0


@given(st.integers(2, 25), st.floats(0.0, 0.4), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_in_out_reachability_contracts(n, p, seed):
    g = random_graph(np.random.default_rng(seed), n, p)
    d = decompose(g)
    scc = d.members(BowtieRole.SCC)
    probe = min(scc)
    for v in d.members(BowtieRole.IN):
        assert scc & reachable_from(g, {v}), "IN node must reach the SCC"
    downstream = reachable_from(g, scc)
    for v in d.members(BowtieRole.OUT):
        assert v in downstream
    out_set = d.members(BowtieRole.OUT)
    for v in d.members(BowtieRole.INTENDRILS):
        assert not (reachable_from(g, {v}) & out_set)
    in_reach = reachable_from(g, d.members(BowtieRole.IN)) if d.members(BowtieRole.IN) else set()
    for v in d.members(BowtieRole.OUTTENDRILS):
        assert v not in in_reach
    assert probe in scc


class TestRecursiveDecompose:
    def test_trivial_partition_matches_whole_graph(self, rng):
        g = random_graph(rng, 20, 0.12)
        part = Partition({nid: "all" for nid in g.node_ids}, Provenance.EXTERNAL)
        rec = recursive_decompose(g, part, min_size=1)
        assert rec.roles == decompose(g).roles
        assert rec.sizes[BowtieRole.UNASSIGNED] == 0

    def test_cross_edges_ignored(self):
        left = [(f"l{i}", f"l{(i + 1) % 5}") for i in range(5)]
        right = [(f"r{i}", f"r{(i + 1) % 5}") for i in range(5)]
        g = make_graph(left + right + [("l0", "r0")])
        part = Partition(
            {nid: ("L" if nid.startswith("l") else "R") for nid in g.node_ids},
            Provenance.EXTERNAL,
        )
        rec = recursive_decompose(g, part, min_size=5)
        assert all(role is BowtieRole.SCC for role in rec.roles.values())

    def test_small_parts_unassigned(self):
        g = make_graph([("a", "b"), ("c", "d"), ("e", "f")])
        part = Partition(
            {"a": "big", "b": "big", "c": "big", "d": "big", "e": "tiny", "f": "tiny"},
            Provenance.EXTERNAL,
        )
        rec = recursive_decompose(g, part, min_size=4)
        assert rec.roles["e"] is BowtieRole.UNASSIGNED
        assert rec.roles["f"] is BowtieRole.UNASSIGNED
        assert rec.roles["a"] is not BowtieRole.UNASSIGNED

    def test_partition_must_cover(self):
        g = make_graph([("a", "b")])
        part = Partition({"a": "x"}, Provenance.EXTERNAL)
        with pytest.raises(ValidationError):
            recursive_decompose(g, part)

    def test_summary_per_part(self):
        g = make_graph([("a", "b"), ("b", "a"), ("c", "d")])
        part = Partition({"a": "P", "b": "P", "c": "Q", "d": "Q"}, Provenance.EXTERNAL)
        rec = recursive_decompose(g, part, min_size=2)
        payload = summary_by_part(rec)
        assert payload["parts"]["P"]["SCC"] == 2
        assert payload["parts"]["Q"]["SCC"] == 1
        assert payload["parts"]["Q"]["OUT"] == 1
        assert payload["overall"]["SCC"] == 3


def test_roles_csv_export(tmp_path, rng):
    from bowtienet.bowtie import write_roles_csv

    g = random_graph(rng, 8, 0.2)
    d = decompose(g)
    path = tmp_path / "roles.csv"
    write_roles_csv(d, g, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "id,polarity,partition_part,role"
    assert len(lines) == g.n_nodes + 1
    assert len(ALL_ROLES) == 8
