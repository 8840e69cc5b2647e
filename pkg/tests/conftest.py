import numpy as np
import pytest

from bowtienet.graph import DirectedGraph, PageNode, Polarity, SnapshotLabel

ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


def record_acceptance(name: str, passed: bool, detail: str = ""):
    ACCEPTANCE_RESULTS.append((name, "PASS" if passed else "FAIL", detail))
    assert passed, f"{name}: {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in ACCEPTANCE_RESULTS:
        suffix = f"  [{detail}]" if detail else ""
        terminalreporter.write_line(f"{status}  {name}{suffix}")

SNAP = SnapshotLabel("feb2019", 0)


def make_graph(edges, fans=None, polarities=None, node_ids=None, snapshot=SNAP):
    """Toy graph builder: edges as (u, v) pairs, default fans of 1."""
    ids = set(node_ids or [])
    for u, v in edges:
        ids.add(u)
        ids.add(v)
    fans = fans or {}
    polarities = polarities or {}
    nodes = [
        PageNode(nid, polarities.get(nid, Polarity.ANTI), {snapshot.name: fans.get(nid, 1)})
        for nid in sorted(ids)
    ]
    by_id = {n.id: n for n in nodes}
    adjacency: dict[str, dict[str, int]] = {}
    for u, v in edges:
        adjacency.setdefault(u, {})[v] = (
            by_id[u].fans[snapshot.name] * by_id[v].fans[snapshot.name]
        )
    return DirectedGraph(nodes, adjacency, snapshot)


def random_graph(rng: np.random.Generator, n: int, p: float):
    """ER-style random digraph (no self-loops) over ids n00..n<k>."""
    ids = [f"n{i:03d}" for i in range(n)]
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    edges = [(ids[i], ids[j]) for i, j in zip(*np.nonzero(mask))]
    return make_graph(edges, node_ids=ids)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
