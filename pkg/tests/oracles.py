"""Independent brute-force oracles used to cross-check the library.

Everything here derives results from first principles (transitive closure,
dense linear algebra, exhaustive path/outcome enumeration) and deliberately
shares no code with the implementations under test.
"""

from __future__ import annotations

import itertools

import numpy as np


def closure_matrix(ids, succ):
    """Boolean reachability closure (self-paths included) via Floyd-Warshall."""
    n = len(ids)
    pos = {nid: i for i, nid in enumerate(ids)}
    reach = np.eye(n, dtype=bool)
    for u in ids:
        for v in succ(u):
            reach[pos[u], pos[v]] = True
    for k in range(n):
        reach |= reach[:, k][:, None] & reach[k, :][None, :]
    return reach, pos


def brute_sccs(graph):
    """SCCs as equivalence classes of mutual reachability."""
    ids = list(graph.node_ids)
    reach, pos = closure_matrix(ids, graph.successors)
    mutual = reach & reach.T
    seen, comps = set(), []
    for i, u in enumerate(ids):
        if u in seen:
            continue
        comp = {ids[j] for j in range(len(ids)) if mutual[i, j]}
        seen |= comp
        comps.append(comp)
    return comps


def brute_bowtie(graph):
    """Literal role-set evaluation over the reachability closure.

    Sets are taken in sequence (SCC, then IN/OUT, then the leftover split by
    hears-from-IN / feeds-into-OUT) so they partition the node set.
    """
    ids = list(graph.node_ids)
    reach, pos = closure_matrix(ids, graph.successors)
    comps = brute_sccs(graph)
    best = max(len(c) for c in comps)
    scc = min((c for c in comps if len(c) == best), key=min)

    def reaches(u, targets):
        return any(reach[pos[u], pos[t]] for t in targets)

    def reached_by(u, sources):
        return any(reach[pos[s], pos[u]] for s in sources)

    in_set = {v for v in ids if v not in scc and reaches(v, scc)}
    out_set = {v for v in ids if v not in scc and reached_by(v, scc)}
    rest = set(ids) - scc - in_set - out_set
    roles = {}
    for v in scc:
        roles[v] = "SCC"
    for v in in_set:
        roles[v] = "IN"
    for v in out_set:
        roles[v] = "OUT"
    for v in rest:
        hears = reached_by(v, in_set) if in_set else False
        feeds = reaches(v, out_set) if out_set else False
        roles[v] = {(True, True): "TUBES", (True, False): "INTENDRILS",
                    (False, True): "OUTTENDRILS", (False, False): "OTHERS"}[(hears, feeds)]
    return roles


def solve_flow(graph, damping):
    """Dense linear solve of the damped-walk stationary equations."""
    ids = list(graph.node_ids)
    n = len(ids)
    pos = {nid: i for i, nid in enumerate(ids)}
    T = np.zeros((n, n))
    for u in ids:
        weights = {v: w for v, w in graph.successors(u).items() if w > 0}
        s = sum(weights.values())
        if s == 0:
            T[:, pos[u]] = 1.0 / n
        else:
            for v, w in weights.items():
                T[pos[v], pos[u]] = w / s
    M = damping * T + (1 - damping) / n * np.ones((n, n))
    # stationary vector: (M - I) x = 0 with sum(x) = 1
    A = M - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    x = np.linalg.solve(A, b)
    return {ids[i]: x[i] for i in range(n)}


def brute_betweenness(graph):
    """Enumerate every simple path; count geodesics through each interior node."""
    ids = list(graph.node_ids)
    n = len(ids)
    score = {nid: 0.0 for nid in ids}
    if n < 3:
        return score

    def all_simple_paths(s, t):
        paths = []
        stack = [(s, [s])]
        while stack:
            v, path = stack.pop()
            if v == t and len(path) > 1:
                paths.append(path)
                continue
            for w in graph.successors(v):
                if w not in path:
                    stack.append((w, path + [w]))
        return paths

    for s, t in itertools.permutations(ids, 2):
        paths = all_simple_paths(s, t)
        if not paths:
            continue
        shortest = min(len(p) for p in paths)
        geodesics = [p for p in paths if len(p) == shortest]
        for p in geodesics:
            for v in p[1:-1]:
                score[v] += 1.0 / len(geodesics)
    scale = 1.0 / ((n - 1) * (n - 2))
    return {nid: val * scale for nid, val in score.items()}


def enumerate_sir(targets, seed, beta, gamma, tol=1e-14):
    """Exact final-state probabilities of the synchronous SIR process.

    `targets[w]` lists the nodes w can infect. Returns a dict mapping each
    node to its probability of ending recovered. Transitions factorize per
    node: susceptible u is infected with prob 1-(1-beta)^(#infectious
    pointing at it); each node infectious during the step recovers with prob
    gamma afterwards.
    """
    n = len(targets)
    start = tuple(1 if i == seed else 0 for i in range(n))  # 0=S 1=I 2=R
    dist = {start: 1.0}
    p_rec = np.zeros(n)
    guard = 0
    while dist:
        guard += 1
        assert guard < 10_000, "enumeration did not absorb"
        next_dist: dict[tuple, float] = {}
        for state, prob in dist.items():
            infectious = [i for i in range(n) if state[i] == 1]
            if not infectious:
                for i in range(n):
                    if state[i] == 2:
                        p_rec[i] += prob
                continue
            exposure = [0] * n
            for w in infectious:
                for u in targets[w]:
                    if state[u] == 0:
                        exposure[u] += 1
            sus = [u for u in range(n) if state[u] == 0 and exposure[u] > 0]
            p_inf = {u: 1 - (1 - beta) ** exposure[u] for u in sus}
            for inf_mask in itertools.product([0, 1], repeat=len(sus)):
                p1 = prob
                for u, bit in zip(sus, inf_mask):
                    p1 *= p_inf[u] if bit else 1 - p_inf[u]
                if p1 < tol:
                    continue
                for rec_mask in itertools.product([0, 1], repeat=len(infectious)):
                    p2 = p1
                    for bit in rec_mask:
                        p2 *= gamma if bit else 1 - gamma
                    if p2 < tol:
                        continue
                    nxt = list(state)
                    for u, bit in zip(sus, inf_mask):
                        if bit:
                            nxt[u] = 1
                    for w, bit in zip(infectious, rec_mask):
                        if bit:
                            nxt[w] = 2
                    key = tuple(nxt)
                    next_dist[key] = next_dist.get(key, 0.0) + p2
        dist = next_dist
        # drop states whose mass can no longer matter
        dist = {k: v for k, v in dist.items() if v >= tol}
    return p_rec
