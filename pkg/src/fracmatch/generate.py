"""Instance generators. All randomness comes from a seeded ``random.Random``."""

from __future__ import annotations

import itertools
import random

from .graph import Edge, PortGraph


def relabel(n_nodes: int, pairs, rng: random.Random | None = None) -> PortGraph:
    """Build a graph on nodes ``"0".."n-1"`` from undirected pairs.

    Without ``rng`` ports follow the pair order and every edge points from
    its first to its second node; with ``rng`` both are adversarially
    shuffled.
    """
    nodes = [str(i) for i in range(n_nodes)]
    incident: dict[int, list[int]] = {i: [] for i in range(n_nodes)}
    for k, (u, v) in enumerate(pairs):
        incident[u].append(k)
        incident[v].append(k)
    port: dict[tuple[int, int], int] = {}
    for v, ks in incident.items():
        order = list(ks)
        if rng is not None:
            rng.shuffle(order)
        for p, k in enumerate(order, start=1):
            port[v, k] = p
    edges = []
    for k, (u, v) in enumerate(pairs):
        if rng is not None and rng.random() < 0.5:
            u, v = v, u
        edges.append(Edge(str(u), port[u, k], str(v), port[v, k]))
    return PortGraph(tuple(nodes), tuple(edges))


def path(n: int, rng: random.Random | None = None) -> PortGraph:
    return relabel(n, [(i, i + 1) for i in range(n - 1)], rng)


def cycle(n: int, rng: random.Random | None = None) -> PortGraph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 nodes")
    return relabel(n, [(i, (i + 1) % n) for i in range(n)], rng)


def random_graph(n: int, delta: int, seed: int = 0, density: float | None = None) -> PortGraph:
    """Random simple graph with max degree <= ``delta``.

    Node 0 is connected to ``min(delta, n-1)`` others first so the degree
    bound is attained whenever possible; then random pairs are added until
    a target edge count is reached or attempts run out.
    """
    if n < 1 or delta < 1:
        raise ValueError("need n >= 1 and delta >= 1")
    rng = random.Random(seed)
    if density is None:
        density = rng.uniform(0.3, 1.0)
    deg = [0] * n
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()

    def add(u, v):
        key = (min(u, v), max(u, v))
        if u == v or key in seen or deg[u] >= delta or deg[v] >= delta:
            return
        seen.add(key)
        pairs.append((u, v))
        deg[u] += 1
        deg[v] += 1

    for v in rng.sample(range(1, n), min(delta, n - 1)):
        add(0, v)
    target = int(density * n * delta / 2)
    for _ in range(8 * target):
        if len(pairs) >= target:
            break
        add(rng.randrange(n), rng.randrange(n))
    return relabel(n, pairs, rng)


def all_small_graphs(max_edges: int):
    """One representative of every isomorphism class of simple graphs
    without isolated nodes and with 1..max_edges edges, as ``(n, pairs)``."""
    import networkx as nx

    layer = [nx.Graph([(0, 1)])]
    for m in range(1, max_edges + 1):
        for h in layer:
            yield h.number_of_nodes(), sorted(tuple(sorted(e)) for e in h.edges)
        if m == max_edges:
            return
        buckets: dict[str, list] = {}
        nxt = []
        for h in layer:
            n = h.number_of_nodes()
            for u in range(n + 1):
                for v in range(u + 1, n + 2):
                    if v > n and u < n and v != n:
                        continue
                    if h.has_edge(u, v):
                        continue
                    c = h.copy()
                    c.add_edge(u, v)
                    key = nx.weisfeiler_lehman_graph_hash(c)
                    if any(nx.is_isomorphic(c, o) for o in buckets.get(key, [])):
                        continue
                    buckets.setdefault(key, []).append(c)
                    nxt.append(c)
        layer = nxt


def port_numberings(n: int, pairs, limit: int, seed: int = 0):
    """All port numberings (with fixed orientation) if there are at most
    ``limit``, otherwise ``limit`` random ones."""
    incident: dict[int, list[int]] = {i: [] for i in range(n)}
    for k, (u, v) in enumerate(pairs):
        incident[u].append(k)
        incident[v].append(k)
    total = 1
    for ks in incident.values():
        for i in range(2, len(ks) + 1):
            total *= i
    if total <= limit:
        per_node = [list(itertools.permutations(incident[v])) for v in range(n)]
        for choice in itertools.product(*per_node):
            yield _with_ports(n, pairs, choice)
        return
    rng = random.Random(seed)
    for _ in range(limit):
        choice = [rng.sample(incident[v], len(incident[v])) for v in range(n)]
        yield _with_ports(n, pairs, choice)


def _with_ports(n, pairs, orders) -> PortGraph:
    port = {}
    for v, order in enumerate(orders):
        for p, k in enumerate(order, start=1):
            port[v, k] = p
    edges = tuple(Edge(str(u), port[u, k], str(v), port[v, k]) for k, (u, v) in enumerate(pairs))
    return PortGraph(tuple(str(i) for i in range(n)), edges)
