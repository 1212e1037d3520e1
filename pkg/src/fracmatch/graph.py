"""Port-numbered, edge-oriented multigraphs with self-loops.

Every node numbers its incident edge endpoints with ports ``1..deg(v)``.
Every edge is stored oriented (``tail -> head``); a loop is an edge whose
tail and head coincide and it occupies two ports of its node, the
outgoing one (``tail_port``) and the incoming one (``head_port``).

Edge ids are positions in ``PortGraph.edges``.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple


class GraphError(ValueError):
    """Invalid input to a graph operation."""


class GraphFormatError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass(frozen=True)
class Edge:
    tail: str
    tail_port: int
    head: str
    head_port: int

    @property
    def is_loop(self) -> bool:
        return self.tail == self.head


class Incidence(NamedTuple):
    """What a node sees behind one of its ports."""

    edge: int
    outgoing: bool
    peer: str
    peer_port: int


@dataclass(frozen=True)
class PortGraph:
    """Immutable port-numbered graph.

    Construction does not check the port invariants so that malformed
    graphs can be handed to :func:`validate`.
    """

    nodes: tuple[str, ...] = ()
    edges: tuple[Edge, ...] = ()

    @classmethod
    def build(cls, nodes: Iterable[str], edges: Iterable[Edge | tuple]) -> PortGraph:
        return cls(
            tuple(str(v) for v in nodes),
            tuple(e if isinstance(e, Edge) else Edge(*e) for e in edges),
        )

    @cached_property
    def _incidence(self) -> dict[str, dict[int, Incidence]]:
        inc: dict[str, dict[int, Incidence]] = {v: {} for v in self.nodes}
        for i, e in enumerate(self.edges):
            inc.setdefault(e.tail, {})[e.tail_port] = Incidence(i, True, e.head, e.head_port)
            inc.setdefault(e.head, {})[e.head_port] = Incidence(i, False, e.tail, e.tail_port)
        return inc

    def ports(self, v: str) -> dict[int, Incidence]:
        return self._incidence[v]

    def port(self, v: str, p: int) -> Incidence:
        return self._incidence[v][p]

    def degree(self, v: str) -> int:
        return len(self._incidence[v])

    @property
    def max_degree(self) -> int:
        return max((self.degree(v) for v in self.nodes), default=0)

    def loops(self, v: str | None = None) -> list[int]:
        return [i for i, e in enumerate(self.edges) if e.is_loop and (v is None or e.tail == v)]

    @property
    def has_loops(self) -> bool:
        return any(e.is_loop for e in self.edges)

    @property
    def is_loopy(self) -> bool:
        with_loop = {e.tail for e in self.edges if e.is_loop}
        return all(v in with_loop for v in self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)


def validate(g: PortGraph) -> list[str]:
    """Return every invariant violation of ``g``; an empty list means ok."""
    problems: list[str] = []
    for v, count in Counter(g.nodes).items():
        if count > 1:
            problems.append(f"node {v!r} declared {count} times")
    known = set(g.nodes)
    used: dict[str, Counter] = {v: Counter() for v in g.nodes}
    pairs: dict[frozenset, int] = {}
    for i, e in enumerate(g.edges):
        for end in (e.tail, e.head):
            if end not in known:
                problems.append(f"edge {i}: unknown node {end!r}")
        for end, p in ((e.tail, e.tail_port), (e.head, e.head_port)):
            if p < 1:
                problems.append(f"edge {i}: port {p} at {end!r} is not positive")
            used.setdefault(end, Counter())[p] += 1
        if e.is_loop:
            if e.tail_port == e.head_port:
                problems.append(f"edge {i}: loop at {e.tail!r} uses port {e.tail_port} for both sides")
            continue
        key = frozenset((e.tail, e.head))
        if key in pairs:
            problems.append(f"edges {pairs[key]} and {i} are parallel")
        else:
            pairs[key] = i
    for v, ports in used.items():
        for p, count in sorted(ports.items()):
            if count > 1:
                problems.append(f"node {v!r}: port {p} used {count} times")
        top = max(ports, default=0)
        for p in range(1, top + 1):
            if p not in ports:
                problems.append(f"node {v!r}: port {p} missing")
    return problems


def check(g: PortGraph) -> PortGraph:
    problems = validate(g)
    if problems:
        raise GraphError("invalid port graph: " + "; ".join(problems))
    return g


# -- subgraphs --------------------------------------------------------------


@dataclass(frozen=True)
class SubgraphMap:
    """Where the nodes, ports and edges of a subgraph came from.

    ``ports[v]`` maps old port -> new port for every retained port of ``v``;
    ``edges[i]`` is the old id of new edge ``i``.
    """

    nodes: Mapping[str, str]
    ports: Mapping[str, Mapping[int, int]]
    edges: tuple[int, ...]

    def then(self, later: SubgraphMap) -> SubgraphMap:
        """Compose with a map taken of the subgraph this map produced."""
        nodes = {v: later.nodes[w] for v, w in self.nodes.items() if w in later.nodes}
        ports = {
            v: {old: later.ports[self.nodes[v]][mid] for old, mid in pm.items() if mid in later.ports[self.nodes[v]]}
            for v, pm in self.ports.items()
            if v in nodes
        }
        return SubgraphMap(nodes, ports, tuple(self.edges[i] for i in later.edges))


def compact_ports(kept: Iterable[int]) -> dict[int, int]:
    """Renumber surviving ports to ``1..k`` keeping their relative order."""
    return {old: new for new, old in enumerate(sorted(kept), start=1)}


def subgraph(g: PortGraph, keep: Iterable[int]) -> tuple[PortGraph, SubgraphMap]:
    """Keep the given edges (and every node), compacting ports per node."""
    keep = set(keep)
    unknown = sorted(i for i in keep if not 0 <= i < len(g.edges))
    if unknown:
        raise GraphError(f"unknown edge ids: {unknown}")
    order = tuple(i for i in range(len(g.edges)) if i in keep)
    kept_ports: dict[str, list[int]] = {v: [] for v in g.nodes}
    for i in order:
        e = g.edges[i]
        kept_ports[e.tail].append(e.tail_port)
        kept_ports[e.head].append(e.head_port)
    ports = {v: compact_ports(ps) for v, ps in kept_ports.items()}
    edges = []
    for i in order:
        e = g.edges[i]
        edges.append(Edge(e.tail, ports[e.tail][e.tail_port], e.head, ports[e.head][e.head_port]))
    return PortGraph(g.nodes, tuple(edges)), SubgraphMap({v: v for v in g.nodes}, ports, order)


# -- bipartite double cover -------------------------------------------------


WHITE, BLACK = "white", "black"


@dataclass(frozen=True)
class DoubleCover:
    graph: PortGraph
    copies: dict[str, tuple[str, str]]
    coloring: dict[str, str]


def double_cover(g: PortGraph) -> DoubleCover:
    """Bipartite double cover; copy 1 of every node is white, copy 2 black.

    Edge ``i`` of ``g`` becomes edges ``2i`` (``u1 - v2``) and ``2i+1``
    (``u2 - v1``), with ports and orientation inherited.
    """
    if g.has_loops:
        raise GraphError("double cover of a graph with loops is not defined")
    copies = {v: (f"{v}.1", f"{v}.2") for v in g.nodes}
    nodes = [c for v in g.nodes for c in copies[v]]
    edges = []
    for e in g.edges:
        (t1, t2), (h1, h2) = copies[e.tail], copies[e.head]
        edges.append(Edge(t1, e.tail_port, h2, e.head_port))
        edges.append(Edge(t2, e.tail_port, h1, e.head_port))
    coloring = {c: WHITE if k == 0 else BLACK for v in g.nodes for k, c in enumerate(copies[v])}
    return DoubleCover(PortGraph(tuple(nodes), tuple(edges)), copies, coloring)


def two_coloring(g: PortGraph) -> dict[str, str] | None:
    """A white/black colouring by breadth-first search, or None if not bipartite."""
    color: dict[str, str] = {}
    for s in g.nodes:
        if s in color:
            continue
        color[s] = WHITE
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for inc in g.ports(v).values():
                want = BLACK if color[v] == WHITE else WHITE
                if inc.peer not in color:
                    color[inc.peer] = want
                    queue.append(inc.peer)
                elif color[inc.peer] != want:
                    return None
    return color


def is_proper_coloring(g: PortGraph, coloring: Mapping[str, str]) -> bool:
    return all(e.tail in coloring and e.head in coloring and coloring[e.tail] != coloring[e.head] for e in g.edges)


# -- unfolding --------------------------------------------------------------


def unfold_loops(g: PortGraph, depth: int, anchor: str) -> tuple[PortGraph, str]:
    """Truncated universal cover of ``g`` around ``anchor``.

    Loops unroll into directed paths and cycles into trees. A lifted node
    is named by the port walk from the root (``"v/3/1"``). Nodes at
    distance ``depth`` keep only their parent edge, renumbered to port 1;
    everything closer has exactly the ports, orientations and degree of
    its preimage.
    """
    if anchor not in g._incidence:
        raise GraphError(f"unknown anchor {anchor!r}")
    root = anchor
    nodes = [root]
    edges: list[Edge] = []
    # (lift id, preimage, port used to enter it, distance)
    queue = deque([(root, anchor, None, 0)])
    while queue:
        lift, base, entry, dist = queue.popleft()
        if dist == depth:
            continue
        for p, inc in sorted(g.ports(base).items()):
            if p == entry:
                continue
            child = f"{lift}/{p}"
            child_dist = dist + 1
            child_port = inc.peer_port if child_dist < depth else 1
            nodes.append(child)
            if inc.outgoing:
                edges.append(Edge(lift, p, child, child_port))
            else:
                edges.append(Edge(child, child_port, lift, p))
            queue.append((child, inc.peer, inc.peer_port, child_dist))
    return PortGraph(tuple(nodes), tuple(edges)), root


def rooted_canonical_form(tree: PortGraph, root: str):
    """Hashable form of a rooted port-numbered oriented tree.

    Two trees get equal forms iff there is a root-preserving isomorphism
    respecting ports and orientations.
    """

    def form(v: str, parent_edge: int | None):
        out = []
        for p, inc in sorted(tree.ports(v).items()):
            if inc.edge == parent_edge:
                out.append((p, inc.outgoing, inc.peer_port, None))
            else:
                out.append((p, inc.outgoing, inc.peer_port, form(inc.peer, inc.edge)))
        return tuple(out)

    return form(root, None)


def is_forest_ignoring_loops(g: PortGraph) -> bool:
    parent = {v: v for v in g.nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in g.edges:
        if e.is_loop:
            continue
        a, b = find(e.tail), find(e.head)
        if a == b:
            return False
        parent[a] = b
    return True


# -- text format and DOT ----------------------------------------------------


def format_graph(g: PortGraph) -> str:
    lines = [f"node {v}" for v in g.nodes]
    for e in g.edges:
        if e.is_loop:
            lines.append(f"loop {e.tail} {e.tail_port} {e.head_port}")
        else:
            lines.append(f"edge {e.tail} {e.tail_port} {e.head} {e.head_port} uv")
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> PortGraph:
    """Parse the line format produced by :func:`format_graph`.

    ``edge u pu v pv vu`` is accepted and stored as the edge ``v -> u``.
    """
    nodes: list[str] = []
    edges: list[Edge] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *args = line.split()
        try:
            if kind == "node" and len(args) == 1:
                nodes.append(args[0])
            elif kind == "edge" and len(args) == 5:
                u, pu, v, pv, direction = args
                if direction == "uv":
                    edges.append(Edge(u, int(pu), v, int(pv)))
                elif direction == "vu":
                    edges.append(Edge(v, int(pv), u, int(pu)))
                else:
                    raise GraphFormatError(f"orientation must be 'uv' or 'vu', got {direction!r}", lineno)
            elif kind == "loop" and len(args) == 3:
                v, p_out, p_in = args
                edges.append(Edge(v, int(p_out), v, int(p_in)))
            else:
                raise GraphFormatError(f"malformed record {line!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, GraphFormatError):
                raise
            raise GraphFormatError(f"bad port number in {line!r}", lineno) from exc
    return PortGraph(tuple(nodes), tuple(edges))


def to_dot(g: PortGraph, name: str = "G") -> str:
    out = [f"digraph {name} {{"]
    for v in g.nodes:
        out.append(f'  "{v}";')
    for i, e in enumerate(g.edges):
        out.append(
            f'  "{e.tail}" -> "{e.head}" [label="e{i}", taillabel="{e.tail_port}", headlabel="{e.head_port}"];'
        )
    out.append("}")
    return "\n".join(out) + "\n"
