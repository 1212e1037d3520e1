"""The loop-unfolding chain that forces ever finer denominators.

Start from one node with ``d`` loops. Any algorithm that produces a maximal
fractional matching there must put a value whose denominator has a factor
of two on some loop. Remove that loop, chain ``2T+3`` copies of what is
left along a directed path through the freed ports, and run again: the
middle copy cannot tell the difference within ``T`` rounds, so its path
edges repeat the old loop value, and walking away from it along the tree
finds a loop with strictly more factors of two. After ``d-1`` steps some
value has an even denominator part of at least ``2**d``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .graph import Edge, GraphError, PortGraph, format_graph, is_forest_ignoring_loops, validate
from .rationals import class_index, format_rat
from .sim import Algorithm, Model, SimulationError, run_loopy
from .verify import verify


class TheoryViolation(RuntimeError):
    """The walk found no finer loop: the input cannot be a valid maximal
    fractional matching of a loopy graph, or classes were misread."""


def make_G0(d: int) -> PortGraph:
    """One node ``v0`` with ``d`` loops on ports (1 out, 2 in), (3 out, 4 in), ..."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return PortGraph(("v0",), tuple(Edge("v0", 2 * k - 1, "v0", 2 * k) for k in range(1, d + 1)))


@dataclass
class FineLoop:
    node: str
    loop: int
    value: Fraction
    cls: int
    walk: list[str]
    fallback: bool = False
    note: str | None = None


def find_fine_loop(g: PortGraph, x, root: str, threshold: int) -> FineLoop:
    """Walk away from ``root`` until a loop of class greater than the current
    path class shows up.

    The walk starts on the root's non-loop edge of highest class (at least
    ``threshold``) and at every node either returns a loop of class greater
    than the edge it arrived by, or continues along an edge of at least that
    class. A root without non-loop edges is treated as the one-node base
    case: its loops must already contain one of class above ``threshold``.
    If the walk gets stuck, all loops are scanned and the discrepancy is
    noted on the result.
    """
    try:
        return _walk(g, x, root, threshold)
    except TheoryViolation as exc:
        best = None
        for i in g.loops():
            c = class_index(x[i])
            if c > threshold and (best is None or c > best[0]):
                best = (c, i)
        if best is None:
            raise
        c, i = best
        return FineLoop(g.edges[i].tail, i, Fraction(x[i]), c, [], fallback=True, note=str(exc))


def _walk(g, x, root, threshold) -> FineLoop:
    def cls(i):
        return class_index(x[i])

    def finer_loop(v, above):
        loops = sorted({inc.edge for inc in g.ports(v).values() if g.edges[inc.edge].is_loop})
        hits = [i for i in loops if cls(i) > above]
        return max(hits, key=lambda i: (cls(i), -i)) if hits else None

    def tree_edges(v, skip=None):
        return [inc for p, inc in sorted(g.ports(v).items()) if not g.edges[inc.edge].is_loop and inc.edge != skip]

    start = tree_edges(root)
    if not start:
        i = finer_loop(root, threshold)
        if i is None:
            raise TheoryViolation(f"no loop at {root!r} has class above {threshold}")
        return FineLoop(root, i, Fraction(x[i]), cls(i), [root])
    first = max(start, key=lambda inc: cls(inc.edge))
    if cls(first.edge) < threshold:
        raise TheoryViolation(f"no edge at the root {root!r} has class >= {threshold}")
    walk = [root]
    v, via = first.peer, first.edge
    while True:
        walk.append(v)
        n = cls(via)
        i = finer_loop(v, n)
        if i is not None:
            return FineLoop(v, i, Fraction(x[i]), cls(i), walk)
        onward = [inc for inc in tree_edges(v, skip=via) if cls(inc.edge) >= n]
        if not onward:
            raise TheoryViolation(f"walk stuck at {v!r}: no loop above class {n} and no edge of class >= {n}")
        nxt = max(onward, key=lambda inc: cls(inc.edge))
        v, via = nxt.peer, nxt.edge


def build_next(g: PortGraph, v: str, loop_id: int, T: int) -> tuple[PortGraph, str]:
    """Remove loop ``loop_id`` of ``v``, take ``2T+3`` copies and join the
    copies of ``v`` into a directed path through the freed ports.

    Copy ``k`` of node ``w`` is named ``f"{k}.{w}"``. The path edge from
    copy k to copy k+1 leaves through the loop's outgoing port and enters
    through its incoming port; the two end copies renumber their ports
    around the slot they do not use. The root is copy ``T+2``.
    """
    if not 0 <= loop_id < len(g.edges):
        raise GraphError(f"unknown edge id {loop_id}")
    loop = g.edges[loop_id]
    if not (loop.is_loop and loop.tail == v):
        raise GraphError(f"edge {loop_id} is not a loop at {v!r}")
    if T < 0:
        raise ValueError("T must be non-negative")
    p_out, p_in = loop.tail_port, loop.head_port
    copies = 2 * T + 3
    rest = [e for i, e in enumerate(g.edges) if i != loop_id]

    def port(k, w, p):
        if w != v:
            return p
        if k == 1 and p > p_in:
            return p - 1
        if k == copies and p > p_out:
            return p - 1
        return p

    nodes, edges = [], []
    for k in range(1, copies + 1):
        nodes.extend(f"{k}.{w}" for w in g.nodes)
        for e in rest:
            edges.append(Edge(f"{k}.{e.tail}", port(k, e.tail, e.tail_port), f"{k}.{e.head}", port(k, e.head, e.head_port)))
    for k in range(1, copies):
        edges.append(Edge(f"{k}.{v}", port(k, v, p_out), f"{k + 1}.{v}", port(k + 1, v, p_in)))
    return PortGraph(tuple(nodes), tuple(edges)), f"{T + 2}.{v}"


def check_properties(g: PortGraph, d: int, i: int) -> list[str]:
    """P1-P3 of level ``i``: max degree <= 2d, a tree once loops are
    dropped, and at least ``d - i`` loops per node."""
    problems = validate(g)
    if g.max_degree > 2 * d:
        problems.append(f"max degree {g.max_degree} exceeds {2 * d}")
    if not is_forest_ignoring_loops(g):
        problems.append("graph without loops is not a forest")
    for w in g.nodes:
        if len(g.loops(w)) < d - i:
            problems.append(f"node {w!r} has {len(g.loops(w))} loops, fewer than {d - i}")
            break
    return problems


@dataclass
class LBLevel:
    i: int
    graph: PortGraph
    root: str
    node: str
    loop: int
    value: Fraction
    cls: int
    rounds: int
    T: int | None
    max_class: int
    walk: list[str] = field(default_factory=list)
    fallback: bool = False

    def to_dict(self) -> dict:
        return {
            "level": self.i,
            "nodes": len(self.graph.nodes),
            "edges": len(self.graph.edges),
            "T": self.T,
            "rounds": self.rounds,
            "root": self.root,
            "node": self.node,
            "loop": self.loop,
            "value": format_rat(self.value),
            "class": self.cls,
            "max_class": self.max_class,
            "walk_length": len(self.walk),
            "fallback": self.fallback,
        }


@dataclass
class LBChainReport:
    algorithm: str
    d: int
    levels: list[LBLevel] = field(default_factory=list)
    error: str | None = None
    failed_level: int | None = None

    @property
    def max_class(self) -> int:
        return max((lvl.max_class for lvl in self.levels), default=0)

    @property
    def complete(self) -> bool:
        return self.error is None and len(self.levels) == self.d

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "d": self.d,
            "complete": self.complete,
            "error": self.error,
            "failed_level": self.failed_level,
            "max_class": self.max_class,
            "levels": [lvl.to_dict() for lvl in self.levels],
        }


def harness(
    alg: Algorithm,
    d: int,
    T_override: int | None = None,
    *,
    margin: int = 2,
    model: Model | str = Model.PO,
    dump=None,
) -> LBChainReport:
    """Run the chain ``G_0 .. G_{d-1}`` against ``alg`` on loopy graphs of
    max degree ``2d``.

    ``T`` for each new level is ``T_override`` or the rounds measured on the
    previous level plus ``margin``. ``dump(i, graph_text)`` is called for
    every level graph when given. Failures are reported, not raised.
    """
    report = LBChainReport(alg.name, d)
    g, root = make_G0(d), "v0"
    T = None
    for i in range(d):
        if i > 0:
            prev = report.levels[-1]
            T = T_override if T_override is not None else prev.rounds + margin
            g, root = build_next(prev.graph, prev.node, prev.loop, T)
        if dump is not None:
            dump(i, format_graph(g))
        problems = check_properties(g, d, i)
        if problems:
            report.error, report.failed_level = "construction broke P1-P3: " + "; ".join(problems), i
            return report
        try:
            res = run_loopy(g, alg, model)
        except SimulationError as exc:
            report.error, report.failed_level = f"algorithm failed: {exc}", i
            return report
        check = verify(g, res.assignment)
        if not (check.feasible and check.maximal):
            report.error = (
                f"not a maximal fractional matching on loopy level {i}: "
                f"{len(check.overloaded)} overloaded nodes, {len(check.unsaturated_edges)} unsaturated edges"
            )
            report.failed_level = i
            return report
        try:
            fine = find_fine_loop(g, res.assignment, root, i)
        except TheoryViolation as exc:
            report.error, report.failed_level = f"theory violation: {exc}", i
            return report
        report.levels.append(
            LBLevel(
                i=i,
                graph=g,
                root=root,
                node=fine.node,
                loop=fine.loop,
                value=fine.value,
                cls=fine.cls,
                rounds=res.rounds,
                T=T,
                max_class=max(check.classes.values(), default=0),
                walk=fine.walk,
                fallback=fine.fallback,
            )
        )
        if fine.cls <= i:
            report.error, report.failed_level = f"traced class {fine.cls} is not above level {i}", i
            return report
    return report
