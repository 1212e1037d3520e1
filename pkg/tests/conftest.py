from __future__ import annotations

import pytest

from fracmatch.graph import Edge, PortGraph, unfold_loops
from fracmatch.sim import run, run_loopy

ACCEPTANCE_LINES: list[str] = []


def consistent_cycle(n: int) -> PortGraph:
    """C_n where every node reaches its successor on port 1 and its predecessor on port 2."""
    return PortGraph.build([str(i) for i in range(n)], [Edge(str(i), 1, str((i + 1) % n), 2) for i in range(n)])


def path_abc() -> PortGraph:
    return PortGraph.build("abc", [Edge("a", 1, "b", 1), Edge("b", 2, "c", 1)])


def single_edge() -> PortGraph:
    return PortGraph.build("uv", [Edge("u", 1, "v", 1)])


def star(k: int) -> PortGraph:
    return PortGraph.build(["c"] + [f"l{i}" for i in range(1, k + 1)], [Edge("c", i, f"l{i}", 1) for i in range(1, k + 1)])


def loopy_zoo() -> dict[str, PortGraph]:
    """Small loopy graphs (at most three nodes) used by the unfolding oracle."""
    return {
        "one-loop": PortGraph.build(["v"], [Edge("v", 1, "v", 2)]),
        "two-loops": PortGraph.build(["v"], [Edge("v", 1, "v", 2), Edge("v", 3, "v", 4)]),
        "two-loops-interleaved": PortGraph.build(["v"], [Edge("v", 1, "v", 3), Edge("v", 4, "v", 2)]),
        "reversed-loop": PortGraph.build(["v"], [Edge("v", 2, "v", 1)]),
        "loop-edge-loop": PortGraph.build(
            ["a", "b"], [Edge("a", 1, "a", 2), Edge("a", 3, "b", 1), Edge("b", 3, "b", 2)]
        ),
        "path-of-loops": PortGraph.build(
            ["a", "b", "c"],
            [
                Edge("a", 2, "a", 1),
                Edge("b", 1, "a", 3),
                Edge("b", 2, "b", 3),
                Edge("b", 4, "c", 2),
                Edge("c", 1, "c", 3),
            ],
        ),
        "triangle-of-loops": PortGraph.build(
            ["a", "b", "c"],
            [
                Edge("a", 1, "b", 2),
                Edge("b", 1, "c", 2),
                Edge("c", 1, "a", 2),
                Edge("a", 3, "a", 4),
                Edge("b", 4, "b", 3),
                Edge("c", 3, "c", 4),
            ],
        ),
    }


def preimage(g: PortGraph, anchor: str, lift: str) -> str:
    """Node of ``g`` under a lift named by its port walk from ``anchor``."""
    v = anchor
    for step in lift.split("/")[1:]:
        v = g.port(v, int(step)).peer
    return v


def unfolding_mismatches(g: PortGraph, alg, model) -> tuple[list[str], int]:
    """Compare run_loopy on ``g`` with plain runs on truncated unfoldings of
    depth 2T+2.

    A lift at distance at most T+1 from the tree root sees its whole
    radius-T view inside the tree, so every node of ``g`` with such a lift
    is checked there; remaining nodes get an unfolding of their own.
    """
    T = alg.rounds
    loopy = run_loopy(g, alg, model).outputs
    pending = list(g.nodes)
    bad = []
    while pending:
        anchor = pending[0]
        tree, _ = unfold_loops(g, 2 * T + 2, anchor)
        flat = run(tree, alg, model).outputs
        nearest: dict[str, str] = {}
        for lift in sorted(tree.nodes, key=lambda name: name.count("/")):
            if lift.count("/") <= T + 1:
                nearest.setdefault(preimage(g, anchor, lift), lift)
        for v in [v for v in pending if v in nearest]:
            if flat[nearest[v]] != loopy[v]:
                bad.append(f"{v} (lift {nearest[v]})")
            pending.remove(v)
    return bad, len(g.nodes)


@pytest.fixture
def zoo():
    return loopy_zoo()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
