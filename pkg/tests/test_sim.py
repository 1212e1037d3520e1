import json
from fractions import Fraction as F

import pytest

from fracmatch.algorithms import BaseCase, mfm
from fracmatch.generate import random_graph
from fracmatch.graph import Edge, GraphError, PortGraph, unfold_loops
from fracmatch.lowerbound import make_G0
from fracmatch.sim import (
    Algorithm,
    AlgorithmFault,
    BudgetExceeded,
    Constant,
    Model,
    ModelError,
    NodeProgram,
    OutputMismatch,
    UniformShare,
    ViewDigest,
    generate_ids,
    run,
    run_loopy,
)
from fracmatch.verify import loads, verify

from conftest import consistent_cycle, loopy_zoo, single_edge, unfolding_mismatches


def test_uniform_on_four_cycle():
    res = run(consistent_cycle(4), UniformShare(2))
    assert res.rounds == 0
    assert set(res.assignment.values()) == {F(1, 2)}


def test_base_case_on_single_edge():
    res = run(single_edge(), BaseCase(2))
    assert res.assignment == {0: F(1)}
    assert res.rounds == 1


def test_empty_and_isolated():
    assert run(PortGraph.build([], []), BaseCase(2)).assignment == {}
    res = run(PortGraph.build(["v"], []), mfm(3))
    assert res.assignment == {} and res.halting_rounds["v"] == 15


def test_loop_counts_twice():
    g = make_G0(1)
    res = run_loopy(g, UniformShare(2))
    assert res.assignment == {0: F(1, 2)}
    assert loads(g, res.assignment) == {"v0": F(1)}
    assert verify(g, res.assignment).ok


def test_run_rejects_loops_and_local_on_loopy():
    with pytest.raises(GraphError):
        run(make_G0(1), UniformShare())
    with pytest.raises(ModelError):
        run_loopy(make_G0(1), UniformShare(), Model.LOCAL)


def test_invalid_graph_rejected():
    g = PortGraph.build(["a", "b"], [Edge("a", 2, "b", 1)])
    with pytest.raises(GraphError):
        run(g, UniformShare())


def test_budget():
    with pytest.raises(BudgetExceeded):
        run(consistent_cycle(5), ViewDigest(5), max_rounds=3)


class _Stubborn(Algorithm):
    """Tail side writes 1, head side writes 0."""

    rounds = 0
    name = "stubborn"

    def spawn(self, view):
        return _StubbornNode(view)


class _StubbornNode(NodeProgram):
    def start(self):
        self.halt({p: F(int(self.view.is_outgoing(p))) for p in range(1, self.view.degree + 1)})
        return {}


def test_output_mismatch_is_reported():
    with pytest.raises(OutputMismatch):
        run(single_edge(), _Stubborn(), Model.PO)


def test_port_orientation_hidden_in_pn():
    with pytest.raises(ModelError):
        run(single_edge(), _Stubborn(), Model.PN)


class _Floaty(Algorithm):
    rounds = 0
    name = "floaty"

    def spawn(self, view):
        return _FloatyNode(view)


class _FloatyNode(NodeProgram):
    def start(self):
        self.halt({p: 0.5 for p in range(1, self.view.degree + 1)})
        return {}


def test_inexact_output_rejected():
    with pytest.raises(AlgorithmFault):
        run(single_edge(), _Floaty())


def test_determinism_and_trace():
    g = random_graph(40, 4, seed=11)
    a = run(g, mfm(4), trace=True)
    b = run(g, mfm(4), trace=True)
    assert a.assignment == b.assignment
    assert a.trace == b.trace
    assert {"round", "node", "state", "outbox", "halted"} <= set(a.trace[0])
    json.dumps(a.trace)


@pytest.mark.parametrize("model", list(Model))
def test_pn_algorithm_unchanged_under_stronger_models(model):
    g = random_graph(60, 5, seed=2)
    base = run(g, mfm(5)).assignment
    assert run(g, mfm(5), model, seed=9).assignment == base


def test_local_ids():
    ids = generate_ids(["a", "b", "c"], seed=1)
    assert len(set(ids.values())) == 3 and all(1 <= i <= 27 for i in ids.values())
    with pytest.raises(ModelError):
        run(single_edge(), UniformShare(), Model.LOCAL, ids={"u": 1, "v": 1})


def _unfolding_agrees(g, alg, model):
    bad, _ = unfolding_mismatches(g, alg, model)
    return not bad


LOOPY = loopy_zoo()


@pytest.mark.parametrize("name", sorted(LOOPY))
@pytest.mark.parametrize("T", [1, 2, 3])
@pytest.mark.parametrize("model", [Model.PN, Model.PO])
def test_loop_reflection_matches_unfolding(name, T, model):
    alg = ViewDigest(T, oriented=model is Model.PO)
    assert _unfolding_agrees(LOOPY[name], alg, model)


@pytest.mark.parametrize("name", sorted(LOOPY))
def test_loop_reflection_base_and_uniform(name):
    g = LOOPY[name]
    assert _unfolding_agrees(g, UniformShare(g.max_degree), Model.PO)
    if g.max_degree <= 2:
        assert _unfolding_agrees(g, BaseCase(2), Model.PN)


def test_digest_separates_orientation():
    g = LOOPY["one-loop"]
    h = LOOPY["reversed-loop"]
    pn = [run_loopy(x, ViewDigest(2), Model.PN).outputs["v"] for x in (g, h)]
    assert pn[0] == pn[1]
    po = [run_loopy(x, ViewDigest(2, oriented=True), Model.PO).outputs["v"] for x in (g, h)]
    assert po[0] != po[1]


def test_constant_baseline_is_not_maximal():
    g = consistent_cycle(4)
    assert not verify(g, run(g, Constant()).assignment).ok


def test_run_loopy_matches_run_without_loops():
    for seed in range(5):
        g = random_graph(30, 4, seed=seed)
        assert run_loopy(g, mfm(4), Model.PN).assignment == run(g, mfm(4)).assignment


def test_unfolding_oracle_has_teeth():
    g, h = LOOPY["two-loops"], LOOPY["two-loops-interleaved"]
    alg = ViewDigest(2, oriented=True)
    tree, root = unfold_loops(h, 6, "v")
    assert run(tree, alg, Model.PO).outputs[root] != run_loopy(g, alg, Model.PO).outputs["v"]
