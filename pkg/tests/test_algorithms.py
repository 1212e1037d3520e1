import itertools
import random
from collections import Counter
from fractions import Fraction as F
from pathlib import Path

import pytest

from fracmatch.algorithms import (
    AlmostSaturating,
    BaseCase,
    EvenStep,
    OddStep,
    ProposalMM,
    canonical_labels,
    get_algorithm,
    mfm,
    round_bound,
    value_set_for,
)
from fracmatch.generate import cycle, path, random_graph
from fracmatch.graph import Edge, PortGraph, double_cover, parse_graph, subgraph, two_coloring
from fracmatch.oracle import brute_is_mfm, brute_loads
from fracmatch.rationals import S, in_S
from fracmatch.sim import DegreeFault, run
from fracmatch.verify import check_almost_saturating, classify_saturation, loads, verify

from conftest import consistent_cycle, path_abc, single_edge, star

DATA = Path(__file__).parent / "data"
H = F(1, 2)


def _expected_rounds(delta):
    if delta <= 2:
        return 1
    inner = _expected_rounds(delta - 1)
    if delta % 2:
        return 2 + inner + delta * (delta + 1)
    return 2 * delta + 1 + inner


class TestBaseCase:
    def test_single_edge(self):
        assert run(single_edge(), BaseCase()).assignment == {0: 1}

    def test_c8(self):
        assert set(run(consistent_cycle(8), BaseCase()).assignment.values()) == {H}

    def test_p3(self):
        g = path_abc()
        res = run(g, BaseCase())
        assert res.assignment == {0: H, 1: H}
        assert loads(g, res.assignment)["b"] == 1

    def test_degree_fault(self):
        with pytest.raises(DegreeFault) as err:
            run(star(3), BaseCase())
        assert err.value.node == "c" and err.value.round == 0

    @pytest.mark.parametrize("n", range(2, 9))
    def test_paths_and_cycles_are_maximal(self, n):
        rng = random.Random(n)
        graphs = [path(n, rng)] + ([cycle(n, rng)] if n >= 3 else [])
        for g in graphs:
            x = run(g, BaseCase()).assignment
            assert brute_is_mfm(g, x) and all(in_S(q, 1) for q in x.values())


class TestProposal:
    def _run(self, g):
        return run(g, ProposalMM(max(g.max_degree, 1)), inputs=two_coloring(g)).assignment

    def test_single_edge(self):
        assert self._run(single_edge()) == {0: 1}

    @pytest.mark.parametrize("order", [(1, 2), (2, 1)])
    def test_white_black_white(self, order):
        g = PortGraph.build("abc", [Edge("a", 1, "b", order[0]), Edge("b", order[1], "c", 1)])
        assert two_coloring(g)["b"] != two_coloring(g)["a"]
        x = self._run(g)
        assert sorted(x.values()) == [0, 1]
        assert brute_is_mfm(g, x)

    def test_c6(self):
        g = consistent_cycle(6)
        x = self._run(g)
        assert sum(x.values()) >= 2
        assert brute_is_mfm(g, x)
        assert set(x.values()) <= {0, 1}

    def test_needs_colouring(self):
        with pytest.raises(ValueError):
            run(single_edge(), ProposalMM(1))

    @pytest.mark.parametrize("seed", range(20))
    def test_random_bipartite_covers(self, seed):
        cov = double_cover(random_graph(25, 4, seed=seed))
        x = run(cov.graph, ProposalMM(4), inputs=cov.coloring).assignment
        assert brute_is_mfm(cov.graph, x)


class TestAlmostSaturating:
    def test_single_edge(self):
        assert run(single_edge(), AlmostSaturating(2)).assignment == {0: 1}

    def test_c3(self):
        g = consistent_cycle(3)
        x = run(g, AlmostSaturating(2)).assignment
        assert set(x.values()) <= {0, H, 1}
        assert all(q <= 1 for q in brute_loads(g, x).values())
        assert check_almost_saturating(g, x).ok

    def test_archived_witness_is_not_maximal(self):
        g = parse_graph((DATA / "cover_witness.graph").read_text())
        x = run(g, AlmostSaturating(g.max_degree)).assignment
        r = verify(g, x)
        assert r.feasible and not r.maximal
        assert check_almost_saturating(g, x).ok
        assert r.unsaturated_edges == {3: (H, H)}

    @pytest.mark.parametrize("delta", [4, 6])
    def test_half_saturated_degree_drops(self, delta):
        for seed in range(15):
            g = random_graph(60, delta, seed=seed)
            x = run(g, AlmostSaturating(delta)).assignment
            h, _ = subgraph(g, classify_saturation(g, x)["half"])
            assert h.max_degree <= delta - 1


class TestOddStep:
    def test_labels(self):
        assert canonical_labels(3) == [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)]
        assert len(canonical_labels(7)) == 28

    @pytest.mark.parametrize("delta", [3, 5, 7])
    def test_full_degree_node_has_end_edge(self, delta):
        for seed in range(30):
            g = random_graph(40, delta, seed=seed)
            label_deg = Counter()
            for e in g.edges:
                lab = frozenset((e.tail_port, e.head_port))
                label_deg[e.tail, lab] += 1
                label_deg[e.head, lab] += 1
            for v in g.nodes:
                if g.degree(v) != delta:
                    continue
                ends = [
                    p
                    for p, inc in g.ports(v).items()
                    if not (
                        label_deg[v, frozenset((p, inc.peer_port))] == 2
                        and label_deg[inc.peer, frozenset((p, inc.peer_port))] == 2
                    )
                ]
                assert ends

    def test_end_edge_at_saturated_node_gets_zero(self):
        # a consistently numbered C4 is all Mid (label {1,2}); the pendant
        # edge at node 0 is End and node 0 is saturated by the inner step
        edges = [Edge(str(i), 1, str((i + 1) % 4), 2) for i in range(4)] + [Edge("0", 3, "leaf", 1)]
        g = PortGraph.build(["0", "1", "2", "3", "leaf"], edges)
        x = run(g, mfm(3)).assignment
        assert x == {0: H, 1: H, 2: H, 3: H, 4: 0}
        assert verify(g, x, ("S", 1)).ok

    def test_graph_of_lower_degree(self):
        for seed in range(20):
            g = random_graph(30, 2, seed=seed)
            assert verify(g, run(g, mfm(3)).assignment, ("S", 1)).ok

    def test_bad_construction(self):
        with pytest.raises(ValueError):
            EvenStep(5, mfm(4))
        with pytest.raises(ValueError):
            OddStep(4, mfm(3))


class TestEvenStep:
    def test_already_maximal(self):
        g = star(4)
        xbar = run(g, AlmostSaturating(4)).assignment
        assert classify_saturation(g, xbar)["half"] == []
        assert run(g, mfm(4)).assignment == xbar

    @pytest.mark.parametrize("delta", [4, 6])
    def test_half_saturated_edges_end_saturated(self, delta):
        for seed in range(25):
            g = random_graph(50, delta, seed=seed)
            xbar = run(g, AlmostSaturating(delta)).assignment
            x = run(g, mfm(delta)).assignment
            load = loads(g, x)
            for i in classify_saturation(g, xbar)["half"]:
                e = g.edges[i]
                assert max(load[e.tail], load[e.head]) == 1
            assert all(x[i] >= xbar[i] for i in x)

    def test_random_g4(self):
        for seed in range(100):
            g = random_graph(40, 4, seed=seed)
            assert verify(g, run(g, mfm(4)).assignment, ("S", 2)).ok


class TestDispatcher:
    def test_round_schedule(self):
        for delta in range(1, 8):
            assert mfm(delta).rounds == _expected_rounds(delta) <= round_bound(delta)
        assert [mfm(d).rounds for d in range(1, 8)] == [1, 1, 15, 24, 56, 69, 127]

    def test_value_sets(self):
        assert [value_set_for(d) for d in (1, 2, 3, 4, 5)] == [("S", 1)] * 3 + [("S", 2)] * 2

    def test_delta_one(self):
        g = PortGraph.build("abcd", [Edge("a", 1, "b", 1), Edge("c", 1, "d", 1)])
        assert run(g, mfm(1)).assignment == {0: 1, 1: 1}

    def test_delta_three_is_half_integral(self):
        for seed in range(30):
            g = random_graph(80, 3, seed=seed)
            res = run(g, mfm(3))
            assert set(res.assignment.values()) <= set(S(1))
            assert verify(g, res.assignment).ok

    def test_delta_five(self):
        for seed in range(10):
            g = random_graph(60, 5, seed=seed)
            res = run(g, mfm(5))
            assert res.rounds <= 625
            assert verify(g, res.assignment, ("S", 2)).ok

    def test_c8_all_half(self):
        res = run(consistent_cycle(8), mfm(3))
        assert set(res.assignment.values()) == {H}

    def test_degree_fault(self):
        with pytest.raises(DegreeFault):
            run(star(5), mfm(4))

    def test_registry(self):
        assert get_algorithm("base2", 7).delta == 2
        assert get_algorithm("uniform", 3).name == "uniform-3"
        with pytest.raises(ValueError):
            get_algorithm("nope", 3)


def test_every_small_cycle_numbering():
    """Adversarial numberings of C_n change the output but never its validity."""
    for n in range(3, 9):
        for flips in itertools.product((False, True), repeat=n):
            g = _cycle_with_flips(n, flips)
            assert verify(g, run(g, mfm(3)).assignment, ("S", 1)).ok


def _cycle_with_flips(n, flips):
    # node i uses port 1 towards i+1 unless flipped
    def port(v, towards_next):
        return 1 if towards_next != flips[v] else 2

    edges = [Edge(str(i), port(i, True), str((i + 1) % n), port((i + 1) % n, False)) for i in range(n)]
    return PortGraph.build([str(i) for i in range(n)], edges)
