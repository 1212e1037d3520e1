"""Maximal fractional matching with values in ``S(d) = {i / 2**d}``.

Everything here is a PN algorithm on a fixed schedule: the round in which
each phase starts is a function of the known maximum degree only, so
composites can run an inner algorithm on a subgraph and every node knows
when that phase ends.

* ``BaseCase``        max degree <= 2, one round, values in {0, 1/2, 1}
* ``ProposalMM``      maximal matching in a 2-coloured graph, 2*delta rounds
* ``AlmostSaturating``  proposal matching on the bipartite double cover,
  folded back as ``x(uv) = (x'(u1 v2) + x'(u2 v1)) / 2``
* ``OddStep``         degree 2d+1 from an algorithm for degree 2d
* ``EvenStep``        degree 2d+2 from an algorithm for degree 2d+1
* :func:`mfm`         the recursive dispatcher
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

from .graph import BLACK, WHITE, compact_ports
from .rationals import HALF, ONE, ZERO
from .sim import Algorithm, AlgorithmFault, DegreeFault, NodeProgram, View


def round_bound(delta: int) -> int:
    """The 5 * delta**3 budget the recursive construction must stay within."""
    return 5 * delta**3


def value_set_for(delta: int) -> tuple[str, int]:
    return ("S", max(1, delta // 2))


def canonical_labels(delta: int) -> list[tuple[int, int]]:
    """Every unordered port pair {i, j} with 1 <= i <= j <= delta, sorted by (min, max)."""
    return [(i, j) for i in range(1, delta + 1) for j in range(i, delta + 1)]


def _check_degree(view: View, delta: int, name: str) -> None:
    if view.degree > delta:
        raise DegreeFault(f"{name}: degree {view.degree} exceeds delta = {delta}")


class _Embedded:
    """Runs an inner program on a subset of this node's ports.

    The ports are renumbered ``1..k`` keeping their order; the inner
    program gets a PN view of that degree and exactly ``budget`` rounds.
    """

    def __init__(self, alg: Algorithm, outer_ports, budget: int):
        self.to_inner = compact_ports(outer_ports)
        self.to_outer = {q: p for p, q in self.to_inner.items()}
        self.prog = alg.spawn(View(degree=len(self.to_inner)))
        self.budget = budget
        self.r = 0

    def _lift(self, out):
        return {self.to_outer[q]: m for q, m in (out or {}).items()}

    def start(self):
        return self._lift(self.prog.start())

    def receive(self, inbox):
        self.r += 1
        if self.prog.halted:
            return {}
        return self._lift(self.prog.receive({self.to_inner[p]: m for p, m in inbox.items() if p in self.to_inner}))

    @property
    def done(self) -> bool:
        return self.r >= self.budget

    def output(self) -> dict[int, Fraction]:
        if not self.prog.halted:
            raise AlgorithmFault(f"inner algorithm still running after its {self.budget}-round budget")
        return {self.to_outer[q]: v for q, v in self.prog.output.items()}


# -- base case --------------------------------------------------------------


class BaseCase(Algorithm):
    """One round: degree-2 nodes put 1/2 on both edges; a degree-1 node puts
    1/2 if its neighbour has degree 2 and 1 otherwise."""

    rounds = 1

    def __init__(self, delta: int = 2):
        if delta > 2:
            raise ValueError("the base case handles max degree <= 2 only")
        self.delta = delta
        self.name = "base2"

    def spawn(self, view):
        return _BaseNode(view, self.delta)


class _BaseNode(NodeProgram):
    def __init__(self, view, delta):
        super().__init__(view)
        self.delta = delta

    def start(self):
        _check_degree(self.view, self.delta, "base case")
        return {p: self.view.degree for p in range(1, self.view.degree + 1)}

    def receive(self, inbox):
        deg = self.view.degree
        if deg == 2:
            self.halt({1: HALF, 2: HALF})
        else:
            self.halt({p: HALF if inbox[p] == 2 else ONE for p in range(1, deg + 1)})
        return {}


# -- proposal matching on 2-coloured graphs ---------------------------------

PROPOSE, ACCEPT, REJECT = "propose", "accept", "reject"


class _White:
    """Proposes along ports 1, 2, ... (port k in round 2k-1) until accepted."""

    def __init__(self, degree: int):
        self.degree = degree
        self.port = 1
        self.match: int | None = None

    def start(self):
        return {1: PROPOSE} if self.degree else {}

    def step(self, r: int, inbox):
        if r % 2 == 1 or self.match is not None or self.port > self.degree:
            return {}
        if inbox.get(self.port) == ACCEPT:
            self.match = self.port
            return {}
        self.port += 1
        return {self.port: PROPOSE} if self.port <= self.degree else {}


class _Black:
    """Accepts the lowest-port proposal while unmatched, rejects the rest."""

    def __init__(self, degree: int):
        self.degree = degree
        self.match: int | None = None

    def start(self):
        return {}

    def step(self, r: int, inbox):
        if r % 2 == 0:
            return {}
        proposals = sorted(p for p, m in inbox.items() if m == PROPOSE)
        out = {p: REJECT for p in proposals}
        if proposals and self.match is None:
            self.match = proposals[0]
            out[self.match] = ACCEPT
        return out


class ProposalMM(Algorithm):
    """Maximal matching when every node's input is ``"white"`` or ``"black"``."""

    def __init__(self, delta: int):
        self.delta = delta
        self.rounds = 2 * delta
        self.name = "proposal-mm"

    def spawn(self, view):
        if view.input not in (WHITE, BLACK):
            raise ValueError(f"proposal matching needs a white/black input colour, got {view.input!r}")
        return _ProposalNode(view, self)


class _ProposalNode(NodeProgram):
    def __init__(self, view, alg):
        super().__init__(view)
        _check_degree(view, alg.delta, alg.name)
        self.total = alg.rounds
        self.role = (_White if view.input == WHITE else _Black)(view.degree)
        self.r = 0

    def start(self):
        if self.total == 0:
            self._finish()
        return self.role.start()

    def receive(self, inbox):
        self.r += 1
        out = self.role.step(self.r, inbox)
        if self.r == self.total:
            self._finish()
            return {}
        return out

    def _finish(self):
        self.halt({p: ONE if p == self.role.match else ZERO for p in range(1, self.view.degree + 1)})


# -- almost-saturating half-integral matching ------------------------------


class _CoverPair:
    """Both double-cover copies of one node: copy 1 white, copy 2 black.

    A message on port p is a pair (white's, black's); what arrives from the
    neighbour's white copy is meant for our black copy and vice versa.
    """

    def __init__(self, degree: int):
        self.degree = degree
        self.white = _White(degree)
        self.black = _Black(degree)

    @staticmethod
    def _pair(w, b):
        return {p: (w.get(p), b.get(p)) for p in sorted(set(w) | set(b))}

    def start(self):
        return self._pair(self.white.start(), self.black.start())

    def step(self, r, inbox):
        to_white = {p: m[1] for p, m in inbox.items() if m[1] is not None}
        to_black = {p: m[0] for p, m in inbox.items() if m[0] is not None}
        return self._pair(self.white.step(r, to_white), self.black.step(r, to_black))

    def values(self) -> dict[int, Fraction]:
        return {
            p: Fraction((self.white.match == p) + (self.black.match == p), 2) for p in range(1, self.degree + 1)
        }


class AlmostSaturating(Algorithm):
    """Half-integral, feasible, almost-saturating solution in 2*delta rounds."""

    def __init__(self, delta: int):
        self.delta = delta
        self.rounds = 2 * delta
        self.name = "almost-sat"

    def spawn(self, view):
        return _AlmostSatNode(view, self)


class _AlmostSatNode(NodeProgram):
    def __init__(self, view, alg):
        super().__init__(view)
        _check_degree(view, alg.delta, alg.name)
        self.total = alg.rounds
        self.cover = _CoverPair(view.degree)
        self.r = 0

    def start(self):
        if self.total == 0:
            self.halt(self.cover.values())
        return self.cover.start()

    def receive(self, inbox):
        self.r += 1
        out = self.cover.step(self.r, inbox)
        if self.r == self.total:
            self.halt(self.cover.values())
            return {}
        return out


# -- even step --------------------------------------------------------------


class EvenStep(Algorithm):
    """Degree 2d+2: almost-saturating x, then ``inner`` on its half-saturated
    edges, combined as ``x + x_inner / 2``."""

    def __init__(self, delta: int, inner: Algorithm):
        if delta % 2 or delta < 4:
            raise ValueError("the even step needs an even delta >= 4")
        if inner.rounds is None:
            raise ValueError("inner algorithm must run on a fixed schedule")
        self.delta = delta
        self.inner = inner
        self.matching_rounds = 2 * delta
        self.rounds = self.matching_rounds + 1 + inner.rounds
        self.name = f"mfm-{delta}"

    def spawn(self, view):
        return _EvenNode(view, self)


class _EvenNode(NodeProgram):
    def __init__(self, view, alg: EvenStep):
        super().__init__(view)
        _check_degree(view, alg.delta, alg.name)
        self.alg = alg
        self.cover = _CoverPair(view.degree)
        self.r = 0
        self.xbar: dict[int, Fraction] = {}
        self.load = ZERO
        self.inner: _Embedded | None = None

    def start(self):
        return self.cover.start()

    def receive(self, inbox):
        self.r += 1
        a = self.alg.matching_rounds
        ports = range(1, self.view.degree + 1)
        if self.r < a:
            return self.cover.step(self.r, inbox)
        if self.r == a:
            self.cover.step(self.r, inbox)
            self.xbar = self.cover.values()
            self.load = sum(self.xbar.values(), ZERO)
            return {p: self.load for p in ports}
        if self.r == a + 1:
            self._check_almost_saturating(inbox)
            half = [p for p in ports if self.load == HALF and inbox[p] == HALF]
            if len(half) > self.alg.delta - 1:
                raise AlgorithmFault(f"half-saturated degree {len(half)} exceeds {self.alg.delta - 1}")
            self.inner = _Embedded(self.alg.inner, half, self.alg.inner.rounds)
            return self.inner.start()
        out = self.inner.receive(inbox)
        if self.inner.done:
            extra = self.inner.output()
            self.halt({p: self.xbar[p] + extra.get(p, ZERO) / 2 for p in ports})
            return {}
        return out

    def _check_almost_saturating(self, nbr_loads):
        if self.load == ZERO and any(q != ONE for q in nbr_loads.values()):
            raise AlgorithmFault("load 0 next to an unsaturated neighbour")
        if self.load == HALF and ONE not in nbr_loads.values():
            raise AlgorithmFault("load 1/2 without a saturated neighbour")


# -- odd step ---------------------------------------------------------------


class OddStep(Algorithm):
    """Degree 2d+1 from an algorithm for degree 2d, without new denominators.

    Round 1 labels each edge with its port pair, round 2 tells apart "Mid"
    edges (both ends have two edges of that label) from "End" edges. The
    inner algorithm then runs on the Mid edges, after which End edges are
    filled greedily, one label at a time, two rounds per label.
    """

    def __init__(self, delta: int, inner: Algorithm):
        if delta % 2 == 0 or delta < 3:
            raise ValueError("the odd step needs an odd delta >= 3")
        if inner.rounds is None:
            raise ValueError("inner algorithm must run on a fixed schedule")
        self.delta = delta
        self.inner = inner
        self.labels = canonical_labels(delta)
        self.rounds = 2 + inner.rounds + 2 * len(self.labels)
        self.name = f"mfm-{delta}"

    def spawn(self, view):
        return _OddNode(view, self)


class _OddNode(NodeProgram):
    def __init__(self, view, alg: OddStep):
        super().__init__(view)
        _check_degree(view, alg.delta, alg.name)
        self.alg = alg
        self.r = 0
        self.label: dict[int, tuple[int, int]] = {}
        self.label_degree: dict[tuple[int, int], int] = {}
        self.end: dict[int, bool] = {}
        self.inner: _Embedded | None = None
        self.x: dict[int, Fraction | None] = {}
        self.load = ZERO
        self.k = 0

    @property
    def ports(self):
        return range(1, self.view.degree + 1)

    def start(self):
        return {p: p for p in self.ports}

    def receive(self, inbox):
        self.r += 1
        b = self.alg.inner.rounds
        if self.r == 1:
            return self._label_edges(inbox)
        if self.r == 2:
            return self._classify(inbox)
        if self.r <= 2 + b:
            out = self.inner.receive(inbox)
            if not self.inner.done:
                return out
            self.x = {p: None for p in self.ports}
            self.x.update(self.inner.output())
            self.load = sum((v for v in self.x.values() if v is not None), ZERO)
            return self._announce()
        if (self.r - b) % 2 == 1:
            return self._extend(inbox)
        self._accept(inbox)
        self.k += 1
        if self.k == len(self.alg.labels):
            missing = [p for p, v in self.x.items() if v is None]
            if missing:
                raise AlgorithmFault(f"ports {missing} never received a value")
            self.halt(self.x)
            return {}
        return self._announce()

    def _label_edges(self, inbox):
        for p in self.ports:
            q = inbox[p]
            self.label[p] = (min(p, q), max(p, q))
        for lab in self.label.values():
            self.label_degree[lab] = self.label_degree.get(lab, 0) + 1
        if any(c > 2 for c in self.label_degree.values()):
            raise AlgorithmFault("a port-pair subgraph has a node of degree > 2")
        return {p: self.label_degree[self.label[p]] for p in self.ports}

    def _classify(self, inbox):
        for p in self.ports:
            self.end[p] = not (self.label_degree[self.label[p]] == 2 and inbox[p] == 2)
        mid = [p for p in self.ports if not self.end[p]]
        if len(mid) > self.alg.delta - 1:
            raise AlgorithmFault(f"Mid degree {len(mid)} exceeds {self.alg.delta - 1}")
        self.inner = _Embedded(self.alg.inner, mid, self.alg.inner.rounds)
        return self.inner.start()

    def _current_end_ports(self):
        lab = self.alg.labels[self.k]
        return [p for p in self.ports if self.end[p] and self.label[p] == lab]

    def _announce(self):
        ends = self._current_end_ports()
        return {p: (self.load, len(ends)) for p in ends}

    def _extend(self, inbox):
        ends = self._current_end_ports()
        if len(ends) == 2:
            for p in ends:
                nbr_load, nbr_ends = inbox[p]
                if nbr_ends != 1:
                    raise AlgorithmFault("End edges of one label form a path longer than 2")
                self._assign(p, min(ONE - self.load, ONE - nbr_load))
            return {p: self.x[p] for p in ends}
        if len(ends) == 1:
            (p,) = ends
            nbr_load, nbr_ends = inbox[p]
            if nbr_ends == 1:
                self._assign(p, min(ONE - self.load, ONE - nbr_load))
            elif nbr_ends != 2:
                raise AlgorithmFault("End edges of one label form a path longer than 2")
        return {}

    def _accept(self, inbox):
        for p in self._current_end_ports():
            if self.x[p] is None:
                self._assign(p, inbox[p])
        if self.load > ONE:
            raise AlgorithmFault(f"load {self.load} exceeds 1 after label {self.alg.labels[self.k]}")

    def _assign(self, p, value):
        if self.x[p] is not None:
            raise AlgorithmFault(f"port {p} assigned twice")
        self.x[p] = value
        self.load += value


# -- dispatcher and registry ------------------------------------------------


def mfm(delta: int) -> Algorithm:
    """Maximal fractional matching for max degree ``delta``, values in
    ``S(max(1, delta // 2))``."""
    if delta < 1:
        raise ValueError("delta must be >= 1")
    if delta <= 2:
        alg = BaseCase(delta)
    elif delta % 2:
        alg = OddStep(delta, mfm(delta - 1))
    else:
        alg = EvenStep(delta, mfm(delta - 1))
    alg.name = "mfm"
    return alg


REGISTRY: dict[str, Callable[[int], Algorithm]] = {
    "mfm": mfm,
    "base2": lambda delta: BaseCase(min(delta, 2)),
    "almost-sat": AlmostSaturating,
    "proposal-mm": ProposalMM,
}


def get_algorithm(name: str, delta: int) -> Algorithm:
    if name == "uniform":
        from .sim import UniformShare

        return UniformShare(delta)
    try:
        return REGISTRY[name](delta)
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(REGISTRY) + ['uniform']}") from None
