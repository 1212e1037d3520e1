"""Round-synchronous execution of node-local algorithms (PN, PO, LOCAL).

An :class:`Algorithm` spawns one :class:`NodeProgram` per node. The engine
calls ``start()`` once (local computation before any communication), then
once per round delivers every message sent in the previous step and calls
``receive(inbox)``. A program halts by calling :meth:`NodeProgram.halt`
with its output, one value per port; the outbox returned from the halting
step is still delivered, nothing after it is.

Loopy graphs are run without materialising their unfolding: every lift of
a node has the same state, so whatever a node sends out of one side of a
loop arrives at its own other side. This is what ordinary delivery already
does for an edge whose two endpoints are the same node.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Mapping

from .graph import GraphError, PortGraph, validate


class SimulationError(Exception):
    pass


class ModelError(SimulationError):
    pass


class BudgetExceeded(SimulationError):
    pass


class AlgorithmFault(SimulationError):
    """An algorithm broke its own contract (bad output, violated invariant)."""

    node: str | None = None
    round: int | None = None


class DegreeFault(AlgorithmFault):
    pass


class OutputMismatch(AlgorithmFault):
    pass


class Model(str, Enum):
    PN = "pn"
    PO = "po"
    LOCAL = "local"


@dataclass(frozen=True)
class View:
    """What a node knows before the first round."""

    degree: int
    outgoing: tuple[bool, ...] | None = None
    ident: int | None = None
    input: Any = None

    def is_outgoing(self, port: int) -> bool:
        if self.outgoing is None:
            raise ModelError("edge orientation is not visible in the PN model")
        return self.outgoing[port - 1]


class NodeProgram:
    output: dict[int, Fraction] | None = None

    def __init__(self, view: View):
        self.view = view

    @property
    def halted(self) -> bool:
        return self.output is not None

    def halt(self, output: Mapping[int, Fraction]) -> None:
        self.output = dict(output)

    def start(self) -> dict[int, Any]:
        return {}

    def receive(self, inbox: dict[int, Any]) -> dict[int, Any]:
        raise NotImplementedError


class Algorithm:
    """Factory of node programs.

    ``rounds`` is the exact number of rounds after which every node has
    halted, when the algorithm runs on a fixed schedule; ``None`` otherwise.
    """

    name = "algorithm"
    rounds: int | None = None

    def spawn(self, view: View) -> NodeProgram:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"


@dataclass
class RunResult:
    assignment: dict[int, Fraction]
    rounds: int
    halting_rounds: dict[str, int]
    outputs: dict[str, dict[int, Fraction]]
    trace: list[dict] | None = None


def generate_ids(nodes, seed: int = 0) -> dict[str, int]:
    """Injective identifiers drawn from ``1..n**3``."""
    nodes = list(nodes)
    n = len(nodes)
    picks = random.Random(seed).sample(range(1, n**3 + 1), n)
    return dict(zip(nodes, picks))


def state_digest(program: NodeProgram) -> str:
    return hashlib.sha256(repr(_state(program)).encode()).hexdigest()[:16]


def _state(obj, seen=None):
    """A repr-stable snapshot: object attributes are expanded, never shown by address."""
    seen = set() if seen is None else seen
    if isinstance(obj, (str, int, float, bool, Fraction, type(None))):
        return repr(obj)
    if isinstance(obj, dict):
        return tuple(sorted((repr(k), _state(v, seen)) for k, v in obj.items()))
    if isinstance(obj, (list, tuple)):
        return tuple(_state(v, seen) for v in obj)
    if isinstance(obj, (set, frozenset)):
        return tuple(sorted(repr(v) for v in obj))
    if hasattr(obj, "__dict__") and not isinstance(obj, View):
        if id(obj) in seen:
            return type(obj).__name__
        seen.add(id(obj))
        return (type(obj).__name__, tuple((k, _state(v, seen)) for k, v in sorted(vars(obj).items())))
    return repr(obj)


def run(
    g: PortGraph,
    alg: Algorithm,
    model: Model | str = Model.PN,
    max_rounds: int = 100_000,
    *,
    ids: Mapping[str, int] | None = None,
    seed: int = 0,
    inputs: Mapping[str, Any] | None = None,
    trace: bool = False,
) -> RunResult:
    """Run ``alg`` on a loop-free graph."""
    model = Model(model)
    if g.has_loops:
        raise GraphError("graph has loops; use run_loopy")
    if model is Model.LOCAL:
        ids = dict(ids) if ids is not None else generate_ids(g.nodes, seed)
        if len(set(ids.values())) != len(g.nodes) or set(ids) != set(g.nodes):
            raise ModelError("LOCAL identifiers must be given for every node and be unique")
    return _execute(g, alg, model, max_rounds, ids, inputs, trace)


def run_loopy(
    g: PortGraph,
    alg: Algorithm,
    model: Model | str = Model.PO,
    max_rounds: int = 100_000,
    *,
    inputs: Mapping[str, Any] | None = None,
    trace: bool = False,
) -> RunResult:
    """Run ``alg`` on a graph that may contain loops, as if on its unfolding.

    The value reported for a loop is the one its node emits on both loop
    ports; they must agree.
    """
    model = Model(model)
    if model is Model.LOCAL:
        raise ModelError("identifiers on the unfolding of a loopy graph are undefined")
    return _execute(g, alg, model, max_rounds, None, inputs, trace)


def _execute(g, alg, model, max_rounds, ids, inputs, trace) -> RunResult:
    problems = validate(g)
    if problems:
        raise GraphError("invalid port graph: " + "; ".join(problems))
    programs: dict[str, NodeProgram] = {}
    for v in g.nodes:
        ports = g.ports(v)
        deg = len(ports)
        outgoing = tuple(ports[p].outgoing for p in range(1, deg + 1)) if model is not Model.PN else None
        view = View(
            degree=deg,
            outgoing=outgoing,
            ident=ids[v] if ids is not None else None,
            input=inputs.get(v) if inputs is not None else None,
        )
        programs[v] = alg.spawn(view)

    wiring = {v: [(p, inc.peer, inc.peer_port) for p, inc in g.ports(v).items()] for v in g.nodes}
    log: list[dict] | None = [] if trace else None
    halted_at: dict[str, int] = {}
    outboxes: dict[str, dict[int, Any]] = {}
    for v, prog in programs.items():
        outboxes[v] = _step(prog, v, 0, None)
        if prog.halted:
            halted_at[v] = 0
    _record(log, 0, programs, outboxes, halted_at)

    r = 0
    while len(halted_at) < len(programs):
        r += 1
        if r > max_rounds:
            raise BudgetExceeded(f"{len(programs) - len(halted_at)} nodes still running after {max_rounds} rounds")
        inboxes = {}
        for v in programs:
            if v in halted_at:
                continue
            inbox = {}
            for p, peer, peer_port in wiring[v]:
                sent = outboxes.get(peer)
                if sent and peer_port in sent:
                    inbox[p] = sent[peer_port]
            inboxes[v] = inbox
        outboxes = {}
        for v, inbox in inboxes.items():
            prog = programs[v]
            outboxes[v] = _step(prog, v, r, inbox)
            if prog.halted:
                halted_at[v] = r
        _record(log, r, {v: programs[v] for v in inboxes}, outboxes, halted_at)

    outputs = {v: prog.output for v, prog in programs.items()}
    assignment = reconcile(g, outputs)
    return RunResult(assignment, max(halted_at.values(), default=0), halted_at, outputs, log)


def _step(prog: NodeProgram, v: str, r: int, inbox) -> dict[int, Any]:
    try:
        out = prog.start() if inbox is None else prog.receive(inbox)
    except AlgorithmFault as exc:
        exc.node, exc.round = v, r
        raise
    deg = prog.view.degree
    out = out or {}
    if any(not 1 <= p <= deg for p in out):
        raise AlgorithmFault(f"node {v!r} round {r}: message on a port it does not have")
    return out


def _record(log, r, programs, outboxes, halted_at) -> None:
    if log is None:
        return
    for v, prog in programs.items():
        log.append(
            {
                "round": r,
                "node": v,
                "state": state_digest(prog),
                "outbox": {str(p): len(repr(m).encode()) for p, m in sorted(outboxes.get(v, {}).items())},
                "halted": v in halted_at,
            }
        )


def reconcile(g: PortGraph, outputs: Mapping[str, Mapping[int, Fraction]]) -> dict[int, Fraction]:
    """Merge the per-port outputs into one value per edge; endpoints must agree exactly."""
    for v, out in outputs.items():
        extra = set(out) - set(g.ports(v))
        if extra:
            raise AlgorithmFault(f"node {v!r} output names unknown ports {sorted(extra)}")
        for p, val in out.items():
            if not isinstance(val, (int, Fraction)) or isinstance(val, bool):
                raise AlgorithmFault(f"node {v!r} port {p}: output {val!r} is not an exact rational")
    assignment = {}
    for i, e in enumerate(g.edges):
        try:
            a = outputs[e.tail][e.tail_port]
            b = outputs[e.head][e.head_port]
        except KeyError:
            raise AlgorithmFault(f"edge {i}: an endpoint produced no output") from None
        if a != b:
            raise OutputMismatch(f"edge {i}: endpoints output {a} and {b}")
        assignment[i] = Fraction(a)
    return assignment


# -- probe algorithms used by tests and the CLI -----------------------------


class UniformShare(Algorithm):
    """0 rounds: every port gets ``1/delta`` (``1/deg`` if no delta given)."""

    rounds = 0

    def __init__(self, delta: int | None = None):
        self.delta = delta
        self.name = "uniform" if delta is None else f"uniform-{delta}"

    def spawn(self, view):
        return _UniformNode(view, self.delta)


class _UniformNode(NodeProgram):
    def __init__(self, view, delta):
        super().__init__(view)
        self.delta = delta

    def start(self):
        share = Fraction(1, self.delta or max(self.view.degree, 1))
        self.halt({p: share for p in range(1, self.view.degree + 1)})
        return {}


class ViewDigest(Algorithm):
    """Refines a hash of the local view for ``rounds`` rounds, then labels
    every edge with a value derived from both endpoints' digests.

    The output is not a matching; it only makes edge labels depend on
    everything a ``rounds``-round algorithm can see.
    """

    def __init__(self, rounds: int, oriented: bool = False):
        if rounds < 1:
            raise ValueError("ViewDigest needs at least one round")
        self.rounds = rounds
        self.oriented = oriented
        self.name = f"digest-{rounds}{'-po' if oriented else ''}"

    def spawn(self, view):
        return _DigestNode(view, self)


def _h(*parts) -> int:
    # tuples of ints hash the same in every process (only str/bytes are salted)
    return hash(parts) & 0xFFFFFFFFFFFF


class _DigestNode(NodeProgram):
    def __init__(self, view, alg):
        super().__init__(view)
        self.total = alg.rounds
        self.r = 0
        deg = view.degree
        # orientation flags as ints: 2 when hidden (PN), else 1 for outgoing, 0 for incoming
        self.flags = tuple(int(view.is_outgoing(p)) if alg.oriented else 2 for p in range(1, deg + 1))
        self.color = _h(deg, self.flags)

    def _messages(self):
        c = self.color
        return {p: (c, p, f) for p, f in enumerate(self.flags, start=1)}

    def start(self):
        return self._messages()

    def receive(self, inbox):
        self.r += 1
        if self.r == self.total:
            out = {}
            for p in range(1, self.view.degree + 1):
                color, q, _ = inbox[p]
                mine, theirs = (self.color, p), (color, q)
                out[p] = Fraction(_h(min(mine, theirs), max(mine, theirs)) % 17, 16)
            self.halt(out)
            return {}
        seen = tuple((p, f, inbox[p]) for p, f in enumerate(self.flags, start=1))
        self.color = _h(self.color, seen)
        return self._messages()


class Constant(Algorithm):
    """0 rounds: the same value on every port (a deliberately wrong baseline)."""

    rounds = 0

    def __init__(self, value: Fraction = Fraction(0)):
        self.value = Fraction(value)
        self.name = f"constant-{self.value}"

    def spawn(self, view):
        return _ConstantNode(view, self.value)


class _ConstantNode(NodeProgram):
    def __init__(self, view, value):
        super().__init__(view)
        self.value = value

    def start(self):
        self.halt({p: self.value for p in range(1, self.view.degree + 1)})
        return {}
