"""Exact checks for fractional matchings.

Node loads sum the values behind every port, so a loop (two ports)
contributes its value twice.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .graph import PortGraph
from .rationals import HALF, ONE, ZERO, class_index, format_rat, in_value_set, parse_rat

Assignment = Mapping[int, Fraction]


def node_load(g: PortGraph, x: Assignment, v: str) -> Fraction:
    return sum((x[inc.edge] for inc in g.ports(v).values()), ZERO)


def loads(g: PortGraph, x: Assignment) -> dict[str, Fraction]:
    return {v: node_load(g, x, v) for v in g.nodes}


@dataclass
class VerifyReport:
    feasible: bool
    maximal: bool
    saturated: list[str]
    overloaded: dict[str, Fraction] = field(default_factory=dict)
    unsaturated_edges: dict[int, tuple[Fraction, Fraction]] = field(default_factory=dict)
    bad_values: dict[int, Fraction] = field(default_factory=dict)
    missing: list[int] = field(default_factory=list)
    classes: dict[int, int] = field(default_factory=dict)
    in_value_set: dict[int, bool] | None = None

    @property
    def values_ok(self) -> bool:
        return self.in_value_set is None or all(self.in_value_set.values())

    @property
    def ok(self) -> bool:
        return self.feasible and self.maximal and self.values_ok

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "feasible": self.feasible,
            "maximal": self.maximal,
            "values_ok": self.values_ok,
            "saturated": self.saturated,
            "overloaded": {v: format_rat(q) for v, q in self.overloaded.items()},
            "unsaturated_edges": {str(i): [format_rat(a), format_rat(b)] for i, (a, b) in self.unsaturated_edges.items()},
            "bad_values": {str(i): format_rat(q) for i, q in self.bad_values.items()},
            "missing": self.missing,
            "classes": {str(i): c for i, c in self.classes.items()},
            "in_value_set": None if self.in_value_set is None else {str(i): ok for i, ok in self.in_value_set.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def verify(g: PortGraph, x: Assignment, value_set: tuple[str, int] | None = None) -> VerifyReport:
    """Feasibility, maximality and (optionally) value-set membership of ``x``.

    ``value_set`` is ``("S", d)`` or ``("R", n)`` as produced by
    :func:`fracmatch.rationals.parse_value_set`.
    """
    missing = [i for i in range(len(g.edges)) if i not in x]
    bad = {i: Fraction(q) for i, q in sorted(x.items()) if not ZERO <= q <= ONE}
    full = {i: Fraction(x.get(i, ZERO)) for i in range(len(g.edges))}
    load = loads(g, full)
    overloaded = {v: q for v, q in load.items() if q > ONE}
    saturated = sorted(v for v, q in load.items() if q == ONE)
    unsat = {}
    for i, e in enumerate(g.edges):
        if load[e.tail] != ONE and load[e.head] != ONE:
            unsat[i] = (load[e.tail], load[e.head])
    verdict = None
    if value_set is not None:
        verdict = {i: in_value_set(full[i], value_set) for i in range(len(g.edges))}
    return VerifyReport(
        feasible=not overloaded and not bad and not missing,
        maximal=not unsat,
        saturated=saturated,
        overloaded=overloaded,
        unsaturated_edges=unsat,
        bad_values=bad,
        missing=missing,
        classes={i: class_index(q) for i, q in full.items() if ZERO <= q <= ONE},
        in_value_set=verdict,
    )


def _require_half_integral(x: Assignment) -> None:
    odd = {i: q for i, q in x.items() if q not in (ZERO, HALF, ONE)}
    if odd:
        raise ValueError(f"assignment is not half-integral on edges {sorted(odd)}")


@dataclass
class AlmostSaturatingReport:
    ok: bool
    violations: dict[str, str]


def check_almost_saturating(g: PortGraph, x: Assignment) -> AlmostSaturatingReport:
    """Load-0 nodes need every neighbour saturated; load-1/2 nodes need one."""
    _require_half_integral(x)
    load = loads(g, x)
    violations = {}
    for v in g.nodes:
        nbrs = [inc.peer for inc in g.ports(v).values()]
        if load[v] > ONE:
            violations[v] = f"load {format_rat(load[v])} exceeds 1"
        elif load[v] == ZERO and any(load[u] != ONE for u in nbrs):
            violations[v] = "load 0 with an unsaturated neighbour"
        elif load[v] == HALF and not any(load[u] == ONE for u in nbrs):
            violations[v] = "load 1/2 without a saturated neighbour"
    return AlmostSaturatingReport(not violations, violations)


def classify_saturation(g: PortGraph, x: Assignment) -> dict[str, list[int]]:
    _require_half_integral(x)
    load = loads(g, x)
    parts: dict[str, list[int]] = {"half": [], "full": [], "other": []}
    for i, e in enumerate(g.edges):
        a, b = load[e.tail], load[e.head]
        if a == ONE or b == ONE:
            parts["full"].append(i)
        elif a == HALF and b == HALF:
            parts["half"].append(i)
        else:
            parts["other"].append(i)
    return parts


def format_assignment(x: Assignment) -> str:
    return "".join(f"x {i} {format_rat(q)}\n" for i, q in sorted(x.items()))


def parse_assignment(text: str) -> dict[int, Fraction]:
    x = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] != "x" or not parts[1].isdigit():
            raise ValueError(f"line {lineno}: malformed assignment record {line!r}")
        i = int(parts[1])
        if i in x:
            raise ValueError(f"line {lineno}: edge {i} assigned twice")
        x[i] = parse_rat(parts[2])
    return x
