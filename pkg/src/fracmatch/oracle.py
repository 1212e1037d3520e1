"""Brute-force oracles for small instances.

Nothing here reuses the verifier: loads are summed directly from the edge
list, so these serve as independent cross-checks.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator

from .graph import PortGraph

SEARCH_LIMIT = 10**7


class SearchTooLarge(ValueError):
    pass


def brute_loads(g: PortGraph, x) -> dict[str, Fraction]:
    total = {v: Fraction(0) for v in g.nodes}
    for i, e in enumerate(g.edges):
        total[e.tail] += x[i]
        total[e.head] += x[i]
    return total


def brute_is_mfm(g: PortGraph, x) -> bool:
    total = brute_loads(g, x)
    if any(q > 1 for q in total.values()):
        return False
    return all(total[e.tail] == 1 or total[e.head] == 1 for e in g.edges)


@dataclass
class SearchSpace:
    graph: PortGraph
    values: tuple[Fraction, ...]

    @property
    def size(self) -> int:
        return len(self.values) ** len(self.graph.edges)

    def assignments(self) -> Iterator[dict[int, Fraction]]:
        """Every feasible assignment, edges taken in id order; partial
        assignments that already overload a node are cut off."""
        g, values = self.graph, self.values
        load = {v: Fraction(0) for v in g.nodes}
        chosen: list[Fraction] = []

        def extend(i):
            if i == len(g.edges):
                yield dict(enumerate(chosen))
                return
            e = g.edges[i]
            for val in values:
                load[e.tail] += val
                load[e.head] += val
                if load[e.tail] <= 1 and load[e.head] <= 1:
                    chosen.append(val)
                    yield from extend(i + 1)
                    chosen.pop()
                load[e.tail] -= val
                load[e.head] -= val

        yield from extend(0)


def exhaustive_mfm_search(g: PortGraph, values: Iterable[Fraction]) -> list[dict[int, Fraction]]:
    """All maximal fractional matchings of ``g`` with every value in ``values``."""
    space = SearchSpace(g, tuple(sorted(set(Fraction(v) for v in values))))
    if space.size > SEARCH_LIMIT:
        raise SearchTooLarge(f"{space.size} assignments exceed the limit of {SEARCH_LIMIT}")
    return [x for x in space.assignments() if brute_is_mfm(g, x)]


# -- the even-denominator observation on a finite grid ---------------------


def _twos(q: int) -> int:
    n = 0
    while q % 2 == 0:
        q //= 2
        n += 1
    return n


def grid(max_denominator: int) -> list[Fraction]:
    return sorted({Fraction(p, q) for q in range(1, max_denominator + 1) for p in range(q + 1)})


def _sum_counts(values: list[Fraction], count: int, weight: int) -> Counter:
    sums = Counter({Fraction(0): 1})
    for _ in range(count):
        nxt = Counter()
        for s, c in sums.items():
            for v in values:
                t = s + weight * v
                if t <= 1:
                    nxt[t] += c
        sums = nxt
    return sums


@lru_cache(maxsize=None)
def _grid_values(max_denominator: int, max_twos: int | None) -> tuple[Fraction, ...]:
    values = grid(max_denominator)
    if max_twos is None:
        return tuple(values)
    return tuple(v for v in values if _twos(v.denominator) <= max_twos)


@lru_cache(maxsize=None)
def _grid_sums(max_denominator: int, max_twos: int | None, count: int, weight: int) -> Counter:
    """Sumset counts over the grid (optionally only values with at most
    ``max_twos`` factors of two), shared by every target."""
    return _sum_counts(list(_grid_values(max_denominator, max_twos)), count, weight)


@dataclass
class Obs32Result:
    n: int
    target: Fraction
    r: int
    r_prime: int
    solutions: int
    counterexamples: list[tuple[tuple[Fraction, ...], tuple[Fraction, ...]]] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.counterexamples


def obs32_witness_search(n: int, target: Fraction, r: int, r_prime: int, max_denominator: int = 24) -> Obs32Result:
    """Check every grid solution of ``2*(l_1+..+l_r) + (x_1+..+x_r') + target == 1``.

    Each solution must have some ``l_i`` whose denominator carries more
    than ``n`` factors of two, or some ``x_i`` with at least ``n``. The
    solutions are counted over the whole grid; counterexamples are
    searched among tuples drawn from the complementary (coarse) values.
    """
    target = Fraction(target)
    if _twos(target.denominator) != n:
        raise ValueError(f"{target} does not have exactly {n} factors of two in its denominator")
    rest = 1 - target
    loops, others = _grid_sums(max_denominator, None, r, 2), _grid_sums(max_denominator, None, r_prime, 1)
    solutions = sum(c * others.get(rest - s, 0) for s, c in loops.items())

    coarse_loops = _grid_values(max_denominator, n)
    coarse_others = _grid_values(max_denominator, n - 1)
    bad_loops, bad_others = _grid_sums(max_denominator, n, r, 2), _grid_sums(max_denominator, n - 1, r_prime, 1)
    counterexamples = []
    if any(bad_others.get(rest - s) for s in bad_loops):
        for ls in product(coarse_loops, repeat=r):
            partial = 2 * sum(ls, Fraction(0))
            if partial > rest:
                continue
            for xs in product(coarse_others, repeat=r_prime):
                if partial + sum(xs, Fraction(0)) == rest:
                    counterexamples.append((ls, xs))
    return Obs32Result(n, target, r, r_prime, solutions, counterexamples)


# -- the double-cover mapping does not preserve maximality -----------------


def cover_mapping_witnesses(max_nodes: int = 6, numberings_per_graph: int = 300, limit: int = 1):
    """Search connected graphs on at most ``max_nodes`` nodes (and their port
    numberings) for instances where the proposal matching on the double
    cover, folded back to ``G``, is feasible but not maximal.

    Yields ``(graph, assignment)`` pairs, at most ``limit`` of them.
    """
    import networkx as nx

    from .algorithms import AlmostSaturating
    from .generate import port_numberings
    from .sim import run

    found = 0
    for h in nx.graph_atlas_g():
        n = h.number_of_nodes()
        if n < 2 or n > max_nodes or not nx.is_connected(h):
            continue
        pairs = sorted(tuple(sorted(e)) for e in h.edges)
        for g in port_numberings(n, pairs, numberings_per_graph):
            x = run(g, AlmostSaturating(g.max_degree)).assignment
            total = brute_loads(g, x)
            feasible = all(q <= 1 for q in total.values())
            if feasible and not brute_is_mfm(g, x):
                yield g, x
                found += 1
                if found >= limit:
                    return
                break
