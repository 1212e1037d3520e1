"""Command-line front end.

Exit codes: 0 ok, 1 verification failed, 2 usage or parse error,
3 algorithm fault, 4 round budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from collections import Counter
from pathlib import Path

from . import generate as gen
from .algorithms import get_algorithm, round_bound
from .graph import GraphError, PortGraph, format_graph, parse_graph, to_dot, two_coloring, validate
from .lowerbound import harness, make_G0
from .oracle import SearchTooLarge, exhaustive_mfm_search, obs32_witness_search
from .rationals import S, class_index, format_rat, parse_rat, parse_value_set
from .sim import AlgorithmFault, BudgetExceeded, Model, ModelError, run, run_loopy
from .verify import format_assignment, parse_assignment, verify

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_FAULT, EXIT_BUDGET = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _read_graph(path: str) -> PortGraph:
    try:
        g = parse_graph(Path(path).read_text())
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    except GraphError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    problems = validate(g)
    if problems:
        raise UsageError(f"{path}: invalid graph: " + "; ".join(problems))
    return g


def _read_ids(path: str) -> dict[str, int]:
    ids = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            node, ident = line.split()
            ids[node] = int(ident)
    return ids


# -- subcommands ------------------------------------------------------------


def cmd_generate(args) -> int:
    for name in ("n", "delta", "d"):
        value = getattr(args, name)
        if value is not None and value < 1:
            raise UsageError(f"--{name} must be >= 1")
    rng = random.Random(args.seed)
    if args.kind == "path":
        g = gen.path(args.n or 2, rng)
    elif args.kind == "cycle":
        if (args.n or 3) < 3:
            raise UsageError("a cycle needs --n >= 3")
        g = gen.cycle(args.n or 3, rng)
    elif args.kind == "random":
        if args.n is None or args.delta is None:
            raise UsageError("random graphs need --n and --delta")
        g = gen.random_graph(args.n, args.delta, args.seed)
    elif args.kind == "g0":
        g = make_G0(args.d or 1)
    else:
        return _generate_chain(args)
    _write(format_graph(g), args.output)
    return EXIT_OK


def _generate_chain(args) -> int:
    if args.output in (None, "-"):
        raise UsageError("lb-chain writes one file per level; give --output DIR")
    d = args.d or 1
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    alg = get_algorithm(args.algorithm, args.delta or 2 * d)
    report = harness(alg, d, args.T, dump=lambda i, text: (out / f"G{i}.txt").write_text(text))
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    return EXIT_OK if report.complete else EXIT_VERIFY


def cmd_run(args) -> int:
    g = _read_graph(args.graph)
    delta = args.delta or max(g.max_degree, 1)
    alg = get_algorithm(args.algorithm, delta)
    model = Model(args.model)
    inputs = None
    if args.algorithm == "proposal-mm":
        inputs = two_coloring(g)
        if inputs is None:
            raise UsageError("proposal-mm needs a bipartite graph")
    try:
        if g.has_loops:
            result = run_loopy(g, alg, model, args.max_rounds, inputs=inputs, trace=bool(args.trace))
        else:
            ids = _read_ids(args.ids) if args.ids else None
            result = run(g, alg, model, args.max_rounds, ids=ids, seed=args.seed, inputs=inputs, trace=bool(args.trace))
    except ModelError as exc:
        raise UsageError(str(exc)) from exc
    except AlgorithmFault as exc:
        print(f"algorithm fault at node {exc.node!r}, round {exc.round}: {exc}", file=sys.stderr)
        return EXIT_FAULT
    except BudgetExceeded as exc:
        print(f"round budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET

    _write(format_assignment(result.assignment), args.output)
    values = list(result.assignment.values())
    stats = {
        "algorithm": args.algorithm,
        "delta": delta,
        "model": model.value,
        "nodes": len(g.nodes),
        "edges": len(g.edges),
        "rounds": result.rounds,
        "round_bound": round_bound(delta),
        "class_histogram": {str(k): v for k, v in sorted(Counter(class_index(q) for q in values).items())},
        "value_histogram": {format_rat(k): v for k, v in sorted(Counter(values).items())},
    }
    if args.stats:
        Path(args.stats).write_text(json.dumps(stats, indent=2) + "\n")
    else:
        print(json.dumps(stats), file=sys.stderr)
    if args.trace:
        Path(args.trace).write_text("".join(json.dumps(rec) + "\n" for rec in result.trace))
    return EXIT_OK


def cmd_verify(args) -> int:
    g = _read_graph(args.graph)
    try:
        x = parse_assignment(Path(args.assignment).read_text())
        value_set = parse_value_set(args.value_set) if args.value_set else None
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    report = verify(g, x, value_set)
    _write(report.to_json() + "\n", args.output)
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_lb_harness(args) -> int:
    alg = get_algorithm(args.algorithm, args.delta or 2 * args.d)
    dump = None
    if args.dump_dir:
        out = Path(args.dump_dir)
        out.mkdir(parents=True, exist_ok=True)
        dump = lambda i, text: (out / f"G{i}.txt").write_text(text)  # noqa: E731
    report = harness(alg, args.d, args.T, margin=args.margin, model=args.model, dump=dump)
    _write(json.dumps(report.to_dict(), indent=2) + "\n", args.output)
    return EXIT_OK if report.complete else EXIT_VERIFY


def cmd_oracle(args) -> int:
    if args.check == "mfm":
        if not args.graph:
            raise UsageError("oracle mfm needs --graph")
        g = _read_graph(args.graph)
        kind, k = parse_value_set(args.values)
        if kind != "S":
            raise UsageError("oracle mfm enumerates over a finite S(d)")
        try:
            found = exhaustive_mfm_search(g, S(k))
        except SearchTooLarge as exc:
            raise UsageError(str(exc)) from exc
        out = {"solutions": len(found), "assignments": [{str(i): format_rat(q) for i, q in x.items()} for x in found]}
    else:
        target = parse_rat(args.target)
        res = obs32_witness_search(args.n, target, args.r, args.r_prime, args.q)
        out = {
            "n": res.n,
            "target": format_rat(res.target),
            "r": res.r,
            "r_prime": res.r_prime,
            "solutions": res.solutions,
            "counterexamples": [[[format_rat(v) for v in ls], [format_rat(v) for v in xs]] for ls, xs in res.counterexamples],
            "holds": res.holds,
        }
    _write(json.dumps(out, indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_export_dot(args) -> int:
    g = _read_graph(args.graph)
    _write(to_dot(g), args.output)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracmatch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a graph instance")
    p.add_argument("kind", choices=["path", "cycle", "random", "g0", "lb-chain"])
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algorithm", default="mfm", help="algorithm traced by lb-chain")
    p.add_argument("--T", type=int, help="lb-chain path parameter (default: measured rounds + 2)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="run an algorithm on a graph file")
    p.add_argument("algorithm", help="mfm, base2, almost-sat, proposal-mm or uniform")
    p.add_argument("--graph", required=True)
    p.add_argument("--delta", type=int, help="known max degree (default: the graph's)")
    p.add_argument("--model", choices=[m.value for m in Model], default="pn")
    p.add_argument("--max-rounds", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0, help="seed for LOCAL identifiers")
    p.add_argument("--ids", help="file of '<node> <id>' lines overriding generated identifiers")
    p.add_argument("-o", "--output", help="assignment file (default stdout)")
    p.add_argument("--stats", help="stats JSON file (default stderr)")
    p.add_argument("--trace", help="JSON-lines trace file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="check an assignment file")
    p.add_argument("--graph", required=True)
    p.add_argument("--assignment", required=True)
    p.add_argument("--value-set", help='"S(d)" or "R<=n"')
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lb-harness", help="run the lower-bound chain against an algorithm")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--algorithm", default="mfm")
    p.add_argument("--delta", type=int, help="delta passed to the algorithm (default 2d)")
    p.add_argument("--T", type=int)
    p.add_argument("--margin", type=int, default=2)
    p.add_argument("--model", choices=["pn", "po"], default="po")
    p.add_argument("--dump-dir", help="write every G_i in the graph text format")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_lb_harness)

    p = sub.add_parser("oracle", help="brute-force spot checks")
    p.add_argument("check", choices=["mfm", "obs32"])
    p.add_argument("--graph")
    p.add_argument("--values", default="S(1)")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--target", default="1/2")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--r-prime", type=int, default=1)
    p.add_argument("--q", type=int, default=24, help="largest grid denominator")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("export-dot", help="graph file to Graphviz DOT")
    p.add_argument("--graph", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_dot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "delta", None) is not None and args.delta < 1:
        parser.error("--delta must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fracmatch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"fracmatch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
