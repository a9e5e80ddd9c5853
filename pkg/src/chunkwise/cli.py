"""Command-line surface: simulate, chunk, split, generate, verify, experiment.

All machine output renders rationals as exact "p/q" strings with a fixed key
order, so identical inputs produce byte-identical outputs. Exit codes:
0 success, 1 domain infeasibility (reported as structured JSON on stdout),
2 input/usage errors (reported on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .agent import BiasProfile, simulate_plan, traverse
from .edge_chunk import evaluate_chunking, optimal_edge_chunking
from .errors import ChunkwiseError, InfeasibleChunking, InvalidParams, ParseError, TakerRefuses
from .expansion import ChunkPlan
from .graph import (
    FanSpec,
    TaskGraph,
    graph_to_dot,
    load_graph,
    make_n_fan,
    save_graph,
    shortest_to_sink,
)
from .graph_chunk import BudgetSpec, chunk_graph_global, chunk_graph_local
from .multi_agent import AgentSet, chunk_same_path, chunk_split, m_agent_single_path_plan, two_agent_plan
from .oracle import EXPERIMENT_HEADER, chunks_needed_rows, cost_ratio_curve
from .rational import format_rat, rat
from .verify import SUITES


def _emit(args: argparse.Namespace, text: str) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_json(args: argparse.Namespace, payload: dict) -> None:
    _emit(args, json.dumps(payload, indent=2) + "\n")


def _read_graph(path: str) -> TaskGraph:
    return load_graph(Path(path).read_bytes())


def _parse_edge(text: str) -> tuple[str, str]:
    parts = text.split(",")
    if len(parts) != 2 or not all(parts):
        raise ParseError("edge", f"expected 'tail,head', got {text!r}")
    return parts[0], parts[1]


def _parse_bias(text: str) -> Fraction:
    value = rat(text)
    if value <= 1:
        raise ParseError("bias", f"bias must be > 1, got {text}")
    return value


def _parse_biases(text: str) -> tuple[Fraction, ...]:
    return tuple(sorted(_parse_bias(part) for part in text.split(",")))


def _decimal(value: Fraction) -> float:
    return float(value)


def _report_json(report, decimal: bool) -> dict:
    payload = {
        "edge": list(report.edge),
        "perceived": [format_rat(p) for p in report.perceived],
        "tau": report.tau,
        "bottleneck": format_rat(report.bottleneck),
        "delta": None if report.delta is None else format_rat(report.delta),
        "selective_bias": format_rat(report.selective_bias),
    }
    if decimal:
        payload["bottleneck_decimal"] = _decimal(report.bottleneck)
        payload["perceived_decimal"] = [_decimal(p) for p in report.perceived]
    return payload


def _chunking_json(chunking) -> dict:
    return {
        "from": chunking.tail,
        "to": chunking.head,
        "chunks": [format_rat(x) for x in chunking.chunks],
    }


def cmd_fan(args: argparse.Namespace) -> int:
    g = make_n_fan(FanSpec(args.n, rat(args.c)))
    if args.format == "dot":
        _emit(args, graph_to_dot(g))
    else:
        _emit(args, save_graph(g).decode("utf-8"))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    g = _read_graph(args.graph)
    profile = BiasProfile(_parse_bias(args.bias))
    if args.plan:
        plan = ChunkPlan.from_json(json.loads(Path(args.plan).read_text()))
        trace, _ = simulate_plan(g, plan, profile)
    else:
        trace = traverse(g, shortest_to_sink(g), profile)
    payload = trace.to_json()
    if args.decimal:
        payload["total_decimal"] = _decimal(trace.total)
    _emit_json(args, payload)
    return 0


def cmd_chunk_edge(args: argparse.Namespace) -> int:
    g = _read_graph(args.graph)
    dist = shortest_to_sink(g)
    edge = _parse_edge(args.edge)
    chunking, report = optimal_edge_chunking(g, dist, edge, _parse_bias(args.bias), args.k)
    payload = _chunking_json(chunking)
    payload["report"] = _report_json(report, args.decimal)
    _emit_json(args, payload)
    return 0


def cmd_chunk_graph(args: argparse.Namespace) -> int:
    g = _read_graph(args.graph)
    budget = BudgetSpec(args.mode, args.k)
    biases = _parse_biases(args.biases)
    if len(biases) == 1:
        planner = chunk_graph_local if budget.mode == "local" else chunk_graph_global
        plan, trace = planner(g, biases[0], budget.k)
        traces = [trace]
    elif args.single_path:
        plan, _ = m_agent_single_path_plan(g, AgentSet(biases), budget)
        traces = [simulate_plan(g, plan, BiasProfile(b))[0] for b in biases]
    elif len(biases) == 2:
        plan, pair = two_agent_plan(g, biases[0], biases[1], budget)
        traces = list(pair)
    else:
        raise ParseError(
            "biases", "more than two types require --single-path"
        )
    payload = plan.to_json()
    payload["traces"] = [t.to_json() for t in traces]
    _emit_json(args, payload)
    return 0


def cmd_split_edge(args: argparse.Namespace) -> int:
    g = _read_graph(args.graph)
    dist = shortest_to_sink(g)
    biases = _parse_biases(args.biases)
    if len(biases) != 2:
        raise ParseError("biases", "split-edge needs exactly two biases")
    edge = _parse_edge(args.edge)
    try:
        chunking, repelled = chunk_split(
            g, dist, edge, biases[0], biases[1], args.k, taker=args.taker
        )
    except TakerRefuses as exc:
        _emit_json(args, {"infeasible": "taker-refuses", "reason": str(exc)})
        return 1
    payload = _chunking_json(chunking)
    payload["repelled_bottleneck"] = format_rat(repelled)
    payload["report"] = _report_json(
        evaluate_chunking(g, dist, chunking, biases[0] if args.taker == 1 else biases[1]),
        args.decimal,
    )
    _emit_json(args, payload)
    return 0


def cmd_same_path_edge(args: argparse.Namespace) -> int:
    g = _read_graph(args.graph)
    dist = shortest_to_sink(g)
    edge = _parse_edge(args.edge)
    agents = AgentSet(_parse_biases(args.biases))
    try:
        chunking = chunk_same_path(g, dist, edge, agents, args.k)
    except InfeasibleChunking as exc:
        _emit_json(args, {"infeasible": "same-path", "reason": exc.reason})
        return 1
    _emit_json(args, _chunking_json(chunking))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    all_ok = True
    for name in names:
        kwargs = {"seed": args.seed, "trials": args.trials}
        if name == "edge-oracle":
            kwargs.update(k_max=args.k, d=args.d)
        elif name == "graph-dp":
            kwargs.update(k_max=args.k)
        else:
            kwargs.update(k=min(args.k, 2), d=min(args.d, 32))
        ok, lines = SUITES[name](**kwargs)
        all_ok &= ok
        status = "ok" if ok else "FAIL"
        sys.stdout.write(f"[{status}] {lines[0]}\n")
        for line in lines[1:]:
            sys.stdout.write(f"    {line}\n")
    return 0 if all_ok else 1


def cmd_experiment(args: argparse.Namespace) -> int:
    if args.which == "cost-ratio":
        rows = cost_ratio_curve(
            _parse_bias(args.bias), rat(args.c), range(1, args.n_max + 1), args.k
        )
    else:
        rows = chunks_needed_rows(
            _parse_bias(args.bias), rat(args.c), range(args.n_min, args.n_max + 1)
        )
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EXPERIMENT_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    _emit(args, buf.getvalue())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chunkwise",
        description="Plan chunkings of weighted task DAGs for present-biased agents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, graph: bool = True) -> None:
        if graph:
            p.add_argument("-g", "--graph", required=True, help="graph JSON file")
        p.add_argument("-o", "--output", help="write output to this file")
        p.add_argument(
            "--decimal", action="store_true", help="add display-only decimal columns"
        )

    p = sub.add_parser("fan", help="generate an n-fan graph")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-c", required=True, help="exit growth factor, exact rational > 1")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    add_common(p, graph=False)
    p.set_defaults(func=cmd_fan)

    p = sub.add_parser("simulate", help="walk a biased agent and emit its trace")
    add_common(p)
    p.add_argument("-b", "--bias", required=True)
    p.add_argument("--plan", help="chunk plan JSON to install first")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("chunk-edge", help="optimally chunk one edge")
    add_common(p)
    p.add_argument("-e", "--edge", required=True, help="tail,head")
    p.add_argument("-b", "--bias", required=True)
    p.add_argument("-k", type=int, required=True)
    p.set_defaults(func=cmd_chunk_edge)

    p = sub.add_parser("chunk-graph", help="plan chunks across the whole graph")
    add_common(p)
    p.add_argument("--biases", required=True, help="comma-separated biases")
    p.add_argument("--mode", choices=("local", "global"), default="local")
    p.add_argument("-k", type=int, required=True)
    p.add_argument(
        "--single-path", action="store_true", help="force all types onto one path"
    )
    p.set_defaults(func=cmd_chunk_graph)

    p = sub.add_parser("split-edge", help="chunk an edge so the types separate")
    add_common(p)
    p.add_argument("-e", "--edge", required=True)
    p.add_argument("--biases", required=True, help="low,high")
    p.add_argument("--taker", type=int, choices=(1, 2), default=1)
    p.add_argument("-k", type=int, required=True)
    p.set_defaults(func=cmd_split_edge)

    p = sub.add_parser("same-path-edge", help="chunk an edge every type accepts")
    add_common(p)
    p.add_argument("-e", "--edge", required=True)
    p.add_argument("--biases", required=True)
    p.add_argument("-k", type=int, required=True)
    p.set_defaults(func=cmd_same_path_edge)

    p = sub.add_parser("verify", help="run randomized oracle cross-checks")
    p.add_argument(
        "--suite", choices=("all", *SUITES), default="all"
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("-k", type=int, default=3)
    p.add_argument("-d", type=int, default=64)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="emit experiment CSVs")
    p.add_argument("which", choices=("cost-ratio", "chunks-needed"))
    p.add_argument("-b", "--bias", required=True)
    p.add_argument("-c", required=True)
    p.add_argument("-k", type=int, default=3)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (InvalidParams, ParseError, FileNotFoundError, ValueError, ZeroDivisionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ChunkwiseError as exc:
        sys.stdout.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}, indent=2)
            + "\n"
        )
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
