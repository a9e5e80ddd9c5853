"""Randomized cross-check suites shared by the CLI and the test suite.

Each suite returns (ok, lines): a verdict plus one human-readable line per
check group. Suites are deterministic given the seed.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable

from .agent import BiasProfile, simulate_plan
from .edge_chunk import optimal_edge_chunking
from .expansion import original_path
from .graph import TaskGraph, random_task_graph, shortest_to_sink
from .graph_chunk import BudgetSpec, chunk_graph_global, chunk_graph_local
from .multi_agent import (
    AgentSet,
    chunk_split,
    m_agent_single_path_plan,
    two_agent_plan,
)
from .oracle import (
    GridSpec,
    brute_force_edge_chunking,
    brute_force_graph_plan,
    brute_force_two_agent_plan,
)
from .errors import TakerRefuses

SuiteResult = tuple[bool, list[str]]


def _random_bias(rng: random.Random) -> Fraction:
    den = rng.choice((1, 2, 3, 4))
    return Fraction(rng.randint(den + 1, 4 * den), den)


def _random_graph_with_dist(rng: random.Random, max_vertices: int):
    g = random_task_graph(rng, min_vertices=3, max_vertices=max_vertices)
    return g, shortest_to_sink(g)


def edge_oracle_suite(seed: int, trials: int, k_max: int = 4, d: int = 64) -> SuiteResult:
    """Optimizer bottleneck never exceeds the best grid chunking's."""
    rng = random.Random(seed)
    failures = []
    checked = 0
    for trial in range(trials):
        g, dist = _random_graph_with_dist(rng, 6)
        edges = [e[:2] for e in g.edges if e[0] != g.sink]
        if not edges:
            continue
        edge = edges[rng.randrange(len(edges))]
        b = _random_bias(rng)
        k = rng.randint(1, k_max)
        _, report = optimal_edge_chunking(g, dist, edge, b, k)
        _, grid_best = brute_force_edge_chunking(g, dist, edge, b, GridSpec(d, k))
        checked += 1
        if report.bottleneck > grid_best:
            failures.append(
                f"trial {trial}: optimizer {report.bottleneck} > grid {grid_best} "
                f"on edge {edge} (b={b}, k={k})"
            )
    ok = not failures and checked >= trials // 2
    lines = [f"edge-oracle: {checked} comparisons, {len(failures)} violations"]
    lines += failures[:5]
    return ok, lines


def graph_dp_suite(seed: int, trials: int, k_max: int = 3) -> SuiteResult:
    """Local and global planners match the exhaustive path oracle exactly."""
    rng = random.Random(seed)
    failures = []
    checked = 0
    for trial in range(trials):
        g, _ = _random_graph_with_dist(rng, 7)
        b = _random_bias(rng)
        k = rng.randint(1, k_max)
        for mode, planner in (("local", chunk_graph_local), ("global", chunk_graph_global)):
            plan, trace = planner(g, b, k)
            oracle_cost, _ = brute_force_graph_plan(g, b, BudgetSpec(mode, k))
            checked += 1
            if trace.total != oracle_cost:
                failures.append(
                    f"trial {trial} ({mode}, b={b}, k={k}): planner {trace.total} "
                    f"!= oracle {oracle_cost}"
                )
    ok = not failures and checked > 0
    lines = [f"graph-dp: {checked} comparisons, {len(failures)} violations"]
    lines += failures[:5]
    return ok, lines


def multi_agent_suite(seed: int, trials: int, k: int = 2, d: int = 32) -> SuiteResult:
    """Joint-simulation soundness, oracle equality, and split dominance."""
    rng = random.Random(seed)
    failures = []
    sims = dp_checks = split_checks = 0
    for trial in range(trials):
        g, dist = _random_graph_with_dist(rng, 6)
        b1 = _random_bias(rng)
        b2 = b1 + Fraction(rng.randint(1, 8), 4)
        mode = rng.choice(("local", "global"))
        budget = BudgetSpec(mode, k)
        plan, traces = two_agent_plan(g, b1, b2, budget)
        sims += 1
        for trace, path in zip(traces, plan.planned_paths):
            _, cg = simulate_plan(g, plan, BiasProfile(b1))
            if original_path(cg, trace.path) != path:
                failures.append(f"trial {trial}: two-agent plan fails joint simulation")
                break
        pair_cost = traces[0].total + traces[1].total
        oracle_cost, _ = brute_force_two_agent_plan(g, b1, b2, budget)
        dp_checks += 1
        if pair_cost != oracle_cost:
            failures.append(
                f"trial {trial} ({mode}): two-agent {pair_cost} != oracle {oracle_cost}"
            )
        agents = AgentSet((b1, b2))
        mplan, mpath = m_agent_single_path_plan(g, agents, budget)
        for b in agents.biases:
            trace, cg = simulate_plan(g, mplan, BiasProfile(b))
            if original_path(cg, trace.path) != mpath:
                failures.append(f"trial {trial}: single-path plan fails for b={b}")
                break
        edges = [e[:2] for e in g.edges if e[0] != g.sink]
        if edges:
            edge = edges[rng.randrange(len(edges))]
            split_checks += 1
            if not _split_dominates_grid(g, dist, edge, b1, b2, k, d):
                failures.append(f"trial {trial}: split beaten by a grid chunking on {edge}")
    ok = not failures and sims > 0
    lines = [
        f"multi-agent: {sims} joint sims, {dp_checks} oracle comparisons, "
        f"{split_checks} split dominance checks, {len(failures)} violations"
    ]
    lines += failures[:5]
    return ok, lines


def _split_dominates_grid(
    g: TaskGraph, dist, edge, b1: Fraction, b2: Fraction, k: int, d: int
) -> bool:
    """No taker-accepted grid chunking repels the other type harder."""
    from .edge_chunk import edge_context, perceived_chunk_costs
    from .multi_agent import outside_alpha

    try:
        _, repelled = chunk_split(g, dist, edge, b1, b2, k, taker=1)
    except TakerRefuses:
        return True
    ctx = edge_context(g, dist, edge)
    alpha1 = outside_alpha(g, dist, b1, *edge)
    unit = ctx.x / d
    best_grid = None
    for comp in _grid_compositions(d, k):
        chunks = tuple(m * unit for m in comp)
        p1 = perceived_chunk_costs(ctx, chunks, b1)
        if alpha1 is not None and max(p1) > alpha1:
            continue
        p2 = max(perceived_chunk_costs(ctx, chunks, b2))
        if best_grid is None or p2 > best_grid:
            best_grid = p2
    return best_grid is None or repelled >= best_grid


def _grid_compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _grid_compositions(total - first, parts - 1):
            yield (first,) + rest


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "edge-oracle": edge_oracle_suite,
    "graph-dp": graph_dp_suite,
    "multi-agent": multi_agent_suite,
}
