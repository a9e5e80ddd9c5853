"""Whole-graph chunk planning for one agent under local or global budgets.

Local budget: any edge may be split into up to k chunks. Global budget: at
most k chunks across the whole graph, where an edge split into j pieces
consumes j and an untouched edge consumes 0. The agent's default edge at a
vertex (its unaided choice, lexicographic at ties) never needs budget; any
other edge needs at least a 1-chunk marker so ties break toward it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Optional

from .agent import BiasProfile, TraversalTrace, best_alternative, simulate_plan
from .edge_chunk import min_chunks_to_beat, optimal_edge_chunking
from .errors import InvalidParams
from .expansion import ChunkPlan, original_path, walk_follows_chunking
from .graph import DistanceMap, TaskGraph, shortest_to_sink, validate


@dataclass(frozen=True)
class BudgetSpec:
    mode: Literal["local", "global"]
    k: int

    def __post_init__(self) -> None:
        if self.mode not in ("local", "global"):
            raise InvalidParams(f"unknown budget mode {self.mode!r}")
        if self.k < 0 or (self.mode == "local" and self.k < 1):
            raise InvalidParams(f"bad budget k={self.k} for mode {self.mode}")


@dataclass(frozen=True)
class Persuasion:
    """Per-vertex defaults and per-edge persuasion data for one bias."""

    default: dict[str, str]  # vertex -> head of the unaided choice
    alpha: dict[str, Fraction]  # vertex -> perceived cost of that choice


def persuasion_profile(g: TaskGraph, dist: DistanceMap, b: Fraction) -> Persuasion:
    """Defaults and alphas, computed on the original graph."""
    profile = BiasProfile(b)
    default: dict[str, str] = {}
    alpha: dict[str, Fraction] = {}
    for u in g.vertices:
        if u == g.sink or not g.out_edges(u):
            continue
        head, val = best_alternative(g, dist, profile, u)
        default[u] = head
        alpha[u] = val
    return Persuasion(default, alpha)


def chunk_budget_needed(
    g: TaskGraph,
    dist: DistanceMap,
    pers: Persuasion,
    b: Fraction,
    u: str,
    v: str,
    k_max: int,
) -> Optional[int]:
    """Chunks needed to route the agent through (u, v); 0 for the default edge."""
    if pers.default[u] == v:
        return 0
    return min_chunks_to_beat(g, dist, (u, v), b, pers.alpha[u], k_max)


def _reconstruct_local(
    g: TaskGraph,
    dist: DistanceMap,
    usable: set[tuple[str, str]],
) -> tuple[tuple[str, ...], Fraction]:
    """Cheapest source-sink path over usable edges (DP over topological order)."""
    order = validate(g)
    cost: dict[str, Fraction] = {g.sink: Fraction(0)}
    succ: dict[str, str] = {}
    for u in reversed(order):
        if u == g.sink:
            continue
        best: Optional[Fraction] = None
        best_head: Optional[str] = None
        for head, c in g.out_edges(u):
            if (u, head) not in usable or head not in cost:
                continue
            total = c + cost[head]
            if best is None or total < best:
                best, best_head = total, head
        if best is not None:
            cost[u] = best
            succ[u] = best_head  # type: ignore[assignment]
    if g.source not in cost:
        raise InvalidParams("no persuadable path survives pruning")  # pragma: no cover
    path = [g.source]
    while path[-1] != g.sink:
        path.append(succ[path[-1]])
    return tuple(path), cost[g.source]


def chunk_graph_local(
    g: TaskGraph, b: Fraction, k: int
) -> tuple[ChunkPlan, TraversalTrace]:
    """Optimal plan when every edge may carry up to k chunks.

    Prunes edges whose optimal k-chunking bottleneck exceeds the tail's
    unaided perceived cost, shortest-paths the survivors, then chunks each
    non-default edge on that path. The returned trace is the simulated agent
    on the expanded graph; its cost equals the DP value exactly.
    """
    if k < 1:
        raise InvalidParams("local budget needs k >= 1")
    dist = shortest_to_sink(g)
    pers = persuasion_profile(g, dist, b)
    usable: set[tuple[str, str]] = set()
    for u, v, _ in g.edges:
        if pers.default[u] == v:
            usable.add((u, v))
            continue
        _, report = optimal_edge_chunking(g, dist, (u, v), b, k)
        if report.bottleneck <= pers.alpha[u]:
            usable.add((u, v))
    path, predicted = _reconstruct_local(g, dist, usable)
    chunkings = []
    for i in range(len(path) - 1):
        u, v = path[i], path[i + 1]
        if pers.default[u] == v:
            continue
        chunking, _ = optimal_edge_chunking(g, dist, (u, v), b, k)
        chunkings.append(chunking)
    plan = ChunkPlan(
        chunkings=tuple(chunkings),
        mode="local",
        k=k,
        planned_paths=(path,),
        predicted_cost=predicted,
        biases=(b,),
    )
    trace = _simulate_and_check(g, plan, b, path, predicted)
    return plan, trace


def chunk_graph_global(
    g: TaskGraph, b: Fraction, k: int
) -> tuple[ChunkPlan, TraversalTrace]:
    """Optimal plan under a global budget of k chunks in total.

    cost[u][i] is the cheapest u-to-sink cost reachable with at most i chunks;
    each edge contributes its minimal persuading chunk count (0 for the
    default edge). Chunking a default edge is never useful for one agent, so
    that option is omitted from the min.
    """
    if k < 0:
        raise InvalidParams("global budget needs k >= 0")
    dist = shortest_to_sink(g)
    pers = persuasion_profile(g, dist, b)
    table, choice = global_cost_table(g, dist, pers, b, k)
    path: list[str] = [g.source]
    budget = k
    chunk_alloc: list[tuple[str, str, int]] = []
    while path[-1] != g.sink:
        head, used = choice[(path[-1], budget)]
        if used:
            chunk_alloc.append((path[-1], head, used))
        path.append(head)
        budget -= used
    chunkings = []
    for u, v, l in chunk_alloc:
        chunking, _ = optimal_edge_chunking(g, dist, (u, v), b, l)
        chunkings.append(chunking)
    predicted = table[(g.source, k)]
    plan = ChunkPlan(
        chunkings=tuple(chunkings),
        mode="global",
        k=k,
        planned_paths=(tuple(path),),
        predicted_cost=predicted,
        biases=(b,),
    )
    trace = _simulate_and_check(g, plan, b, tuple(path), predicted)
    return plan, trace


def global_cost_table(
    g: TaskGraph,
    dist: DistanceMap,
    pers: Persuasion,
    b: Fraction,
    k: int,
) -> tuple[dict[tuple[str, int], Fraction], dict[tuple[str, int], tuple[str, int]]]:
    """Fill cost[u, i] backward over a topological order; return table + choices."""
    order = validate(g)
    needed: dict[tuple[str, str], Optional[int]] = {}
    for u, v, _ in g.edges:
        needed[(u, v)] = chunk_budget_needed(g, dist, pers, b, u, v, k) if k else (
            0 if pers.default[u] == v else None
        )
    table: dict[tuple[str, int], Fraction] = {}
    choice: dict[tuple[str, int], tuple[str, int]] = {}
    for i in range(k + 1):
        table[(g.sink, i)] = Fraction(0)
    for u in reversed(order):
        if u == g.sink:
            continue
        for i in range(k + 1):
            best: Optional[tuple[Fraction, int, str]] = None
            for head, c in g.out_edges(u):
                l = needed[(u, head)]
                if l is None or l > i or (head, i - l) not in table:
                    continue
                cand = (c + table[(head, i - l)], l, head)
                if best is None or cand < best:
                    best = cand
            if best is not None:
                table[(u, i)] = best[0]
                choice[(u, i)] = (best[2], best[1])
    return table, choice


def _simulate_and_check(
    g: TaskGraph,
    plan: ChunkPlan,
    b: Fraction,
    path: tuple[str, ...],
    predicted: Fraction,
) -> TraversalTrace:
    trace, cg = simulate_plan(g, plan, BiasProfile(b))
    realized = original_path(cg, trace.path)
    if realized != path or trace.total != predicted:  # pragma: no cover - invariant
        raise AssertionError(
            f"plan/trace mismatch: planned {path} at {predicted}, "
            f"agent took {realized} at {trace.total}"
        )
    for ch in plan.chunkings:
        if not walk_follows_chunking(trace.path, cg.chain_of(ch.edge)):
            raise AssertionError(f"planned chunking of {ch.edge} was abandoned")
    return trace
