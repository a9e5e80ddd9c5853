"""Present-biased agent semantics: perceived costs, traversal, cost ratio.

At each vertex the agent scales the next edge's cost by its bias b and adds
the true shortest remaining cost, then moves to the minimizer. Ties are exact
rational equality: if exactly one tied candidate continues a chunking the
agent picks it, otherwise the lexicographically least head wins.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Collection, Mapping, Optional

from .edge_chunk import Chunking
from .errors import (
    DeadEnd,
    InvalidParams,
    Stuck,
    UnknownEdge,
    ZeroShortestPath,
)
from .expansion import (
    ChunkedGraph,
    ChunkPlan,
    expand_plan,
    single_edge_plan,
    walk_follows_chunking,
)
from .graph import DistanceMap, Edge, TaskGraph, shortest_to_sink
from .rational import format_rat


@dataclass(frozen=True)
class BiasProfile:
    """Default bias plus optional per-edge overrides.

    Biases are strictly greater than 1; diagnostic profiles (used by oracle
    checks and the selective-bias equivalence test) may carry values down to,
    or below, 1 by passing diagnostic=True.
    """

    default: Fraction
    overrides: Mapping[Edge, Fraction] = field(default_factory=dict)
    diagnostic: bool = False

    def __post_init__(self) -> None:
        values = [self.default, *self.overrides.values()]
        if self.diagnostic:
            if any(v <= 0 for v in values):
                raise InvalidParams("diagnostic biases must be positive")
        elif any(v <= 1 for v in values):
            raise InvalidParams("biases must be strictly greater than 1")

    def effective(self, edge: Edge) -> Fraction:
        return self.overrides.get(edge, self.default)


@dataclass(frozen=True)
class TraceStep:
    vertex: str
    edge: Edge
    cost: Fraction
    perceived: Fraction


@dataclass(frozen=True)
class TieEvent:
    vertex: str
    tied: tuple[str, ...]
    winner: str


@dataclass(frozen=True)
class TraversalTrace:
    steps: tuple[TraceStep, ...]
    total: Fraction
    tie_events: tuple[TieEvent, ...]

    @property
    def path(self) -> tuple[str, ...]:
        if not self.steps:
            return ()
        return (self.steps[0].vertex,) + tuple(s.edge[1] for s in self.steps)

    def to_json(self) -> dict:
        return {
            "steps": [
                {
                    "vertex": s.vertex,
                    "edge": [s.edge[0], s.edge[1]],
                    "cost": format_rat(s.cost),
                    "perceived": format_rat(s.perceived),
                }
                for s in self.steps
            ],
            "path": list(self.path),
            "total": format_rat(self.total),
            "tie_breaks": [
                {"vertex": e.vertex, "tied": list(e.tied), "winner": e.winner}
                for e in self.tie_events
            ],
        }


def perceived_cost(
    g: TaskGraph, dist: DistanceMap, profile: BiasProfile, edge: Edge
) -> Fraction:
    """b_eff * c(u,v) + c(v->t) for one edge."""
    if not g.has_edge(*edge):
        raise UnknownEdge(*edge)
    return profile.effective(edge) * g.cost(*edge) + dist[edge[1]]


def best_alternative(
    g: TaskGraph,
    dist: DistanceMap,
    profile: BiasProfile,
    u: str,
    exclude_head: Optional[str] = None,
) -> tuple[str, Fraction]:
    """Perceived-cost argmin over u's out-edges (lexicographic tie-break).

    exclude_head restricts to alternatives other than one edge, which is how
    chunking thresholds are computed. Raises DeadEnd if nothing qualifies.
    """
    best_head: Optional[str] = None
    best_val: Optional[Fraction] = None
    for head, cost in g.out_edges(u):
        if head == exclude_head:
            continue
        val = profile.effective((u, head)) * cost + dist[head]
        if best_val is None or val < best_val or (val == best_val and head < best_head):
            best_head, best_val = head, val
    if best_head is None or best_val is None:
        raise DeadEnd(u)
    return best_head, best_val


def traverse(
    g: TaskGraph,
    dist: DistanceMap,
    profile: BiasProfile,
    chunk_marks: Collection[Edge] = frozenset(),
    start: Optional[str] = None,
) -> TraversalTrace:
    """Deterministic greedy walk from start (default: source) to the sink."""
    marks = frozenset(chunk_marks)
    cur = g.source if start is None else start
    steps: list[TraceStep] = []
    ties: list[TieEvent] = []
    total = Fraction(0)
    while cur != g.sink:
        out = g.out_edges(cur)
        if not out:
            raise Stuck(cur)
        scored = [
            (profile.effective((cur, head)) * cost + dist[head], head, cost)
            for head, cost in out
        ]
        best_val = min(s[0] for s in scored)
        tied = [(head, cost) for val, head, cost in scored if val == best_val]
        if len(tied) > 1:
            marked = [(h, c) for h, c in tied if (cur, h) in marks]
            winner = marked[0] if len(marked) == 1 else min(tied)
            ties.append(
                TieEvent(cur, tuple(sorted(h for h, _ in tied)), winner[0])
            )
        else:
            winner = tied[0]
        head, cost = winner
        steps.append(TraceStep(cur, (cur, head), cost, best_val))
        total += cost
        cur = head
    return TraversalTrace(tuple(steps), total, tuple(ties))


def cost_ratio(g: TaskGraph, profile: BiasProfile) -> Fraction:
    """Incurred traversal cost divided by the true shortest source-sink cost."""
    dist = shortest_to_sink(g)
    shortest = dist[g.source]
    if shortest == 0:
        raise ZeroShortestPath("shortest path cost is zero; ratio undefined")
    trace = traverse(g, dist, profile)
    return trace.total / shortest


def simulate_plan(
    g: TaskGraph,
    plan: ChunkPlan,
    profile: BiasProfile,
    start: Optional[str] = None,
) -> tuple[TraversalTrace, ChunkedGraph]:
    """Expand a plan and walk the expanded graph."""
    cg = expand_plan(g, plan)
    dist = shortest_to_sink(cg.graph)
    trace = traverse(cg.graph, dist, profile, cg.marks, start=start)
    return trace, cg


def selective_bias_equivalence_check(
    g: TaskGraph,
    plan: ChunkPlan,
    b: Fraction,
    edge: Edge,
    b_prime: Fraction,
) -> bool:
    """Operational definition of induced selective bias.

    True iff the bias-b agent crosses u->v in the chunked graph exactly when
    an agent with bias b_prime toward (u, v) (and b elsewhere) crosses it in
    the original graph.
    """
    if len(plan.chunkings) != 1 or plan.chunkings[0].edge != edge:
        raise InvalidParams("plan must chunk exactly the edge under test")
    trace, cg = simulate_plan(g, plan, BiasProfile(b))
    crossed_chunked = walk_follows_chunking(trace.path, cg.chain_of(edge))
    override = BiasProfile(b, {edge: b_prime}, diagnostic=b_prime <= 1)
    plain = traverse(g, shortest_to_sink(g), override)
    path = plain.path
    crossed_plain = any(
        path[i] == edge[0] and path[i + 1] == edge[1] for i in range(len(path) - 1)
    )
    return crossed_chunked == crossed_plain


def chunking_perceived_by_expansion(
    g: TaskGraph, chunking: Chunking, b: Fraction
) -> tuple[Fraction, ...]:
    """Perceived chunk costs read off the expanded graph (cross-check route)."""
    cg = expand_plan(g, single_edge_plan(chunking))
    dist = shortest_to_sink(cg.graph)
    chain = cg.chain_of(chunking.edge)
    profile = BiasProfile(b)
    return tuple(
        perceived_cost(cg.graph, dist, profile, (chain[i], chain[i + 1]))
        for i in range(len(chain) - 1)
    )
