"""Single-edge chunking: closed forms, evaluation, and the optimal chunker.

A k-chunking of edge (u, v) replaces it by a chain u -> m_1 -> ... -> m_{k-1}
-> v with chunk costs x_1..x_k summing to c(u, v). Every chain vertex keeps
copies of u's other out-edges at their original costs, so the agent can
abandon the chain at any point. The perceived cost of starting chunk i is

    p_i = b*x_i + min(outside, suffix_i + c(v->t))        for i < k
    p_k = b*x_k + c(v->t)

where outside is the true cost of u's best route to the sink that avoids
(u, v), and suffix_i the chunk mass after chunk i. The bottleneck max_i p_i
decides which agents traverse the whole chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import InvalidParams, NoAlternative, UnknownEdge
from .graph import DistanceMap, Edge, TaskGraph


@dataclass(frozen=True)
class Chunking:
    """Chunk costs for one edge; nonnegative, summing to the edge cost."""

    tail: str
    head: str
    chunks: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.chunks) < 1:
            raise InvalidParams("a chunking needs at least one chunk")
        if any(x < 0 for x in self.chunks):
            raise InvalidParams("chunk costs must be nonnegative")

    @property
    def edge(self) -> Edge:
        return (self.tail, self.head)

    @property
    def k(self) -> int:
        return len(self.chunks)

    @property
    def total(self) -> Fraction:
        return sum(self.chunks, Fraction(0))


@dataclass(frozen=True)
class ChunkingReport:
    """Evaluation of one chunking: perceived costs and derived quantities.

    tau is the last chain vertex whose true shortest route to the sink leaves
    through the outside option (0 if the chain is never abandoned optimally;
    k if every chain vertex would leave). selective_bias is
    (bottleneck - c(v->t)) / x for x > 0, the bias an agent would need toward
    the unchunked edge to behave the same way; 1 for zero-cost edges.
    """

    edge: Edge
    perceived: tuple[Fraction, ...]
    tau: int
    bottleneck: Fraction
    delta: Optional[Fraction]
    selective_bias: Fraction


@dataclass(frozen=True)
class EdgeContext:
    """Per-edge constants: cost x, c(v->t), and the best outside route cost."""

    tail: str
    head: str
    x: Fraction
    cost_to_sink: Fraction
    outside: Optional[Fraction]  # None when (u, v) is u's only out-edge


def edge_context(g: TaskGraph, dist: DistanceMap, edge: Edge) -> EdgeContext:
    u, v = edge
    if not g.has_edge(u, v):
        raise UnknownEdge(u, v)
    outside: Optional[Fraction] = None
    for head, cost in g.out_edges(u):
        if head == v:
            continue
        total = cost + dist[head]
        if outside is None or total < outside:
            outside = total
    return EdgeContext(u, v, g.cost(u, v), dist[v], outside)


def selective_bias_closed_form(b: Fraction, k: int) -> Fraction:
    """Selective bias induced by the geometric chunking: 1/(1-((b-1)/b)^k)."""
    _check_params(b, k)
    q = (b - 1) / b
    return 1 / (1 - q**k)


def chunk_shortest_edge(x: Fraction, b: Fraction, k: int) -> tuple[Fraction, ...]:
    """Geometric chunking x_i = (b-1)^(k-i) * b^(i-1) / (b^k - (b-1)^k) * x.

    Optimal whenever the chain itself is the shortest route from every chain
    vertex (in particular for edges starting a shortest path). Easy chunks
    first, each later chunk b/(b-1) times harder.
    """
    _check_params(b, k)
    if x < 0:
        raise InvalidParams("edge cost must be nonnegative")
    denom = b**k - (b - 1) ** k
    return tuple((b - 1) ** (k - i) * b ** (i - 1) / denom * x for i in range(1, k + 1))


def delta(g: TaskGraph, dist: DistanceMap, edge: Edge) -> Fraction:
    """Gap x + c(v->t) - outside; <= 0 exactly when (u,v) starts a shortest path."""
    ctx = edge_context(g, dist, edge)
    if ctx.outside is None:
        raise NoAlternative(*edge)
    return ctx.x + ctx.cost_to_sink - ctx.outside


def perceived_chunk_costs(
    ctx: EdgeContext, chunks: tuple[Fraction, ...], b: Fraction
) -> tuple[Fraction, ...]:
    """Closed-form p_i for every chunk, exact."""
    k = len(chunks)
    out: list[Fraction] = []
    suffix = Fraction(0)
    # Walk backwards so suffix_i is available when chunk i is processed.
    rev: list[Fraction] = []
    for i in range(k, 0, -1):
        x_i = chunks[i - 1]
        if i == k:
            rev.append(b * x_i + ctx.cost_to_sink)
        else:
            through_chain = suffix + ctx.cost_to_sink
            best = through_chain if ctx.outside is None else min(ctx.outside, through_chain)
            rev.append(b * x_i + best)
        suffix += x_i
    out = rev[::-1]
    return tuple(out)


def evaluate_chunking(
    g: TaskGraph, dist: DistanceMap, chunking: Chunking, b: Fraction
) -> ChunkingReport:
    """Evaluate a chunking: perceived costs, transition vertex, bottleneck."""
    ctx = edge_context(g, dist, chunking.edge)
    if chunking.total != ctx.x:
        raise InvalidParams(
            f"chunks sum to {chunking.total}, edge ({ctx.tail}, {ctx.head}) costs {ctx.x}"
        )
    perceived = perceived_chunk_costs(ctx, chunking.chunks, b)
    tau = _transition_vertex(ctx, chunking.chunks)
    bottleneck = max(perceived)
    d = None if ctx.outside is None else ctx.x + ctx.cost_to_sink - ctx.outside
    bias = (bottleneck - ctx.cost_to_sink) / ctx.x if ctx.x > 0 else Fraction(1)
    return ChunkingReport(
        edge=chunking.edge,
        perceived=perceived,
        tau=tau,
        bottleneck=bottleneck,
        delta=d,
        selective_bias=bias,
    )


def _transition_vertex(ctx: EdgeContext, chunks: tuple[Fraction, ...]) -> int:
    # Chain vertex i routes outside iff outside < (mass from chunk i on) + c(v->t),
    # strictly: at an exact tie the chain is as good as leaving.
    if ctx.outside is None:
        return 0
    tau = 0
    remaining = ctx.x
    for i in range(1, len(chunks) + 1):
        if ctx.outside < remaining + ctx.cost_to_sink:
            tau = i
        remaining -= chunks[i - 1]
    return tau


def optimal_edge_chunking(
    g: TaskGraph, dist: DistanceMap, edge: Edge, b: Fraction, k: int
) -> tuple[Chunking, ChunkingReport]:
    """Minimize the bottleneck over all k-chunkings of one edge.

    Generates the closed-form candidate set below, evaluates each exactly,
    and returns the argmin (ties: smaller tau, then lexicographically smaller
    chunk vector):

    * chain on a shortest path (or no outside option): the geometric chunking,
      provably optimal;
    * delta > x: every chain vertex leaves; balance the k-1 equal head chunks
      against the final chunk, clamping the final chunk at zero;
    * 0 < delta <= x: for each transition vertex tau, the head-heavy chunking
      (delta/tau on the first tau chunks, geometric tail) and, when its tail
      perceived cost exceeds its head one, the rebalanced chunking that grows
      the first tau-1 chunks; plus the tau = k balanced chunking.
    """
    _check_params(b, k)
    ctx = edge_context(g, dist, edge)
    x = ctx.x
    candidates: list[tuple[Fraction, ...]] = []
    if k == 1:
        candidates.append((x,))
    else:
        d = None if ctx.outside is None else x + ctx.cost_to_sink - ctx.outside
        if d is None or d <= 0:
            candidates.append(chunk_shortest_edge(x, b, k))
        elif d > x:
            y_star = (d + (b - 1) * x) / (b * k)
            y = min(y_star, x / (k - 1))
            candidates.append((y,) * (k - 1) + (x - (k - 1) * y,))
        else:
            q = (b - 1) / b
            for tau in range(1, k):
                head = (d / tau,) * tau
                candidates.append(head + chunk_shortest_edge(x - d, b, k - tau))
                alpha0 = b * d / tau + ctx.outside
                beta0 = (x - d) / (1 - q ** (k - tau)) + ctx.cost_to_sink
                if beta0 > alpha0:
                    if tau == 1:
                        candidates.append(chunk_shortest_edge(x, b, k))
                    else:
                        z_tau = 1 - q ** (k - tau + 1)
                        y_star = (d * z_tau + (1 - z_tau) * x) / (tau - 1 + z_tau * b)
                        y = min(y_star, d / (tau - 1))
                        candidates.append(
                            (y,) * (tau - 1)
                            + chunk_shortest_edge(x - (tau - 1) * y, b, k - tau + 1)
                        )
            y = min((d + (b - 1) * x) / (b * k), d / (k - 1), x / (k - 1))
            candidates.append((y,) * (k - 1) + (x - (k - 1) * y,))

    best: tuple[Fraction, int, tuple[Fraction, ...]] | None = None
    best_report: ChunkingReport | None = None
    for chunks in candidates:
        chunking = Chunking(*edge, chunks)
        report = evaluate_chunking(g, dist, chunking, b)
        key = (report.bottleneck, report.tau, chunks)
        if best is None or key < best:
            best = key
            best_report = report
    assert best is not None and best_report is not None
    return Chunking(*edge, best[2]), best_report


def min_chunks_to_beat(
    g: TaskGraph,
    dist: DistanceMap,
    edge: Edge,
    b: Fraction,
    alpha: Fraction,
    k_max: int,
) -> Optional[int]:
    """Least l <= k_max whose optimal l-chunking bottleneck is <= alpha.

    Returns None when even k_max chunks cannot reach alpha. The optimal
    bottleneck is non-increasing in l (prepend a zero chunk), so binary
    search applies.
    """
    if k_max < 1:
        raise InvalidParams("k_max must be >= 1")

    def beats(l: int) -> bool:
        _, report = optimal_edge_chunking(g, dist, edge, b, l)
        return report.bottleneck <= alpha

    if not beats(k_max):
        return None
    lo, hi = 1, k_max
    while lo < hi:
        mid = (lo + hi) // 2
        if beats(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def _check_params(b: Fraction, k: int) -> None:
    if not isinstance(k, int) or k < 1:
        raise InvalidParams(f"k must be a positive integer, got {k!r}")
    if b <= 1:
        raise InvalidParams(f"bias must be > 1, got {b}")
