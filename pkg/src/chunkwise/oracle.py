"""Independent brute-force verifiers and the quantitative experiments.

The edge oracle enumerates grid chunkings with scaled-integer arithmetic.
The graph oracle enumerates candidate paths, decides per-edge persuadability
with a greedy max-mass iteration that shares nothing with the optimizer's
candidate formulas, builds witness chunkings from the saturated profile, and
validates every winner by full expansion and simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Optional, Sequence

from .agent import BiasProfile, simulate_plan
from .edge_chunk import (
    Chunking,
    EdgeContext,
    edge_context,
    selective_bias_closed_form,
)
from .errors import GridTooLarge, InvalidParams
from .expansion import ChunkPlan, original_path
from .graph import (
    DistanceMap,
    Edge,
    FanSpec,
    TaskGraph,
    make_n_fan,
    shortest_to_sink,
)
from .graph_chunk import BudgetSpec, Persuasion, persuasion_profile
from .oracle_limits import enumeration_cap
from .rational import format_rat


@dataclass(frozen=True)
class GridSpec:
    """Chunk costs restricted to multiples of x/denominator."""

    denominator: int
    k: int

    def __post_init__(self) -> None:
        if self.denominator < 1 or self.k < 1:
            raise InvalidParams("grid needs denominator >= 1 and k >= 1")

    @property
    def size(self) -> int:
        return math.comb(self.denominator + self.k - 1, self.k - 1)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Weak compositions of total into parts, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def brute_force_edge_chunking(
    g: TaskGraph, dist: DistanceMap, edge: Edge, b: Fraction, grid: GridSpec
) -> tuple[Chunking, Fraction]:
    """Exact minimum bottleneck over all grid chunkings of one edge.

    Works in scaled integers: with unit q = x/d and scale L clearing every
    denominator, perceived costs become integers and the whole enumeration
    runs without Fraction churn.
    """
    if grid.size > enumeration_cap():
        raise GridTooLarge(
            f"{grid.size} grid chunkings exceed the cap {enumeration_cap()}"
        )
    ctx = edge_context(g, dist, edge)
    d, k = grid.denominator, grid.k
    q = ctx.x / d
    denoms = [q.denominator, ctx.cost_to_sink.denominator, b.denominator]
    if ctx.outside is not None:
        denoms.append(ctx.outside.denominator)
    L = math.lcm(*denoms)
    # All integers below; perceived costs are scaled by L * b.denominator.
    qL = q * L
    assert qL.denominator == 1
    q_i = qL.numerator
    cv_i = int(ctx.cost_to_sink * L)
    out_i = None if ctx.outside is None else int(ctx.outside * L)
    bn, bd = b.numerator, b.denominator

    best_val: Optional[int] = None
    best_comp: Optional[tuple[int, ...]] = None
    for comp in _compositions(d, k):
        val = bn * comp[-1] * q_i + bd * cv_i
        if best_val is not None and val > best_val:
            continue  # the last chunk alone already loses; the max only grows
        suffix = 0
        for i in range(k - 2, -1, -1):
            suffix += comp[i + 1]
            through = suffix * q_i + cv_i
            floor = through if out_i is None else min(out_i, through)
            p = bn * comp[i] * q_i + bd * floor
            if p > val:
                val = p
        if best_val is None or val < best_val:
            best_val = val
            best_comp = comp
    assert best_val is not None and best_comp is not None
    chunks = tuple(m * q for m in best_comp)
    return Chunking(*edge, chunks), Fraction(best_val, L * bd)


# ---------------------------------------------------------------------------
# Independent persuadability: greedy max mass under a perceived-cost cap
# ---------------------------------------------------------------------------


def max_mass_under_cap(
    ctx: EdgeContext, b: Fraction, beta: Fraction, k: int
) -> Optional[Fraction]:
    """Largest total cost k chunks can carry with every perceived cost <= beta.

    Built from the back: M_{j+1} = M_j + (beta - min(outside, M_j + c_v))/b.
    None when even a zero-mass final chunk breaks the cap. Maximal by the
    suffix-sum exchange argument, independent of the optimizer's closed forms.
    """
    if beta < ctx.cost_to_sink:
        return None
    mass = (beta - ctx.cost_to_sink) / b
    for _ in range(k - 1):
        through = mass + ctx.cost_to_sink
        floor = through if ctx.outside is None else min(ctx.outside, through)
        step = (beta - floor) / b
        assert step >= 0, "greedy step went negative despite beta >= c_v"
        mass += step
    return mass


def persuadable(
    g: TaskGraph, dist: DistanceMap, edge: Edge, b: Fraction, alpha: Fraction, k: int
) -> bool:
    """Does some k-chunking keep every perceived chunk cost within alpha?"""
    ctx = edge_context(g, dist, edge)
    if ctx.outside is None:
        return True
    mass = max_mass_under_cap(ctx, b, alpha, k)
    return mass is not None and mass >= ctx.x


def saturated_chunking(
    g: TaskGraph, dist: DistanceMap, edge: Edge, b: Fraction, beta: Fraction, k: int
) -> Optional[Chunking]:
    """Witness chunking with all perceived costs <= beta, from the greedy fill."""
    ctx = edge_context(g, dist, edge)
    if beta < ctx.cost_to_sink:
        return None
    xs = [Fraction(0)] * k
    placed = Fraction(0)
    for i in range(k - 1, -1, -1):
        if i == k - 1:
            floor = ctx.cost_to_sink
        else:
            through = placed + ctx.cost_to_sink
            floor = through if ctx.outside is None else min(ctx.outside, through)
        step = (beta - floor) / b
        if step < 0:
            return None
        if placed + step >= ctx.x:
            xs[i] = ctx.x - placed
            return Chunking(*edge, tuple(xs))
        xs[i] = step
        placed += step
    return None


def min_chunks_independent(
    g: TaskGraph,
    dist: DistanceMap,
    edge: Edge,
    b: Fraction,
    alpha: Fraction,
    k_max: int,
) -> Optional[int]:
    for l in range(1, k_max + 1):
        if persuadable(g, dist, edge, b, alpha, l):
            return l
    return None


def independent_min_bottleneck(
    g: TaskGraph, dist: DistanceMap, edge: Edge, b: Fraction, k: int
) -> Fraction:
    """Exact optimal k-chunking bottleneck via the greedy-mass inverse.

    max_mass_under_cap(beta) is piecewise linear and increasing in beta, and
    the chain/outside branch pattern is monotone along the iteration (the
    running mass only grows), so solving mass(beta) = x reduces to at most k
    linear solves, one per branch split point r.
    """
    ctx = edge_context(g, dist, edge)
    x, cv, out = ctx.x, ctx.cost_to_sink, ctx.outside
    floor_mass = max_mass_under_cap(ctx, b, cv, k)
    if floor_mass is not None and floor_mass >= x:
        return cv  # the last chunk's unavoidable c(v->t) term is the optimum
    patterns = range(1) if out is None else range(k)
    best: Optional[Fraction] = None
    for r in patterns:
        # Steps 2..k take the chain branch for the first r of them, then the
        # outside branch (out is None means chain throughout). Track the mass
        # as a linear function a*beta + c of the cap.
        a, c = Fraction(1) / b, -cv / b
        for step in range(k - 1):
            if out is None or step < r:
                a, c = a * (1 - 1 / b) + 1 / b, c * (1 - 1 / b) - cv / b
            else:
                a, c = a + 1 / b, c - out / b
        beta = (x - c) / a
        if max_mass_under_cap(ctx, b, beta, k) == x and (best is None or beta < best):
            best = beta
    assert best is not None, "no branch pattern solved the mass equation"
    return best


# ---------------------------------------------------------------------------
# Graph-level oracle
# ---------------------------------------------------------------------------


def _all_simple_paths(g: TaskGraph) -> list[tuple[str, ...]]:
    cap = enumeration_cap()
    paths: list[tuple[str, ...]] = []

    def walk(prefix: list[str]) -> None:
        if len(paths) > cap:
            raise GridTooLarge(f"more than {cap} source-sink paths")
        u = prefix[-1]
        if u == g.sink:
            paths.append(tuple(prefix))
            return
        for head, _ in g.out_edges(u):
            walk(prefix + [head])

    walk([g.source])
    return paths


def _path_cost(g: TaskGraph, path: Sequence[str]) -> Fraction:
    return sum(
        (g.cost(path[i], path[i + 1]) for i in range(len(path) - 1)), Fraction(0)
    )


def brute_force_graph_plan(
    g: TaskGraph, b: Fraction, budget: BudgetSpec
) -> tuple[Fraction, ChunkPlan]:
    """Minimal simulated agent cost over exhaustively enumerated paths.

    For each candidate path, each non-default edge needs its minimal
    persuading chunk count (decided by the independent greedy iteration);
    witness chunkings come from the saturated profile at the tail's
    threshold. Every candidate plan is validated by full simulation before
    its cost counts.
    """
    dist = shortest_to_sink(g)
    pers = persuasion_profile(g, dist, b)
    best: Optional[tuple[Fraction, ChunkPlan]] = None
    for path in sorted(_all_simple_paths(g), key=lambda p: (_path_cost(g, p), p)):
        plan = _oracle_path_plan(g, dist, pers, b, path, budget)
        if plan is None:
            continue
        trace, cg = simulate_plan(g, plan, BiasProfile(b))
        if original_path(cg, trace.path) != path:
            continue
        cost = trace.total
        if best is None or cost < best[0]:
            best = (cost, plan)
    assert best is not None, "the default biased path always validates"
    return best


def _oracle_path_plan(
    g: TaskGraph,
    dist: DistanceMap,
    pers: Persuasion,
    b: Fraction,
    path: Sequence[str],
    budget: BudgetSpec,
) -> Optional[ChunkPlan]:
    chunkings: list[Chunking] = []
    total = 0
    for i in range(len(path) - 1):
        u, v = path[i], path[i + 1]
        if pers.default[u] == v:
            continue
        alpha = pers.alpha[u]
        l = min_chunks_independent(g, dist, (u, v), b, alpha, budget.k)
        if l is None:
            return None
        witness = saturated_chunking(g, dist, (u, v), b, alpha, l)
        if witness is None:
            return None
        chunkings.append(witness)
        total += l
    if budget.mode == "global" and total > budget.k:
        return None
    return ChunkPlan(
        chunkings=tuple(chunkings),
        mode=budget.mode,
        k=budget.k,
        planned_paths=(tuple(path),),
        predicted_cost=_path_cost(g, path),
        biases=(b,),
    )


def brute_force_two_agent_plan(
    g: TaskGraph, b1: Fraction, b2: Fraction, budget: BudgetSpec
) -> tuple[Fraction, ChunkPlan]:
    """Exhaustive minimum over compatible path pairs, joint-sim validated."""
    from .multi_agent import _pair_plan  # shared witness machinery by design

    dist = shortest_to_sink(g)
    pers1 = persuasion_profile(g, dist, b1)
    pers2 = persuasion_profile(g, dist, b2)
    paths = _all_simple_paths(g)
    if len(paths) ** 2 > enumeration_cap():
        raise GridTooLarge(f"{len(paths) ** 2} path pairs exceed the cap")
    best: Optional[tuple[Fraction, ChunkPlan]] = None
    for P, Q in sorted(
        product(paths, paths),
        key=lambda pq: (_path_cost(g, pq[0]) + _path_cost(g, pq[1]), pq),
    ):
        if best is not None and _path_cost(g, P) + _path_cost(g, Q) >= best[0]:
            break
        plan = _pair_plan(g, dist, b1, b2, P, Q, budget, pers1, pers2)
        if plan is not None:
            best = (_path_cost(g, P) + _path_cost(g, Q), plan)
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentRow:
    n: int
    b: Fraction
    c: Fraction
    k: int
    ratio: Fraction
    bound: Fraction

    def csv_fields(self) -> list[str]:
        return [
            str(self.n),
            format_rat(self.b),
            format_rat(self.c),
            str(self.k),
            str(self.ratio.numerator),
            str(self.ratio.denominator),
            str(self.bound.numerator),
            str(self.bound.denominator),
        ]


EXPERIMENT_HEADER = ["n", "b", "c", "k", "ratio_num", "ratio_den", "bound_num", "bound_den"]


def geometric_fan_plan(g: TaskGraph, b: Fraction, k: int) -> ChunkPlan:
    """Geometric k-chunking of every positive-cost edge (fan experiment)."""
    from .edge_chunk import chunk_shortest_edge

    chunkings = []
    for u, v, c in g.edges:
        if c > 0:
            chunkings.append(Chunking(u, v, chunk_shortest_edge(c, b, k)))
    return ChunkPlan(chunkings=tuple(chunkings), mode="local", k=k, biases=(b,))


def cost_ratio_curve(
    b: Fraction, c: Fraction, n_range: Sequence[int], k: int
) -> list[ExperimentRow]:
    """Chunked-fan cost ratios against the b_min^n worst-case bound."""
    rows = []
    b_min = selective_bias_closed_form(b, k)
    for n in n_range:
        g = make_n_fan(FanSpec(n, c))
        plan = geometric_fan_plan(g, b, k)
        trace, _ = simulate_plan(g, plan, BiasProfile(b))
        dist = shortest_to_sink(g)
        ratio = trace.total / dist[g.source]
        rows.append(ExperimentRow(n=n, b=b, c=c, k=k, ratio=ratio, bound=b_min**n))
    return rows


def chunks_for_constant_ratio(b: Fraction, c: Fraction, n: int) -> int:
    """Smallest k with selective bias at most c^(1/n), exactly.

    b_min(k)^n <= c is an exact rational comparison; the float closed form
    only seeds the search window.
    """
    if b <= 1 or c <= 1 or n < 1:
        raise InvalidParams("need b > 1, c > 1, n >= 1")
    guess = 1
    ratio = float(c) ** (1.0 / n)
    if ratio > 1:
        q = (b - 1) / b
        try:
            guess = max(1, int(math.log(1 - 1 / ratio) / math.log(float(q))))
        except ValueError:  # pragma: no cover - ratio extremely close to 1
            guess = 1
    k = max(1, guess - 2)
    while selective_bias_closed_form(b, k) ** n > c:
        k += 1
    while k > 1 and selective_bias_closed_form(b, k - 1) ** n <= c:
        k -= 1
    return k


def chunks_needed_rows(
    b: Fraction, c: Fraction, n_values: Sequence[int]
) -> list[ExperimentRow]:
    rows = []
    for n in n_values:
        k = chunks_for_constant_ratio(b, c, n)
        b_min = selective_bias_closed_form(b, k)
        rows.append(
            ExperimentRow(n=n, b=b, c=c, k=k, ratio=b_min**n, bound=c)
        )
    return rows
