"""Chunking for multiple bias types.

Splitting two agents at one vertex works by reshaping a chunking the taker
still accepts until the other type's perceived cost of one chunk is as high
as possible. Keeping m agents on one edge is a greedy fill from the last
chunk backwards. Graph-level planning pairs these with the single-agent
machinery; every emitted plan is validated by jointly simulating all agents,
with an exhaustive path-pair fallback when the optimistic recurrence and the
simulation disagree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Literal, Optional, Sequence

from .agent import BiasProfile, TraversalTrace, best_alternative, simulate_plan
from .edge_chunk import (
    Chunking,
    EdgeContext,
    edge_context,
    optimal_edge_chunking,
    perceived_chunk_costs,
)
from .errors import (
    DeadEnd,
    GridTooLarge,
    InfeasibleChunking,
    InvalidParams,
    TakerRefuses,
)
from .expansion import ChunkPlan, original_path, walk_follows_chunking
from .graph import DistanceMap, Edge, TaskGraph, shortest_to_sink, validate
from .graph_chunk import (
    BudgetSpec,
    Persuasion,
    chunk_budget_needed,
    chunk_graph_global,
    chunk_graph_local,
    global_cost_table,
    persuasion_profile,
)
from .oracle_limits import enumeration_cap


@dataclass(frozen=True)
class AgentSet:
    """Strictly increasing biases, all > 1."""

    biases: tuple[Fraction, ...]
    _alpha_cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.biases:
            raise InvalidParams("need at least one agent")
        if any(b <= 1 for b in self.biases):
            raise InvalidParams("all biases must exceed 1")
        if any(a >= b for a, b in zip(self.biases, self.biases[1:])):
            raise InvalidParams("biases must be strictly increasing")

    @property
    def m(self) -> int:
        return len(self.biases)

    def alpha(
        self, g: TaskGraph, dist: DistanceMap, idx: int, u: str, exclude_head: str
    ) -> Optional[Fraction]:
        key = (idx, u, exclude_head)
        if key not in self._alpha_cache:
            self._alpha_cache[key] = outside_alpha(
                g, dist, self.biases[idx], u, exclude_head
            )
        return self._alpha_cache[key]


def outside_alpha(
    g: TaskGraph, dist: DistanceMap, b: Fraction, u: str, v: str
) -> Optional[Fraction]:
    """Perceived cost of u's best option other than (u, v); None if no other."""
    try:
        _, val = best_alternative(g, dist, BiasProfile(b), u, exclude_head=v)
    except DeadEnd:
        return None
    return val


# ---------------------------------------------------------------------------
# Splitting two agents on one edge (three siphon phases, exact breakpoints)
# ---------------------------------------------------------------------------


def _p(ctx: EdgeContext, xs: list[Fraction], idx: int, b: Fraction) -> Fraction:
    """Perceived cost of chunk idx (0-based) under bias b."""
    k = len(xs)
    if idx == k - 1:
        return b * xs[idx] + ctx.cost_to_sink
    through = sum(xs[idx + 1 :], ctx.cost_to_sink)
    best = through if ctx.outside is None else min(ctx.outside, through)
    return b * xs[idx] + best


def _phase_head_siphon(
    ctx: EdgeContext, xs: list[Fraction], ti: int, bt: Fraction, alpha: Optional[Fraction]
) -> None:
    # Moving mass from earlier chunks onto the target raises p(target) at
    # rate bt without touching the target's suffix.
    for j in range(ti - 1, -1, -1):
        if alpha is None:
            m = xs[j]
        else:
            headroom = alpha - _p(ctx, xs, ti, bt)
            if headroom <= 0:
                break
            m = min(xs[j], headroom / bt)
        if m > 0:
            xs[j] -= m
            xs[ti] += m


def _phase_tail_siphon(
    ctx: EdgeContext, xs: list[Fraction], ti: int, bt: Fraction, alpha: Optional[Fraction]
) -> None:
    # Moving mass from a later chunk shrinks the target's suffix, so p(target)
    # rises at rate bt while the outside route is strictly cheaper than the
    # chain and at rate bt-1 afterwards.
    k = len(xs)
    for j in range(ti + 1, k):
        while xs[j] > 0:
            if alpha is None:
                m = xs[j]
            else:
                headroom = alpha - _p(ctx, xs, ti, bt)
                if headroom <= 0:
                    return
                gamma_x = sum(xs[ti + 1 :], ctx.cost_to_sink)
                if ctx.outside is None or gamma_x <= ctx.outside:
                    m = min(xs[j], headroom / (bt - 1))
                else:
                    m = min(xs[j], gamma_x - ctx.outside, headroom / bt)
            if m <= 0:
                break
            xs[j] -= m
            xs[ti] += m


def _last_nonzero(xs: list[Fraction], lo: int, hi: int) -> Optional[int]:
    for j in range(hi, lo - 1, -1):
        if xs[j] > 0:
            return j
    return None


def _phase_exchange_forward(
    ctx: EdgeContext, xs: list[Fraction], ti: int, bt: Fraction, alpha: Optional[Fraction]
) -> None:
    """Trade tail mass for head mass at rate 1/bt into the pinned target.

    Removing eps from the tail frees eps of the target's perceived cost (the
    chain route shortens), so eps/bt may be added to the target while the
    leftover eps*(bt-1)/bt tops up earlier chunks' headroom. A higher-bias
    type perceives the target chunk at rate b2 > bt on its grown cost, so its
    perceived cost rises by eps*(b2-bt)/bt per exchange.
    """
    if ti == 0 or alpha is None:
        return
    k = len(xs)
    for l in range(ti):  # fill front-to-back; earlier fills stay put
        while True:
            j_star = _last_nonzero(xs, ti + 1, k - 1)
            if j_star is None:
                return
            headroom_l = alpha - _p(ctx, xs, l, bt)
            if headroom_l <= 0:
                break
            gx_i = sum(xs[ti + 1 :], ctx.cost_to_sink)
            gx_l = sum(xs[l + 1 :], ctx.cost_to_sink)
            outside_cheaper_at_l = ctx.outside is not None and gx_l > ctx.outside
            rate = bt if outside_cheaper_at_l else bt - 1
            if ctx.outside is not None and gx_i > ctx.outside:
                # Outside route rules the target: the pin does not bind, move
                # tail mass straight onto the head until the routes tie.
                caps = [xs[j_star], headroom_l / rate, gx_i - ctx.outside]
                if outside_cheaper_at_l:
                    caps.append(gx_l - ctx.outside)
                m = min(caps)
                if m <= 0:
                    break
                xs[j_star] -= m
                xs[l] += m
            else:
                caps = [headroom_l / rate, xs[j_star] * (bt - 1) / bt]
                if outside_cheaper_at_l:
                    caps.append(gx_l - ctx.outside)
                m = min(caps)
                if m <= 0:
                    break
                eps = m * bt / (bt - 1)
                xs[j_star] -= eps
                xs[ti] += eps / bt
                xs[l] += m


def _phase_exchange_flipped(
    ctx: EdgeContext, xs: list[Fraction], ti: int, bt: Fraction, alpha: Optional[Fraction]
) -> None:
    """Push mass from the head and target onto the tail, pinning the target.

    Removing eps from the target and (bt-1)*eps from earlier chunks funds
    bt*eps of tail growth; the target's suffix grows as fast as its own cost
    shrinks, so the taker's perceived cost stays pinned while the lower-bias
    type's rises.
    """
    k = len(xs)
    if ti == k - 1:
        return
    for j in range(k - 1, ti, -1):  # fill back-to-front
        while True:
            headroom_j = None if alpha is None else alpha - _p(ctx, xs, j, bt)
            if headroom_j is not None and headroom_j <= 0:
                break
            gx_i = sum(xs[ti + 1 :], ctx.cost_to_sink)
            chain_cheaper_at_i = ctx.outside is None or gx_i < ctx.outside
            l_star = _last_nonzero(xs, 0, ti - 1)
            if chain_cheaper_at_i:
                if xs[ti] <= 0 or l_star is None:
                    return
                caps_eps = [xs[ti], xs[l_star] / (bt - 1)]
                if ctx.outside is not None:
                    caps_eps.append((ctx.outside - gx_i) / bt)
                if headroom_j is not None:
                    caps_eps.append(headroom_j / (bt * bt))
                blocked = _flipped_intermediate_caps(ctx, xs, ti, j, bt, alpha, bt)
                caps_eps.extend(blocked)
                eps = min(caps_eps)
                if eps <= 0:
                    break
                xs[ti] -= eps
                xs[l_star] -= (bt - 1) * eps
                xs[j] += bt * eps
            else:
                # Outside route rules the target: its perceived cost is flat
                # in the suffix, so head mass may move to the tail directly.
                if l_star is None:
                    return
                caps_m = [xs[l_star]]
                if headroom_j is not None:
                    caps_m.append(headroom_j / bt)
                caps_m.extend(_flipped_intermediate_caps(ctx, xs, ti, j, bt, alpha, Fraction(1)))
                m = min(caps_m)
                if m <= 0:
                    break
                xs[l_star] -= m
                xs[j] += m


def _flipped_intermediate_caps(
    ctx: EdgeContext,
    xs: list[Fraction],
    ti: int,
    j: int,
    bt: Fraction,
    alpha: Optional[Fraction],
    mass_per_unit: Fraction,
) -> list[Fraction]:
    # Chunks strictly between the target and the chunk being filled see their
    # suffix grow by mass_per_unit per unit moved; their perceived cost rises
    # until the outside route takes over, and must never exceed alpha.
    caps: list[Fraction] = []
    if alpha is None or ctx.outside is None:
        return caps
    for lp in range(ti + 1, j):
        gx_lp = sum(xs[lp + 1 :], ctx.cost_to_sink)
        if gx_lp >= ctx.outside:
            continue
        headroom = alpha - _p(ctx, xs, lp, bt)
        if headroom < ctx.outside - gx_lp:
            caps.append(headroom / mass_per_unit)
    return caps


def _assert_split_postconditions(
    ctx: EdgeContext,
    xs: list[Fraction],
    ti: int,
    bt: Fraction,
    alpha: Optional[Fraction],
    forward: bool,
) -> None:
    if alpha is None:
        return
    total_other = sum(xs) - xs[ti]
    if total_other > 0:
        assert _p(ctx, xs, ti, bt) == alpha, "target chunk not pinned at alpha"
    if forward:
        if sum(xs[ti + 1 :]) > 0:
            for j in range(ti + 1):
                assert _p(ctx, xs, j, bt) == alpha, "head chunk below alpha with tail mass left"
    else:
        if sum(xs[:ti]) > 0 and xs[ti] > 0:
            # Tail chunks sit at alpha unless raising any of them further
            # would push some chunk past alpha (the addable mass is spent).
            for j in range(ti + 1, len(xs)):
                if _p(ctx, xs, j, bt) == alpha:
                    continue
                assert _tail_increase_blocked(ctx, xs, ti, j, bt, alpha), (
                    "tail chunk below alpha while more could be siphoned"
                )


def _tail_increase_blocked(
    ctx: EdgeContext,
    xs: list[Fraction],
    ti: int,
    j: int,
    bt: Fraction,
    alpha: Fraction,
) -> bool:
    if ctx.outside is None:
        return False
    for lp in range(ti + 1, j):
        gx_lp = sum(xs[lp + 1 :], ctx.cost_to_sink)
        if gx_lp < ctx.outside and alpha - _p(ctx, xs, lp, bt) <= 0:
            return True
    gx_i = sum(xs[ti + 1 :], ctx.cost_to_sink)
    return gx_i >= ctx.outside and xs[ti] == 0


def chunk_split(
    g: TaskGraph,
    dist: DistanceMap,
    edge: Edge,
    b1: Fraction,
    b2: Fraction,
    k: int,
    taker: Literal[1, 2] = 1,
) -> tuple[Chunking, Fraction]:
    """Chunk (u, v) so the taker accepts it and the other type hates it most.

    Returns the chunking maximizing the repelled type's largest perceived
    chunk cost over all chunkings the taker still traverses, plus that value.
    Raises TakerRefuses when not even the taker-optimal chunking clears the
    taker's outside option.
    """
    if not 1 < b1 < b2:
        raise InvalidParams("need 1 < b1 < b2")
    if k < 1:
        raise InvalidParams("k must be >= 1")
    bt, br = (b1, b2) if taker == 1 else (b2, b1)
    forward = taker == 1
    alpha = outside_alpha(g, dist, bt, *edge)
    base, base_report = optimal_edge_chunking(g, dist, edge, bt, k)
    if alpha is not None and base_report.bottleneck > alpha:
        raise TakerRefuses(
            f"optimal {k}-chunking bottleneck {base_report.bottleneck} exceeds {alpha}"
        )
    ctx = edge_context(g, dist, edge)
    best: Optional[tuple[Fraction, int, tuple[Fraction, ...]]] = None
    for ti in range(k):
        xs = list(base.chunks)
        _phase_head_siphon(ctx, xs, ti, bt, alpha)
        _phase_tail_siphon(ctx, xs, ti, bt, alpha)
        if forward:
            _phase_exchange_forward(ctx, xs, ti, bt, alpha)
        else:
            _phase_exchange_flipped(ctx, xs, ti, bt, alpha)
        assert sum(xs) == ctx.x, "siphon phases must conserve mass"
        assert all(x >= 0 for x in xs), "siphon phases must keep chunks nonnegative"
        _assert_split_postconditions(ctx, xs, ti, bt, alpha, forward)
        chunks = tuple(xs)
        repelled = max(perceived_chunk_costs(ctx, chunks, br))
        key = (-repelled, ti, chunks)
        if best is None or key < best:
            best = key
    assert best is not None
    return Chunking(*edge, best[2]), -best[0]


# ---------------------------------------------------------------------------
# Keeping m agents on one edge (greedy from the last chunk backwards)
# ---------------------------------------------------------------------------


def chunk_same_path(
    g: TaskGraph,
    dist: DistanceMap,
    edge: Edge,
    agents: AgentSet,
    k: int,
) -> Chunking:
    """Chunking of (u, v) every agent type traverses, if one exists.

    Fills chunks k..1, maximizing each chunk subject to every agent's
    threshold given the mass already placed behind it; a feasible chunking
    exists iff this greedy one covers the full edge cost.
    """
    if k < 1:
        raise InvalidParams("k must be >= 1")
    ctx = edge_context(g, dist, edge)
    alphas = [agents.alpha(g, dist, i, edge[0], edge[1]) for i in range(agents.m)]
    xs = [Fraction(0)] * k
    placed = Fraction(0)
    for i in range(k - 1, -1, -1):
        if i == k - 1:
            floor = ctx.cost_to_sink
        else:
            through = placed + ctx.cost_to_sink
            floor = through if ctx.outside is None else min(ctx.outside, through)
        caps = [
            (alpha - floor) / b
            for alpha, b in zip(alphas, agents.biases)
            if alpha is not None
        ]
        if caps:
            x_i = min(caps)
            if x_i < 0:
                raise InfeasibleChunking(
                    f"chunk {i + 1} forced negative: some type's outside option "
                    f"({min(a for a in alphas if a is not None)}) is below the "
                    f"unavoidable continuation cost {floor}"
                )
        else:
            x_i = ctx.x - placed
        if placed + x_i >= ctx.x:
            xs[i] = ctx.x - placed
            return Chunking(*edge, tuple(xs))
        xs[i] = x_i
        placed += x_i
    raise InfeasibleChunking(
        f"mass deficit: {k} chunks can carry at most {placed} of {ctx.x}"
    )


def same_path_feasible(
    g: TaskGraph, dist: DistanceMap, edge: Edge, agents: AgentSet, k: int
) -> bool:
    try:
        chunk_same_path(g, dist, edge, agents, k)
    except InfeasibleChunking:
        return False
    return True


def min_chunks_same_path(
    g: TaskGraph, dist: DistanceMap, edge: Edge, agents: AgentSet, k_max: int
) -> Optional[int]:
    """Least l <= k_max every agent accepts (feasibility is monotone in l)."""
    if not same_path_feasible(g, dist, edge, agents, k_max):
        return None
    lo, hi = 1, k_max
    while lo < hi:
        mid = (lo + hi) // 2
        if same_path_feasible(g, dist, edge, agents, mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


# ---------------------------------------------------------------------------
# Compatibility sets for the two-agent planner
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompatEntry:
    """One jointly achievable successor pair with its witness chunkings."""

    v: str
    z: str
    chunk_count: int
    witnesses: tuple[Chunking, ...]


@dataclass(frozen=True)
class CompatibilitySet:
    u: str
    y: str
    entries: dict[tuple[str, str], CompatEntry]


def _first_move_ok(
    g: TaskGraph,
    witnesses: Sequence[Chunking],
    b: Fraction,
    u: str,
    target: str,
) -> bool:
    """Install the witnesses, walk one agent from u, check its first move."""
    plan = ChunkPlan(chunkings=tuple(witnesses))
    trace, cg = simulate_plan(g, plan, BiasProfile(b), start=u)
    for ch in witnesses:
        if ch.tail == u and ch.head == target:
            return walk_follows_chunking(trace.path, cg.chain_of(ch.edge))
    return len(trace.path) > 1 and trace.path[1] == target


def _split_pair_feasible(
    g: TaskGraph,
    dist: DistanceMap,
    u: str,
    v: str,
    z: str,
    b1: Fraction,
    b2: Fraction,
    i: int,
    j: int,
    pers1: Persuasion,
    pers2: Persuasion,
) -> Optional[tuple[Chunking, ...]]:
    """Witnesses for A1 taking (u,v) with i chunks while A2 takes (u,z) with j.

    i or j of zero means the edge is left alone (only sensible when it is
    that agent's unaided choice). Both chunkings are installed together and
    validated by simulating both agents from u under the shared tie rule.
    """
    witnesses: list[Chunking] = []
    try:
        if i > 0:
            witnesses.append(chunk_split(g, dist, (u, v), b1, b2, i, taker=1)[0])
        elif pers1.default.get(u) != v:
            return None
        if j > 0:
            witnesses.append(chunk_split(g, dist, (u, z), b1, b2, j, taker=2)[0])
        elif pers2.default.get(u) != z:
            return None
    except TakerRefuses:
        return None
    if not _first_move_ok(g, witnesses, b1, u, v):
        return None
    if not _first_move_ok(g, witnesses, b2, u, z):
        return None
    return tuple(witnesses)


def compatible_pairs(
    g: TaskGraph,
    dist: DistanceMap,
    u: str,
    y: str,
    b1: Fraction,
    b2: Fraction,
    budget: BudgetSpec,
) -> CompatibilitySet:
    """Successor pairs (v, z) persuadable from (u, y), with witnesses.

    Distinct tails are independent; a shared tail needs either one chunking
    both types take (same successor) or a validated pair of splits. Global
    mode records minimal chunk counts (per-column binary search over the
    monotone feasibility matrix for splits).
    """
    k = budget.k
    pers1 = persuasion_profile(g, dist, b1)
    pers2 = persuasion_profile(g, dist, b2)
    agents = AgentSet((b1, b2)) if b1 < b2 else None
    entries: dict[tuple[str, str], CompatEntry] = {}
    if u != y:
        for v, _ in g.out_edges(u):
            l1 = chunk_budget_needed(g, dist, pers1, b1, u, v, k) if k else (
                0 if pers1.default[u] == v else None
            )
            if l1 is None:
                continue
            for z, _ in g.out_edges(y):
                l2 = chunk_budget_needed(g, dist, pers2, b2, y, z, k) if k else (
                    0 if pers2.default[y] == z else None
                )
                if l2 is None:
                    continue
                wit: list[Chunking] = []
                if l1:
                    wit.append(optimal_edge_chunking(g, dist, (u, v), b1, l1)[0])
                if l2:
                    wit.append(optimal_edge_chunking(g, dist, (y, z), b2, l2)[0])
                entries[(v, z)] = CompatEntry(v, z, l1 + l2, tuple(wit))
        return CompatibilitySet(u, y, entries)

    for v, _ in g.out_edges(u):
        for z, _ in g.out_edges(u):
            if v == z:
                if pers1.default[u] == v and pers2.default[u] == v:
                    entries[(v, v)] = CompatEntry(v, v, 0, ())
                    continue
                if agents is None or k == 0:  # b1 == b2 handled by the caller
                    continue
                if budget.mode == "global":
                    l = min_chunks_same_path(g, dist, (u, v), agents, k)
                    if l is None:
                        continue
                else:
                    if not same_path_feasible(g, dist, (u, v), agents, k):
                        continue
                    l = k
                ch = chunk_same_path(g, dist, (u, v), agents, l)
                entries[(v, v)] = CompatEntry(v, v, l, (ch,))
            else:
                entry = _best_split_entry(
                    g, dist, u, v, z, b1, b2, budget, pers1, pers2
                )
                if entry is not None:
                    entries[(v, z)] = entry
    return CompatibilitySet(u, y, entries)


def _best_split_entry(
    g: TaskGraph,
    dist: DistanceMap,
    u: str,
    v: str,
    z: str,
    b1: Fraction,
    b2: Fraction,
    budget: BudgetSpec,
    pers1: Persuasion,
    pers2: Persuasion,
) -> Optional[CompatEntry]:
    k = budget.k

    def feasible(i: int, j: int) -> Optional[tuple[Chunking, ...]]:
        return _split_pair_feasible(g, dist, u, v, z, b1, b2, i, j, pers1, pers2)

    if budget.mode == "local":
        for i, j in ((0, 0), (0, k), (k, 0), (k, k)):
            wit = feasible(i, j)
            if wit is not None:
                return CompatEntry(v, z, i + j, wit)
        return None
    # Global: the feasibility matrix is monotone in each coordinate (an
    # i-chunking can always be emulated with i+1 chunks), so the cheapest
    # feasible row per column is found by binary search.
    best: Optional[tuple[int, tuple[Chunking, ...]]] = None
    for j in range(0, k + 1):
        wit_hi = feasible(k, j)
        if wit_hi is None:
            continue
        lo, hi = 0, k
        found = (k, wit_hi)
        while lo < hi:
            mid = (lo + hi) // 2
            wit = feasible(mid, j)
            if wit is not None:
                found = (mid, wit)
                hi = mid
            else:
                lo = mid + 1
        total = found[0] + j
        if best is None or total < best[0]:
            best = (total, found[1])
    if best is None:
        return None
    return CompatEntry(v, z, best[0], best[1])


# ---------------------------------------------------------------------------
# Two-agent graph planning
# ---------------------------------------------------------------------------


def path_cost(g: TaskGraph, path: Sequence[str]) -> Fraction:
    return sum((g.cost(path[i], path[i + 1]) for i in range(len(path) - 1)), Fraction(0))


def _all_paths(g: TaskGraph, cap: int) -> list[tuple[str, ...]]:
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


def joint_simulate(
    g: TaskGraph, plan: ChunkPlan, biases: Sequence[Fraction]
) -> list[TraversalTrace]:
    return [simulate_plan(g, plan, BiasProfile(b))[0] for b in biases]


def _pair_plan(
    g: TaskGraph,
    dist: DistanceMap,
    b1: Fraction,
    b2: Fraction,
    P: tuple[str, ...],
    Q: tuple[str, ...],
    budget: BudgetSpec,
    pers1: Persuasion,
    pers2: Persuasion,
) -> Optional[ChunkPlan]:
    """Static per-vertex plan making A1 follow P and A2 follow Q, or None.

    Shared edges get one chunking both types take; shared vertices with
    distinct successors get validated split witnesses; solo vertices fall
    back to single-agent persuasion. The assembled plan must survive joint
    simulation (installing a chunking for one type is visible to the other).
    """
    k = budget.k
    next_p = {P[i]: P[i + 1] for i in range(len(P) - 1)}
    next_q = {Q[i]: Q[i + 1] for i in range(len(Q) - 1)}
    agents = AgentSet((b1, b2)) if b1 < b2 else None
    chunkings: dict[Edge, Chunking] = {}
    total = 0

    def solo(u: str, v: str, b: Fraction, pers: Persuasion) -> bool:
        nonlocal total
        if pers.default[u] == v:
            return True
        l = chunk_budget_needed(g, dist, pers, b, u, v, k) if k else None
        if l is None:
            return False
        use = l if budget.mode == "global" else k
        chunkings[(u, v)] = optimal_edge_chunking(g, dist, (u, v), b, use)[0]
        total += use if budget.mode == "local" else l
        return True

    for u, v in next_p.items():
        if u in next_q:
            z = next_q[u]
            if v == z:
                if pers1.default[u] == v and pers2.default[u] == v:
                    continue
                if agents is None:
                    if not solo(u, v, b1, pers1):
                        return None
                    continue
                if k == 0:
                    return None
                l = (
                    min_chunks_same_path(g, dist, (u, v), agents, k)
                    if budget.mode == "global"
                    else (k if same_path_feasible(g, dist, (u, v), agents, k) else None)
                )
                if l is None:
                    return None
                chunkings[(u, v)] = chunk_same_path(g, dist, (u, v), agents, l)
                total += l
            else:
                if agents is None:
                    return None  # equal types cannot be split
                entry = _best_split_entry(
                    g, dist, u, v, z, b1, b2, budget, pers1, pers2
                )
                if entry is None:
                    return None
                for ch in entry.witnesses:
                    chunkings[ch.edge] = ch
                total += entry.chunk_count
        else:
            if not solo(u, v, b1, pers1):
                return None
    for y, z in next_q.items():
        if y in next_p:
            continue
        if not solo(y, z, b2, pers2):
            return None
    if budget.mode == "global" and total > k:
        return None
    plan = ChunkPlan(
        chunkings=tuple(chunkings[e] for e in sorted(chunkings)),
        mode=budget.mode,
        k=k,
        planned_paths=(P, Q),
        predicted_cost=path_cost(g, P) + path_cost(g, Q),
        biases=(b1, b2),
    )
    t1, t2 = joint_simulate(g, plan, (b1, b2))
    _, cg = simulate_plan(g, plan, BiasProfile(b1))
    if original_path(cg, t1.path) != P or t1.total != path_cost(g, P):
        return None
    if original_path(cg, t2.path) != Q or t2.total != path_cost(g, Q):
        return None
    return plan


def two_agent_plan(
    g: TaskGraph, b1: Fraction, b2: Fraction, budget: BudgetSpec
) -> tuple[ChunkPlan, tuple[TraversalTrace, TraversalTrace]]:
    """Minimize the sum of both types' incurred costs under one chunk plan.

    Dynamic program over position pairs with the three meet cases; the
    reconstructed pair is rebuilt as a static per-vertex plan and validated
    by joint simulation, falling back to exhaustive enumeration of path
    pairs when the optimistic recurrence overreaches (interactions between
    chunkings installed at a vertex both paths visit at different times).
    """
    if b1 > b2:
        raise InvalidParams("need b1 <= b2")
    dist = shortest_to_sink(g)
    if b1 == b2:
        if budget.mode == "local":
            plan, trace = chunk_graph_local(g, b1, budget.k)
        else:
            plan, trace = chunk_graph_global(g, b1, budget.k)
        pair_plan = ChunkPlan(
            chunkings=plan.chunkings,
            mode=budget.mode,
            k=budget.k,
            planned_paths=plan.planned_paths * 2,
            predicted_cost=plan.predicted_cost * 2,
            biases=(b1, b2),
        )
        return pair_plan, (trace, trace)

    pers1 = persuasion_profile(g, dist, b1)
    pers2 = persuasion_profile(g, dist, b2)
    pair = _two_agent_dp(g, dist, b1, b2, budget, pers1, pers2)
    if pair is not None:
        plan = _pair_plan(g, dist, b1, b2, pair[0], pair[1], budget, pers1, pers2)
        if plan is not None:
            traces = joint_simulate(g, plan, (b1, b2))
            return plan, (traces[0], traces[1])
    # Fallback: exhaustive static search (always contains the default pair).
    best_plan: Optional[ChunkPlan] = None
    paths = _all_paths(g, enumeration_cap())
    pairs = sorted(
        product(paths, paths),
        key=lambda pq: (path_cost(g, pq[0]) + path_cost(g, pq[1]), pq),
    )
    for P, Q in pairs:
        plan = _pair_plan(g, dist, b1, b2, P, Q, budget, pers1, pers2)
        if plan is not None:
            best_plan = plan
            break
    assert best_plan is not None, "default biased paths must always validate"
    traces = joint_simulate(g, best_plan, (b1, b2))
    return best_plan, (traces[0], traces[1])


def _two_agent_dp(
    g: TaskGraph,
    dist: DistanceMap,
    b1: Fraction,
    b2: Fraction,
    budget: BudgetSpec,
    pers1: Persuasion,
    pers2: Persuasion,
) -> Optional[tuple[tuple[str, ...], tuple[str, ...]]]:
    """Value recurrence over position pairs; returns the argmin path pair."""
    k = budget.k
    order = validate(g)
    t = g.sink

    def need(pers: Persuasion, b: Fraction, u: str, v: str) -> Optional[int]:
        if pers.default[u] == v:
            return 0
        if k == 0:
            return None
        return chunk_budget_needed(g, dist, pers, b, u, v, k)

    l1: dict[Edge, Optional[int]] = {}
    l2: dict[Edge, Optional[int]] = {}
    for u, v, _ in g.edges:
        l1[(u, v)] = need(pers1, b1, u, v)
        l2[(u, v)] = need(pers2, b2, u, v)

    pair_sets: dict[str, CompatibilitySet] = {}
    for u in g.vertices:
        if u != t and g.out_edges(u):
            pair_sets[u] = compatible_pairs(g, dist, u, u, b1, b2, budget)

    if budget.mode == "local":
        solo1 = _solo_cost_table(g, dist, l1)
        solo2 = _solo_cost_table(g, dist, l2)
        budgets = [0]

        def solo_val(table, u: str, i: int) -> Optional[Fraction]:
            return table.get(u)

    else:
        pers_t1 = global_cost_table(g, dist, pers1, b1, k)[0]
        pers_t2 = global_cost_table(g, dist, pers2, b2, k)[0]
        budgets = list(range(k + 1))

        def solo_val(table, u: str, i: int) -> Optional[Fraction]:
            return table.get((u, i))

        solo1, solo2 = pers_t1, pers_t2

    value: dict[tuple[str, str, int], Fraction] = {}
    move: dict[tuple[str, str, int], tuple] = {}
    rev = [u for u in reversed(order)]
    for u in rev:
        for y in rev:
            for i in budgets:
                if u == t and y == t:
                    value[(u, y, i)] = Fraction(0)
                    continue
                if y == t:
                    val = solo_val(solo1, u, i)
                    if val is not None:
                        value[(u, y, i)] = val
                        move[(u, y, i)] = ("solo1",)
                    continue
                if u == t:
                    val = solo_val(solo2, y, i)
                    if val is not None:
                        value[(u, y, i)] = val
                        move[(u, y, i)] = ("solo2",)
                    continue
                best: Optional[tuple[Fraction, int, tuple]] = None
                if u == y:
                    for (v, z), entry in sorted(pair_sets[u].entries.items()):
                        l = entry.chunk_count if budget.mode == "global" else 0
                        if l > i:
                            continue
                        key = (v, z, i - l)
                        if key not in value:
                            continue
                        cand = (
                            g.cost(u, v) + g.cost(u, z) + value[key],
                            0,
                            ("pair", v, z, l),
                        )
                        if best is None or cand < best:
                            best = cand
                else:
                    lu = l2.get((y, u))
                    if g.has_edge(y, u) and lu is not None:
                        l = lu if budget.mode == "global" else 0
                        if l <= i and (u, u, i - l) in value:
                            cand = (
                                g.cost(y, u) + value[(u, u, i - l)],
                                1,
                                ("join2", lu),
                            )
                            if best is None or cand < best:
                                best = cand
                    lv = l1.get((u, y))
                    if g.has_edge(u, y) and lv is not None:
                        l = lv if budget.mode == "global" else 0
                        if l <= i and (y, y, i - l) in value:
                            cand = (
                                g.cost(u, y) + value[(y, y, i - l)],
                                2,
                                ("join1", lv),
                            )
                            if best is None or cand < best:
                                best = cand
                    for v, _ in g.out_edges(u):
                        if v == y:
                            continue
                        la = l1.get((u, v))
                        if la is None:
                            continue
                        for z, _ in g.out_edges(y):
                            if z == u:
                                continue
                            lb = l2.get((y, z))
                            if lb is None:
                                continue
                            l = la + lb if budget.mode == "global" else 0
                            if l > i or (v, z, i - l) not in value:
                                continue
                            cand = (
                                g.cost(u, v) + g.cost(y, z) + value[(v, z, i - l)],
                                3,
                                ("both", v, z, la, lb),
                            )
                            if best is None or cand < best:
                                best = cand
                if best is not None:
                    value[(u, y, i)] = best[0]
                    move[(u, y, i)] = best[2]

    start = (g.source, g.source, budgets[-1])
    if start not in value:
        return None
    # Walk the recorded moves into the two realized paths.
    P: list[str] = [g.source]
    Q: list[str] = [g.source]
    u, y, i = start
    guard = 0
    while not (u == t and y == t):
        guard += 1
        if guard > 10 * len(order) ** 2:  # pragma: no cover - safety net
            return None
        mv = move.get((u, y, i))
        if mv is None:
            return None
        if mv[0] == "solo1":
            P.extend(_solo_path(g, dist, l1, solo1, budget, u, i))
            u = t
            continue
        if mv[0] == "solo2":
            Q.extend(_solo_path(g, dist, l2, solo2, budget, y, i))
            y = t
            continue
        if mv[0] == "pair":
            _, v, z, l = mv
            P.append(v)
            Q.append(z)
            u, y, i = v, z, i - (l if budget.mode == "global" else 0)
            continue
        if mv[0] == "join2":
            l = mv[1] if budget.mode == "global" else 0
            Q.append(u)
            y = u
            i -= l
            continue
        if mv[0] == "join1":
            l = mv[1] if budget.mode == "global" else 0
            P.append(y)
            u = y
            i -= l
            continue
        _, v, z, la, lb = mv
        P.append(v)
        Q.append(z)
        u, y = v, z
        if budget.mode == "global":
            i -= la + lb
    return tuple(P), tuple(Q)


def _solo_cost_table(
    g: TaskGraph, dist: DistanceMap, l: dict[Edge, Optional[int]]
) -> dict[str, Fraction]:
    order = validate(g)
    cost: dict[str, Fraction] = {g.sink: Fraction(0)}
    for u in reversed(order):
        if u == g.sink:
            continue
        best: Optional[Fraction] = None
        for head, c in g.out_edges(u):
            if l[(u, head)] is None or head not in cost:
                continue
            total = c + cost[head]
            if best is None or total < best:
                best = total
        if best is not None:
            cost[u] = best
    return cost


def _solo_path(
    g: TaskGraph,
    dist: DistanceMap,
    l: dict[Edge, Optional[int]],
    table,
    budget: BudgetSpec,
    u: str,
    i: int,
) -> list[str]:
    """Continuation of one agent's cheapest persuadable path from u."""
    path: list[str] = []
    while u != g.sink:
        best: Optional[tuple[Fraction, int, str]] = None
        for head, c in g.out_edges(u):
            lu = l[(u, head)]
            if lu is None:
                continue
            if budget.mode == "global":
                if lu > i or (head, i - lu) not in table:
                    continue
                cand = (c + table[(head, i - lu)], lu, head)
            else:
                if head not in table:
                    continue
                cand = (c + table[head], 0, head)
            if best is None or cand < best:
                best = cand
        assert best is not None
        path.append(best[2])
        if budget.mode == "global":
            i -= best[1]
        u = best[2]
    return path


# ---------------------------------------------------------------------------
# m agents forced onto one shared path
# ---------------------------------------------------------------------------


def m_agent_single_path_plan(
    g: TaskGraph, agents: AgentSet, budget: BudgetSpec
) -> tuple[ChunkPlan, tuple[str, ...]]:
    """Cheapest single path every agent type can be persuaded to follow.

    Local mode prunes edges with no chunking all types accept; global mode
    runs the budgeted recurrence with each edge's minimal group chunk count.
    Every agent is simulated on the final plan.
    """
    if agents.m == 1:
        b = agents.biases[0]
        if budget.mode == "local":
            plan, _ = chunk_graph_local(g, b, budget.k)
        else:
            plan, _ = chunk_graph_global(g, b, budget.k)
        return plan, plan.planned_paths[0]
    dist = shortest_to_sink(g)
    perss = [persuasion_profile(g, dist, b) for b in agents.biases]
    k = budget.k

    def group_need(u: str, v: str) -> Optional[int]:
        if all(p.default[u] == v for p in perss):
            return 0
        if k == 0:
            return None
        return min_chunks_same_path(g, dist, (u, v), agents, k)

    need: dict[Edge, Optional[int]] = {}
    for u, v, _ in g.edges:
        need[(u, v)] = group_need(u, v)

    if budget.mode == "local":
        cost = _solo_cost_table(g, dist, need)
        if g.source not in cost:
            raise AssertionError("default path must survive")  # pragma: no cover
        path = [g.source]
        while path[-1] != g.sink:
            u = path[-1]
            best = min(
                (c + cost[head], head)
                for head, c in g.out_edges(u)
                if need[(u, head)] is not None and head in cost
            )
            path.append(best[1])
        predicted = cost[g.source]
        alloc = {
            (path[i], path[i + 1]): k
            for i in range(len(path) - 1)
            if need[(path[i], path[i + 1])] != 0
        }
    else:
        table, choice = _group_global_table(g, dist, need, k)
        if (g.source, k) not in table:
            raise AssertionError("default path must survive")  # pragma: no cover
        path = [g.source]
        alloc = {}
        budget_left = k
        while path[-1] != g.sink:
            head, used = choice[(path[-1], budget_left)]
            if used:
                alloc[(path[-1], head)] = used
            path.append(head)
            budget_left -= used
        predicted = table[(g.source, k)]

    chunkings = tuple(
        chunk_same_path(g, dist, edge, agents, l) for edge, l in sorted(alloc.items())
    )
    plan = ChunkPlan(
        chunkings=chunkings,
        mode=budget.mode,
        k=k,
        planned_paths=(tuple(path),) * agents.m,
        predicted_cost=predicted * agents.m,
        biases=agents.biases,
    )
    for b in agents.biases:
        trace, cg = simulate_plan(g, plan, BiasProfile(b))
        if original_path(cg, trace.path) != tuple(path) or trace.total != predicted:
            raise AssertionError(
                f"type {b} deviates from the shared path"
            )  # pragma: no cover - invariant
    return plan, tuple(path)


def _group_global_table(
    g: TaskGraph,
    dist: DistanceMap,
    need: dict[Edge, Optional[int]],
    k: int,
) -> tuple[dict[tuple[str, int], Fraction], dict[tuple[str, int], tuple[str, int]]]:
    order = validate(g)
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
                l = need[(u, head)]
                if l is None or l > i or (head, i - l) not in table:
                    continue
                cand = (c + table[(head, i - l)], l, head)
                if best is None or cand < best:
                    best = cand
            if best is not None:
                table[(u, i)] = best[0]
                choice[(u, i)] = (best[2], best[1])
    return table, choice
