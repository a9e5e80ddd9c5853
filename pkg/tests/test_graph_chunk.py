from __future__ import annotations

import random
from fractions import Fraction

import pytest

from chunkwise import (
    BiasProfile,
    BudgetSpec,
    chunk_graph_global,
    chunk_graph_local,
    random_task_graph,
    shortest_to_sink,
    simulate_plan,
    traverse,
)
from chunkwise.errors import InvalidParams
from chunkwise.expansion import original_path
from chunkwise.graph_chunk import persuasion_profile
from chunkwise.oracle import brute_force_graph_plan
from conftest import series_gadgets

B2 = Fraction(2)
F = Fraction


def test_local_k3_chunks_only_the_cheap_detour(s32):
    plan, trace = chunk_graph_local(s32, B2, 3)
    assert [c.edge for c in plan.chunkings] == [("u", "v")]
    assert trace.total == F(741, 10)
    assert plan.planned_paths == (("u", "v", "t"),)
    assert plan.predicted_cost == F(741, 10)


def test_local_k2_cannot_improve(s32):
    plan, trace = chunk_graph_local(s32, B2, 2)
    assert plan.chunkings == ()
    assert trace.total == 76


def test_local_no_improvement_when_paths_coincide():
    from chunkwise import TaskGraph

    g = TaskGraph(["s", "a", "t"], [("s", "a", 1), ("a", "t", 2), ("s", "t", 9)], "s", "t")
    plan, trace = chunk_graph_local(g, B2, 4)
    assert plan.chunkings == ()
    assert trace.total == 3 == shortest_to_sink(g)[g.source]


def test_global_k3_matches_local(s32):
    plan, trace = chunk_graph_global(s32, B2, 3)
    assert trace.total == F(741, 10)
    assert [c.edge for c in plan.chunkings] == [("u", "v")]
    assert plan.total_chunks == 3


def test_global_k0_is_the_biased_default(s32):
    plan, trace = chunk_graph_global(s32, B2, 0)
    assert plan.chunkings == ()
    assert trace.total == traverse(s32, shortest_to_sink(s32), BiasProfile(B2)).total


def test_global_k4_unlocks_the_true_shortest_route(s32):
    # Four chunks tame the 65-cost edge itself: 65/(1-2^-4)+2 <= 76.
    plan, trace = chunk_graph_global(s32, B2, 4)
    assert trace.total == 67
    assert [c.edge for c in plan.chunkings] == [("u", "w")]
    assert plan.total_chunks == 4


def test_series_gadgets_global_budget():
    g = series_gadgets()
    plan, trace = chunk_graph_global(g, B2, 6)
    oracle_cost, _ = brute_force_graph_plan(g, B2, BudgetSpec("global", 6))
    assert trace.total == oracle_cost == 143
    plan3, trace3 = chunk_graph_global(g, B2, 3)
    assert trace3.total == brute_force_graph_plan(g, B2, BudgetSpec("global", 3))[0]
    assert trace3.total == F(1501, 10)


def test_invalid_budgets(s32):
    with pytest.raises(InvalidParams):
        chunk_graph_local(s32, B2, 0)
    with pytest.raises(InvalidParams):
        chunk_graph_global(s32, B2, -1)
    with pytest.raises(InvalidParams):
        BudgetSpec("weird", 3)


def test_plan_trace_agreement_random():
    rng = random.Random(17)
    for _ in range(40):
        g = random_task_graph(rng)
        b = F(rng.randint(5, 12), 4)
        k = rng.randint(1, 3)
        for planner in (chunk_graph_local, chunk_graph_global):
            plan, trace = planner(g, b, k)
            assert trace.total == plan.predicted_cost
            again, cg = simulate_plan(g, plan, BiasProfile(b))
            assert again.total == trace.total
            assert original_path(cg, again.path) == plan.planned_paths[0]


def test_budget_respect_random():
    rng = random.Random(18)
    for _ in range(40):
        g = random_task_graph(rng)
        b = F(rng.randint(5, 12), 4)
        k = rng.randint(1, 3)
        plan_l, _ = chunk_graph_local(g, b, k)
        assert all(c.k <= k for c in plan_l.chunkings)
        plan_g, _ = chunk_graph_global(g, b, k)
        assert plan_g.total_chunks <= k


def test_cost_non_increasing_in_budget():
    rng = random.Random(19)
    for _ in range(25):
        g = random_task_graph(rng)
        b = F(rng.randint(5, 12), 4)
        prev_l = prev_g = None
        for k in range(1, 5):
            _, tl = chunk_graph_local(g, b, k)
            _, tg = chunk_graph_global(g, b, k)
            if prev_l is not None:
                assert tl.total <= prev_l
                assert tg.total <= prev_g
            prev_l, prev_g = tl.total, tg.total


def test_never_chunk_off_path_and_persuasion_soundness():
    rng = random.Random(20)
    for _ in range(40):
        g = random_task_graph(rng)
        dist = shortest_to_sink(g)
        b = F(rng.randint(5, 12), 4)
        k = rng.randint(1, 3)
        pers = persuasion_profile(g, dist, b)
        for planner in (chunk_graph_local, chunk_graph_global):
            plan, trace = planner(g, b, k)
            path = plan.planned_paths[0]
            path_edges = set(zip(path, path[1:]))
            for c in plan.chunkings:
                assert c.edge in path_edges
                u = c.edge[0]
                from chunkwise import evaluate_chunking

                assert evaluate_chunking(g, dist, c, b).bottleneck <= pers.alpha[u]


def test_matches_oracle_exactly_random():
    rng = random.Random(21)
    for _ in range(60):
        g = random_task_graph(rng, min_vertices=3, max_vertices=7)
        b = F(rng.randint(5, 12), 4)
        k = rng.randint(1, 3)
        for mode, planner in (
            ("local", chunk_graph_local),
            ("global", chunk_graph_global),
        ):
            _, trace = planner(g, b, k)
            oracle_cost, _ = brute_force_graph_plan(g, b, BudgetSpec(mode, k))
            assert trace.total == oracle_cost


def test_matches_oracle_on_tie_heavy_integer_graphs():
    # Small integer costs force exact perceived-cost ties; the marker-based
    # tie rule and budget accounting must agree between planner and oracle.
    rng = random.Random(555)
    from chunkwise import TaskGraph

    def tie_heavy(rng):
        n = rng.randint(4, 6)
        names = ["s"] + [chr(ord("a") + i) for i in range(n - 2)] + ["t"]
        edges = {}
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.7:
                    edges[(names[i], names[j])] = F(rng.choice((0, 1, 1, 2, 2, 3, 4)))
        for i in range(n - 1):
            if not any(t == names[i] for t, _ in edges):
                edges[(names[i], names[rng.randint(i + 1, n - 1)])] = F(rng.choice((0, 1, 2)))
        for j in range(1, n):
            if not any(h == names[j] for _, h in edges):
                edges[(names[rng.randint(0, j - 1)], names[j])] = F(rng.choice((0, 1, 2)))
        return TaskGraph(names, [(u, v, c) for (u, v), c in sorted(edges.items())], "s", "t")

    for _ in range(40):
        g = tie_heavy(rng)
        b = F(rng.choice((2, 3, 4)))
        k = rng.randint(1, 3)
        for mode, planner in (("local", chunk_graph_local), ("global", chunk_graph_global)):
            _, trace = planner(g, b, k)
            oracle_cost, _ = brute_force_graph_plan(g, b, BudgetSpec(mode, k))
            assert trace.total == oracle_cost
