from __future__ import annotations

import random
from fractions import Fraction

import pytest

from chunkwise import (
    BiasProfile,
    Chunking,
    FanSpec,
    best_alternative,
    chunk_shortest_edge,
    cost_ratio,
    make_n_fan,
    perceived_cost,
    random_task_graph,
    selective_bias_closed_form,
    selective_bias_equivalence_check,
    shortest_to_sink,
    simulate_plan,
    traverse,
)
from chunkwise.errors import InvalidParams, UnknownEdge, ZeroShortestPath
from chunkwise.expansion import ChunkPlan, single_edge_plan

B2 = Fraction(2)


def test_perceived_cost_examples(s32):
    dist = shortest_to_sink(s32)
    prof = BiasProfile(B2)
    assert perceived_cost(s32, dist, prof, ("u", "w")) == 132
    unbiased = BiasProfile(B2, {("u", "w"): Fraction(1)}, diagnostic=True)
    assert perceived_cost(s32, dist, unbiased, ("u", "w")) == 67
    eight_sevenths = BiasProfile(B2, {("u", "w"): Fraction(8, 7)})
    val = perceived_cost(s32, dist, eight_sevenths, ("u", "w"))
    assert val == Fraction(8, 7) * 65 + 2 == Fraction(534, 7)
    assert val > 76


def test_perceived_cost_unknown_edge(s32):
    with pytest.raises(UnknownEdge):
        perceived_cost(s32, shortest_to_sink(s32), BiasProfile(B2), ("u", "t"))


def test_bias_profile_validation():
    with pytest.raises(InvalidParams):
        BiasProfile(Fraction(1))
    with pytest.raises(InvalidParams):
        BiasProfile(B2, {("a", "b"): Fraction(1, 2)})
    BiasProfile(Fraction(1), diagnostic=True)


def test_best_alternative_examples(s32):
    dist = shortest_to_sink(s32)
    assert best_alternative(s32, dist, BiasProfile(B2), "u") == ("z", 76)
    assert best_alternative(s32, dist, BiasProfile(B2), "w") == ("t", 4)
    fan = make_n_fan(FanSpec(3, Fraction(3, 2)))
    fd = shortest_to_sink(fan)
    assert best_alternative(fan, fd, BiasProfile(B2), "v1") == ("v2", Fraction(9, 4))


def test_traverse_unchunked_s32(s32):
    trace = traverse(s32, shortest_to_sink(s32), BiasProfile(B2))
    assert trace.path == ("u", "z", "t")
    assert trace.total == 76


def test_traverse_optimal_chunking_takes_cheap_route(s32):
    from chunkwise import optimal_edge_chunking

    dist = shortest_to_sink(s32)
    chunking, _ = optimal_edge_chunking(s32, dist, ("u", "v"), B2, 3)
    trace, cg = simulate_plan(s32, single_edge_plan(chunking), BiasProfile(B2))
    assert trace.total == Fraction(741, 10)
    assert trace.path[0] == "u" and trace.path[-1] == "t"
    assert "v" in trace.path


def test_traverse_geometric_chunking_deviates_midway(s32):
    # With chunks (2, 4, 8) the third chunk start is perceived at 76.1, so
    # the agent bails to the 76 route after paying 2 + 4, then pays 0 + 76.
    chunking = Chunking("u", "v", chunk_shortest_edge(Fraction(14), B2, 3))
    trace, cg = simulate_plan(s32, single_edge_plan(chunking), BiasProfile(B2))
    assert trace.path == ("u", "u>v#1", "u>v#2", "z", "t")
    assert trace.total == 82


def test_traverse_tie_prefers_the_chunked_candidate():
    # Exit growth c = b_min(2, 2) makes the chunked first exit tie the spine
    # at v0 exactly; the chunk-continuing candidate must win the tie.
    c = selective_bias_closed_form(B2, 2)
    g = make_n_fan(FanSpec(2, c))
    plan = ChunkPlan(
        chunkings=(Chunking("v0", "t", chunk_shortest_edge(Fraction(1), B2, 2)),)
    )
    trace, _ = simulate_plan(g, plan, BiasProfile(B2))
    assert any(e.vertex == "v0" and e.winner == "v0>t#1" for e in trace.tie_events)
    assert trace.path[1] == "v0>t#1"
    assert trace.total == 1


def test_traversal_determinism(s32):
    dist = shortest_to_sink(s32)
    t1 = traverse(s32, dist, BiasProfile(B2))
    t2 = traverse(s32, dist, BiasProfile(B2))
    assert t1 == t2


def test_unbiased_agent_takes_shortest_path():
    rng = random.Random(23)
    for _ in range(30):
        g = random_task_graph(rng)
        dist = shortest_to_sink(g)
        trace = traverse(g, dist, BiasProfile(Fraction(1), diagnostic=True))
        assert trace.total == dist[g.source]


def test_cost_ratio_examples(s32):
    fan = make_n_fan(FanSpec(3, Fraction(3, 2)))
    assert cost_ratio(fan, BiasProfile(B2)) == Fraction(27, 8)
    assert cost_ratio(s32, BiasProfile(B2)) == Fraction(76, 67)
    assert cost_ratio(s32, BiasProfile(Fraction(1), diagnostic=True)) == 1


def test_cost_ratio_zero_shortest():
    from chunkwise import TaskGraph

    g = TaskGraph(["s", "t"], [("s", "t", 0)], "s", "t")
    with pytest.raises(ZeroShortestPath):
        cost_ratio(g, BiasProfile(B2))


def test_fan_lower_bound_exact():
    # For any 1 < c < b the biased agent rides the spine and pays c^n.
    cases = [(Fraction(3, 2), B2, 4), (Fraction(5, 4), Fraction(3, 2), 5), (Fraction(2), Fraction(3), 6)]
    for c, b, n in cases:
        fan = make_n_fan(FanSpec(n, c))
        assert cost_ratio(fan, BiasProfile(b)) == c**n


def test_selective_bias_equivalence_examples(s32):
    from chunkwise import optimal_edge_chunking

    dist = shortest_to_sink(s32)
    opt3, _ = optimal_edge_chunking(s32, dist, ("u", "v"), B2, 3)
    assert selective_bias_equivalence_check(
        s32, single_edge_plan(opt3), B2, ("u", "v"), Fraction(1)
    )
    whole = Chunking("u", "v", (Fraction(14),))
    assert selective_bias_equivalence_check(
        s32, single_edge_plan(whole), B2, ("u", "v"), B2
    )


def test_selective_bias_equivalence_geometric_family():
    rng = random.Random(3)
    checked = 0
    while checked < 30:
        g = random_task_graph(rng, min_vertices=4, max_vertices=7)
        dist = shortest_to_sink(g)
        b = Fraction(rng.randint(3, 9), 2)
        k = rng.randint(1, 4)
        starts_shortest = [
            (u, v)
            for u, v, c in g.edges
            if dist.successor.get(u) == v and c > 0 and u != g.sink
        ]
        if not starts_shortest:
            continue
        edge = starts_shortest[rng.randrange(len(starts_shortest))]
        chunking = Chunking(*edge, chunk_shortest_edge(g.cost(*edge), b, k))
        b_prime = selective_bias_closed_form(b, k)
        assert selective_bias_equivalence_check(
            g, single_edge_plan(chunking), b, edge, b_prime
        )
        checked += 1


def test_override_only_changes_decisions_at_the_tail():
    # Lowering one edge's bias leaves every other vertex's argmin untouched.
    rng = random.Random(9)
    for _ in range(30):
        g = random_task_graph(rng, min_vertices=4, max_vertices=7)
        dist = shortest_to_sink(g)
        edges = [e[:2] for e in g.edges]
        edge = edges[rng.randrange(len(edges))]
        base = BiasProfile(B2)
        low = BiasProfile(B2, {edge: Fraction(5, 4)})
        for u in g.vertices:
            if u == g.sink or not g.out_edges(u) or u == edge[0]:
                continue
            assert best_alternative(g, dist, base, u) == best_alternative(g, dist, low, u)


def test_trace_json_round_trip_fields(s32):
    trace = traverse(s32, shortest_to_sink(s32), BiasProfile(B2))
    payload = trace.to_json()
    assert payload["path"] == ["u", "z", "t"]
    assert payload["total"] == "76"
    assert payload["steps"][0]["perceived"] == "76"


def test_two_tied_chunk_candidates_fall_back_to_lexicographic():
    # When two chunk-continuing candidates tie exactly, the chunk preference
    # is ambiguous; the walk falls back to the lexicographically least head
    # and records the tie.
    from chunkwise import TaskGraph

    g = TaskGraph(
        ["u", "a", "b", "t"],
        [("u", "a", 4), ("a", "t", 0), ("u", "b", 4), ("b", "t", 0)],
        "u",
        "t",
    )
    plan = ChunkPlan(
        chunkings=(
            Chunking("u", "a", (Fraction(1), Fraction(3))),
            Chunking("u", "b", (Fraction(1), Fraction(3))),
        )
    )
    trace, _ = simulate_plan(g, plan, BiasProfile(B2))
    assert trace.path == ("u", "u>a#1", "a", "t")
    assert trace.tie_events[0].tied == ("u>a#1", "u>b#1")
    assert trace.tie_events[0].winner == "u>a#1"
