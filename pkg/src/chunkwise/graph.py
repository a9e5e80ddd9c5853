"""Weighted task-DAG model: exact costs, validation, distances, generators, IO."""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import (
    CycleDetected,
    InvalidSpec,
    MissingSourceOrSink,
    NegativeCost,
    ParseError,
    SinkUnreachable,
)
from .rational import RatLike, format_rat, rat

Edge = tuple[str, str]


class TaskGraph:
    """A weighted DAG with a designated source and sink.

    Immutable after construction. Edge costs are exact nonnegative rationals;
    at most one edge per ordered vertex pair, no self-loops.
    """

    def __init__(
        self,
        vertices: Iterable[str],
        edges: Iterable[tuple[str, str, RatLike]],
        source: str,
        sink: str,
    ) -> None:
        self.vertices: tuple[str, ...] = tuple(vertices)
        seen: set[str] = set()
        for v in self.vertices:
            if not v:
                raise ParseError("vertices", "vertex ids must be non-empty")
            if v in seen:
                raise ParseError("vertices", f"duplicate vertex id {v!r}")
            seen.add(v)
        if source not in seen or sink not in seen:
            raise MissingSourceOrSink(
                f"source {source!r} and sink {sink!r} must both be vertices"
            )
        self.source = source
        self.sink = sink

        self._cost: dict[Edge, Fraction] = {}
        out: dict[str, list[tuple[str, Fraction]]] = {v: [] for v in self.vertices}
        for tail, head, raw in edges:
            if tail not in seen or head not in seen:
                raise ParseError("edges", f"edge ({tail}, {head}) references unknown vertex")
            if tail == head:
                raise ParseError("edges", f"self-loop at {tail}")
            if (tail, head) in self._cost:
                raise ParseError("edges", f"duplicate edge ({tail}, {head})")
            cost = rat(raw)
            if cost < 0:
                raise NegativeCost(tail, head, cost)
            self._cost[(tail, head)] = cost
            out[tail].append((head, cost))
        # Sorted adjacency keeps every downstream iteration deterministic.
        self._out: dict[str, tuple[tuple[str, Fraction], ...]] = {
            v: tuple(sorted(lst)) for v, lst in out.items()
        }

    @property
    def edges(self) -> tuple[tuple[str, str, Fraction], ...]:
        return tuple((u, v, c) for (u, v), c in sorted(self._cost.items()))

    def out_edges(self, u: str) -> tuple[tuple[str, Fraction], ...]:
        return self._out[u]

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in self._cost

    def cost(self, u: str, v: str) -> Fraction:
        try:
            return self._cost[(u, v)]
        except KeyError:
            raise KeyError(f"no edge ({u}, {v})") from None

    def has_vertex(self, v: str) -> bool:
        return v in self._out

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"TaskGraph({len(self.vertices)} vertices, {len(self._cost)} edges, "
            f"{self.source}->{self.sink})"
        )


def validate(g: TaskGraph) -> tuple[str, ...]:
    """Return a topological order (lexicographic among ready vertices).

    Raises CycleDetected naming a back edge if the graph is not acyclic.
    """
    indegree = {v: 0 for v in g.vertices}
    for _, head, _ in g.edges:
        indegree[head] += 1
    ready = [v for v in g.vertices if indegree[v] == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for head, _ in g.out_edges(v):
            indegree[head] -= 1
            if indegree[head] == 0:
                heapq.heappush(ready, head)
    if len(order) != len(g.vertices):
        leftover = {v for v in g.vertices if v not in set(order)}
        for u, v, _ in g.edges:
            if u in leftover and v in leftover:
                raise CycleDetected(u, v)
        raise CycleDetected("?", "?")  # pragma: no cover - leftover always has an edge
    return tuple(order)


@dataclass(frozen=True)
class DistanceMap:
    """Exact shortest-path-to-sink costs plus one witness successor per vertex."""

    dist: Mapping[str, Fraction]
    successor: Mapping[str, str]

    def __getitem__(self, vertex: str) -> Fraction:
        return self.dist[vertex]


def shortest_to_sink(g: TaskGraph) -> DistanceMap:
    """Reverse-topological relaxation of exact distances to the sink.

    The recorded successor is the lexicographically least head among
    minimizers. Raises SinkUnreachable listing vertices with no sink path.
    """
    order = validate(g)
    dist: dict[str, Fraction] = {g.sink: Fraction(0)}
    succ: dict[str, str] = {}
    for u in reversed(order):
        if u == g.sink:
            continue
        best: Fraction | None = None
        best_head: str | None = None
        for head, cost in g.out_edges(u):
            if head not in dist:
                continue
            total = cost + dist[head]
            if best is None or total < best:
                best, best_head = total, head
        if best is None:
            continue
        dist[u] = best
        succ[u] = best_head  # type: ignore[assignment]
    missing = tuple(v for v in g.vertices if v not in dist)
    if missing:
        raise SinkUnreachable(missing)
    return DistanceMap(dist=dist, successor=succ)


@dataclass(frozen=True)
class FanSpec:
    """Parameters of the n-fan family: spine of free hops, exits costing c^i."""

    n: int
    c: Fraction


def make_n_fan(spec: FanSpec) -> TaskGraph:
    """Build the n-fan: v_0..v_n on a zero-cost spine, exit (v_i, t) costs c^i."""
    if spec.n < 1:
        raise InvalidSpec(f"fan needs n >= 1, got {spec.n}")
    c = rat(spec.c)
    if c <= 1:
        raise InvalidSpec(f"fan needs c > 1, got {c}")
    width = len(str(spec.n))
    names = [f"v{i:0{width}d}" for i in range(spec.n + 1)]
    edges: list[tuple[str, str, Fraction]] = []
    for i in range(spec.n):
        edges.append((names[i], names[i + 1], Fraction(0)))
    for i in range(spec.n + 1):
        edges.append((names[i], "t", c**i))
    return TaskGraph(names + ["t"], edges, source=names[0], sink="t")


def load_graph(data: bytes | str) -> TaskGraph:
    """Parse the graph JSON format; costs are exact decimal or "p/q" strings."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError("json", str(exc)) from exc
    if not isinstance(payload, dict):
        raise ParseError("json", "top level must be an object")
    for key in ("vertices", "edges", "source", "sink"):
        if key not in payload:
            raise ParseError(key, "missing required field")
    vertices = payload["vertices"]
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise ParseError("vertices", "must be a list of strings")
    raw_edges = payload["edges"]
    if not isinstance(raw_edges, list):
        raise ParseError("edges", "must be a list")
    edges: list[tuple[str, str, Fraction]] = []
    for i, entry in enumerate(raw_edges):
        if not isinstance(entry, dict):
            raise ParseError(f"edges[{i}]", "must be an object")
        try:
            tail, head, cost_text = entry["from"], entry["to"], entry["cost"]
        except KeyError as exc:
            raise ParseError(f"edges[{i}]", f"missing field {exc.args[0]!r}") from exc
        if not isinstance(tail, str) or not isinstance(head, str):
            raise ParseError(f"edges[{i}]", "'from' and 'to' must be strings")
        if not isinstance(cost_text, (str, int)):
            raise ParseError(f"edges[{i}].cost", "must be an exact string or integer")
        try:
            cost = rat(cost_text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"edges[{i}].cost", f"not an exact rational: {cost_text!r}") from exc
        edges.append((tail, head, cost))
    if not isinstance(payload["source"], str) or not isinstance(payload["sink"], str):
        raise ParseError("source/sink", "must be strings")
    return TaskGraph(vertices, edges, source=payload["source"], sink=payload["sink"])


def save_graph(g: TaskGraph) -> bytes:
    """Serialize to the graph JSON format; load(save(g)) is the identity."""
    payload = {
        "vertices": list(g.vertices),
        "edges": [
            {"from": u, "to": v, "cost": format_rat(c)} for u, v, c in g.edges
        ],
        "source": g.source,
        "sink": g.sink,
    }
    return (json.dumps(payload, indent=2) + "\n").encode("utf-8")


def graph_to_dot(g: TaskGraph, marked: Iterable[Edge] = ()) -> str:
    """DOT rendering; marked edges (chunk members) are drawn bold."""
    marked_set = set(marked)
    lines = ["digraph task {", "  rankdir=LR;"]
    for v in g.vertices:
        shape = "doublecircle" if v in (g.source, g.sink) else "circle"
        lines.append(f'  "{v}" [shape={shape}];')
    for u, v, c in g.edges:
        style = ", penwidth=2, color=blue" if (u, v) in marked_set else ""
        lines.append(f'  "{u}" -> "{v}" [label="{format_rat(c)}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def random_task_graph(
    rng: random.Random,
    min_vertices: int = 3,
    max_vertices: int = 7,
    edge_prob: float = 0.55,
    max_cost: int = 24,
) -> TaskGraph:
    """Random connected DAG for randomized suites.

    Vertices are topologically ordered by construction; every vertex lies on
    some source-to-sink path. Costs are small rationals, occasionally zero.
    """
    n = rng.randint(min_vertices, max_vertices)
    names = ["s"] + [chr(ord("a") + i) for i in range(n - 2)] + ["t"]
    dens = (1, 2, 4, 5, 10)
    edges: dict[Edge, Fraction] = {}

    def rand_cost() -> Fraction:
        if rng.random() < 0.12:
            return Fraction(0)
        return Fraction(rng.randint(1, max_cost), rng.choice(dens))

    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < edge_prob:
                edges[(names[i], names[j])] = rand_cost()
    for i in range(n - 1):  # every vertex must reach the sink
        if not any(tail == names[i] for tail, _ in edges):
            j = rng.randint(i + 1, n - 1)
            edges[(names[i], names[j])] = rand_cost()
    for j in range(1, n):  # and be reachable from the source
        if not any(head == names[j] for _, head in edges):
            i = rng.randint(0, j - 1)
            edges[(names[i], names[j])] = rand_cost()
    return TaskGraph(
        names,
        [(u, v, c) for (u, v), c in sorted(edges.items())],
        source="s",
        sink="t",
    )
