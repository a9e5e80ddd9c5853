"""Chunk plans and their expansion into explicit graphs with chunk markers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .edge_chunk import Chunking
from .errors import InvalidParams, ParseError, UnknownEdge
from .graph import Edge, TaskGraph
from .rational import format_rat, rat


@dataclass(frozen=True)
class ChunkPlan:
    """Map from edges to chunkings, with optional planner metadata.

    Budget accounting: an edge absent from the plan consumes 0 budget; an
    edge chunked into j pieces consumes j (a 1-chunking is a real entry: it
    marks the edge so ties break toward it).
    """

    chunkings: tuple[Chunking, ...]
    mode: Optional[str] = None
    k: Optional[int] = None
    planned_paths: tuple[tuple[str, ...], ...] = ()
    predicted_cost: Optional[Fraction] = None
    biases: tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        seen: set[Edge] = set()
        for ch in self.chunkings:
            if ch.edge in seen:
                raise InvalidParams(f"duplicate chunking for edge {ch.edge}")
            seen.add(ch.edge)

    def by_edge(self) -> dict[Edge, Chunking]:
        return {ch.edge: ch for ch in self.chunkings}

    @property
    def total_chunks(self) -> int:
        return sum(ch.k for ch in self.chunkings)

    def validate_against(self, g: TaskGraph) -> None:
        for ch in self.chunkings:
            if not g.has_edge(*ch.edge):
                raise UnknownEdge(*ch.edge)
            if ch.total != g.cost(*ch.edge):
                raise InvalidParams(
                    f"chunking of {ch.edge} sums to {ch.total}, "
                    f"edge costs {g.cost(*ch.edge)}"
                )

    def to_json(self) -> dict:
        payload: dict = {
            "chunkings": [
                {
                    "from": ch.tail,
                    "to": ch.head,
                    "chunks": [format_rat(x) for x in ch.chunks],
                }
                for ch in self.chunkings
            ]
        }
        if self.mode is not None:
            payload["mode"] = self.mode
        if self.k is not None:
            payload["k"] = self.k
        if self.planned_paths:
            payload["planned_paths"] = [list(p) for p in self.planned_paths]
        if self.predicted_cost is not None:
            payload["predicted_cost"] = format_rat(self.predicted_cost)
        if self.biases:
            payload["biases"] = [format_rat(b) for b in self.biases]
        return payload

    @classmethod
    def from_json(cls, payload: dict) -> "ChunkPlan":
        if not isinstance(payload, dict) or "chunkings" not in payload:
            raise ParseError("plan", "missing 'chunkings' field")
        chunkings = []
        for i, entry in enumerate(payload["chunkings"]):
            try:
                chunkings.append(
                    Chunking(
                        entry["from"],
                        entry["to"],
                        tuple(rat(x) for x in entry["chunks"]),
                    )
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ParseError(f"plan.chunkings[{i}]", str(exc)) from exc
        return cls(
            chunkings=tuple(chunkings),
            mode=payload.get("mode"),
            k=payload.get("k"),
            planned_paths=tuple(
                tuple(p) for p in payload.get("planned_paths", [])
            ),
            predicted_cost=(
                rat(payload["predicted_cost"])
                if "predicted_cost" in payload
                else None
            ),
            biases=tuple(rat(b) for b in payload.get("biases", [])),
        )


def single_edge_plan(chunking: Chunking) -> ChunkPlan:
    return ChunkPlan(chunkings=(chunking,))


@dataclass(frozen=True)
class ChunkedGraph:
    """A graph expanded under a plan, with chunk-membership edge markers.

    marks holds every edge that belongs to some chunking (including trivial
    1-chunkings); chains maps each chunked original edge to its full vertex
    chain (original tail, intermediate vertices, original head). Deviation
    edges copied onto chain vertices are never marked.
    """

    graph: TaskGraph
    marks: frozenset[Edge]
    chains: Mapping[Edge, tuple[str, ...]]
    original: TaskGraph
    plan: ChunkPlan

    def chain_of(self, edge: Edge) -> tuple[str, ...]:
        return self.chains[edge]


def chain_vertex(edge: Edge, i: int) -> str:
    return f"{edge[0]}>{edge[1]}#{i}"


def expand_plan(g: TaskGraph, plan: ChunkPlan) -> ChunkedGraph:
    """Replace each planned edge by its chunk chain.

    Chain vertices inherit copies of the tail's other out-edges at their
    original full costs; chunkings of those other edges are not inherited
    mid-chain (a chunking only restructures decisions made at its own tail).
    """
    plan.validate_against(g)
    by_edge = plan.by_edge()
    vertices = list(g.vertices)
    existing = set(vertices)
    edges: list[tuple[str, str, Fraction]] = []
    marks: set[Edge] = set()
    chains: dict[Edge, tuple[str, ...]] = {}

    for u, v, c in g.edges:
        if (u, v) not in by_edge:
            edges.append((u, v, c))
    for (u, v), chunking in sorted(by_edge.items()):
        k = chunking.k
        if k == 1:
            edges.append((u, v, chunking.chunks[0]))
            marks.add((u, v))
            chains[(u, v)] = (u, v)
            continue
        mids = [chain_vertex((u, v), i) for i in range(1, k)]
        for m in mids:
            if m in existing:
                raise InvalidParams(f"synthesized chain vertex {m!r} collides")
            existing.add(m)
            vertices.append(m)
        chain = [u, *mids, v]
        for i in range(k):
            edges.append((chain[i], chain[i + 1], chunking.chunks[i]))
            marks.add((chain[i], chain[i + 1]))
        deviations = [(head, cost) for head, cost in g.out_edges(u) if head != v]
        for m in mids:
            for head, cost in deviations:
                edges.append((m, head, cost))
        chains[(u, v)] = tuple(chain)

    expanded = TaskGraph(vertices, edges, source=g.source, sink=g.sink)
    return ChunkedGraph(
        graph=expanded,
        marks=frozenset(marks),
        chains=chains,
        original=g,
        plan=plan,
    )


def walk_follows_chunking(walk: Iterable[str], chain: tuple[str, ...]) -> bool:
    """True iff the walk traverses the full chain consecutively."""
    seq = list(walk)
    try:
        start = seq.index(chain[0])
    except ValueError:
        return False
    return tuple(seq[start : start + len(chain)]) == chain


def original_path(cg: ChunkedGraph, walk: Iterable[str]) -> tuple[str, ...]:
    """Project an expanded-graph walk onto original vertices."""
    original = set(cg.original.vertices)
    return tuple(v for v in walk if v in original)

