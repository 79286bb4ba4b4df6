"""Geodesic metrics driven by grammar runs, plus the classic BFS oracle.

Every metric here reduces to the grammar-constrained shortest path: the
endpoint pair is rebound on the supplied grammar, the walker engine runs
in shortest-only mode, and the aggregate is folded over the resulting
distances.  Unreachable targets are skipped rather than poisoning an
aggregate; the number skipped is reported on the result.

``unlabeled_oracle_geodesics`` is an independent reference: plain BFS on
the undirected, unlabeled projection of the graph, with schema triples
(rdf/rdfs namespaces by default) excluded.  It never touches the walker
engine, which is what makes it usable as an oracle against it.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Optional

from .engine import DEFAULT_MAX_STEPS, PathRecord, RunMode, run
from .grammar import Grammar, rebind_endpoints
from .store import (
    RDF_NS,
    RDFS_NS,
    RESULT_NS,
    Graph,
    Iri,
    Resource,
    Triple,
    resource_key,
)

DEFAULT_SCHEMA_NAMESPACES = (RDF_NS, RDFS_NS)

PROJECTION_PREDICATE = Iri(RESULT_NS + "adjacentTo")


class Degree(NamedTuple):
    in_degree: int
    out_degree: int


def degree(graph: Graph, vertex: Resource) -> Degree:
    """In- and out-degree over all triples, regardless of predicate."""
    return Degree(len(graph.incoming(vertex)), len(graph.outgoing(vertex)))


class MetricKind(Enum):
    SHORTEST_PATH = "shortest-path"
    ECCENTRICITY = "eccentricity"
    RADIUS = "radius"
    DIAMETER = "diameter"
    CLOSENESS = "closeness"
    BETWEENNESS = "betweenness"


@dataclass(frozen=True)
class MetricResult:
    kind: MetricKind
    value: Optional[float]
    defined: bool
    witness_paths: tuple = ()
    skipped_targets: int = 0


def _undefined(kind: MetricKind, skipped: int = 0) -> MetricResult:
    return MetricResult(kind, None, False, (), skipped)


def shortest_path(
    graph: Graph,
    grammar: Grammar,
    max_steps: int = DEFAULT_MAX_STEPS,
    workers: int = 1,
) -> MetricResult:
    """Shortest grammar-constrained path between the grammar's endpoints.

    The witnesses are every tied-shortest record; the value is their edge
    length.  Undefined when the sink is unreachable under the grammar.
    """
    records = run(graph, grammar, RunMode.SHORTEST_ONLY, max_steps, workers=workers)
    if not records:
        return _undefined(MetricKind.SHORTEST_PATH)
    best = min(r.edge_length for r in records)
    witnesses = tuple(sorted((r for r in records if r.edge_length == best), key=PathRecord.key))
    return MetricResult(MetricKind.SHORTEST_PATH, best, True, witnesses)


def _pair_distance(graph, grammar, source, target, max_steps) -> Optional[int]:
    result = shortest_path(graph, rebind_endpoints(grammar, source, target), max_steps)
    return result.value if result.defined else None


def _map_ordered(fn, items, workers: int):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def eccentricity(
    graph: Graph,
    grammar: Grammar,
    source: Resource,
    targets: Iterable,
    max_steps: int = DEFAULT_MAX_STEPS,
    workers: int = 1,
) -> MetricResult:
    """Largest shortest path from ``source`` to any reachable target."""
    others = sorted((t for t in set(targets) if t != source), key=resource_key)
    distances = _map_ordered(
        lambda t: _pair_distance(graph, grammar, source, t, max_steps), others, workers
    )
    reached = [d for d in distances if d is not None]
    skipped = len(distances) - len(reached)
    if not reached:
        return _undefined(MetricKind.ECCENTRICITY, skipped)
    return MetricResult(MetricKind.ECCENTRICITY, max(reached), True, (), skipped)


def _spread(
    kind: MetricKind,
    pick,
    graph: Graph,
    grammar: Grammar,
    vertices: Iterable,
    max_steps: int,
    workers: int,
) -> MetricResult:
    universe = sorted(set(vertices), key=resource_key)
    if len(universe) < 2:
        raise ValueError(f"{kind.value} needs at least two vertices")
    results = _map_ordered(
        lambda v: eccentricity(graph, grammar, v, universe, max_steps), universe, workers
    )
    defined = [r.value for r in results if r.defined]
    skipped = sum(1 for r in results if not r.defined)
    if not defined:
        return _undefined(kind, skipped)
    return MetricResult(kind, pick(defined), True, (), skipped)


def radius(graph, grammar, vertices, max_steps=DEFAULT_MAX_STEPS, workers=1) -> MetricResult:
    """Minimum eccentricity over the vertex universe."""
    return _spread(MetricKind.RADIUS, min, graph, grammar, vertices, max_steps, workers)


def diameter(graph, grammar, vertices, max_steps=DEFAULT_MAX_STEPS, workers=1) -> MetricResult:
    """Maximum eccentricity over the vertex universe."""
    return _spread(MetricKind.DIAMETER, max, graph, grammar, vertices, max_steps, workers)


def closeness(
    graph: Graph,
    grammar: Grammar,
    source: Resource,
    targets: Iterable,
    max_steps: int = DEFAULT_MAX_STEPS,
    workers: int = 1,
) -> MetricResult:
    """Reciprocal of the summed shortest paths to every reachable target."""
    others = sorted((t for t in set(targets) if t != source), key=resource_key)
    distances = _map_ordered(
        lambda t: _pair_distance(graph, grammar, source, t, max_steps), others, workers
    )
    reached = [d for d in distances if d is not None]
    skipped = len(distances) - len(reached)
    if not reached:
        return _undefined(MetricKind.CLOSENESS, skipped)
    return MetricResult(MetricKind.CLOSENESS, 1.0 / sum(reached), True, (), skipped)


def betweenness(
    graph: Graph,
    grammar: Grammar,
    vertex: Resource,
    vertices: Iterable,
    max_steps: int = DEFAULT_MAX_STEPS,
    workers: int = 1,
) -> MetricResult:
    """Fraction of tied-shortest paths passing through ``vertex``, summed
    over every ordered endpoint pair not involving it.

    A path counts when the vertex appears strictly between its endpoints.
    Pairs with no path contribute nothing.
    """
    universe = sorted(set(vertices), key=resource_key)
    pairs = [
        (j, k)
        for j in universe
        for k in universe
        if j != k and vertex not in (j, k)
    ]

    def contribution(pair):
        j, k = pair
        result = shortest_path(graph, rebind_endpoints(grammar, j, k), max_steps)
        if not result.defined:
            return 0.0
        through = sum(1 for r in result.witness_paths if vertex in r.vertices()[1:-1])
        return through / len(result.witness_paths)

    total = sum(_map_ordered(contribution, pairs, workers))
    return MetricResult(MetricKind.BETWEENNESS, total, True)


# -- universe helpers -----------------------------------------------------------


def default_universe(graph: Graph, grammar: Grammar) -> frozenset:
    """Vertices whose type matches the entry context's bound resource."""
    wanted = grammar.entry_context.for_resource
    return frozenset(
        v for v in graph.vertices() if graph.has_type_or_equal(v, wanted)
    )


# -- undirected unlabeled projection and its BFS oracle ---------------------------


def _is_schema(triple: Triple, namespaces) -> bool:
    return any(triple.predicate.value.startswith(ns) for ns in namespaces)


def projection_edges(graph: Graph, schema_namespaces=DEFAULT_SCHEMA_NAMESPACES) -> set:
    """Unordered vertex pairs from every non-schema triple."""
    edges = set()
    for t in graph.triples:
        if _is_schema(t, schema_namespaces):
            continue
        a, b = sorted((t.subject, t.object), key=resource_key)
        edges.add((a, b))
    return edges


def project_to_unlabeled(
    graph: Graph, schema_namespaces=DEFAULT_SCHEMA_NAMESPACES
) -> Graph:
    """Materialize the undirected, unlabeled view as a single-predicate graph.

    Parallel and inverse edges collapse, so path multiplicities on the
    projection match what classic single-relational metrics would count.
    """
    triples = [
        Triple(a, PROJECTION_PREDICATE, b)
        for a, b in projection_edges(graph, schema_namespaces)
    ]
    return Graph(triples, graph.prefix_map, graph.subsumption)


def unlabeled_oracle_geodesics(
    graph: Graph,
    source: Resource,
    target: Resource,
    schema_namespaces=DEFAULT_SCHEMA_NAMESPACES,
) -> Optional[int]:
    """Classic BFS distance on the undirected unlabeled projection.

    Reference implementation independent of the walker engine: adjacency
    lists and a queue, nothing else.  Returns None when unreachable.
    """
    if source == target:
        return 0
    adjacency: dict = {}
    for a, b in projection_edges(graph, schema_namespaces):
        adjacency.setdefault(a, set()).add(b)
        adjacency.setdefault(b, set()).add(a)
    if source not in adjacency or target not in adjacency:
        return None
    seen = {source}
    queue = deque([(source, 0)])
    while queue:
        vertex, dist = queue.popleft()
        for neighbor in adjacency[vertex]:
            if neighbor == target:
                return dist + 1
            if neighbor not in seen:
                seen.add(neighbor)
                queue.append((neighbor, dist + 1))
    return None
