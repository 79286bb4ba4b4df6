import random

import pytest

from geograms.encoding import (
    VOCAB,
    decode_paths,
    encode_paths,
    min_segments,
    ms_shortest_paths,
    p_encoded_metric,
    query_X,
    query_Y,
)
from geograms.engine import PathRecord, PathStep, RunMode, run
from geograms.errors import IncompleteStoreError, ValidationError
from geograms.grammar import Direction, membership_index, unconstrained_grammar
from geograms.metrics import (
    MetricKind,
    betweenness,
    closeness,
    diameter,
    eccentricity,
    project_to_unlabeled,
    radius,
    shortest_path,
)
from geograms.store import RDF_NS, Graph, Iri, Triple, load_ntriples

from conftest import lanl, read_fixture
from oracles import (
    build_pair_store,
    random_grammar,
    random_multi_predicate_graph,
    t,
)

GRAMMAR_ID = Iri("http://example.org/t#grammar1")
FWD, BWD = Direction.FORWARD, Direction.BACKWARD

SHORT_RECORD = PathRecord(
    (
        PathStep(lanl("johan")),
        PathStep(lanl("marko"), lanl("hasFriend"), FWD),
        PathStep(lanl("norman"), lanl("hasFriend"), FWD),
    )
)
LONG_RECORD = PathRecord(
    (
        PathStep(lanl("johan")),
        PathStep(lanl("marko"), lanl("hasFriend"), FWD),
        PathStep(lanl("jhw"), lanl("hasFriend"), FWD),
        PathStep(lanl("norman"), lanl("hasFriend"), FWD),
    )
)


@pytest.fixture(scope="module")
def two_path_store():
    return encode_paths([SHORT_RECORD, LONG_RECORD], GRAMMAR_ID, [0, 1])


def test_encode_segments_and_largest_membership(two_path_store):
    # the two-edge record carries exactly rdf:_1 .. rdf:_3
    walkers = two_path_store.match((None, VOCAB.uses_grammar, GRAMMAR_ID))
    assert len(walkers) == 2
    memberships = {}
    for triple in two_path_store.triples:
        index = membership_index(triple.predicate)
        if index is not None:
            memberships.setdefault(triple.subject, set()).add(index)
    assert sorted(memberships.values(), key=len) == [{1, 2, 3}, {1, 2, 3, 4}]


def test_encode_single_vertex_record():
    record = PathRecord((PathStep(lanl("johan")),))
    store = encode_paths([record], GRAMMAR_ID, [7])
    assert record.edge_length == 0
    memberships = [
        membership_index(triple.predicate)
        for triple in store.triples
        if membership_index(triple.predicate) is not None
    ]
    assert memberships == [1]
    assert decode_paths(store) == {record}


def test_decode_inverts_encode(two_path_store):
    assert decode_paths(two_path_store, GRAMMAR_ID) == {SHORT_RECORD, LONG_RECORD}


def test_encode_requires_matching_id_count():
    with pytest.raises(ValueError):
        encode_paths([SHORT_RECORD], GRAMMAR_ID, [1, 2])


def test_decode_rejects_membership_gaps(two_path_store):
    # drop a middle segment; the container is no longer consecutive
    broken = Graph(
        (
            tr
            for tr in two_path_store.triples
            if membership_index(tr.predicate) != 2
        ),
        two_path_store.prefix_map,
    )
    with pytest.raises(ValidationError):
        decode_paths(broken)


def test_round_trip_survives_serialization(two_path_store):
    again = load_ntriples(two_path_store.to_ntriples())
    assert decode_paths(again, GRAMMAR_ID) == {SHORT_RECORD, LONG_RECORD}


# -- queries -----------------------------------------------------------------------


def test_query_x_returns_paths_with_counts(two_path_store):
    found = query_X(two_path_store, lanl("johan"), lanl("norman"), GRAMMAR_ID)
    # sorted-record encoding puts the three-edge path first
    assert found == {
        (Iri("http://www.lanl.gov/rwrx#path_0"), 4),
        (Iri("http://www.lanl.gov/rwrx#path_1"), 3),
    }


def test_query_x_on_empty_store():
    empty = encode_paths([], GRAMMAR_ID, [])
    assert query_X(empty, lanl("johan"), lanl("norman"), GRAMMAR_ID) == frozenset()


def test_query_x_sink_never_reached(two_path_store):
    assert query_X(two_path_store, lanl("johan"), lanl("ghost"), GRAMMAR_ID) == frozenset()


def test_min_segments_paper_value(two_path_store):
    found = query_X(two_path_store, lanl("johan"), lanl("norman"), GRAMMAR_ID)
    assert min_segments(found) == 3


def test_min_segments_trivials():
    assert min_segments({(Iri("http://p#1"), 1)}) == 1
    assert min_segments({(Iri("http://p#1"), 1)}) - 1 == 0
    assert min_segments(frozenset()) is None


def test_ms_shortest_paths(two_path_store):
    found = query_X(two_path_store, lanl("johan"), lanl("norman"), GRAMMAR_ID)
    assert ms_shortest_paths(found) == {Iri("http://www.lanl.gov/rwrx#path_1")}
    tied = {(Iri("http://p#a"), 3), (Iri("http://p#b"), 3)}
    assert ms_shortest_paths(tied) == {Iri("http://p#a"), Iri("http://p#b")}
    assert ms_shortest_paths(frozenset()) == frozenset()


def test_query_y_interior_vertex():
    # store both records under ids chosen so either could win; marko is
    # interior to both, jhw interior only to the long one
    store = encode_paths([SHORT_RECORD, LONG_RECORD], GRAMMAR_ID, [0, 1])
    through_marko = query_Y(store, lanl("johan"), lanl("norman"), lanl("marko"), GRAMMAR_ID)
    assert through_marko == {Iri("http://www.lanl.gov/rwrx#path_1")}
    through_jhw = query_Y(store, lanl("johan"), lanl("norman"), lanl("jhw"), GRAMMAR_ID)
    assert through_jhw == frozenset()


def test_query_y_absent_vertex(two_path_store):
    assert query_Y(two_path_store, lanl("johan"), lanl("norman"), lanl("ghost"), GRAMMAR_ID) == frozenset()


def test_query_y_through_equal_to_source(two_path_store):
    # the raw query matches the source at the first segment; excluding the
    # endpoints is the metric layer's job, which iterates distinct triples
    found = query_Y(two_path_store, lanl("johan"), lanl("norman"), lanl("johan"), GRAMMAR_ID)
    assert found == ms_shortest_paths(
        query_X(two_path_store, lanl("johan"), lanl("norman"), GRAMMAR_ID)
    )


# -- metrics from the store ------------------------------------------------------------


@pytest.fixture(scope="module")
def projection_store():
    graph = project_to_unlabeled(load_ntriples(read_fixture("social.nt")))
    grammar = unconstrained_grammar(lanl("johan"), lanl("norman"))
    universe = sorted(graph.vertices(), key=lambda r: r.value)
    store = build_pair_store(graph, grammar, universe, GRAMMAR_ID)
    return graph, grammar, universe, store


def test_p_encoded_shortest_path(projection_store):
    graph, grammar, universe, store = projection_store
    direct = shortest_path(graph, grammar)
    encoded = p_encoded_metric(
        MetricKind.SHORTEST_PATH, store, GRAMMAR_ID, universe,
        source=lanl("johan"), target=lanl("norman"),
    )
    assert encoded.value == direct.value == 1
    assert encoded.witness_paths == direct.witness_paths


def test_p_encoded_betweenness_matches_direct(projection_store):
    graph, grammar, universe, store = projection_store
    direct = betweenness(graph, grammar, lanl("marko"), universe)
    encoded = p_encoded_metric(
        MetricKind.BETWEENNESS, store, GRAMMAR_ID, universe, source=lanl("marko")
    )
    assert encoded.value == direct.value


def test_p_encoded_all_kinds_match_direct(projection_store):
    graph, grammar, universe, store = projection_store
    johan = lanl("johan")
    cases = [
        (MetricKind.ECCENTRICITY, eccentricity(graph, grammar, johan, universe), dict(source=johan)),
        (MetricKind.RADIUS, radius(graph, grammar, universe), {}),
        (MetricKind.DIAMETER, diameter(graph, grammar, universe), {}),
        (MetricKind.CLOSENESS, closeness(graph, grammar, johan, universe), dict(source=johan)),
    ]
    for kind, direct, kwargs in cases:
        encoded = p_encoded_metric(kind, store, GRAMMAR_ID, universe, **kwargs)
        assert (encoded.value, encoded.defined, encoded.skipped_targets) == (
            direct.value,
            direct.defined,
            direct.skipped_targets,
        )


def test_empty_store_is_incomplete():
    empty = encode_paths([], GRAMMAR_ID, [])
    with pytest.raises(IncompleteStoreError):
        p_encoded_metric(
            MetricKind.SHORTEST_PATH, empty, GRAMMAR_ID, [lanl("johan")],
            source=lanl("johan"), target=lanl("norman"),
        )


def test_min_segments_consistent_with_edge_lengths():
    rng = random.Random(61)
    for _ in range(10):
        graph = random_multi_predicate_graph(rng, rng.randint(4, 9), rng.randint(4, 16))
        grammar = random_grammar(rng, graph)
        records = run(graph, grammar, RunMode.ALL_PATHS, 200)
        store = encode_paths(sorted(records, key=PathRecord.key), GRAMMAR_ID, list(range(len(records))))
        assert decode_paths(store, GRAMMAR_ID) == records
        if records:
            source = grammar.entry_context.for_resource
            sink = grammar.exit_context.for_resource
            found = query_X(store, source, sink, GRAMMAR_ID)
            assert min_segments(found) - 1 == min(r.edge_length for r in records)
