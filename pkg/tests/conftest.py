import pathlib

import pytest

from geograms import Graph, load_ntriples, parse_grammar_dsl
from geograms.store import Iri

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
LANL = "http://www.lanl.gov#"


def lanl(name: str) -> Iri:
    return Iri(LANL + name)


def read_fixture(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def social_graph() -> Graph:
    return load_ntriples(read_fixture("social.nt"))


@pytest.fixture(scope="session")
def researcher_grammar():
    return parse_grammar_dsl(read_fixture("researcher_path.pg"))


@pytest.fixture(scope="session")
def any_path_grammar():
    return parse_grammar_dsl(read_fixture("any_path.pg"))
