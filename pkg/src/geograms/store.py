"""In-memory semantic network: triples, pattern matching, subsumption.

The store keeps a directed, edge-labeled multigraph as a set of
``<subject, predicate, object>`` triples with four lookup indexes
(subject, subject+predicate, predicate+object, object).  Graphs are
immutable after construction, so any number of threads may read one
concurrently.

``rdfs:subClassOf`` / ``rdfs:subPropertyOf`` reachability is precomputed
at load time.  Subsumption checks run either against that transitive
closure (the default) or against single direct triples, selectable via
``SubsumptionMode`` so both readings of the traversal rules are testable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional

from .errors import ParseError, ValidationError

# Namespaces the package needs to know about.
RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
# Namespace for resources this package mints (projection edges, encoded paths).
RESULT_NS = "http://www.lanl.gov/rwrx#"

XSD_STRING = XSD_NS + "string"


@dataclass(frozen=True, slots=True)
class Iri:
    """A fully expanded IRI; prefix resolution happens at parse time."""

    value: str

    def __post_init__(self):
        if not self.value:
            raise ValidationError("IRI value must be non-empty")

    def __repr__(self):
        return f"<{self.value}>"


@dataclass(frozen=True, slots=True)
class Literal:
    """A literal value: lexical form plus a datatype IRI tag."""

    lexical: str
    datatype: str = XSD_STRING

    def __repr__(self):
        return f'"{self.lexical}"^^<{self.datatype}>'


@dataclass(frozen=True, slots=True)
class Blank:
    """A blank node; an opaque identifier with graph-local scope."""

    local_id: str

    def __repr__(self):
        return f"_:{self.local_id}"


Resource = Iri | Literal | Blank

RDF_TYPE = Iri(RDF_NS + "type")
RDFS_SUBCLASSOF = Iri(RDFS_NS + "subClassOf")
RDFS_SUBPROPERTYOF = Iri(RDFS_NS + "subPropertyOf")
# Base type of every resource: matches any vertex as a type and any edge
# label as a predicate, which is what makes unconstrained grammars possible.
RDFS_RESOURCE = Iri(RDFS_NS + "Resource")

_EMPTY: frozenset = frozenset()


def resource_key(resource: Resource) -> tuple:
    """Total ordering over resources, used wherever determinism matters."""
    if isinstance(resource, Iri):
        return (0, resource.value, "")
    if isinstance(resource, Blank):
        return (1, resource.local_id, "")
    return (2, resource.lexical, resource.datatype)


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Resource
    predicate: Resource
    object: Resource

    def __post_init__(self):
        if isinstance(self.subject, Literal):
            raise ValidationError("a literal cannot be the subject of a triple")
        if not isinstance(self.predicate, Iri):
            raise ValidationError("a triple predicate must be an IRI")


def triple_key(triple: Triple) -> tuple:
    return (
        resource_key(triple.subject),
        resource_key(triple.predicate),
        resource_key(triple.object),
    )


class SubsumptionMode(str, Enum):
    """How subClassOf/subPropertyOf are honored by the subsumption checks."""

    CLOSURE = "closure"
    SINGLE_HOP = "single-hop"


def _reachability(direct: dict) -> dict:
    """Per-node set of nodes reachable through one or more direct edges."""
    closure = {}
    for start in direct:
        seen = set()
        stack = list(direct[start])
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(direct.get(node, ()))
        closure[start] = frozenset(seen)
    return closure


class Graph:
    """An immutable, indexed triple set.

    Duplicate triples collapse (set semantics).  All indexes are built once
    in the constructor; no mutating methods exist, so instances are safe to
    share between threads.
    """

    __slots__ = (
        "_triples",
        "prefix_map",
        "subsumption",
        "_by_subject",
        "_by_subject_predicate",
        "_by_predicate_object",
        "_by_object",
        "_subproperty_closure",
        "_subclass_closure",
        "_type_closure",
        "_vertices",
    )

    def __init__(
        self,
        triples: Iterable[Triple] = (),
        prefix_map: Optional[Mapping[str, str]] = None,
        subsumption: SubsumptionMode | str = SubsumptionMode.CLOSURE,
    ):
        self._triples = frozenset(triples)
        self.prefix_map = dict(prefix_map or {})
        self.subsumption = SubsumptionMode(subsumption)

        by_subject: dict = {}
        by_subject_predicate: dict = {}
        by_predicate_object: dict = {}
        by_object: dict = {}
        vertices = set()
        for t in self._triples:
            by_subject.setdefault(t.subject, set()).add(t)
            by_subject_predicate.setdefault((t.subject, t.predicate), set()).add(t)
            by_predicate_object.setdefault((t.predicate, t.object), set()).add(t)
            by_object.setdefault(t.object, set()).add(t)
            vertices.add(t.subject)
            vertices.add(t.object)
        self._by_subject = {k: frozenset(v) for k, v in by_subject.items()}
        self._by_subject_predicate = {k: frozenset(v) for k, v in by_subject_predicate.items()}
        self._by_predicate_object = {k: frozenset(v) for k, v in by_predicate_object.items()}
        self._by_object = {k: frozenset(v) for k, v in by_object.items()}
        self._vertices = frozenset(vertices)

        subprop: dict = {}
        subclass: dict = {}
        for t in self._triples:
            if t.predicate == RDFS_SUBPROPERTYOF and isinstance(t.object, Iri):
                subprop.setdefault(t.subject, set()).add(t.object)
            elif t.predicate == RDFS_SUBCLASSOF:
                subclass.setdefault(t.subject, set()).add(t.object)
        self._subproperty_closure = _reachability(subprop)
        self._subclass_closure = _reachability(subclass)

        type_closure: dict = {}
        for t in self._triples:
            if t.predicate == RDF_TYPE:
                types = type_closure.setdefault(t.subject, set())
                types.add(t.object)
                types.update(self._subclass_closure.get(t.object, _EMPTY))
        self._type_closure = {k: frozenset(v) for k, v in type_closure.items()}

    # -- basic access -------------------------------------------------------

    @property
    def triples(self) -> frozenset:
        return self._triples

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self._triples == other._triples

    def __hash__(self):
        return hash(self._triples)

    def vertices(self) -> frozenset:
        """Every resource occurring in subject or object position."""
        return self._vertices

    def outgoing(self, vertex: Resource) -> frozenset:
        return self._by_subject.get(vertex, _EMPTY)

    def incoming(self, vertex: Resource) -> frozenset:
        return self._by_object.get(vertex, _EMPTY)

    def match(self, pattern: tuple) -> frozenset:
        """All triples agreeing with ``pattern`` on every bound position.

        ``pattern`` is a ``(subject, predicate, object)`` tuple where ``None``
        marks an unbound position.  Bound combinations with an index are
        answered from it; a predicate bound alone falls back to a scan.
        """
        s, p, o = pattern
        if s is not None and p is not None:
            base = self._by_subject_predicate.get((s, p), _EMPTY)
            if o is None:
                return base
            return frozenset(t for t in base if t.object == o)
        if p is not None and o is not None:
            return self._by_predicate_object.get((p, o), _EMPTY)
        if s is not None:
            base = self._by_subject.get(s, _EMPTY)
            if o is None:
                return base
            return frozenset(t for t in base if t.object == o)
        if o is not None:
            return self._by_object.get(o, _EMPTY)
        if p is not None:
            return frozenset(t for t in self._triples if t.predicate == p)
        return self._triples

    # -- subsumption --------------------------------------------------------

    def is_subproperty_or_equal(self, predicate: Iri, wanted: Iri) -> bool:
        """True when ``predicate`` equals ``wanted`` or is subsumed by it."""
        if predicate == wanted or wanted == RDFS_RESOURCE:
            return True
        if self.subsumption is SubsumptionMode.CLOSURE:
            return wanted in self._subproperty_closure.get(predicate, _EMPTY)
        return Triple(predicate, RDFS_SUBPROPERTYOF, wanted) in self._triples

    def has_type_or_equal(self, resource: Resource, wanted: Resource) -> bool:
        """True when ``resource`` is ``wanted`` itself or typed by it."""
        if resource == wanted or wanted == RDFS_RESOURCE:
            return True
        if self.subsumption is SubsumptionMode.CLOSURE:
            return wanted in self._type_closure.get(resource, _EMPTY)
        if isinstance(resource, Literal):
            return False
        return Triple(resource, RDF_TYPE, wanted) in self._triples

    # -- construction helpers ------------------------------------------------

    def merge(self, other: "Graph") -> "Graph":
        """Union of two graphs; prefixes from ``other`` win on collision."""
        prefixes = dict(self.prefix_map)
        prefixes.update(other.prefix_map)
        return Graph(self._triples | other._triples, prefixes, self.subsumption)

    def to_ntriples(self) -> str:
        """Serialize back to the line format accepted by ``load_ntriples``."""
        lines = [
            f"@prefix {name}: <{ns}> ."
            for name, ns in sorted(self.prefix_map.items())
        ]
        for t in sorted(self._triples, key=triple_key):
            lines.append(
                f"{_term_text(t.subject)} {_term_text(t.predicate)} {_term_text(t.object)} ."
            )
        return "\n".join(lines) + ("\n" if lines else "")

    def compact(self, resource: Resource) -> str:
        """Human-readable form of a resource, shortened via known prefixes."""
        if isinstance(resource, Iri):
            best = None
            for name, ns in self.prefix_map.items():
                if resource.value.startswith(ns) and (best is None or len(ns) > len(best[1])):
                    best = (name, ns)
            if best is not None:
                return f"{best[0]}:{resource.value[len(best[1]):]}"
            return resource.value
        if isinstance(resource, Blank):
            return f"_:{resource.local_id}"
        return f'"{resource.lexical}"'


# -- serialization helpers ---------------------------------------------------

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _escape(text: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in text)


def _term_text(resource: Resource) -> str:
    if isinstance(resource, Iri):
        return f"<{resource.value}>"
    if isinstance(resource, Blank):
        return f"_:{resource.local_id}"
    if resource.datatype == XSD_STRING:
        return f'"{_escape(resource.lexical)}"'
    return f'"{_escape(resource.lexical)}"^^<{resource.datatype}>'


# -- parsing -----------------------------------------------------------------


class _LineScanner:
    """Tokenizes one line of the triple format."""

    def __init__(self, text: str, line_no: int):
        self.text = text
        self.pos = 0
        self.line_no = line_no

    def error(self, message: str) -> ParseError:
        return ParseError(message, line=self.line_no, column=self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def next_token(self):
        """Returns (kind, value) with kind in iri|blank|literal|word|dot."""
        self.skip_ws()
        if self.pos >= len(self.text):
            raise self.error("unexpected end of line")
        c = self.text[self.pos]
        if c == "<":
            end = self.text.find(">", self.pos + 1)
            if end < 0:
                raise self.error("unterminated IRI")
            value = self.text[self.pos + 1 : end]
            self.pos = end + 1
            return ("iri", value)
        if c == "_" and self.text[self.pos : self.pos + 2] == "_:":
            start = self.pos + 2
            end = start
            while end < len(self.text) and (self.text[end].isalnum() or self.text[end] in "_-"):
                end += 1
            if end == start:
                raise self.error("empty blank node label")
            value = self.text[start:end]
            self.pos = end
            return ("blank", value)
        if c == '"':
            chars = []
            i = self.pos + 1
            while i < len(self.text):
                ch = self.text[i]
                if ch == "\\":
                    if i + 1 >= len(self.text):
                        raise self.error("dangling escape in literal")
                    esc = self.text[i + 1]
                    if esc not in _UNESCAPES:
                        raise self.error(f"unknown escape \\{esc}")
                    chars.append(_UNESCAPES[esc])
                    i += 2
                    continue
                if ch == '"':
                    break
                chars.append(ch)
                i += 1
            else:
                raise self.error("unterminated literal")
            self.pos = i + 1
            datatype = None
            if self.text[self.pos : self.pos + 2] == "^^":
                self.pos += 2
                kind, value = self.next_token()
                if kind not in ("iri", "word"):
                    raise self.error("expected datatype IRI after ^^")
                datatype = (kind, value)
            return ("literal", ("".join(chars), datatype))
        if c == ".":
            self.pos += 1
            return ("dot", ".")
        start = self.pos
        end = start
        while end < len(self.text) and self.text[end] not in " \t":
            end += 1
        self.pos = end
        return ("word", self.text[start:end])


def _expand(raw: str, prefix_map: dict, scanner: _LineScanner, bracketed: bool) -> str:
    """Resolve a possibly prefixed name to a full IRI string."""
    head, sep, local = raw.partition(":")
    if sep and head in prefix_map:
        return prefix_map[head] + local
    if bracketed:
        return raw
    raise scanner.error(f"unknown prefix {head!r} in {raw!r}")


def load_ntriples(
    text: str,
    subsumption: SubsumptionMode | str = SubsumptionMode.CLOSURE,
) -> Graph:
    """Parse the N-Triples-like line format into a Graph.

    Each non-empty, non-comment line is either a ``@prefix name: <ns> .``
    declaration or a ``subject predicate object .`` statement.  Terms are
    ``<iri>``, ``_:id``, ``"literal"`` (optionally ``^^<datatype>``), or a
    prefixed name using a previously declared prefix.  Prefixed names inside
    angle brackets are expanded too, so ``<lanl:johan>`` works after a
    ``@prefix lanl:`` declaration.
    """
    prefix_map: dict = {}
    triples = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        scanner = _LineScanner(line, line_no)
        if line.startswith("@prefix"):
            scanner.pos = len("@prefix")
            kind, value = scanner.next_token()
            if kind != "word" or not value.endswith(":"):
                raise scanner.error("@prefix expects a name ending in ':'")
            name = value[:-1]
            kind, ns = scanner.next_token()
            if kind != "iri":
                raise scanner.error("@prefix expects a <namespace>")
            if not scanner.at_end():
                kind, _ = scanner.next_token()
                if kind != "dot" or not scanner.at_end():
                    raise scanner.error("unexpected text after @prefix declaration")
            prefix_map[name] = ns
            continue

        terms = []
        for position in ("subject", "predicate", "object"):
            kind, value = scanner.next_token()
            if kind == "iri":
                terms.append(Iri(_expand(value, prefix_map, scanner, bracketed=True)))
            elif kind == "word":
                terms.append(Iri(_expand(value, prefix_map, scanner, bracketed=False)))
            elif kind == "blank":
                terms.append(Blank(value))
            elif kind == "literal":
                lexical, datatype = value
                if datatype is None:
                    terms.append(Literal(lexical))
                else:
                    dkind, dvalue = datatype
                    terms.append(
                        Literal(lexical, _expand(dvalue, prefix_map, scanner, dkind == "iri"))
                    )
            else:
                raise scanner.error(f"unexpected '.' while reading {position}")
        kind, _ = scanner.next_token()
        if kind != "dot":
            raise scanner.error("statement must end with '.'")
        if not scanner.at_end():
            raise scanner.error("unexpected text after '.'")

        subject, predicate, obj = terms
        if isinstance(subject, Literal):
            raise ValidationError("literal in subject position", line=line_no)
        if not isinstance(predicate, Iri):
            raise ValidationError("predicate must be an IRI", line=line_no)
        triples.append(Triple(subject, predicate, obj))

    return Graph(triples, prefix_map, subsumption)
