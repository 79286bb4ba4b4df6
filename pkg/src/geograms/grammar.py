"""Path grammars: contexts, rules, attributes, loaders, and validation.

A grammar is a small network of *contexts*, each an abstract step a walker
may take.  Contexts carry ordered rules (``pathcount`` records a path
segment, ``traverse`` moves the walker) and unordered attributes
(``notever`` forbids all previously seen vertices, ``is n``/``not n`` pin
or forbid the vertex seen ``n`` steps before the one being resolved).

Grammars load from a compact textual DSL or from their triple encoding,
and can be rebound to new endpoint vertices without other changes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum

from .errors import GrammarLoadError, ParseError
from .store import (
    RDF_NS,
    RDFS_RESOURCE,
    RDF_TYPE,
    Graph,
    Iri,
    Literal,
    Resource,
    resource_key,
)

# Vocabulary for the triple encoding of grammars.  The namespace is a
# package constant; only the term names below are load-bearing.
RWR_NS = "http://www.lanl.gov/rwr#"

RWR_CONTEXT = Iri(RWR_NS + "Context")
RWR_ENTRY_CONTEXT = Iri(RWR_NS + "EntryContext")
RWR_EXIT_CONTEXT = Iri(RWR_NS + "ExitContext")
RWR_FOR_RESOURCE = Iri(RWR_NS + "forResource")
RWR_HAS_RULES = Iri(RWR_NS + "hasRules")
RWR_HAS_ATTRIBUTES = Iri(RWR_NS + "hasAttributes")
RWR_HAS_ATTRIBUTE = Iri(RWR_NS + "hasAttribute")
RWR_PATH_COUNT = Iri(RWR_NS + "PathCount")
RWR_TRAVERSE = Iri(RWR_NS + "Traverse")
RWR_NOT_EVER = Iri(RWR_NS + "NotEver")
RWR_IS = Iri(RWR_NS + "Is")
RWR_NOT = Iri(RWR_NS + "Not")
RWR_STEP = Iri(RWR_NS + "step")
RWR_HAS_EDGE = Iri(RWR_NS + "hasEdge")
RWR_OUT_EDGE = Iri(RWR_NS + "OutEdge")
RWR_IN_EDGE = Iri(RWR_NS + "InEdge")
RWR_HAS_PREDICATE = Iri(RWR_NS + "hasPredicate")
RWR_HAS_OBJECT = Iri(RWR_NS + "hasObject")
RWR_HAS_SUBJECT = Iri(RWR_NS + "hasSubject")


class ContextKind(Enum):
    ENTRY = "entry"
    INTERMEDIATE = "intermediate"
    EXIT = "exit"


class Direction(Enum):
    """Traversal orientation: forward follows a triple, backward opposes it."""

    FORWARD = "+"
    BACKWARD = "-"


@dataclass(frozen=True, slots=True)
class EdgeSpec:
    """One legal hop of a traverse rule, landing in ``far_context``."""

    direction: Direction
    predicate: Iri
    far_context: str


@dataclass(frozen=True, slots=True)
class PathCount:
    """Record the path segment ``step`` time-steps behind the current one."""

    step: int


@dataclass(frozen=True, slots=True)
class Traverse:
    edges: tuple[EdgeSpec, ...]


Rule = PathCount | Traverse


@dataclass(frozen=True, slots=True)
class NotEver:
    pass


@dataclass(frozen=True, slots=True)
class Is:
    step: int


@dataclass(frozen=True, slots=True)
class Not:
    step: int


Attribute = NotEver | Is | Not


@dataclass(frozen=True, slots=True)
class GrammarContext:
    id: str
    kind: ContextKind
    for_resource: Resource
    rules: tuple[Rule, ...]
    attributes: frozenset

    @property
    def has_not_ever(self) -> bool:
        return any(isinstance(a, NotEver) for a in self.attributes)

    @property
    def traverse_rule(self) -> Traverse | None:
        for rule in self.rules:
            if isinstance(rule, Traverse):
                return rule
        return None


@dataclass(frozen=True, eq=True)
class Grammar:
    contexts: dict
    entry: str
    exit: str

    @property
    def entry_context(self) -> GrammarContext:
        return self.contexts[self.entry]

    @property
    def exit_context(self) -> GrammarContext:
        return self.contexts[self.exit]


@dataclass(frozen=True, slots=True)
class Violation:
    severity: str  # "error" | "warning"
    context_id: str
    message: str


def rebind_endpoints(grammar: Grammar, source: Resource, sink: Resource) -> Grammar:
    """Copy of ``grammar`` with its entry/exit bound to new vertices."""
    contexts = dict(grammar.contexts)
    contexts[grammar.entry] = replace(contexts[grammar.entry], for_resource=source)
    contexts[grammar.exit] = replace(contexts[grammar.exit], for_resource=sink)
    return Grammar(contexts, grammar.entry, grammar.exit)


# -- validation ---------------------------------------------------------------


def validate_grammar(grammar: Grammar) -> list[Violation]:
    """Every rule violation in ``grammar``; warnings do not block execution."""
    violations = []
    for ctx in grammar.contexts.values():
        traverses = [r for r in ctx.rules if isinstance(r, Traverse)]
        if ctx.kind is ContextKind.ENTRY:
            if ctx.attributes:
                violations.append(
                    Violation("error", ctx.id, "entry context must not carry attributes")
                )
            if not any(isinstance(r, PathCount) for r in ctx.rules):
                violations.append(
                    Violation("error", ctx.id, "entry context must carry a pathcount rule")
                )
        if ctx.kind is ContextKind.EXIT and traverses:
            violations.append(
                Violation("error", ctx.id, "exit context must not carry a traverse rule")
            )
        if len(traverses) > 1:
            violations.append(
                Violation("error", ctx.id, "context carries more than one traverse rule")
            )
        elif traverses and not isinstance(ctx.rules[-1], Traverse):
            violations.append(
                Violation("error", ctx.id, "traverse must be the last rule of a context")
            )
        for rule in traverses:
            for edge in rule.edges:
                if edge.far_context not in grammar.contexts:
                    violations.append(
                        Violation(
                            "error",
                            ctx.id,
                            f"traverse edge targets undeclared context {edge.far_context!r}",
                        )
                    )
        for attr in ctx.attributes:
            if isinstance(attr, (Is, Not)) and attr.step < 1:
                violations.append(
                    Violation(
                        "error",
                        ctx.id,
                        f"{type(attr).__name__.lower()} step must be >= 1, got {attr.step}",
                    )
                )

    violations.extend(_termination_hazards(grammar))
    return violations


def _termination_hazards(grammar: Grammar) -> list[Violation]:
    """Warn on directed context cycles none of whose members carry notever."""
    unguarded = {
        cid for cid, ctx in grammar.contexts.items() if not ctx.has_not_ever
    }
    edges: dict = {cid: [] for cid in unguarded}
    for cid in unguarded:
        rule = grammar.contexts[cid].traverse_rule
        if rule is None:
            continue
        for edge in rule.edges:
            if edge.far_context in unguarded and edge.far_context not in edges[cid]:
                edges[cid].append(edge.far_context)

    # Iterative DFS three-coloring; any back edge inside the unguarded
    # subgraph means a runaway loop is possible.
    WHITE, GREY, BLACK = 0, 1, 2
    color = {cid: WHITE for cid in unguarded}
    hazards = []
    for root in sorted(unguarded):
        if color[root] != WHITE:
            continue
        stack = [(root, iter(edges[root]))]
        color[root] = GREY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GREY:
                    hazards.append(
                        Violation(
                            "warning",
                            nxt,
                            "context cycle without a notever attribute may not terminate",
                        )
                    )
                elif color[nxt] == WHITE:
                    color[nxt] = GREY
                    stack.append((nxt, iter(edges[nxt])))
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
    return hazards


def _assemble(contexts: list[GrammarContext], validate: bool = True) -> Grammar:
    """Build and (optionally) validate a Grammar from parsed contexts."""
    by_id: dict = {}
    for ctx in contexts:
        if ctx.id in by_id:
            raise GrammarLoadError(f"duplicate context id {ctx.id!r}")
        by_id[ctx.id] = ctx
    entries = [c.id for c in contexts if c.kind is ContextKind.ENTRY]
    exits = [c.id for c in contexts if c.kind is ContextKind.EXIT]
    if len(entries) != 1:
        raise GrammarLoadError(f"grammar must declare exactly one entry context, found {len(entries)}")
    if len(exits) != 1:
        raise GrammarLoadError(f"grammar must declare exactly one exit context, found {len(exits)}")
    grammar = Grammar(by_id, entries[0], exits[0])
    if validate:
        errors = [v for v in validate_grammar(grammar) if v.severity == "error"]
        if errors:
            detail = "; ".join(f"{v.context_id}: {v.message}" for v in errors)
            raise GrammarLoadError(f"invalid grammar: {detail}", violations=errors)
    return grammar


# -- textual DSL --------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def _strip_comment(line: str) -> str:
    """Drop a trailing line comment; '#' inside <...> is part of the IRI."""
    in_iri = False
    for idx, ch in enumerate(line):
        if ch == "<":
            in_iri = True
        elif ch == ">":
            in_iri = False
        elif ch == "#" and not in_iri:
            return line[:idx]
    return line


class _DslParser:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.index = 0
        self.prefix_map: dict = {}

    def error(self, message: str, column: int | None = None) -> ParseError:
        return ParseError(message, line=self.index + 1, column=column)

    def next_line(self) -> str | None:
        while self.index < len(self.lines):
            stripped = _strip_comment(self.lines[self.index]).strip()
            if stripped:
                return stripped
            self.index += 1
        return None

    def resolve(self, token: str) -> Resource:
        if token.startswith("<") and token.endswith(">"):
            raw = token[1:-1]
            head, sep, local = raw.partition(":")
            if sep and head in self.prefix_map:
                return Iri(self.prefix_map[head] + local)
            return Iri(raw)
        head, sep, local = token.partition(":")
        if sep and head in self.prefix_map:
            return Iri(self.prefix_map[head] + local)
        raise self.error(f"cannot resolve resource {token!r} (unknown prefix)")

    def parse(self) -> list[GrammarContext]:
        contexts = []
        while True:
            line = self.next_line()
            if line is None:
                break
            if line.startswith("@prefix"):
                m = re.match(r"@prefix\s+([A-Za-z_][\w.-]*)\s*:\s*<([^>]*)>\s*\.?\s*$", line)
                if not m:
                    raise self.error("malformed @prefix declaration")
                self.prefix_map[m.group(1)] = m.group(2)
                self.index += 1
            elif line.startswith("context"):
                contexts.append(self.parse_context(line))
            else:
                raise self.error(f"expected 'context' or '@prefix', got {line.split()[0]!r}")
        return contexts

    def parse_context(self, header: str) -> GrammarContext:
        m = re.match(
            r"context\s+(\S+)\s+(?:(entry|exit)\s+)?for\s+(\S+)\s*\{\s*$", header
        )
        if not m:
            raise self.error("malformed context header (expected 'context ID [entry|exit] for RESOURCE {')")
        ctx_id, kind_word, resource_tok = m.groups()
        if not _IDENT.match(ctx_id):
            raise self.error(f"invalid context id {ctx_id!r}")
        kind = {
            "entry": ContextKind.ENTRY,
            "exit": ContextKind.EXIT,
            None: ContextKind.INTERMEDIATE,
        }[kind_word]
        for_resource = self.resolve(resource_tok)
        self.index += 1

        rules: list[Rule] = []
        attributes: set = set()
        while True:
            line = self.next_line()
            if line is None:
                raise self.error(f"context {ctx_id!r} is missing its closing brace")
            self.index += 1
            if line == "}":
                break
            word, _, rest = line.partition(" ")
            rest = rest.strip()
            if word == "pathcount":
                rules.append(PathCount(self._nat(rest)))
            elif word == "notever":
                if rest:
                    raise self.error("notever takes no argument")
                attributes.add(NotEver())
            elif word == "is":
                attributes.add(Is(self._nat(rest)))
            elif word == "not":
                attributes.add(Not(self._nat(rest)))
            elif word == "traverse":
                rules.append(Traverse(self.parse_edges(rest)))
            else:
                raise self.error(f"unknown rule or attribute {word!r}")
        return GrammarContext(ctx_id, kind, for_resource, tuple(rules), frozenset(attributes))

    def _nat(self, text: str) -> int:
        if not re.match(r"\d+$", text):
            raise self.error(f"expected a natural number, got {text!r}")
        return int(text)

    def parse_edges(self, text: str) -> tuple[EdgeSpec, ...]:
        edges = []
        for part in text.split(","):
            m = re.match(r"\s*(out|in)\s+(\S+)\s*->\s*(\S+)\s*$", part)
            if not m:
                raise self.error(f"malformed traverse edge {part.strip()!r}")
            direction = Direction.FORWARD if m.group(1) == "out" else Direction.BACKWARD
            predicate = self.resolve(m.group(2))
            if not isinstance(predicate, Iri):
                raise self.error("traverse predicate must be an IRI")
            edges.append(EdgeSpec(direction, predicate, m.group(3)))
        if not edges:
            raise self.error("traverse requires at least one edge")
        return tuple(edges)


def parse_grammar_dsl(text: str, validate: bool = True) -> Grammar:
    """Parse the textual grammar DSL; rule order in the text is execution order."""
    return _assemble(_DslParser(text).parse(), validate=validate)


def serialize_grammar_dsl(grammar: Grammar, prefix_map: dict | None = None) -> str:
    """Render a grammar back to DSL text; inverse of ``parse_grammar_dsl``."""
    prefix_map = prefix_map or {}

    def res(resource: Resource) -> str:
        if isinstance(resource, Iri):
            for name, ns in prefix_map.items():
                if resource.value.startswith(ns):
                    return f"{name}:{resource.value[len(ns):]}"
            return f"<{resource.value}>"
        raise GrammarLoadError(f"cannot serialize non-IRI grammar resource {resource!r}")

    lines = [f"@prefix {name}: <{ns}>" for name, ns in sorted(prefix_map.items())]
    order = [grammar.entry]
    order += sorted(c for c in grammar.contexts if c not in (grammar.entry, grammar.exit))
    order.append(grammar.exit)
    for cid in order:
        ctx = grammar.contexts[cid]
        kind = {ContextKind.ENTRY: "entry ", ContextKind.EXIT: "exit ", ContextKind.INTERMEDIATE: ""}[ctx.kind]
        lines.append(f"context {ctx.id} {kind}for {res(ctx.for_resource)} {{")
        for attr in sorted(ctx.attributes, key=_attribute_key):
            if isinstance(attr, NotEver):
                lines.append("  notever")
            elif isinstance(attr, Is):
                lines.append(f"  is {attr.step}")
            else:
                lines.append(f"  not {attr.step}")
        for rule in ctx.rules:
            if isinstance(rule, PathCount):
                lines.append(f"  pathcount {rule.step}")
            else:
                edges = ", ".join(
                    f"{'out' if e.direction is Direction.FORWARD else 'in'} "
                    f"{res(e.predicate)} -> {e.far_context}"
                    for e in rule.edges
                )
                lines.append(f"  traverse {edges}")
        lines.append("}")
    return "\n".join(lines) + "\n"


def _attribute_key(attr: Attribute) -> tuple:
    if isinstance(attr, NotEver):
        return (0, 0)
    if isinstance(attr, Is):
        return (1, attr.step)
    return (2, attr.step)


# -- triple encoding ----------------------------------------------------------

_MEMBERSHIP = re.compile(re.escape(RDF_NS) + r"_(\d+)$")


def membership_index(predicate: Iri) -> int | None:
    """The k of an ``rdf:_k`` container membership property, else None."""
    m = _MEMBERSHIP.match(predicate.value)
    return int(m.group(1)) if m else None


def _local_name(resource: Resource) -> str:
    if isinstance(resource, Iri):
        value = resource.value
        for sep in ("#", "/"):
            if sep in value:
                return value.rsplit(sep, 1)[1]
        return value
    if isinstance(resource, Literal):
        return resource.lexical
    return resource.local_id


def _single_object(graph: Graph, subject: Resource, predicate: Iri, what: str) -> Resource:
    found = graph.match((subject, predicate, None))
    if len(found) != 1:
        raise GrammarLoadError(
            f"{what}: expected exactly one {predicate.value!r} on {subject!r}, found {len(found)}"
        )
    return next(iter(found)).object


def _step_of(graph: Graph, node: Resource, what: str) -> int:
    value = _single_object(graph, node, RWR_STEP, what)
    if not isinstance(value, Literal):
        raise GrammarLoadError(f"{what}: step of {node!r} must be a literal")
    try:
        return int(value.lexical)
    except ValueError:
        raise GrammarLoadError(f"{what}: step {value.lexical!r} is not an integer") from None


def load_grammar_from_triples(graph: Graph, validate: bool = True) -> Grammar:
    """Assemble a grammar from its triple encoding.

    Rule order comes from the ``rdf:_1, rdf:_2, ...`` membership properties
    of each context's rule sequence.  Edges of one traverse rule carry no
    order; they are sorted by node name for deterministic iteration.
    """
    nodes: dict = {}
    for kind, type_iri in (
        (ContextKind.ENTRY, RWR_ENTRY_CONTEXT),
        (ContextKind.EXIT, RWR_EXIT_CONTEXT),
        (ContextKind.INTERMEDIATE, RWR_CONTEXT),
    ):
        for t in graph.match((None, RDF_TYPE, type_iri)):
            nodes.setdefault(t.subject, kind)
    if not nodes:
        raise GrammarLoadError("no context resources found in grammar graph")

    node_ids = {node: _local_name(node) for node in nodes}
    contexts = []
    for node in sorted(nodes, key=resource_key):
        kind = nodes[node]
        ctx_id = node_ids[node]
        for_resource = _single_object(graph, node, RWR_FOR_RESOURCE, f"context {ctx_id}")

        rules: list[Rule] = []
        rule_seqs = graph.match((node, RWR_HAS_RULES, None))
        for seq_triple in rule_seqs:
            members = []
            for t in graph.match((seq_triple.object, None, None)):
                k = membership_index(t.predicate)
                if k is not None:
                    members.append((k, t.object))
            for _, rule_node in sorted(members, key=lambda kv: kv[0]):
                rules.append(_load_rule(graph, rule_node, node_ids, ctx_id))

        attributes = set()
        for bag_triple in graph.match((node, RWR_HAS_ATTRIBUTES, None)):
            for t in graph.match((bag_triple.object, RWR_HAS_ATTRIBUTE, None)):
                attributes.add(_load_attribute(graph, t.object, ctx_id))

        contexts.append(
            GrammarContext(ctx_id, kind, for_resource, tuple(rules), frozenset(attributes))
        )
    return _assemble(contexts, validate=validate)


def _load_rule(graph: Graph, node: Resource, node_ids: dict, ctx_id: str) -> Rule:
    types = {t.object for t in graph.match((node, RDF_TYPE, None))}
    if RWR_PATH_COUNT in types:
        return PathCount(_step_of(graph, node, f"pathcount rule of {ctx_id}"))
    if RWR_TRAVERSE in types:
        edges = []
        for t in sorted(graph.match((node, RWR_HAS_EDGE, None)), key=triple_sort):
            edge_node = t.object
            edge_types = {x.object for x in graph.match((edge_node, RDF_TYPE, None))}
            if RWR_OUT_EDGE in edge_types:
                direction, far_prop = Direction.FORWARD, RWR_HAS_OBJECT
            elif RWR_IN_EDGE in edge_types:
                direction, far_prop = Direction.BACKWARD, RWR_HAS_SUBJECT
            else:
                raise GrammarLoadError(f"edge {edge_node!r} of {ctx_id} has no in/out typing")
            predicate = _single_object(graph, edge_node, RWR_HAS_PREDICATE, f"edge of {ctx_id}")
            if not isinstance(predicate, Iri):
                raise GrammarLoadError(f"edge predicate of {ctx_id} must be an IRI")
            far_node = _single_object(graph, edge_node, far_prop, f"edge of {ctx_id}")
            if far_node not in node_ids:
                raise GrammarLoadError(
                    f"edge of {ctx_id} targets {far_node!r}, which is not a declared context"
                )
            edges.append(EdgeSpec(direction, predicate, node_ids[far_node]))
        if not edges:
            raise GrammarLoadError(f"traverse rule of {ctx_id} carries no edges")
        return Traverse(tuple(edges))
    raise GrammarLoadError(f"rule {node!r} of {ctx_id} has no recognized type")


def _load_attribute(graph: Graph, node: Resource, ctx_id: str) -> Attribute:
    types = {t.object for t in graph.match((node, RDF_TYPE, None))}
    if RWR_NOT_EVER in types:
        return NotEver()
    if RWR_IS in types:
        return Is(_step_of(graph, node, f"is attribute of {ctx_id}"))
    if RWR_NOT in types:
        return Not(_step_of(graph, node, f"not attribute of {ctx_id}"))
    raise GrammarLoadError(f"attribute {node!r} of {ctx_id} has no recognized type")


def triple_sort(triple) -> tuple:
    return resource_key(triple.object)


# -- ready-made shapes ---------------------------------------------------------


def unconstrained_grammar(source: Resource, sink: Resource) -> Grammar:
    """Grammar that simulates geodesics on the undirected, unlabeled view.

    Every context resolves to any vertex (``rdfs:Resource``), every edge
    label matches, and both edge directions are open; non-recurrence comes
    from the hub context's notever attribute.
    """
    def both_ways(targets):
        return tuple(
            EdgeSpec(direction, RDFS_RESOURCE, target)
            for target in targets
            for direction in (Direction.FORWARD, Direction.BACKWARD)
        )

    hub_edges = both_ways(["hop", "sink"])
    contexts = [
        GrammarContext(
            "source",
            ContextKind.ENTRY,
            source,
            (PathCount(0), Traverse(hub_edges)),
            frozenset(),
        ),
        GrammarContext(
            "hop",
            ContextKind.INTERMEDIATE,
            RDFS_RESOURCE,
            (PathCount(0), Traverse(hub_edges)),
            frozenset({NotEver()}),
        ),
        GrammarContext("sink", ContextKind.EXIT, sink, (PathCount(0),), frozenset()),
    ]
    return _assemble(contexts)
