"""Knowledge-graph storage and retrieval.

Two interchangeable backends expose the same five retrieval primitives:
an in-memory triple index built from TSV / N-Triples files, and a client
for a remote SPARQL endpoint (Freebase namespace). Both are read-only
after construction and safe for concurrent readers.
"""

from __future__ import annotations

import re
import threading
import time
from dataclasses import dataclass, field

import requests

NS_PREFIX = "http://rdf.freebase.com/ns/"
UNNAMED_LABEL = "UnName_Entity"

DEFAULT_RESULT_CAP = 2000


class EmptyQuery(ValueError):
    """entity_match called with an empty (after trimming) query string."""


class RemoteUnavailable(RuntimeError):
    """Remote SPARQL endpoint failed after the retry budget."""


class ParseError(ValueError):
    """Graph file could not be parsed."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class MissingBinding(KeyError):
    """render_sparql called without a binding the template requires."""


@dataclass(frozen=True, order=True)
class Triple:
    head: str
    relation: str
    tail: str

    def __post_init__(self):
        if not (self.head and self.relation and self.tail):
            raise ValueError(f"triple fields must be non-empty: {self!r}")


class CappedResults(list):
    """Retrieval result list; `truncated` is set when the cap was applied."""

    def __init__(self, items=(), truncated: bool = False):
        super().__init__(items)
        self.truncated = truncated


def _cap(items: list, cap: int) -> CappedResults:
    if cap and len(items) > cap:
        return CappedResults(items[:cap], truncated=True)
    return CappedResults(items)


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens, used by the local fuzzy-match rule."""
    return re.findall(r"[0-9a-z]+", text.lower())


@dataclass
class LoadStats:
    lines: int = 0
    triples: int = 0
    labels: int = 0
    duplicate_lines: int = 0


class KnowledgeGraph:
    """Immutable set of triples plus entity labels, with lookup indexes."""

    def __init__(self, triples: set[Triple], labels: dict[str, str],
                 stats: LoadStats | None = None):
        self.triples = frozenset(triples)
        self.labels = dict(labels)
        self.stats = stats or LoadStats(triples=len(self.triples),
                                        labels=len(self.labels))
        self._rel_by_head: dict[str, set[str]] = {}
        self._rel_by_tail: dict[str, set[str]] = {}
        self._tail_by_head_rel: dict[tuple[str, str], set[str]] = {}
        self._head_by_tail_rel: dict[tuple[str, str], set[str]] = {}
        self._label_tokens: dict[str, set[str]] = {}
        for t in self.triples:
            self._rel_by_head.setdefault(t.head, set()).add(t.relation)
            self._rel_by_tail.setdefault(t.tail, set()).add(t.relation)
            self._tail_by_head_rel.setdefault((t.head, t.relation), set()).add(t.tail)
            self._head_by_tail_rel.setdefault((t.tail, t.relation), set()).add(t.head)
        for eid, label in self.labels.items():
            for tok in set(tokenize(label)):
                self._label_tokens.setdefault(tok, set()).add(eid)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self.triples

    def __len__(self) -> int:
        return len(self.triples)


def load_graph(source, format: str = "tsv-triples") -> KnowledgeGraph:
    """Parse a graph file from a readable byte (or text) stream.

    tsv-triples: ``head<TAB>relation<TAB>tail`` lines; label lines
    ``#label<TAB>entity<TAB>text[<TAB>lang]``; other ``#`` lines are comments.
    n-triples-subset: ``<uri> <uri> <uri> .`` plus label statements whose
    predicate is ``type.object.name`` with a literal object.
    """
    if format == "tsv-triples":
        return _load_tsv(source)
    if format == "n-triples-subset":
        return _load_ntriples(source)
    raise ValueError(f"unknown graph format: {format}")


def _iter_lines(source):
    for i, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            try:
                raw = raw.decode("utf-8")
            except UnicodeDecodeError as e:
                raise ParseError(i, f"not valid UTF-8: {e}") from e
        yield i, raw.rstrip("\n").rstrip("\r")


def _check_entity(eid: str, line_no: int, what: str) -> str:
    if not eid:
        raise ParseError(line_no, f"empty {what}")
    if any(c.isspace() for c in eid):
        raise ParseError(line_no, f"{what} contains whitespace: {eid!r}")
    return eid


def _load_tsv(source) -> KnowledgeGraph:
    triples: set[Triple] = set()
    labels: dict[str, str] = {}
    stats = LoadStats()
    seen_lines: set[str] = set()
    for line_no, line in _iter_lines(source):
        stats.lines = line_no
        if not line.strip():
            continue
        if line.startswith("#"):
            if line.startswith("#label\t"):
                parts = line.split("\t")
                if len(parts) not in (3, 4):
                    raise ParseError(line_no, "label line needs entity and text")
                eid = _check_entity(parts[1], line_no, "label entity")
                text = parts[2]
                if not text:
                    raise ParseError(line_no, "empty label text")
                labels.setdefault(eid, text)
            continue
        if line in seen_lines:
            stats.duplicate_lines += 1
            continue
        seen_lines.add(line)
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(line_no, f"expected 3 tab-separated fields, got {len(parts)}")
        head = _check_entity(parts[0], line_no, "head")
        tail = _check_entity(parts[2], line_no, "tail")
        if not parts[1]:
            raise ParseError(line_no, "empty relation")
        triples.add(Triple(head, parts[1], tail))
    stats.triples = len(triples)
    stats.labels = len(labels)
    return KnowledgeGraph(triples, labels, stats)


_NT_LINE = re.compile(
    r"^<([^>\s]+)>\s+<([^>\s]+)>\s+(<[^>\s]+>|\"(?:[^\"\\]|\\.)*\"(?:@[A-Za-z-]+)?)\s*\.$"
)


def _strip_ns(uri: str) -> str:
    if uri.startswith(NS_PREFIX):
        return uri[len(NS_PREFIX):]
    return uri.rsplit("/", 1)[-1].rsplit("#", 1)[-1]


def _load_ntriples(source) -> KnowledgeGraph:
    triples: set[Triple] = set()
    labels: dict[str, str] = {}
    stats = LoadStats()
    for line_no, line in _iter_lines(source):
        stats.lines = line_no
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        m = _NT_LINE.match(line)
        if not m:
            raise ParseError(line_no, "not a recognized N-Triples statement")
        subj = _check_entity(_strip_ns(m.group(1)), line_no, "subject")
        pred = _strip_ns(m.group(2))
        obj = m.group(3)
        if obj.startswith("<"):
            tail = _check_entity(_strip_ns(obj[1:-1]), line_no, "object")
            triples.add(Triple(subj, pred, tail))
        else:
            if pred != "type.object.name":
                raise ParseError(line_no, f"literal object not allowed for {pred}")
            text = re.sub(r"@[A-Za-z-]+$", "", obj)
            text = text[1:-1].replace('\\"', '"').replace("\\\\", "\\")
            if text:
                labels.setdefault(subj, text)
    stats.triples = len(triples)
    stats.labels = len(labels)
    return KnowledgeGraph(triples, labels, stats)


def load_graph_path(path, format: str = "tsv-triples") -> KnowledgeGraph:
    with open(path, "rb") as f:
        return load_graph(f, format=format)


# SPARQL templates for the five retrieval primitives. Whitespace-normalized
# equality against these is part of the backend contract; golden snapshots
# live in the test suite.
SPARQL_TEMPLATES = {
    "entity_match": (
        "PREFIX ns: <http://rdf.freebase.com/ns/>\n"
        "SELECT DISTINCT ?entity ?label\n"
        "WHERE {\n"
        '    ?entity ns:type.object.name ?label .\n'
        '    FILTER(LANG(?label) = "en") .\n'
        '    FILTER(bif:contains(?label, "{entity_string}")) .\n'
        "}\n"
    ),
    "head_relation_search": (
        "PREFIX ns: <http://rdf.freebase.com/ns/>\n"
        "SELECT ?relation\n"
        "WHERE {\n"
        "    ns:{head_entity_id} ?relation ?x .\n"
        "}\n"
    ),
    "tail_relation_search": (
        "PREFIX ns: <http://rdf.freebase.com/ns/>\n"
        "SELECT ?relation\n"
        "WHERE {\n"
        "    ?x ?relation ns:{tail_entity_id} .\n"
        "}\n"
    ),
    "head_entity_search": (
        "PREFIX ns: <http://rdf.freebase.com/ns/>\n"
        "SELECT ?headEntity\n"
        "WHERE {\n"
        "    ?headEntity ns:{relation} ns:{tail_entity_id} .\n"
        "}\n"
    ),
    "tail_entity_search": (
        "PREFIX ns: <http://rdf.freebase.com/ns/>\n"
        "SELECT ?tailEntity\n"
        "WHERE {\n"
        "    ns:{head_entity_id} ns:{relation} ?tailEntity .\n"
        "}\n"
    ),
}

_SLOT = re.compile(r"\{([a-z_]+)\}")


def _escape_literal(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def render_sparql(primitive: str, bindings: dict[str, str]) -> str:
    """Fill a retrieval-primitive template; raises MissingBinding if short."""
    try:
        template = SPARQL_TEMPLATES[primitive]
    except KeyError:
        raise ValueError(f"unknown primitive: {primitive}") from None

    def sub(m: re.Match) -> str:
        name = m.group(1)
        if name not in bindings:
            raise MissingBinding(name)
        value = bindings[name]
        if name == "entity_string":
            return _escape_literal(value)
        return value

    return _SLOT.sub(sub, template)


def normalize_whitespace(text: str) -> str:
    return " ".join(text.split())


class KgBackend:
    """Contract shared by the local store and the remote SPARQL client.

    All five retrieval methods return deterministically ordered
    CappedResults; `calls` counts retrieval invocations.
    """

    def __init__(self, result_cap: int = DEFAULT_RESULT_CAP):
        self.result_cap = result_cap
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    def _count(self):
        with self._lock:
            self._calls += 1

    def entity_match(self, query: str) -> CappedResults:
        raise NotImplementedError

    def head_relation_search(self, entity: str) -> CappedResults:
        raise NotImplementedError

    def tail_relation_search(self, entity: str) -> CappedResults:
        raise NotImplementedError

    def tail_entity_search(self, head: str, relation: str) -> CappedResults:
        raise NotImplementedError

    def head_entity_search(self, tail: str, relation: str) -> CappedResults:
        raise NotImplementedError

    def entity_label(self, entity: str) -> str | None:
        raise NotImplementedError

    def display_label(self, entity: str) -> str:
        return self.entity_label(entity) or UNNAMED_LABEL


def _require(value: str, what: str) -> str:
    if not value:
        raise ValueError(f"{what} must be non-empty")
    return value


class LocalKg(KgBackend):
    """Retrieval over an in-memory KnowledgeGraph."""

    def __init__(self, graph: KnowledgeGraph, result_cap: int = DEFAULT_RESULT_CAP):
        super().__init__(result_cap)
        self.graph = graph

    def entity_match(self, query: str) -> CappedResults:
        self._count()
        query = query.strip()
        if not query:
            raise EmptyQuery("entity_match query is empty")
        tokens = tokenize(query)
        if not tokens:
            raise EmptyQuery("entity_match query has no matchable tokens")
        candidates: set[str] | None = None
        for tok in tokens:
            posting = self.graph._label_tokens.get(tok, set())
            candidates = posting if candidates is None else candidates & posting
            if not candidates:
                return CappedResults()
        hits = [(eid, self.graph.labels[eid]) for eid in candidates]
        hits.sort(key=lambda h: (len(h[1]), h[0]))
        return _cap(hits, self.result_cap)

    def head_relation_search(self, entity: str) -> CappedResults:
        self._count()
        _require(entity, "entity")
        rels = sorted(self.graph._rel_by_head.get(entity, ()))
        return _cap(rels, self.result_cap)

    def tail_relation_search(self, entity: str) -> CappedResults:
        self._count()
        _require(entity, "entity")
        rels = sorted(self.graph._rel_by_tail.get(entity, ()))
        return _cap(rels, self.result_cap)

    def tail_entity_search(self, head: str, relation: str) -> CappedResults:
        self._count()
        _require(head, "head")
        _require(relation, "relation")
        tails = sorted(self.graph._tail_by_head_rel.get((head, relation), ()))
        return _cap(tails, self.result_cap)

    def head_entity_search(self, tail: str, relation: str) -> CappedResults:
        self._count()
        _require(tail, "tail")
        _require(relation, "relation")
        heads = sorted(self.graph._head_by_tail_rel.get((tail, relation), ()))
        return _cap(heads, self.result_cap)

    def entity_label(self, entity: str) -> str | None:
        return self.graph.labels.get(entity)


LABEL_QUERY = (
    "PREFIX ns: <http://rdf.freebase.com/ns/>\n"
    "SELECT ?label\n"
    "WHERE {\n"
    "    ns:%s ns:type.object.name ?label .\n"
    '    FILTER(LANG(?label) = "en") .\n'
    "}\n"
)


class RemoteKg(KgBackend):
    """SPARQL-endpoint client issuing the five primitive templates.

    Retries each request 3 times with exponential backoff starting at
    500 ms, then raises RemoteUnavailable.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0,
                 result_cap: int = DEFAULT_RESULT_CAP,
                 retries: int = 3, backoff_s: float = 0.5,
                 sleep=time.sleep, session=None):
        super().__init__(result_cap)
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries
        self.backoff_s = backoff_s
        self._sleep = sleep
        self._session = session or requests.Session()
        self._label_cache: dict[str, str | None] = {}
        self._label_lock = threading.Lock()

    def _query(self, sparql: str) -> list[dict]:
        last_error: Exception | None = None
        for attempt in range(self.retries):
            if attempt:
                self._sleep(self.backoff_s * (2 ** (attempt - 1)))
            try:
                resp = self._session.post(
                    self.endpoint,
                    data={"query": sparql},
                    headers={"Accept": "application/sparql-results+json"},
                    timeout=self.timeout,
                )
                resp.raise_for_status()
                return resp.json()["results"]["bindings"]
            except Exception as e:  # noqa: BLE001 - every failure is retryable here
                last_error = e
        raise RemoteUnavailable(f"endpoint {self.endpoint}: {last_error}")

    @staticmethod
    def _value(binding: dict, var: str) -> str:
        return _strip_ns(binding[var]["value"])

    def entity_match(self, query: str) -> CappedResults:
        self._count()
        query = query.strip()
        if not query:
            raise EmptyQuery("entity_match query is empty")
        sparql = render_sparql("entity_match", {"entity_string": query})
        rows = self._query(sparql)
        hits = sorted(
            {(self._value(r, "entity"), r["label"]["value"]) for r in rows},
            key=lambda h: (len(h[1]), h[0]),
        )
        return _cap(hits, self.result_cap)

    def head_relation_search(self, entity: str) -> CappedResults:
        self._count()
        _require(entity, "entity")
        sparql = render_sparql("head_relation_search", {"head_entity_id": entity})
        rels = sorted({self._value(r, "relation") for r in self._query(sparql)})
        return _cap(rels, self.result_cap)

    def tail_relation_search(self, entity: str) -> CappedResults:
        self._count()
        _require(entity, "entity")
        sparql = render_sparql("tail_relation_search", {"tail_entity_id": entity})
        rels = sorted({self._value(r, "relation") for r in self._query(sparql)})
        return _cap(rels, self.result_cap)

    def tail_entity_search(self, head: str, relation: str) -> CappedResults:
        self._count()
        _require(head, "head")
        _require(relation, "relation")
        sparql = render_sparql(
            "tail_entity_search", {"head_entity_id": head, "relation": relation})
        tails = sorted({self._value(r, "tailEntity") for r in self._query(sparql)})
        return _cap(tails, self.result_cap)

    def head_entity_search(self, tail: str, relation: str) -> CappedResults:
        self._count()
        _require(tail, "tail")
        _require(relation, "relation")
        sparql = render_sparql(
            "head_entity_search", {"tail_entity_id": tail, "relation": relation})
        heads = sorted({self._value(r, "headEntity") for r in self._query(sparql)})
        return _cap(heads, self.result_cap)

    def entity_label(self, entity: str) -> str | None:
        with self._label_lock:
            if entity in self._label_cache:
                return self._label_cache[entity]
        rows = self._query(LABEL_QUERY % entity)
        label = rows[0]["label"]["value"] if rows else None
        with self._label_lock:
            self._label_cache[entity] = label
        return label
