"""Shared test helpers: scan oracles, graph generators, stub servers."""

from __future__ import annotations

import json
import random
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs

from kgqa.kg import KnowledgeGraph, Triple, tokenize
from kgqa.llm import LlmClient, ResponseCache, ScriptedBackend, ScriptEntry

# Brute-force linear-scan oracles for the five retrieval primitives. These
# deliberately avoid the indexes the production store uses.


def scan_entity_match(graph: KnowledgeGraph, query: str):
    tokens = tokenize(query)
    hits = []
    for eid, label in graph.labels.items():
        label_tokens = set(tokenize(label))
        if all(t in label_tokens for t in tokens):
            hits.append((eid, label))
    return sorted(hits, key=lambda h: (len(h[1]), h[0]))


def scan_head_relations(graph: KnowledgeGraph, entity: str):
    return sorted({t.relation for t in graph.triples if t.head == entity})


def scan_tail_relations(graph: KnowledgeGraph, entity: str):
    return sorted({t.relation for t in graph.triples if t.tail == entity})


def scan_tail_entities(graph: KnowledgeGraph, head: str, relation: str):
    return sorted({t.tail for t in graph.triples
                   if t.head == head and t.relation == relation})


def scan_head_entities(graph: KnowledgeGraph, tail: str, relation: str):
    return sorted({t.head for t in graph.triples
                   if t.tail == tail and t.relation == relation})


_WORDS = ("rift", "valley", "province", "kenya", "nation", "tour", "country",
          "world", "artist", "college", "river", "lake", "north", "south",
          "east", "west", "city", "park", "union", "state", "band", "song")


def random_graph(rng: random.Random, n_entities: int = 40, n_triples: int = 120,
                 labeled_fraction: float = 0.9) -> KnowledgeGraph:
    entities = [f"m.0e{i}" for i in range(n_entities)]
    relations = [f"ns.rel_{i}.r{j}" for i in range(5) for j in range(4)]
    triples = set()
    for _ in range(n_triples):
        triples.add(Triple(rng.choice(entities), rng.choice(relations),
                           rng.choice(entities)))
    labels = {}
    for eid in entities:
        if rng.random() < labeled_fraction:
            k = rng.randint(1, 3)
            labels[eid] = " ".join(rng.choice(_WORDS) for _ in range(k))
    return KnowledgeGraph(triples, labels)


class StubSparqlHandler(BaseHTTPRequestHandler):
    """Answers the five primitive queries from the server's local graph."""

    def log_message(self, *args):
        pass

    def do_POST(self):
        server = self.server
        server.requests_seen += 1
        if server.failures_remaining > 0:
            server.failures_remaining -= 1
            self.send_response(500)
            self.end_headers()
            self.wfile.write(b"injected failure")
            return
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length).decode("utf-8")
        query = parse_qs(body).get("query", [""])[0]
        bindings = self._solve(query, server.graph)
        payload = json.dumps({"results": {"bindings": bindings}}).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/sparql-results+json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    @staticmethod
    def _uri(value: str) -> dict:
        return {"type": "uri", "value": f"http://rdf.freebase.com/ns/{value}"}

    def _solve(self, query: str, graph: KnowledgeGraph) -> list[dict]:
        ns = r"ns:([^\s]+)"
        m = re.search(r'bif:contains\(\?label, "((?:[^"\\]|\\.)*)"\)', query)
        if m:
            text = m.group(1).replace('\\"', '"').replace("\\\\", "\\")
            return [
                {"entity": self._uri(eid),
                 "label": {"type": "literal", "value": label}}
                for eid, label in scan_entity_match(graph, text)
            ]
        m = re.search(r"SELECT \?label", query)
        if m:
            eid = re.search(ns, query.split("WHERE", 1)[1]).group(1)
            label = graph.labels.get(eid)
            if label is None:
                return []
            return [{"label": {"type": "literal", "value": label}}]
        m = re.search(ns + r" \?relation \?x", query)
        if m:
            return [{"relation": self._uri(r)}
                    for r in scan_head_relations(graph, m.group(1))]
        m = re.search(r"\?x \?relation " + ns, query)
        if m:
            return [{"relation": self._uri(r)}
                    for r in scan_tail_relations(graph, m.group(1))]
        m = re.search(r"\?headEntity " + ns + " " + ns, query)
        if m:
            return [{"headEntity": self._uri(h)}
                    for h in scan_head_entities(graph, m.group(2), m.group(1))]
        m = re.search(ns + " " + ns + r" \?tailEntity", query)
        if m:
            return [{"tailEntity": self._uri(t)}
                    for t in scan_tail_entities(graph, m.group(1), m.group(2))]
        raise AssertionError(f"stub server got unrecognized query: {query}")


class StubSparqlServer:
    """Context manager exposing a local graph over the SPARQL wire format."""

    def __init__(self, graph: KnowledgeGraph, failures: int = 0):
        self.server = ThreadingHTTPServer(("127.0.0.1", 0), StubSparqlHandler)
        self.server.graph = graph
        self.server.failures_remaining = failures
        self.server.requests_seen = 0
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self.server.server_address
        return f"http://{host}:{port}/sparql"

    @property
    def requests_seen(self) -> int:
        return self.server.requests_seen

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()
        self.thread.join(timeout=5)


def scripted_client(pairs, cache: ResponseCache | None = None,
                    model: str = "scripted") -> LlmClient:
    """LlmClient over substring-matched canned responses (no sleeping)."""
    backend = ScriptedBackend(
        [ScriptEntry(matcher, response) for matcher, response in pairs],
        model=model)
    return LlmClient(backend, cache if cache is not None else ResponseCache(),
                     sleep=lambda s: None)
