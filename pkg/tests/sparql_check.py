"""Minimal independent SPARQL grammar checker used as a parse oracle.

Validates the SELECT subset these queries live in: prologue of PREFIX
declarations, SELECT clause with variables, and a group graph pattern of
triple patterns and FILTER constraints. Prefixed names must use a declared
prefix; ``bif:`` is accepted as the Virtuoso built-in function namespace.
Knows nothing about how the production templates are rendered.
"""

from __future__ import annotations

import re


class SparqlSyntaxError(ValueError):
    pass


_TOKEN = re.compile(r"""
    (?P<IRI><[^<>\s]*>)
  | (?P<STRING>"(?:[^"\\]|\\.)*")
  | (?P<VAR>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<PNAME>[A-Za-z_][A-Za-z0-9_-]*:[A-Za-z0-9_.-]*)
  | (?P<KEYWORD>PREFIX|SELECT|DISTINCT|WHERE|FILTER)
  | (?P<NAME>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<PUNCT>[{}().,=])
""", re.VERBOSE | re.IGNORECASE)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise SparqlSyntaxError(f"unexpected character {text[pos]!r} at {pos}")
        kind = m.lastgroup
        value = m.group()
        if kind == "KEYWORD":
            value = value.upper()
        tokens.append((kind, value))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.i = 0
        self.prefixes: set[str] = {"bif"}

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tok_kind, tok_value = self.peek()
        if tok_kind is None:
            raise SparqlSyntaxError(f"unexpected end of query, wanted {kind or value}")
        if kind and tok_kind != kind:
            raise SparqlSyntaxError(f"expected {kind}, got {tok_kind} {tok_value!r}")
        if value and tok_value != value:
            raise SparqlSyntaxError(f"expected {value!r}, got {tok_value!r}")
        self.i += 1
        return tok_value

    def at(self, kind=None, value=None) -> bool:
        tok_kind, tok_value = self.peek()
        if kind and tok_kind != kind:
            return False
        if value is not None and tok_value != value:
            return False
        return tok_kind is not None

    def parse(self):
        while self.at("KEYWORD", "PREFIX"):
            self.take("KEYWORD", "PREFIX")
            pname = self.take("PNAME")
            if not pname.endswith(":"):
                raise SparqlSyntaxError(f"prefix declaration must end in ':': {pname}")
            self.prefixes.add(pname[:-1])
            self.take("IRI")
        self.take("KEYWORD", "SELECT")
        if self.at("KEYWORD", "DISTINCT"):
            self.take("KEYWORD", "DISTINCT")
        n_vars = 0
        while self.at("VAR"):
            self.take("VAR")
            n_vars += 1
        if n_vars == 0:
            raise SparqlSyntaxError("SELECT needs at least one variable")
        self.take("KEYWORD", "WHERE")
        self.group_graph_pattern()
        if self.peek()[0] is not None:
            raise SparqlSyntaxError(f"trailing tokens: {self.tokens[self.i:]}")

    def group_graph_pattern(self):
        self.take("PUNCT", "{")
        while not self.at("PUNCT", "}"):
            if self.at("KEYWORD", "FILTER"):
                self.take("KEYWORD", "FILTER")
                self.bracketed_expression()
                if self.at("PUNCT", "."):
                    self.take("PUNCT", ".")
            else:
                self.triple_pattern()
        self.take("PUNCT", "}")

    def term(self, *, verb: bool = False):
        kind, value = self.peek()
        if kind == "VAR":
            self.take("VAR")
        elif kind == "PNAME":
            self.take("PNAME")
            prefix = value.split(":", 1)[0]
            if prefix not in self.prefixes:
                raise SparqlSyntaxError(f"undeclared prefix {prefix!r}")
        elif kind == "IRI":
            self.take("IRI")
        elif verb and kind == "NAME" and value == "a":
            self.take("NAME")
        else:
            raise SparqlSyntaxError(f"bad term {value!r}")

    def triple_pattern(self):
        self.term()
        self.term(verb=True)
        self.term()
        self.take("PUNCT", ".")

    def bracketed_expression(self):
        """Balanced parentheses over calls, comparisons, and literals."""
        self.take("PUNCT", "(")
        depth = 1
        while depth:
            kind, value = self.peek()
            if kind is None:
                raise SparqlSyntaxError("unbalanced parentheses in FILTER")
            if kind == "PUNCT" and value == "(":
                depth += 1
            elif kind == "PUNCT" and value == ")":
                depth -= 1
            elif kind == "PNAME":
                prefix = value.split(":", 1)[0]
                if prefix not in self.prefixes:
                    raise SparqlSyntaxError(f"undeclared prefix {prefix!r}")
            self.i += 1


def check_sparql(text: str) -> None:
    """Raise SparqlSyntaxError unless `text` parses under the subset grammar."""
    _Parser(_tokenize(text)).parse()
