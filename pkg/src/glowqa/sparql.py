"""Parser and executor for the SPARQL subset used by context retrieval.

Supported grammar (keywords case-insensitive, whitespace/newline insensitive):

    PREFIX name: <iri>        (zero or more)
    SELECT proj+              proj := ?v | ?v AS ?alias | (?v AS ?alias)
    WHERE { clause* }         clause := VALUES ?v { "lit"+ } | s p o .
    LIMIT n                   (optional)

Pattern positions are variables, IRIs (<full> or prefixed), or literals.
Anything outside this subset is rejected with a character offset so the
retriever can fall back to its deterministic template query.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterator

import httpx

from .errors import (
    EndpointError,
    SparqlSyntaxError,
    TransportError,
    UnboundProjectionError,
    UnknownPrefixError,
)
from .kgstore import Term, Triple, TripleStore


@dataclass(frozen=True, order=True)
class PatternTerm:
    kind: str  # "var" | "iri" | "literal"
    value: str

    @property
    def is_var(self) -> bool:
        return self.kind == "var"

    def as_term(self) -> Term:
        if self.is_var:
            raise ValueError("variable has no term form")
        return Term(self.kind, self.value)  # type: ignore[arg-type]


@dataclass(frozen=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def terms(self) -> tuple[PatternTerm, PatternTerm, PatternTerm]:
        return (self.subject, self.predicate, self.object)


@dataclass(frozen=True)
class Projection:
    variable: str
    alias: str | None = None

    @property
    def column(self) -> str:
        return self.alias or self.variable


@dataclass(frozen=True)
class ValuesClause:
    variable: str
    literals: tuple[str, ...]


@dataclass(frozen=True)
class SparqlQuery:
    prefixes: tuple[tuple[str, str], ...]
    projections: tuple[Projection, ...]
    values_clauses: tuple[ValuesClause, ...]
    patterns: tuple[TriplePattern, ...]
    limit: int | None = None

    def variables(self) -> set[str]:
        bound = {v.variable for v in self.values_clauses}
        for p in self.patterns:
            bound.update(t.value for t in p.terms() if t.is_var)
        return bound


@dataclass(frozen=True)
class ResultSet:
    columns: tuple[str, ...]
    rows: tuple[tuple[Term, ...], ...]

    def __len__(self) -> int:
        return len(self.rows)


# ---------------------------------------------------------------------------
# Tokenizer


@dataclass(frozen=True)
class _Token:
    kind: str  # WORD VAR IRI PNAME LITERAL PUNCT INT EOF
    text: str
    offset: int


_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<COMMENT>\#[^\n]*)
  | (?P<IRI><[^<>\s]*>)
  | (?P<VAR>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<LITERAL>"(?:[^"\\]|\\.)*")
  | (?P<INT>\d+)
  | (?P<PNAME>[A-Za-z_][A-Za-z0-9_.-]*:[A-Za-z0-9_.-]*)
  | (?P<WORD>[A-Za-z_][A-Za-z0-9_-]*)
  | (?P<PUNCT>[{}().:])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> Iterator[_Token]:
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SparqlSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup or ""
        if kind not in ("WS", "COMMENT"):
            yield _Token(kind, m.group(), pos)
        pos = m.end()
    yield _Token("EOF", "", len(text))


_ESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _unquote(raw: str) -> str:
    body = raw[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        if body[i] == "\\" and i + 1 < len(body) and body[i + 1] in _ESCAPES:
            out.append(_ESCAPES[body[i + 1]])
            i += 2
        else:
            out.append(body[i])
            i += 1
    return "".join(out)


class _Parser:
    def __init__(self, text: str):
        self.tokens = list(_tokenize(text))
        self.pos = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.cur
        self.pos += 1
        return tok

    def is_word(self, word: str) -> bool:
        return self.cur.kind == "WORD" and self.cur.text.upper() == word

    def expect_word(self, word: str) -> _Token:
        if not self.is_word(word):
            raise SparqlSyntaxError(f"expected {word}", self.cur.offset)
        return self.advance()

    def expect_punct(self, ch: str) -> _Token:
        if not (self.cur.kind == "PUNCT" and self.cur.text == ch):
            raise SparqlSyntaxError(f"expected {ch!r}", self.cur.offset)
        return self.advance()

    def expect_var(self) -> str:
        if self.cur.kind != "VAR":
            raise SparqlSyntaxError("expected a ?variable", self.cur.offset)
        return self.advance().text[1:]

    # -- grammar ------------------------------------------------------------

    def parse(self) -> SparqlQuery:
        prefixes: list[tuple[str, str]] = []
        while self.is_word("PREFIX"):
            prefixes.append(self.prefix_decl())
        self.prefix_map = dict(prefixes)

        self.expect_word("SELECT")
        projections = self.projections()

        self.expect_word("WHERE")
        self.expect_punct("{")
        values_clauses: list[ValuesClause] = []
        patterns: list[TriplePattern] = []
        while not (self.cur.kind == "PUNCT" and self.cur.text == "}"):
            if self.cur.kind == "EOF":
                raise SparqlSyntaxError("unterminated WHERE block", self.cur.offset)
            if self.is_word("VALUES"):
                values_clauses.append(self.values_clause())
            else:
                patterns.append(self.triple_pattern())
        self.expect_punct("}")

        limit = None
        if self.is_word("LIMIT"):
            self.advance()
            if self.cur.kind != "INT":
                raise SparqlSyntaxError("LIMIT expects a positive integer", self.cur.offset)
            limit = int(self.advance().text)
            if limit <= 0:
                raise SparqlSyntaxError("LIMIT must be positive", self.cur.offset)
        if self.cur.kind != "EOF":
            raise SparqlSyntaxError(f"trailing input {self.cur.text!r}", self.cur.offset)

        query = SparqlQuery(
            prefixes=tuple(prefixes),
            projections=tuple(projections),
            values_clauses=tuple(values_clauses),
            patterns=tuple(patterns),
            limit=limit,
        )
        bound = query.variables()
        for proj in projections:
            if proj.variable not in bound:
                raise UnboundProjectionError(
                    f"projected variable ?{proj.variable} is unbound", 0
                )
        return query

    def prefix_decl(self) -> tuple[str, str]:
        self.expect_word("PREFIX")
        if self.cur.kind == "PNAME" and self.cur.text.endswith(":"):
            name = self.advance().text[:-1]
        elif self.cur.kind == "WORD":
            name = self.advance().text
            self.expect_punct(":")
        else:
            raise SparqlSyntaxError("expected prefix name", self.cur.offset)
        if self.cur.kind != "IRI":
            raise SparqlSyntaxError("expected <iri> after prefix name", self.cur.offset)
        return (name, self.advance().text[1:-1])

    def projections(self) -> list[Projection]:
        projections: list[Projection] = []
        while True:
            if self.cur.kind == "PUNCT" and self.cur.text == "(":
                self.advance()
                var = self.expect_var()
                self.expect_word("AS")
                alias = self.expect_var()
                self.expect_punct(")")
                projections.append(Projection(var, alias))
            elif self.cur.kind == "VAR":
                var = self.expect_var()
                alias = None
                if self.is_word("AS"):
                    self.advance()
                    alias = self.expect_var()
                projections.append(Projection(var, alias))
            else:
                break
        if not projections:
            raise SparqlSyntaxError("SELECT requires at least one variable", self.cur.offset)
        return projections

    def values_clause(self) -> ValuesClause:
        self.expect_word("VALUES")
        var = self.expect_var()
        self.expect_punct("{")
        literals: list[str] = []
        while self.cur.kind == "LITERAL":
            literals.append(_unquote(self.advance().text))
        self.expect_punct("}")
        if not literals:
            raise SparqlSyntaxError("VALUES requires at least one literal", self.cur.offset)
        return ValuesClause(var, tuple(literals))

    def pattern_term(self) -> PatternTerm:
        tok = self.cur
        if tok.kind == "VAR":
            return PatternTerm("var", self.advance().text[1:])
        if tok.kind == "IRI":
            return PatternTerm("iri", self.advance().text[1:-1])
        if tok.kind == "PNAME":
            prefix, local = self.advance().text.split(":", 1)
            if prefix not in self.prefix_map:
                raise UnknownPrefixError(f"unknown prefix {prefix!r}", tok.offset)
            return PatternTerm("iri", self.prefix_map[prefix] + local)
        if tok.kind == "LITERAL":
            return PatternTerm("literal", _unquote(self.advance().text))
        raise SparqlSyntaxError(f"expected a pattern term, got {tok.text!r}", tok.offset)

    def triple_pattern(self) -> TriplePattern:
        s = self.pattern_term()
        p = self.pattern_term()
        o = self.pattern_term()
        # The terminating dot is optional immediately before '}'.
        if self.cur.kind == "PUNCT" and self.cur.text == ".":
            self.advance()
        elif not (self.cur.kind == "PUNCT" and self.cur.text == "}"):
            raise SparqlSyntaxError("expected '.' after triple pattern", self.cur.offset)
        return TriplePattern(s, p, o)


def parse(text: str) -> SparqlQuery:
    """Parse query text into an AST, rejecting anything outside the subset."""
    return _Parser(text).parse()


def to_text(query: SparqlQuery) -> str:
    """Pretty-print with fully expanded IRIs; parse(to_text(q)) == q."""
    lines = [f"PREFIX {name}: <{iri}>" for name, iri in query.prefixes]

    def fmt_term(t: PatternTerm) -> str:
        if t.kind == "var":
            return f"?{t.value}"
        if t.kind == "iri":
            return f"<{t.value}>"
        return json.dumps(t.value)

    projs = " ".join(
        f"(?{p.variable} AS ?{p.alias})" if p.alias else f"?{p.variable}"
        for p in query.projections
    )
    lines.append(f"SELECT {projs}")
    lines.append("WHERE {")
    for v in query.values_clauses:
        lits = " ".join(json.dumps(lit) for lit in v.literals)
        lines.append(f"  VALUES ?{v.variable} {{ {lits} }}")
    for p in query.patterns:
        lines.append(f"  {fmt_term(p.subject)} {fmt_term(p.predicate)} {fmt_term(p.object)} .")
    lines.append("}")
    if query.limit is not None:
        lines.append(f"LIMIT {query.limit}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Execution


def _unify(pattern: TriplePattern, triple: Triple, binding: dict[str, Term]) -> dict[str, Term] | None:
    out = binding
    for pterm, tterm in zip(pattern.terms(), (triple.subject, triple.predicate, triple.object)):
        if pterm.is_var:
            bound = out.get(pterm.value)
            if bound is None:
                if out is binding:
                    out = dict(binding)
                out[pterm.value] = tterm
            elif bound != tterm:
                return None
        elif pterm.as_term() != tterm:
            return None
    return out if out is not binding else dict(binding)


def _candidates(pattern: TriplePattern, binding: dict[str, Term], store: TripleStore):
    def resolved(t: PatternTerm) -> Term | None:
        if t.is_var:
            return binding.get(t.value)
        return t.as_term()

    s, p, o = (resolved(t) for t in pattern.terms())
    if s is not None and s.is_iri:
        return store.by_subject(s.value)
    if o is not None:
        return store.by_object(o.value)
    if p is not None and p.is_iri:
        return store.by_predicate(p.value)
    return store.triples


def execute(query: SparqlQuery, store: TripleStore) -> ResultSet:
    """Nested-loop join over patterns; VALUES act as unary relations.

    Rows are deduplicated, ordered lexicographically over their stringified
    terms, and truncated by LIMIT last.
    """
    bindings: list[dict[str, Term]] = [{}]
    for values in query.values_clauses:
        extended: list[dict[str, Term]] = []
        for b in bindings:
            bound = b.get(values.variable)
            if bound is not None:
                if not bound.is_iri and bound.value in values.literals:
                    extended.append(b)
            else:
                for lit in values.literals:
                    nb = dict(b)
                    nb[values.variable] = Term.literal(lit)
                    extended.append(nb)
        bindings = extended

    for pattern in query.patterns:
        next_bindings: list[dict[str, Term]] = []
        for b in bindings:
            for triple in _candidates(pattern, b, store):
                nb = _unify(pattern, triple, b)
                if nb is not None:
                    next_bindings.append(nb)
        bindings = next_bindings

    columns = tuple(p.column for p in query.projections)
    rows = {tuple(b[p.variable] for p in query.projections) for b in bindings}
    ordered = sorted(rows, key=lambda row: tuple((t.kind, t.value) for t in row))
    if query.limit is not None:
        ordered = ordered[: query.limit]
    return ResultSet(columns=columns, rows=tuple(ordered))


# ---------------------------------------------------------------------------
# Remote endpoints (SPARQL protocol + SPARQL 1.1 JSON results)


class MalformedResultsError(EndpointError):
    pass


def _binding_to_term(b: dict) -> Term:
    if b.get("type") == "uri":
        return Term.iri(b.get("value", ""))
    return Term.literal(b.get("value", ""))


def execute_remote(
    query_text: str,
    endpoint_url: str,
    client: httpx.Client | None = None,
    method: str = "post",
    timeout: float = 30.0,
) -> ResultSet:
    """Run a query against a SPARQL HTTP endpoint and map the JSON results."""
    own_client = client is None
    http = client or httpx.Client(timeout=timeout)
    try:
        try:
            if method.lower() == "get":
                resp = http.get(
                    endpoint_url,
                    params={"query": query_text},
                    headers={"Accept": "application/sparql-results+json"},
                )
            else:
                resp = http.post(
                    endpoint_url,
                    data={"query": query_text},
                    headers={"Accept": "application/sparql-results+json"},
                )
        except httpx.HTTPError as exc:
            raise TransportError(f"sparql endpoint unreachable: {exc} ({endpoint_url})") from exc
        if resp.status_code != 200:
            raise EndpointError(
                f"sparql endpoint returned {resp.status_code}", endpoint_url, resp.status_code
            )
        try:
            payload = resp.json()
            variables = payload["head"]["vars"]
            bindings = payload["results"]["bindings"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise MalformedResultsError(
                f"malformed sparql JSON results: {exc}", endpoint_url
            ) from exc
        columns = tuple(variables)
        rows = tuple(
            tuple(_binding_to_term(row.get(var, {"type": "literal", "value": ""})) for var in columns)
            for row in bindings
        )
        return ResultSet(columns=columns, rows=rows)
    finally:
        if own_client:
            http.close()
