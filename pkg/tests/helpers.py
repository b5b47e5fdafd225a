"""Shared test utilities: random stores, the exhaustive SPARQL oracle,
scripted GNN stubs and query canonicalization."""

from __future__ import annotations

import itertools
import json
import math
import random

import httpx

from glowqa.gnn import GnnClient
from glowqa.kgstore import Term, Triple, TripleStore
from glowqa.sparql import (
    PatternTerm,
    Projection,
    ResultSet,
    SparqlQuery,
    TriplePattern,
    ValuesClause,
)

# ---------------------------------------------------------------------------
# Random stores and queries (small vocabularies keep the oracle tractable)


def random_store(rng: random.Random, max_triples: int = 50) -> TripleStore:
    subjects = [f"http://x.test/s{i}" for i in range(8)]
    predicates = [f"http://x.test/p{i}" for i in range(3)]
    iri_objects = [f"http://x.test/o{i}" for i in range(4)]
    literals = ["alpha", "beta", "gamma"]
    triples = []
    for _ in range(rng.randint(0, max_triples)):
        s = Term.iri(rng.choice(subjects))
        p = Term.iri(rng.choice(predicates))
        if rng.random() < 0.35:
            o = Term.literal(rng.choice(literals))
        else:
            o = Term.iri(rng.choice(iri_objects + subjects))
        triples.append(Triple(s, p, o))
    return TripleStore(triples)


def random_query(rng: random.Random) -> SparqlQuery:
    predicates = [f"http://x.test/p{i}" for i in range(3)]
    literals = ["alpha", "beta", "gamma"]
    var_names = ["a", "b", "c"]
    n_patterns = rng.randint(1, 3)
    patterns = []
    used_vars: list[str] = []

    def term(position: str) -> PatternTerm:
        roll = rng.random()
        if roll < 0.55:
            v = rng.choice(var_names)
            if v not in used_vars:
                used_vars.append(v)
            return PatternTerm("var", v)
        if position == "predicate" or roll < 0.85:
            return PatternTerm("iri", rng.choice(predicates))
        return PatternTerm("literal", rng.choice(literals))

    for _ in range(n_patterns):
        s = term("subject")
        p = term("predicate")
        o = term("object")
        if not any(t.is_var for t in (s, p, o)):
            s = PatternTerm("var", rng.choice(var_names))
            if s.value not in used_vars:
                used_vars.append(s.value)
        patterns.append(TriplePattern(s, p, o))

    values = ()
    if used_vars and rng.random() < 0.4:
        v = rng.choice(used_vars)
        chosen = rng.sample(literals, rng.randint(1, 2))
        values = (ValuesClause(v, tuple(chosen)),)

    k = rng.randint(1, min(2, len(used_vars)))
    projections = tuple(Projection(v) for v in rng.sample(used_vars, k))
    limit = rng.randint(1, 5) if rng.random() < 0.3 else None
    return SparqlQuery(
        prefixes=(),
        projections=projections,
        values_clauses=values,
        patterns=tuple(patterns),
        limit=limit,
    )


def exhaustive_execute(query: SparqlQuery, store: TripleStore) -> ResultSet:
    """Reference semantics: try every assignment of every variable to every
    term in the universe; keep the ones satisfying all clauses."""
    universe: set[Term] = set()
    for t in store:
        universe.update((t.subject, t.predicate, t.object))
    for v in query.values_clauses:
        universe.update(Term.literal(lit) for lit in v.literals)
    variables = sorted(query.variables())
    all_triples = set(store.triples)

    def resolve(t: PatternTerm, binding: dict[str, Term]) -> Term:
        return binding[t.value] if t.is_var else Term(t.kind, t.value)  # type: ignore[arg-type]

    rows = set()
    for combo in itertools.product(sorted(universe), repeat=len(variables)):
        binding = dict(zip(variables, combo))
        ok = True
        for v in query.values_clauses:
            bound = binding[v.variable]
            if bound.is_iri or bound.value not in v.literals:
                ok = False
                break
        if ok:
            for p in query.patterns:
                candidate = Triple(
                    resolve(p.subject, binding),
                    resolve(p.predicate, binding),
                    resolve(p.object, binding),
                )
                if candidate not in all_triples:
                    ok = False
                    break
        if ok:
            rows.add(tuple(binding[p.variable] for p in query.projections))
    ordered = sorted(rows, key=lambda row: tuple((t.kind, t.value) for t in row))
    if query.limit is not None:
        ordered = ordered[: query.limit]
    return ResultSet(
        columns=tuple(p.column for p in query.projections), rows=tuple(ordered)
    )


def canonicalize(query: SparqlQuery) -> tuple:
    """Structural form with variables renamed by order of first appearance."""
    mapping: dict[str, str] = {}

    def rename(t: PatternTerm) -> tuple[str, str]:
        if t.is_var:
            if t.value not in mapping:
                mapping[t.value] = f"v{len(mapping)}"
            return ("var", mapping[t.value])
        return (t.kind, t.value)

    patterns = tuple(tuple(rename(t) for t in p.terms()) for p in query.patterns)
    values = tuple((rename(PatternTerm("var", v.variable)), v.literals) for v in query.values_clauses)
    projections = tuple(
        (rename(PatternTerm("var", p.variable)), p.alias) for p in query.projections
    )
    return (dict(query.prefixes), projections, values, patterns, query.limit)


# ---------------------------------------------------------------------------
# Scripted GNN inference stub (implements the wire contract over MockTransport)


def scripted_candidates(labels: list[str]) -> list[tuple[str, float]]:
    """Log-softmax of geometrically decaying weights; strictly descending."""
    weights = [2.0**-i for i in range(len(labels))]
    z = sum(weights)
    return [(label, math.log(w / z)) for label, w in zip(labels, weights)]


DEFAULT_GNN_REGISTRY = {
    "biokg:drug:kingdom": scripted_candidates(["Organic", "Non-Organic"]),
    "biokg:drug:superclass": scripted_candidates(
        ["Alkaloids", "Peptides", "Steroids", "Lipids", "Phenols", "Terpenes"]
    ),
    "lmdb:film:sequel/genre": scripted_candidates(
        ["Drama", "Action", "Comedy", "Sci-Fi", "Horror", "Romance"]
    ),
    "lmdb:film:language": scripted_candidates(
        ["English", "French", "Spanish", "German", "Italian", "Japanese", "Korean", "Hindi"]
    ),
}


def stub_gnn_client(registry: dict[str, list[tuple[str, float]]] | None = None) -> GnnClient:
    table = DEFAULT_GNN_REGISTRY if registry is None else registry

    def handler(request: httpx.Request) -> httpx.Response:
        if request.url.path == "/models":
            models = []
            for key in sorted(table):
                kg, entity_type, path = key.split(":")
                models.append(
                    {"kg": kg, "entity_type": entity_type, "edge_path": path.split("/")}
                )
            return httpx.Response(200, json=models)
        if request.url.path == "/predict":
            body = json.loads(request.content)
            key = f'{body["kg"]}:{body["entity_type"]}:{"/".join(body["edge_path"])}'
            if key not in table:
                return httpx.Response(
                    404, json={"error": "model-not-found", "key": key}
                )
            picked = table[key][: body["k"]]
            return httpx.Response(
                200,
                json={
                    "candidates": [
                        {"label": label, "log_likelihood": ll} for label, ll in picked
                    ]
                },
            )
        return httpx.Response(404, json={"error": "no-such-route"})

    client = httpx.Client(transport=httpx.MockTransport(handler), base_url="http://gnn.test")
    return GnnClient("http://gnn.test", client=client)
