import json
import random

import httpx
import pytest

from glowqa.errors import (
    EndpointError,
    SparqlSyntaxError,
    TransportError,
    UnboundProjectionError,
    UnknownPrefixError,
)
from glowqa.kgstore import Term, Triple, TripleStore, load_triples
from glowqa.sparql import (
    MalformedResultsError,
    Projection,
    ValuesClause,
    execute,
    execute_remote,
    parse,
    to_text,
)

from helpers import exhaustive_execute, random_query, random_store

B = "http://www.biokg.com/"

A1_QUERY = """PREFIX biokg: <http://www.biokg.com/>
SELECT ?drug as ?vt  ?kingdom as ?vl
WHERE {
  VALUES ?name { "Yohimbine" }
  ?drug biokg:NAME ?name .
  ?drug biokg:KINGDOM ?kingdom .}"""


def test_parse_reference_query():
    q = parse(A1_QUERY)
    assert dict(q.prefixes) == {"biokg": B}
    assert q.values_clauses == (ValuesClause("name", ("Yohimbine",)),)
    assert len(q.patterns) == 2
    assert q.patterns[0].predicate.value == f"{B}NAME"
    assert q.patterns[1].predicate.value == f"{B}KINGDOM"
    assert q.projections == (Projection("drug", "vt"), Projection("kingdom", "vl"))
    assert q.limit is None


def test_parenthesized_alias_form():
    q = parse("SELECT (?a AS ?b) WHERE { ?a <http://x.test/p> ?c . }")
    assert q.projections == (Projection("a", "b"),)


def test_unbound_projection_rejected():
    with pytest.raises(UnboundProjectionError):
        parse("SELECT ?x WHERE { }")


def test_unknown_prefix_rejected():
    with pytest.raises(UnknownPrefixError):
        parse("SELECT ?a WHERE { ?a foo:NAME ?b . }")


def test_syntax_error_carries_offset():
    text = "SELECT ?a WHERE { ?a ?b }"
    with pytest.raises(SparqlSyntaxError) as err:
        parse(text)
    assert 0 <= err.value.offset <= len(text)


def test_limit_must_be_positive():
    with pytest.raises(SparqlSyntaxError):
        parse("SELECT ?a WHERE { ?a <http://x.test/p> ?b . } LIMIT 0")


def test_round_trip_generated_queries():
    rng = random.Random(1234)
    for _ in range(50):
        q = random_query(rng)
        assert parse(to_text(q)) == q


def test_round_trip_reference_query():
    q = parse(A1_QUERY)
    assert parse(to_text(q)) == q


def test_execute_reference_query_on_fixture(biokg):
    result = execute(parse(A1_QUERY), biokg.store)
    assert result.columns == ("vt", "vl")
    assert result.rows == (
        (Term.iri(f"{B}drug/DB01392"), Term.iri(f"{B}kingdom/K_Organic")),
    )
    assert biokg.store.display(result.rows[0][1]) == "Organic"


def test_values_mismatch_yields_empty(biokg):
    text = A1_QUERY.replace("Yohimbine", "NoSuchDrug")
    assert execute(parse(text), biokg.store).rows == ()


def test_execute_matches_exhaustive_oracle():
    rng = random.Random(42)
    for _ in range(100):
        store = random_store(rng)
        query = random_query(rng)
        got = execute(query, store)
        expected = exhaustive_execute(query, store)
        assert got == expected


def test_monotone_under_triple_addition():
    rng = random.Random(7)
    for _ in range(25):
        store = random_store(rng, max_triples=30)
        query = random_query(rng)
        if query.limit is not None:
            continue
        before = set(execute(query, store).rows)
        extra = Triple(
            Term.iri("http://x.test/s0"),
            Term.iri("http://x.test/p0"),
            Term.iri("http://x.test/o0"),
        )
        grown = TripleStore(list(store.triples) + [extra])
        after = set(execute(query, grown).rows)
        assert before <= after


def test_limit_is_prefix_of_unlimited():
    rng = random.Random(8)
    for _ in range(25):
        store = random_store(rng)
        query = random_query(rng)
        if query.limit is None:
            continue
        unlimited = type(query)(
            prefixes=query.prefixes,
            projections=query.projections,
            values_clauses=query.values_clauses,
            patterns=query.patterns,
            limit=None,
        )
        full = execute(unlimited, store).rows
        limited = execute(query, store).rows
        assert limited == full[: query.limit]


# ---------------------------------------------------------------------------
# Remote endpoint client


def _client(handler):
    return httpx.Client(transport=httpx.MockTransport(handler))


def test_remote_single_binding():
    def handler(request: httpx.Request) -> httpx.Response:
        assert request.url.path == "/sparql"
        return httpx.Response(
            200,
            json={
                "head": {"vars": ["s", "name"]},
                "results": {
                    "bindings": [
                        {
                            "s": {"type": "uri", "value": f"{B}drug/DB01392"},
                            "name": {"type": "literal", "value": "Yohimbine"},
                        }
                    ]
                },
            },
        )

    result = execute_remote("SELECT ...", "http://kg.test/sparql", client=_client(handler))
    assert result.columns == ("s", "name")
    assert result.rows == ((Term.iri(f"{B}drug/DB01392"), Term.literal("Yohimbine")),)


def test_remote_empty_bindings():
    def handler(_):
        return httpx.Response(200, json={"head": {"vars": ["s"]}, "results": {"bindings": []}})

    result = execute_remote("q", "http://kg.test/sparql", client=_client(handler))
    assert result.rows == ()


def test_remote_server_error():
    def handler(_):
        return httpx.Response(500, text="boom")

    with pytest.raises(EndpointError) as err:
        execute_remote("q", "http://kg.test/sparql", client=_client(handler))
    assert err.value.status == 500
    assert "kg.test" in str(err.value)


def test_remote_malformed_json():
    def handler(_):
        return httpx.Response(200, text="not json")

    with pytest.raises(MalformedResultsError):
        execute_remote("q", "http://kg.test/sparql", client=_client(handler))


def test_remote_transport_error():
    def handler(_):
        raise httpx.ConnectError("refused")

    with pytest.raises(TransportError):
        execute_remote("q", "http://kg.test/sparql", client=_client(handler))


def test_remote_get_method():
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["query"] = request.url.params.get("query")
        return httpx.Response(200, json={"head": {"vars": []}, "results": {"bindings": []}})

    execute_remote("SELECT ?s", "http://kg.test/sparql", client=_client(handler), method="get")
    assert seen["query"] == "SELECT ?s"
