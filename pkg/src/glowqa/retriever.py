"""Candidate labels and gold-excluded context for a linked question.

The retrieved context (RC) is the 1-hop in/out neighborhood of the target
node (plus, for two-hop questions, the neighborhoods of the intermediates
reached by the first hop), with every answer-path triple removed so the
open-world task stays open. Name and typing triples are dropped as well:
their content is already folded into display strings and the question line.
"""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass

from . import templates
from .errors import SparqlSyntaxError, UnanswerableTemplateError
from .kgstore import KGSchema, TripleStore, Triple, local_name, neighbors, schema_to_csv
from .linker import LinkedQuestion
from .llm import LlmSession
from .sparql import (
    PatternTerm,
    Projection,
    SparqlQuery,
    TriplePattern,
    ValuesClause,
    parse,
)

log = logging.getLogger(__name__)

DEFAULT_CAPS = {"g": 100, "gn": 50}


@dataclass(frozen=True)
class LabelSet:
    label_type: str
    labels: tuple[str, ...]


@dataclass(frozen=True)
class RetrievedContext:
    triples: tuple[tuple[str, str, str], ...]
    truncated: bool
    source_hops: int


def get_labels(linked: LinkedQuestion, store: TripleStore) -> LabelSet:
    """Distinct display strings of the answer edge's objects.

    Ordered by frequency (descending), then lexicographically. Subjects are
    restricted to the answer BGP's subject type so predicates reused across
    entity types do not leak foreign labels.
    """
    final_pred = linked.e_path[-1]
    subject_type = linked.label_bgp.subject_type
    counts: Counter[str] = Counter()
    for t in store.by_predicate(final_pred):
        if subject_type not in store.types(t.subject.value):
            continue
        counts[store.display(t.object)] += 1
    if not counts:
        raise UnanswerableTemplateError(
            f"no labels for predicate {final_pred!r} over {subject_type!r} subjects"
        )
    ordered = sorted(counts, key=lambda label: (-counts[label], label))
    return LabelSet(label_type=linked.label_type, labels=tuple(ordered))


def _focus_nodes(linked: LinkedQuestion, store: TripleStore) -> tuple[str, list[str]]:
    v_t = linked.v_t
    intermediates: list[str] = []
    if len(linked.e_path) == 2:
        for t in store.by_subject(v_t):
            if t.predicate.value == linked.e_path[0] and t.object.is_iri:
                intermediates.append(t.object.value)
    return v_t, sorted(set(intermediates))


def split_context(
    linked: LinkedQuestion, store: TripleStore
) -> tuple[list[Triple], list[Triple]]:
    """Partition the full neighbor set into (kept, excluded) raw triples.

    kept plus excluded is exactly the deduplicated union of the focus
    nodes' neighborhoods; excluded holds answer-path, typing and name
    triples.
    """
    v_t, intermediates = _focus_nodes(linked, store)
    focus = {v_t, *intermediates}

    candidates: list[Triple] = []
    seen: set[Triple] = set()
    for node in [v_t, *intermediates]:
        for t in neighbors(store, node, "both"):
            if t not in seen:
                seen.add(t)
                candidates.append(t)

    kept: list[Triple] = []
    excluded: list[Triple] = []
    path = set(linked.e_path)
    for t in candidates:
        pred = t.predicate.value
        on_path = pred in path and (
            t.subject.value in focus or (t.object.is_iri and t.object.value in focus)
        )
        if on_path or store.is_typing_predicate(pred) or store.is_name_predicate(pred):
            excluded.append(t)
        else:
            kept.append(t)
    return kept, excluded


def get_context(linked: LinkedQuestion, store: TripleStore, cap: int) -> RetrievedContext:
    """Gold-excluded neighbor triples, truncated to `cap`.

    Literal-attribute triples survive truncation before relation triples.
    """
    kept, _ = split_context(linked, store)
    literals = [t for t in kept if not t.object.is_iri]
    relations = [t for t in kept if t.object.is_iri]
    ordered = literals + relations
    truncated = len(ordered) > cap
    display = tuple(
        (store.display(t.subject), local_name(t.predicate.value), store.display(t.object))
        for t in ordered[:cap]
    )
    return RetrievedContext(
        triples=display, truncated=truncated, source_hops=len(linked.e_path)
    )


def serialize_rc(rc: RetrievedContext) -> str:
    """Tuple-list text form, e.g. `[("Yohimbine","DDI","DB13677")]`."""
    body = ", ".join(
        f"({json.dumps(s)},{json.dumps(p)},{json.dumps(o)})" for s, p, o in rc.triples
    )
    return f"[{body}]"


_VAR_SAFE = re.compile(r"[^a-z0-9_]")


def _var_name(type_name: str, taken: set[str]) -> str:
    base = _VAR_SAFE.sub("_", type_name.lower()) or "v"
    if base[0].isdigit():
        base = f"v{base}"
    name = base
    suffix = 1
    while name in taken:
        suffix += 1
        name = f"{base}{suffix}"
    taken.add(name)
    return name


def _best_name_predicate(store: TripleStore) -> str:
    preds = [p for p in store.predicates() if store.is_name_predicate(p)]
    rank = {"name": 0, "label": 1, "title": 2}
    preds.sort(key=lambda p: (rank[local_name(p).lower()], p))
    if not preds:
        raise UnanswerableTemplateError("store has no name/label/title predicate")
    return preds[0]


def fallback_query(linked: LinkedQuestion, schema: KGSchema, store: TripleStore) -> SparqlQuery:
    """Deterministic template: a VALUES-bound name pattern plus one pattern
    per answer-path predicate, chaining an intermediate variable for 2-hop."""
    taken: set[str] = {"name", "vt", "vl"}
    entity_var = _var_name(linked.entity_type, taken)
    hop_types = [local_name(p) for p in linked.e_path[:-1]] + [linked.label_type]
    hop_vars = [_var_name(t, taken) for t in hop_types]

    patterns = [
        TriplePattern(
            PatternTerm("var", entity_var),
            PatternTerm("iri", _best_name_predicate(store)),
            PatternTerm("var", "name"),
        )
    ]
    subject = entity_var
    for pred_iri, hop_var in zip(linked.e_path, hop_vars):
        patterns.append(
            TriplePattern(
                PatternTerm("var", subject),
                PatternTerm("iri", pred_iri),
                PatternTerm("var", hop_var),
            )
        )
        subject = hop_var

    prefix_name = _VAR_SAFE.sub("", linked.kg_name.lower()) or "kg"
    return SparqlQuery(
        prefixes=((prefix_name, schema.prefix),) if schema.prefix else (),
        projections=(
            Projection(entity_var, "vt"),
            Projection(hop_vars[-1], "vl"),
        ),
        values_clauses=(ValuesClause("name", (store.display_iri(linked.v_t),)),),
        patterns=tuple(patterns),
    )


def text_to_sparql(
    linked: LinkedQuestion,
    schema: KGSchema,
    store: TripleStore,
    llm: LlmSession | None,
) -> SparqlQuery:
    """Ask the LLM for the context query; fall back to the deterministic
    template whenever the response does not parse under the subset grammar."""
    fallback = fallback_query(linked, schema, store)
    if llm is None:
        return fallback

    bgp_lines = []
    number = 2
    seen_preds: set[str] = set()
    for pred_iri in linked.e_path:
        pred = local_name(pred_iri)
        if pred in seen_preds:
            continue
        seen_preds.add(pred)
        for row in schema.bgps:
            if row.predicate.lower() == pred.lower():
                bgp_lines.append(f"{number}-  {row.subject_type}, {row.predicate}, {row.object_type}")
                number += 1
                break
    user = templates.TEXT_TO_SPARQL_USER.format(
        schema_csv=schema_to_csv(schema),
        main_entity_type=linked.entity_type,
        question_node_type=linked.entity_type,
        question_node=store.display_iri(linked.v_t),
        other_bgps="\n".join(bgp_lines),
        kg_prefix=schema.prefix,
    )
    resp = llm.ask(templates.TEXT_TO_SPARQL_SYSTEM, user)
    try:
        return parse(resp.text)
    except SparqlSyntaxError as exc:
        log.info("generated query rejected (%s); using the template fallback", exc)
        return fallback
