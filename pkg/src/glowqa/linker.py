"""Question understanding and entity/relation linking against a KG schema.

Two LLM rounds ground a natural-language question: understanding extracts
the entity/type/label/KG fields, and linking maps them onto schema BGPs and
a concrete target node. The target node itself is resolved with a SPARQL
query over the store's name/label fields.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from . import templates
from .errors import EntityNotFoundError, LinkingError, UnderstandingError
from .kgstore import BGP, KGSchema, TripleStore, local_name, schema_to_csv
from .llm import LlmSession
from .sparql import (
    PatternTerm,
    Projection,
    SparqlQuery,
    TriplePattern,
    ValuesClause,
    execute,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuestionParse:
    entity_type_text: str
    entity_text: str
    label_text: str
    kg_name: str
    hop_label_texts: tuple[str, ...]


@dataclass(frozen=True)
class LinkedQuestion:
    v_t: str
    entity_type: str
    e_path: tuple[str, ...]  # predicate IRIs, question order
    label_type: str
    label_bgp: BGP
    kg_name: str = ""
    v_t_display: str = ""
    ambiguous: bool = False

    @property
    def hops(self) -> int:
        return len(self.e_path)


_NUMBERED_FIELD = re.compile(r"([1-9])\s*-\s*")
_FIELD_LABELS = re.compile(
    r"^(?:question\s+main\s+entity(?:\s+type)?|main\s+entity|prediction\s+label|kg\s+name)\s*:\s*",
    re.IGNORECASE,
)
_TRIM_CHARS = " \t\n\r.,;:!`'\"*"


def _numbered_fields(text: str) -> dict[int, str]:
    """Split a `1- ... 2- ...` response into number-keyed values."""
    matches = list(_NUMBERED_FIELD.finditer(text))
    fields: dict[int, str] = {}
    for i, m in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(text)
        value = text[m.end() : end]
        value = _FIELD_LABELS.sub("", value.strip())
        value = value.strip(_TRIM_CHARS)
        number = int(m.group(1))
        if number not in fields and value:
            fields[number] = value
    return fields


def parse_question(question_text: str, llm: LlmSession) -> QuestionParse:
    """Extract entity type, entity, prediction label and KG name.

    Retries once when any numbered field is missing, then raises
    :class:`UnderstandingError`.
    """
    user = templates.QUESTION_UNDERSTANDING_USER.format(question=question_text)
    last_fields: dict[int, str] = {}
    for _ in range(2):
        resp = llm.ask(templates.QUESTION_UNDERSTANDING_SYSTEM, user)
        fields = _numbered_fields(resp.text)
        if all(n in fields for n in (1, 2, 3, 4)):
            hops = tuple(h.strip() for h in fields[3].split("->") if h.strip())
            if not 1 <= len(hops) <= 2:
                raise UnderstandingError(
                    f"prediction label describes {len(hops)} hops, expected 1 or 2: {fields[3]!r}"
                )
            return QuestionParse(
                entity_type_text=fields[1],
                entity_text=fields[2],
                label_text=fields[3],
                kg_name=fields[4],
                hop_label_texts=hops,
            )
        last_fields = fields
    missing = sorted(set((1, 2, 3, 4)) - set(last_fields))
    raise UnderstandingError(f"understanding response missing fields {missing}")


def _normalize_bgp_text(text: str) -> tuple[str, str, str] | None:
    cleaned = text.strip().strip("`\"'")
    cleaned = cleaned.strip()
    if cleaned.startswith("(") and cleaned.endswith(")"):
        cleaned = cleaned[1:-1]
    parts = [p.strip().strip("`\"'") for p in cleaned.split(",")]
    if len(parts) != 3 or not all(parts):
        return None
    return (parts[0], parts[1], parts[2])


def match_bgp(text: str, schema: KGSchema) -> BGP | None:
    """Find the schema row a (possibly noisy) LLM-returned BGP refers to.

    Matching is case-insensitive; predicates given as full IRIs are matched
    by their local name.
    """
    parts = _normalize_bgp_text(text)
    if parts is None:
        return None
    stype, pred, otype = parts
    if "/" in pred or "#" in pred:
        pred = local_name(pred)
    for row in schema.bgps:
        if (
            row.subject_type.lower() == stype.lower()
            and row.predicate.lower() == pred.lower()
            and row.object_type.lower() == otype.lower()
        ):
            return row
    return None


def _match_type(text: str, schema: KGSchema) -> str | None:
    cleaned = text.strip(_TRIM_CHARS)
    for t in schema.types():
        if t.lower() == cleaned.lower():
            return t
    return None


def resolve_entity(entity_text: str, store: TripleStore) -> tuple[str, bool]:
    """Resolve an entity name to a node IRI via a query over name fields.

    Returns (iri, ambiguous). Exact-literal matching runs first as a SPARQL
    query per name predicate; a case-insensitive index lookup is the
    fallback. Ties break to the lexicographically smallest IRI.
    """
    matches: set[str] = set()
    name_preds = sorted(
        p for p in store.predicates() if local_name(p).lower() in ("name", "label", "title")
    )
    for pred in name_preds:
        query = SparqlQuery(
            prefixes=(),
            projections=(Projection("e"),),
            values_clauses=(ValuesClause("n", (entity_text,)),),
            patterns=(
                TriplePattern(
                    PatternTerm("var", "e"), PatternTerm("iri", pred), PatternTerm("var", "n")
                ),
            ),
        )
        matches.update(row[0].value for row in execute(query, store).rows)
    if not matches:
        matches = set(store.nodes_by_name(entity_text))
    if not matches:
        raise EntityNotFoundError(f"no node named {entity_text!r} in the store")
    ordered = sorted(matches)
    return ordered[0], len(ordered) > 1


def _linking_round(
    schema_csv: str,
    entity_text: str,
    entity_type_text: str,
    label_text: str,
    schema: KGSchema,
    llm: LlmSession,
) -> tuple[str | None, BGP]:
    """One linking prompt; returns (declared node type, answer-edge BGP)."""
    user = templates.LINKING_USER.format(
        schema_csv=schema_csv,
        main_entity=entity_text,
        main_entity_type=entity_type_text,
        prediction_label=label_text,
    )
    fields: dict[int, str] = {}
    for _ in range(2):
        resp = llm.ask(templates.LINKING_SYSTEM, user)
        fields = _numbered_fields(resp.text)
        if 3 in fields:
            break
    if 3 not in fields:
        raise LinkingError("linking response has no numbered BGP answer")
    bgp = match_bgp(fields[3], schema)
    if bgp is None:
        raise LinkingError(f"returned BGP not in schema: {fields[3]!r}")
    # Answer 2 nominally describes the entity's name/label edge. When it
    # names some other edge that disagrees with answer 3, answer 3 wins and
    # the disagreement only gets recorded.
    entity_bgp = match_bgp(fields.get(2, ""), schema)
    if (
        entity_bgp is not None
        and entity_bgp != bgp
        and entity_bgp.predicate.lower() not in ("name", "label", "title")
    ):
        log.info("linking answers 2 and 3 disagree: %s vs %s; keeping 3", entity_bgp, bgp)
    node_type = _match_type(fields.get(1, ""), schema)
    return node_type, bgp


def link(
    parse: QuestionParse, schema: KGSchema, store: TripleStore, llm: LlmSession
) -> LinkedQuestion:
    """Ground a parsed question: schema types, predicate IRIs, target node.

    Two-hop questions run a second linking round from the intermediate type
    reached by the first hop.
    """
    if not schema.bgps:
        raise LinkingError("schema is empty")
    csv = schema_to_csv(schema)

    e_path: list[str] = []
    entity_type: str | None = None
    current_type_text = parse.entity_type_text
    bgp: BGP | None = None
    for hop_index, hop_text in enumerate(parse.hop_label_texts):
        node_type, bgp = _linking_round(
            csv, parse.entity_text, current_type_text, hop_text, schema, llm
        )
        if hop_index == 0:
            entity_type = node_type or bgp.subject_type
        iri = schema.predicate_iri(bgp.predicate)
        if iri is None:
            raise LinkingError(f"predicate {bgp.predicate!r} has no IRI in the store")
        e_path.append(iri)
        current_type_text = bgp.object_type

    v_t, ambiguous = resolve_entity(parse.entity_text, store)
    assert entity_type is not None and bgp is not None
    return LinkedQuestion(
        v_t=v_t,
        entity_type=entity_type,
        e_path=tuple(e_path),
        label_type=bgp.object_type,
        label_bgp=bgp,
        kg_name=parse.kg_name,
        v_t_display=store.display_iri(v_t),
        ambiguous=ambiguous,
    )
