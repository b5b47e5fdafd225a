"""End-to-end question answering over loaded knowledge graphs.

The engine bundles the loaded KGs with the answering LLM, the judge LLM and
the GNN client, and runs the full flow: understand, link, translate to the
context query, retrieve labels and context, fetch GNN candidates, compose
the prompt, and generate. When no GNN answer is available the variant
degrades (GN to G, N to Basic) and the outcome is flagged.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import ConfigError, EndpointError, ModelNotFoundError, TransportError
from .gnn import CandidateSet, GnnClient, ModelKey
from .kgstore import KGSchema, TripleStore, local_name
from .linker import LinkedQuestion, QuestionParse, link, parse_question
from .llm import ChatResponse, LlmSession
from .prompts import Prompt, PromptVariant, build
from .retriever import (
    DEFAULT_CAPS,
    LabelSet,
    RetrievedContext,
    get_context,
    get_labels,
    text_to_sparql,
)
from .sparql import ResultSet, execute, to_text

log = logging.getLogger(__name__)


@dataclass
class KnowledgeGraph:
    name: str
    store: TripleStore
    schema: KGSchema
    description: str = ""

    @property
    def prefix(self) -> str:
        return self.schema.prefix


@dataclass
class Engine:
    kgs: dict[str, KnowledgeGraph]
    llm: LlmSession | None = None
    judge_llm: LlmSession | None = None
    gnn: GnnClient | None = None
    caps: dict[str, int] = field(default_factory=lambda: dict(DEFAULT_CAPS))
    top_k: int = 3
    concurrency: int = 4

    def kg(self, name: str) -> KnowledgeGraph:
        for kg_name, kg in self.kgs.items():
            if kg_name.lower() == name.lower():
                return kg
        raise ConfigError(f"unknown knowledge graph {name!r}; loaded: {sorted(self.kgs)}")

    def require_llm(self) -> LlmSession:
        if self.llm is None:
            raise ConfigError("no answering LLM configured")
        return self.llm

    def gnn_candidates(
        self, kg: KnowledgeGraph, linked: LinkedQuestion, top_k: int | None = None
    ) -> tuple[CandidateSet | None, bool]:
        """Top-k candidates, or (None, True) when the pipeline must degrade."""
        if self.gnn is None:
            return None, True
        key = ModelKey.make(
            kg.name, linked.entity_type, tuple(local_name(p) for p in linked.e_path)
        )
        try:
            candidates = self.gnn.predict(key, linked.v_t, top_k or self.top_k)
        except (ModelNotFoundError, TransportError, EndpointError) as exc:
            log.warning("no GNN answer for %s (%s); degrading variant", key.canonical(), exc)
            return None, True
        if not candidates.candidates:
            return None, True
        return candidates, False


@dataclass
class AskOutcome:
    prediction: str
    requested_variant: PromptVariant
    effective_variant: PromptVariant
    degraded: bool
    kg_name: str
    linked: LinkedQuestion
    labels: LabelSet
    prompt: Prompt
    response: ChatResponse
    rc: RetrievedContext | None = None
    gnn: CandidateSet | None = None
    sparql_text: str = ""
    sparql_result: ResultSet | None = None


def answer_question(
    engine: Engine,
    question_text: str,
    variant: PromptVariant = PromptVariant.GN,
    kg_name: str | None = None,
    top_k: int | None = None,
) -> AskOutcome:
    """Run the full four-stage flow for one free-form question."""
    llm = engine.require_llm()
    parse = parse_question(question_text, llm)
    kg = engine.kg(kg_name or parse.kg_name)
    linked = link(parse, kg.schema, kg.store, llm)

    query = text_to_sparql(linked, kg.schema, kg.store, llm)
    rows = execute(query, kg.store)

    labels = get_labels(linked, kg.store)
    rc = None
    if variant.needs_rc:
        rc = get_context(linked, kg.store, engine.caps.get(variant.value, 100))

    candidates: CandidateSet | None = None
    degraded = False
    if variant.needs_gnn:
        candidates, degraded = engine.gnn_candidates(kg, linked, top_k)
    effective = variant.degraded if degraded else variant

    prompt = build(
        effective,
        question_text,
        linked,
        labels,
        rc=rc if effective.needs_rc else None,
        gnn=candidates,
        kg_description=kg.description,
    )
    response = llm.ask(prompt.system_text, prompt.user_text)
    return AskOutcome(
        prediction=response.text.strip(),
        requested_variant=variant,
        effective_variant=effective,
        degraded=degraded,
        kg_name=kg.name,
        linked=linked,
        labels=labels,
        prompt=prompt,
        response=response,
        rc=rc,
        gnn=candidates,
        sparql_text=to_text(query),
        sparql_result=rows,
    )


def parse_for_record(
    entity_type: str, entity_name: str, edge_path: tuple[str, ...], kg_name: str
) -> QuestionParse:
    """Benchmark records already carry the parse; skip the understanding call."""
    return QuestionParse(
        entity_type_text=entity_type,
        entity_text=entity_name,
        label_text="->".join(edge_path),
        kg_name=kg_name,
        hop_label_texts=tuple(edge_path),
    )
