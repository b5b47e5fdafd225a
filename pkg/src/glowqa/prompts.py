"""Composition of the four answer-prompt variants.

Basic carries only the question and the candidate labels; G adds the
serialized context triples, N adds the GNN candidate list, GN adds the
top-1 GNN candidate plus the triples block.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import templates
from .errors import PromptBuildError
from .gnn import CandidateSet
from .linker import LinkedQuestion
from .llm import estimate_tokens
from .retriever import LabelSet, RetrievedContext, serialize_rc


class PromptVariant(str, Enum):
    BASIC = "basic"
    G = "g"
    N = "n"
    GN = "gn"

    @property
    def needs_rc(self) -> bool:
        return self in (PromptVariant.G, PromptVariant.GN)

    @property
    def needs_gnn(self) -> bool:
        return self in (PromptVariant.N, PromptVariant.GN)

    @property
    def degraded(self) -> "PromptVariant":
        """Variant to run when no GNN answer is available."""
        if self is PromptVariant.GN:
            return PromptVariant.G
        if self is PromptVariant.N:
            return PromptVariant.BASIC
        return self


@dataclass(frozen=True)
class PromptIngredients:
    question: str
    v_t_display: str
    e_path: tuple[str, ...]
    labels: tuple[str, ...]
    rc_text: str | None = None
    gnn_answers: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Prompt:
    system_text: str
    user_text: str
    variant: PromptVariant
    ingredients: PromptIngredients

    @property
    def estimated_tokens(self) -> int:
        return estimate_tokens(self.system_text) + estimate_tokens(self.user_text)


def build(
    variant: PromptVariant,
    question_text: str,
    linked: LinkedQuestion,
    labels: LabelSet,
    rc: RetrievedContext | None = None,
    gnn: CandidateSet | None = None,
    kg_description: str = "",
) -> Prompt:
    """Fill the variant's template; pure function of its inputs."""
    if variant.needs_rc and rc is None:
        raise PromptBuildError(f"variant {variant.value} requires a retrieved context")
    if variant.needs_gnn and (gnn is None or not gnn.candidates):
        raise PromptBuildError(f"variant {variant.value} requires GNN candidates")

    fields = {
        "label_type": labels.label_type,
        "entity_type": linked.entity_type,
        "entity": linked.v_t_display,
        "kg_details": kg_description or linked.kg_name,
        "labels": ",".join(labels.labels),
    }
    rc_text = serialize_rc(rc) if rc is not None and variant.needs_rc else None
    gnn_labels = tuple(c[0] for c in gnn.candidates) if gnn is not None else None

    if variant is PromptVariant.BASIC:
        user = templates.ANSWER_BASIC_USER.format(**fields)
    elif variant is PromptVariant.G:
        user = templates.ANSWER_G_USER.format(**fields, rc=rc_text)
    elif variant is PromptVariant.N:
        user = templates.ANSWER_N_USER.format(**fields, gnn_answers=",".join(gnn_labels))
    else:
        user = templates.ANSWER_GN_USER.format(**fields, gnn_top1=gnn_labels[0], rc=rc_text)

    return Prompt(
        system_text=templates.ANSWER_SYSTEM,
        user_text=user,
        variant=variant,
        ingredients=PromptIngredients(
            question=question_text,
            v_t_display=linked.v_t_display,
            e_path=linked.e_path,
            labels=labels.labels,
            rc_text=rc_text,
            gnn_answers=gnn_labels if variant.needs_gnn else None,
        ),
    )
