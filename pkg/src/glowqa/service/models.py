"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    kgs: list[str]


class SchemaResponse(BaseModel):
    kg: str
    prefix: str
    csv: str


class AskRequest(BaseModel):
    question: str
    kg: str | None = None
    variant: str = "gn"
    top_k: int | None = Field(default=None, ge=1)


class SparqlRow(BaseModel):
    values: list[str]


class AskResponse(BaseModel):
    prediction: str
    variant: str
    effective_variant: str
    degraded: bool
    kg: str
    v_t: str
    v_t_display: str
    entity_type: str
    e_path: list[str]
    label_type: str
    labels: list[str]
    gnn_candidates: list[tuple[str, float]] | None = None
    rc_triples: list[tuple[str, str, str]] | None = None
    rc_truncated: bool | None = None
    sparql_query: str
    sparql_columns: list[str]
    sparql_rows: list[list[str]]
    prompt_user_text: str
    prompt_tokens: int
    completion_tokens: int
    latency: float


class JudgeRequest(BaseModel):
    pairs: list[tuple[str, str]]


class JudgeResponse(BaseModel):
    verdicts: list[tuple[int, int]]


class TemplateModel(BaseModel):
    template_id: str
    entity_type: str
    edge_path: list[str]
    label_type: str
    question_template: str
    domain_tag: str = "G"


class SuiteBuildRequest(BaseModel):
    kg: str
    template: TemplateModel
    n: int = Field(ge=0)
    mcc_bucket: str
    seed: int = 0


class SuiteBuildResponse(BaseModel):
    records: list[dict]


class BenchRunRequest(BaseModel):
    records: list[dict]
    variant: str = "gn"
    runs: int = Field(default=1, ge=1)
    judge: bool = True


class BenchRunResponse(BaseModel):
    runs: list[dict]  # [{"results": [...], "report": {...}}]
    mean: dict | None = None


class ErrorResponse(BaseModel):
    error: str
    detail: str
