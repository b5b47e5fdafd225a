"""FastAPI wrapper around the engine.

The service owns the loaded KGs and gateways; the CLI is a thin client of
these endpoints.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import bench
from ..errors import (
    AggregationError,
    ConfigError,
    EntityNotFoundError,
    GlowError,
    SuiteBuildError,
)
from ..judge import judge_batch
from ..kgstore import schema_to_csv
from ..pipeline import Engine, answer_question
from ..prompts import PromptVariant
from . import models

_STATUS_BY_ERROR = {
    EntityNotFoundError: 404,
    ConfigError: 400,
    SuiteBuildError: 400,
    AggregationError: 400,
}


def _variant(value: str) -> PromptVariant:
    try:
        return PromptVariant(value.lower())
    except ValueError as exc:
        raise ConfigError(f"unknown variant {value!r}; expected basic|g|n|gn") from exc


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="glowqa", version="0.1.0")
    app.state.engine = engine

    @app.exception_handler(GlowError)
    async def glow_error_handler(_: Request, exc: GlowError) -> JSONResponse:
        status = next(
            (code for cls, code in _STATUS_BY_ERROR.items() if isinstance(exc, cls)), 422
        )
        payload = models.ErrorResponse(error=type(exc).__name__, detail=str(exc))
        return JSONResponse(status_code=status, content=payload.model_dump())

    @app.get("/health", response_model=models.HealthResponse)
    def health() -> models.HealthResponse:
        return models.HealthResponse(status="ok", kgs=sorted(engine.kgs))

    @app.get("/kgs", response_model=list[str])
    def kgs() -> list[str]:
        return sorted(engine.kgs)

    @app.get("/kgs/{name}/schema", response_model=models.SchemaResponse)
    def kg_schema(name: str) -> models.SchemaResponse:
        kg = engine.kg(name)
        return models.SchemaResponse(kg=kg.name, prefix=kg.prefix, csv=schema_to_csv(kg.schema))

    @app.post("/ask", response_model=models.AskResponse)
    def ask(req: models.AskRequest) -> models.AskResponse:
        outcome = answer_question(
            engine,
            req.question,
            variant=_variant(req.variant),
            kg_name=req.kg,
            top_k=req.top_k,
        )
        rows = outcome.sparql_result
        return models.AskResponse(
            prediction=outcome.prediction,
            variant=outcome.requested_variant.value,
            effective_variant=outcome.effective_variant.value,
            degraded=outcome.degraded,
            kg=outcome.kg_name,
            v_t=outcome.linked.v_t,
            v_t_display=outcome.linked.v_t_display,
            entity_type=outcome.linked.entity_type,
            e_path=list(outcome.linked.e_path),
            label_type=outcome.labels.label_type,
            labels=list(outcome.labels.labels),
            gnn_candidates=list(outcome.gnn.candidates) if outcome.gnn else None,
            rc_triples=list(outcome.rc.triples) if outcome.rc else None,
            rc_truncated=outcome.rc.truncated if outcome.rc else None,
            sparql_query=outcome.sparql_text,
            sparql_columns=list(rows.columns) if rows else [],
            sparql_rows=[[t.value for t in row] for row in rows.rows] if rows else [],
            prompt_user_text=outcome.prompt.user_text,
            prompt_tokens=outcome.response.prompt_tokens,
            completion_tokens=outcome.response.completion_tokens,
            latency=outcome.response.latency,
        )

    @app.post("/judge", response_model=models.JudgeResponse)
    def judge(req: models.JudgeRequest) -> models.JudgeResponse:
        verdicts = judge_batch([tuple(p) for p in req.pairs], engine.judge_llm)
        return models.JudgeResponse(verdicts=[v.as_pair() for v in verdicts])

    @app.post("/suite/build", response_model=models.SuiteBuildResponse)
    def suite_build(req: models.SuiteBuildRequest) -> models.SuiteBuildResponse:
        kg = engine.kg(req.kg)
        template = bench.SuiteTemplate.from_dict(req.template.model_dump())
        records = bench.build_suite(
            kg.store,
            template,
            req.n,
            req.mcc_bucket,
            req.seed,
            kg_name=kg.name,
            schema=kg.schema,
        )
        return models.SuiteBuildResponse(records=[r.to_dict() for r in records])

    @app.post("/bench/run", response_model=models.BenchRunResponse)
    def bench_run(req: models.BenchRunRequest) -> models.BenchRunResponse:
        records = [bench.BenchmarkRecord.from_dict(r) for r in req.records]
        variant = _variant(req.variant)
        runs: list[dict] = []
        reports = []
        base_seed = engine.llm.seed if engine.llm else None
        for run_index in range(req.runs):
            # Multi-run averaging samples each run under its own seed.
            if req.runs > 1 and engine.llm is not None:
                engine.llm.seed = (base_seed or 0) + run_index
            results = bench.run_suite(records, variant, engine, judge=req.judge)
            report = bench.aggregate(results, records)
            reports.append(report)
            runs.append(
                {
                    "results": [r.to_dict() for r in results],
                    "report": report.to_dict(),
                }
            )
        if engine.llm is not None:
            engine.llm.seed = base_seed
        mean = bench.mean_report(reports) if req.runs > 1 else None
        return models.BenchRunResponse(runs=runs, mean=mean)

    return app


def create_app_from_config(config_path: str | Path) -> FastAPI:
    from ..config import engine_from_file

    return create_app(engine_from_file(config_path))
