"""HTTP inference API over a registry of trained models.

Wire contract:
  POST /predict {"kg", "entity_type", "edge_path": [...], "node", "k"}
      -> {"candidates": [{"label", "log_likelihood"}, ...]}  (log-softmax,
         sorted strictly descending, labels breaking ties, at most k)
  GET  /models -> [{"kg", "entity_type", "edge_path"}, ...]

Unknown model keys answer 404 with a model-not-found payload; malformed
requests answer 400 with a reason.
"""

from __future__ import annotations

from pathlib import Path

import torch
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .model import ModelBundle, load_bundle, node_log_probs


class ServedModel:
    """Precomputed log-probabilities for every node of a bundle's graph."""

    def __init__(self, bundle: ModelBundle):
        self.kg = bundle.kg
        self.entity_type = bundle.entity_type
        self.edge_path = bundle.edge_path
        self.classes = bundle.classes
        self.graph = bundle.graph
        self.log_probs = node_log_probs(bundle.model, bundle.graph)

    @property
    def canonical_key(self) -> str:
        return f"{self.kg}:{self.entity_type}:{'/'.join(self.edge_path)}"

    def top_k(self, node_index: int, k: int) -> list[tuple[str, float]]:
        row = self.log_probs[node_index]
        pairs = sorted(
            ((label, row[i].item()) for i, label in enumerate(self.classes)),
            key=lambda p: (-p[1], p[0]),
        )
        return pairs[:k]


def load_registry(models_dir: str | Path) -> dict[str, ServedModel]:
    registry: dict[str, ServedModel] = {}
    for path in sorted(Path(models_dir).glob("*.pt")):
        served = ServedModel(load_bundle(path))
        registry[served.canonical_key] = served
    return registry


class PredictRequest(BaseModel):
    kg: str
    entity_type: str
    edge_path: list[str] = Field(min_length=1)
    node: str
    k: int = Field(ge=1)


def create_app(registry: dict[str, ServedModel]) -> FastAPI:
    app = FastAPI(title="gnn-service", version="0.1.0")

    @app.exception_handler(RequestValidationError)
    async def invalid_request(_: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"error": str(exc.errors()[:3])})

    @app.get("/models")
    def models() -> list[dict]:
        return [
            {
                "kg": served.kg,
                "entity_type": served.entity_type,
                "edge_path": list(served.edge_path),
            }
            for _, served in sorted(registry.items())
        ]

    @app.post("/predict")
    def predict(req: PredictRequest):
        key = f"{req.kg.lower()}:{req.entity_type.lower()}:{'/'.join(p.lower() for p in req.edge_path)}"
        served = registry.get(key)
        if served is None:
            return JSONResponse(
                status_code=404, content={"error": "model-not-found", "key": key}
            )
        node_index = served.graph.node_by_ref(req.node)
        if node_index is None:
            return JSONResponse(
                status_code=400, content={"error": f"unknown node {req.node!r}"}
            )
        candidates = served.top_k(node_index, req.k)
        return {
            "candidates": [
                {"label": label, "log_likelihood": ll} for label, ll in candidates
            ]
        }

    return app


def serve(registry: dict[str, ServedModel], host: str = "127.0.0.1", port: int = 8601) -> None:
    import uvicorn

    uvicorn.run(create_app(registry), host=host, port=port, log_level="info")
