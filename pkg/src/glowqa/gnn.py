"""Client for the GNN node-classification inference API.

Wire contract (normative for any conforming service):
  POST /predict {"kg": ..., "entity_type": ..., "edge_path": [...], "node": ..., "k": n}
      -> {"candidates": [{"label": ..., "log_likelihood": ...}, ...]}
  GET  /models -> [{"kg": ..., "entity_type": ..., "edge_path": [...]}, ...]

Candidates are log-softmax scores sorted strictly descending (labels break
ties lexicographically); the client rejects responses that violate this.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import httpx

from .errors import EndpointError, ModelNotFoundError, TransportError


@dataclass(frozen=True)
class ModelKey:
    kg_name: str
    entity_type: str
    edge_path: tuple[str, ...]

    @staticmethod
    def make(kg_name: str, entity_type: str, edge_path: tuple[str, ...] | list[str]) -> "ModelKey":
        if not kg_name or not entity_type or not edge_path or not all(edge_path):
            raise ValueError("model key components must be non-empty")
        return ModelKey(
            kg_name=kg_name.lower(),
            entity_type=entity_type.lower(),
            edge_path=tuple(p.lower() for p in edge_path),
        )

    def canonical(self) -> str:
        return f"{self.kg_name}:{self.entity_type}:{'/'.join(self.edge_path)}"


@dataclass(frozen=True)
class CandidateSet:
    candidates: tuple[tuple[str, float], ...]  # (label, log_likelihood), best first
    k: int

    def __post_init__(self):
        if len(self.candidates) > self.k:
            raise ValueError(f"{len(self.candidates)} candidates exceed k={self.k}")
        for (l1, v1), (l2, v2) in zip(self.candidates, self.candidates[1:]):
            if not (v1 > v2 or (v1 == v2 and l1 < l2)):
                raise ValueError(
                    f"candidates not strictly sorted: ({l1},{v1}) before ({l2},{v2})"
                )

    @property
    def top1(self) -> str | None:
        return self.candidates[0][0] if self.candidates else None


class GnnClient:
    """Stateless HTTP client; safe for concurrent use over a shared pool."""

    def __init__(
        self,
        endpoint: str,
        client: httpx.Client | None = None,
        timeout: float = 30.0,
        attempts: int = 3,
        backoff_base: float = 0.1,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.attempts = attempts
        self.backoff_base = backoff_base
        self._client = client or httpx.Client(timeout=timeout)

    def _request(self, method: str, path: str, json_body: dict | None = None) -> httpx.Response:
        url = f"{self.endpoint}{path}"
        last_error: Exception | None = None
        for attempt in range(self.attempts):
            if attempt:
                time.sleep(self.backoff_base * (2 ** (attempt - 1)))
            try:
                return self._client.request(method, url, json=json_body)
            except httpx.HTTPError as exc:
                last_error = exc
        raise TransportError(f"GNN endpoint unreachable after {self.attempts} attempts: {last_error}")

    def predict(self, key: ModelKey, node_id: str, k: int) -> CandidateSet:
        if k < 1:
            raise ValueError("k must be >= 1")
        body = {
            "kg": key.kg_name,
            "entity_type": key.entity_type,
            "edge_path": list(key.edge_path),
            "node": node_id,
            "k": k,
        }
        resp = self._request("POST", "/predict", body)
        if resp.status_code == 404:
            raise ModelNotFoundError(f"no model for {key.canonical()}")
        if resp.status_code != 200:
            raise EndpointError(
                f"predict returned {resp.status_code}", self.endpoint, resp.status_code
            )
        payload = resp.json()
        raw = payload.get("candidates")
        if not isinstance(raw, list):
            raise EndpointError("predict payload missing candidates", self.endpoint)
        pairs = tuple((str(c["label"]), float(c["log_likelihood"])) for c in raw)
        try:
            return CandidateSet(candidates=pairs, k=k)
        except ValueError as exc:
            raise EndpointError(f"invalid candidate list: {exc}", self.endpoint) from exc

    def list_models(self) -> list[ModelKey]:
        resp = self._request("GET", "/models")
        if resp.status_code != 200:
            raise EndpointError(
                f"models returned {resp.status_code}", self.endpoint, resp.status_code
            )
        return [
            ModelKey.make(m["kg"], m["entity_type"], tuple(m["edge_path"]))
            for m in resp.json()
        ]
