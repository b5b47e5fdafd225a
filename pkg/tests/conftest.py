from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from glowqa.config import load_config, load_kg
from glowqa.llm import LlmSession, MockChatGateway
from glowqa.pipeline import Engine

from helpers import stub_gnn_client

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def kgs():
    """Loaded fixture KGs, shared session-wide (stores are immutable)."""
    config = load_config(FIXTURES / "config.yaml")
    return {cfg.name: load_kg(cfg, config.base_dir) for cfg in config.kgs}


@pytest.fixture(scope="session")
def biokg(kgs):
    return kgs["biokg"]


@pytest.fixture(scope="session")
def lmdb(kgs):
    return kgs["lmdb"]


@pytest.fixture
def suite_llm() -> LlmSession:
    """Scripted answering LLM covering the ask flow and both suites."""
    return LlmSession(MockChatGateway.from_file(FIXTURES / "transcripts" / "llm.json"))


@pytest.fixture
def judge_llm() -> LlmSession:
    """Judge mock whose output never parses, forcing the exact-match fallback."""
    return LlmSession(MockChatGateway.from_file(FIXTURES / "transcripts" / "judge.json"))


@pytest.fixture
def engine(kgs, suite_llm, judge_llm) -> Engine:
    """Offline engine: mock LLMs, scripted GNN stub."""
    return Engine(
        kgs=dict(kgs),
        llm=suite_llm,
        judge_llm=judge_llm,
        gnn=stub_gnn_client(),
        caps={"g": 100, "gn": 50},
        top_k=3,
        concurrency=4,
    )


@pytest.fixture
def engine_no_gnn(kgs, suite_llm, judge_llm) -> Engine:
    return Engine(
        kgs=dict(kgs),
        llm=suite_llm,
        judge_llm=judge_llm,
        gnn=None,
        caps={"g": 100, "gn": 50},
        top_k=3,
        concurrency=4,
    )
