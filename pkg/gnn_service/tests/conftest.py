from __future__ import annotations

import random
import threading
import time
from pathlib import Path

import pytest
import torch
import uvicorn

from gnn_service.cli import train_main
from gnn_service.graph import EncodedGraph, hash_features
from gnn_service.service import create_app, load_registry

FIXTURES = Path(__file__).parent / "fixtures"

# Stand-ins for benchmark question entities, passed through --exclude.
EXCLUDED_ENTITIES = ["Yohimbine", "D001", "D002", "D003", "D010"]


@pytest.fixture(scope="session")
def train_export() -> Path:
    return FIXTURES / "biokg_train.nt"


def build_two_community_graph(n: int = 200, seed: int = 0) -> EncodedGraph:
    """Synthetic separable dataset: community membership fixes both the
    label and the name prefix, and edges stay within communities."""
    rng = random.Random(seed)
    half = n // 2
    names = [
        (f"alpha node {i}" if i < half else f"beta node {i}") for i in range(n)
    ]
    labels = [0 if i < half else 1 for i in range(n)]
    features = torch.stack([hash_features(name) for name in names])

    pairs = set()
    for i in range(n):
        lo, hi = (0, half) if labels[i] == 0 else (half, n)
        while sum(1 for p in pairs if p[0] == i) < 4:
            j = rng.randrange(lo, hi)
            if j != i:
                pairs.add((i, j))
    forward = sorted(pairs)
    backward = sorted((d, s) for s, d in pairs)
    edge_index = {
        0: torch.tensor(forward, dtype=torch.long).t().contiguous(),
        1: torch.tensor(backward, dtype=torch.long).t().contiguous(),
    }

    order = list(range(n))
    random.Random(seed + 1).shuffle(order)
    n_val = n // 5
    return EncodedGraph(
        features=features,
        edge_index=edge_index,
        relations=["link", "link__inv"],
        labels=torch.tensor(labels, dtype=torch.long),
        classes=["blue", "red"],
        iris=[f"http://two.test/n{i}" for i in range(n)],
        displays=names,
        train_idx=torch.tensor(sorted(order[n_val:]), dtype=torch.long),
        val_idx=torch.tensor(sorted(order[:n_val]), dtype=torch.long),
        excluded_idx=torch.tensor([], dtype=torch.long),
    )


@pytest.fixture(scope="session")
def two_community_graph() -> EncodedGraph:
    return build_two_community_graph()


@pytest.fixture(scope="session")
def models_dir(tmp_path_factory, train_export) -> Path:
    """Train the kingdom fixture model once through the CLI."""
    out_dir = tmp_path_factory.mktemp("models")
    exclude_file = out_dir / "exclude.txt"
    exclude_file.write_text("\n".join(EXCLUDED_ENTITIES) + "\n", encoding="utf-8")
    rc = train_main(
        [
            "--graph",
            str(train_export),
            "--kg",
            "biokg",
            "--entity-type",
            "Drug",
            "--edge-path",
            "KINGDOM",
            "--exclude",
            str(exclude_file),
            "--out",
            str(out_dir),
            "--epochs",
            "60",
            "--early-stop-acc",
            "0.97",
            "--seed",
            "3",
        ]
    )
    assert rc == 0
    return out_dir


@pytest.fixture(scope="session")
def registry(models_dir):
    return load_registry(models_dir)


@pytest.fixture(scope="session")
def live_service(registry):
    """Real uvicorn server on an ephemeral port."""
    app = create_app(registry)
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started and time.time() < deadline:
        time.sleep(0.05)
    assert server.started, "service did not start"
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)
