"""Subgraph-sampled training of the node classifier.

Each optimization step draws a random-walk subgraph (root batch capped at
the graph size, fixed walk length), and minimizes cross-entropy on the
train-split labels inside it. The best-validation snapshot wins. Fixing the
seed fixes the initial weights, the sampled subgraphs and the dropout
masks, so runs are bit-reproducible on CPU.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import torch
from torch.nn import functional as F

from .graph import EncodedGraph
from .model import NodeClassifier

LEARNING_RATE_GRID = (5e-4, 5e-3, 1e-3, 2e-3)


class TrainError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    hidden_dim: int = 64
    num_layers: int = 2
    dropout: float = 0.5
    learning_rate: float = 1e-3  # fixture default; grid in LEARNING_RATE_GRID
    epochs: int = 100
    seed: int = 0
    early_stop_acc: float | None = None


@dataclass
class SamplerConfig:
    batch_size: int = 20000  # root count; capped at the node count
    walk_length: int = 2
    num_steps: int = 10

    def __post_init__(self):
        if min(self.batch_size, self.walk_length, self.num_steps) <= 0:
            raise ValueError("sampler parameters must be positive integers")


@dataclass
class TrainResult:
    model: NodeClassifier
    best_val_accuracy: float
    history: list[tuple[int, float, float]]  # (epoch, mean loss, val accuracy)
    used_label_indices: set[int] = field(default_factory=set)


def _adjacency(graph: EncodedGraph) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(graph.num_nodes)]
    for idx in graph.edge_index.values():
        for src, dst in idx.t().tolist():
            adj[src].append(dst)
    return adj


def sample_walk_subgraph(
    graph: EncodedGraph,
    adj: list[list[int]],
    rng: random.Random,
    cfg: SamplerConfig,
) -> tuple[list[int], dict[int, torch.Tensor]]:
    """Random-walk node sample plus its induced, reindexed edges."""
    n = graph.num_nodes
    roots = rng.sample(range(n), min(cfg.batch_size, n))
    visited = set(roots)
    frontier = roots
    for _ in range(cfg.walk_length):
        nxt = []
        for node in frontier:
            if adj[node]:
                step = rng.choice(adj[node])
                visited.add(step)
                nxt.append(step)
        frontier = nxt
    nodes = sorted(visited)
    position = {node: i for i, node in enumerate(nodes)}
    sub_edges: dict[int, torch.Tensor] = {}
    for r, idx in graph.edge_index.items():
        pairs = [
            (position[s], position[d])
            for s, d in idx.t().tolist()
            if s in position and d in position
        ]
        if pairs:
            sub_edges[r] = torch.tensor(pairs, dtype=torch.long).t().contiguous()
    return nodes, sub_edges


@torch.no_grad()
def _accuracy(model: NodeClassifier, graph: EncodedGraph, idx: torch.Tensor) -> float:
    if idx.numel() == 0:
        return 0.0
    model.eval()
    preds = model(graph.features, graph.edge_index).argmax(dim=1)
    return (preds[idx] == graph.labels[idx]).float().mean().item()


def train(
    graph: EncodedGraph,
    train_cfg: TrainConfig | None = None,
    sampler_cfg: SamplerConfig | None = None,
) -> TrainResult:
    """Optimize on sampled subgraphs; return the best-validation model.

    Raises :class:`TrainError` with the step index if the loss goes
    non-finite.
    """
    cfg = train_cfg or TrainConfig()
    sampler = sampler_cfg or SamplerConfig()
    if graph.train_idx.numel() == 0:
        raise TrainError("empty train split")

    torch.manual_seed(cfg.seed)
    torch.set_num_threads(1)
    rng = random.Random(cfg.seed)
    model = NodeClassifier(
        in_dim=graph.features.size(1),
        hidden_dim=cfg.hidden_dim,
        num_classes=len(graph.classes),
        num_relations=len(graph.relations),
        num_layers=cfg.num_layers,
        dropout=cfg.dropout,
    )
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    adj = _adjacency(graph)
    train_set = set(graph.train_idx.tolist())

    best_state = {k: v.clone() for k, v in model.state_dict().items()}
    best_val = -1.0
    history: list[tuple[int, float, float]] = []
    used: set[int] = set()

    for epoch in range(cfg.epochs):
        model.train()
        losses: list[float] = []
        for step in range(sampler.num_steps):
            nodes, sub_edges = sample_walk_subgraph(graph, adj, rng, sampler)
            labeled_local = [
                (local, node)
                for local, node in enumerate(nodes)
                if node in train_set
            ]
            if not labeled_local:
                continue
            local_idx = torch.tensor([l for l, _ in labeled_local], dtype=torch.long)
            node_idx = torch.tensor([n for _, n in labeled_local], dtype=torch.long)
            out = model(graph.features[torch.tensor(nodes, dtype=torch.long)], sub_edges)
            loss = F.nll_loss(out[local_idx], graph.labels[node_idx])
            if not math.isfinite(loss.item()):
                raise TrainError(f"non-finite loss at step {epoch * sampler.num_steps + step}")
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            losses.append(loss.item())
            used.update(node_idx.tolist())

        val_acc = _accuracy(model, graph, graph.val_idx)
        history.append((epoch, sum(losses) / len(losses) if losses else float("nan"), val_acc))
        if val_acc > best_val:
            best_val = val_acc
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
        if cfg.early_stop_acc is not None and val_acc >= cfg.early_stop_acc:
            break

    model.load_state_dict(best_state)
    return TrainResult(
        model=model,
        best_val_accuracy=max(best_val, 0.0),
        history=history,
        used_label_indices=used,
    )
