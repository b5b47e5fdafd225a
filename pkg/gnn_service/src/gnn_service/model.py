"""Relational graph convolution for node classification.

Each layer computes, per node i:

    h_i' = sigma( sum_r sum_{j in N_i^r} (1/|N_i^r|) W_r h_j  +  W_0 h_i )

with per-relation weights W_r, a self-loop weight W_0 and no bias. Hidden
layers use ReLU; the output layer feeds a log-softmax, so served scores are
log-likelihoods that exponentiate to a probability simplex per node.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn
from torch.nn import functional as F

from .graph import EncodedGraph


class RelationalConv(nn.Module):
    def __init__(self, in_dim: int, out_dim: int, num_relations: int):
        super().__init__()
        self.relation_weights = nn.Parameter(torch.empty(num_relations, in_dim, out_dim))
        self.self_weight = nn.Parameter(torch.empty(in_dim, out_dim))
        self.reset_parameters()

    def reset_parameters(self) -> None:
        for r in range(self.relation_weights.size(0)):
            nn.init.xavier_uniform_(self.relation_weights[r])
        nn.init.xavier_uniform_(self.self_weight)

    def forward(self, x: torch.Tensor, edge_index: dict[int, torch.Tensor]) -> torch.Tensor:
        out = x @ self.self_weight
        for r, idx in edge_index.items():
            if idx.numel() == 0:
                continue
            src, dst = idx[0], idx[1]
            messages = x.index_select(0, src) @ self.relation_weights[r]
            agg = torch.zeros_like(out)
            agg.index_add_(0, dst, messages)
            counts = torch.zeros(x.size(0), 1, dtype=x.dtype, device=x.device)
            counts.index_add_(0, dst, torch.ones(dst.size(0), 1, dtype=x.dtype, device=x.device))
            out = out + agg / counts.clamp(min=1.0)
        return out


class NodeClassifier(nn.Module):
    """Stack of relational convolutions ending in log-softmax class scores."""

    def __init__(
        self,
        in_dim: int,
        hidden_dim: int,
        num_classes: int,
        num_relations: int,
        num_layers: int = 2,
        dropout: float = 0.5,
    ):
        super().__init__()
        if num_layers < 1:
            raise ValueError("num_layers must be >= 1")
        dims = [in_dim] + [hidden_dim] * (num_layers - 1) + [num_classes]
        self.convs = nn.ModuleList(
            RelationalConv(dims[i], dims[i + 1], num_relations) for i in range(num_layers)
        )
        self.dropout = nn.Dropout(dropout)
        self.in_dim = in_dim
        self.hidden_dim = hidden_dim
        self.num_classes = num_classes
        self.num_relations = num_relations
        self.num_layers = num_layers

    def forward(self, x: torch.Tensor, edge_index: dict[int, torch.Tensor]) -> torch.Tensor:
        h = x
        for i, conv in enumerate(self.convs):
            h = conv(h, edge_index)
            if i < len(self.convs) - 1:
                h = F.relu(h)
                h = self.dropout(h)
        return F.log_softmax(h, dim=1)


@torch.no_grad()
def node_log_probs(model: NodeClassifier, graph: EncodedGraph) -> torch.Tensor:
    """Full-graph class log-probabilities in eval mode (dropout off)."""
    model.eval()
    return model(graph.features, graph.edge_index)


@dataclass
class ModelBundle:
    """Self-describing serialized model: key, weights, vocab, and the graph
    tensors inference needs."""

    kg: str
    entity_type: str
    edge_path: tuple[str, ...]
    classes: list[str]
    relations: list[str]
    model: NodeClassifier
    graph: EncodedGraph

    @property
    def canonical_key(self) -> str:
        return f"{self.kg}:{self.entity_type}:{'/'.join(self.edge_path)}"


def save_bundle(bundle: ModelBundle, path: str | Path) -> None:
    payload = {
        "kg": bundle.kg,
        "entity_type": bundle.entity_type,
        "edge_path": list(bundle.edge_path),
        "classes": bundle.classes,
        "relations": bundle.relations,
        "dims": {
            "in_dim": bundle.model.in_dim,
            "hidden_dim": bundle.model.hidden_dim,
            "num_classes": bundle.model.num_classes,
            "num_relations": bundle.model.num_relations,
            "num_layers": bundle.model.num_layers,
        },
        "state_dict": bundle.model.state_dict(),
        "features": bundle.graph.features,
        "edge_index": bundle.graph.edge_index,
        "labels": bundle.graph.labels,
        "iris": bundle.graph.iris,
        "displays": bundle.graph.displays,
        "train_idx": bundle.graph.train_idx,
        "val_idx": bundle.graph.val_idx,
        "excluded_idx": bundle.graph.excluded_idx,
    }
    torch.save(payload, Path(path))


def load_bundle(path: str | Path) -> ModelBundle:
    payload = torch.load(Path(path), weights_only=False)
    dims = payload["dims"]
    model = NodeClassifier(
        in_dim=dims["in_dim"],
        hidden_dim=dims["hidden_dim"],
        num_classes=dims["num_classes"],
        num_relations=dims["num_relations"],
        num_layers=dims["num_layers"],
    )
    model.load_state_dict(payload["state_dict"])
    graph = EncodedGraph(
        features=payload["features"],
        edge_index=payload["edge_index"],
        relations=payload["relations"],
        labels=payload["labels"],
        classes=payload["classes"],
        iris=payload["iris"],
        displays=payload["displays"],
        train_idx=payload["train_idx"],
        val_idx=payload["val_idx"],
        excluded_idx=payload["excluded_idx"],
    )
    return ModelBundle(
        kg=payload["kg"],
        entity_type=payload["entity_type"],
        edge_path=tuple(payload["edge_path"]),
        classes=payload["classes"],
        relations=payload["relations"],
        model=model,
        graph=graph,
    )
