import pytest
import torch

from gnn_service.graph import extract_task_subgraph
from gnn_service.train import (
    SamplerConfig,
    TrainConfig,
    TrainError,
    sample_walk_subgraph,
    train,
    _adjacency,
)

from conftest import EXCLUDED_ENTITIES, build_two_community_graph


def test_two_community_training_reaches_95(two_community_graph):
    result = train(
        two_community_graph,
        TrainConfig(epochs=200, learning_rate=1e-3, seed=0, early_stop_acc=0.95),
        SamplerConfig(batch_size=20000, walk_length=2, num_steps=10),
    )
    assert result.best_val_accuracy >= 0.95
    assert len(result.history) <= 200


def test_same_seed_same_weights(two_community_graph):
    cfg = TrainConfig(epochs=3, seed=11)
    a = train(two_community_graph, cfg)
    b = train(two_community_graph, cfg)
    for key, value in a.model.state_dict().items():
        assert torch.equal(value, b.model.state_dict()[key])
    c = train(two_community_graph, TrainConfig(epochs=3, seed=12))
    assert any(
        not torch.equal(v, c.model.state_dict()[k]) for k, v in a.model.state_dict().items()
    )


def test_zero_epochs_returns_initialized_model(two_community_graph):
    result = train(two_community_graph, TrainConfig(epochs=0, seed=0))
    assert result.history == []
    assert result.used_label_indices == set()
    out = result.model(two_community_graph.features, two_community_graph.edge_index)
    assert out.shape == (two_community_graph.num_nodes, 2)
    sums = out.exp().sum(dim=1)
    assert torch.allclose(sums, torch.ones_like(sums), atol=1e-5)


def test_non_finite_loss_reports_step():
    graph = build_two_community_graph(n=40, seed=4)
    graph.features[0] = float("nan")
    with pytest.raises(TrainError) as err:
        train(graph, TrainConfig(epochs=1, seed=0))
    assert "step 0" in str(err.value)


def test_sampler_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(batch_size=0)
    with pytest.raises(ValueError):
        SamplerConfig(walk_length=-1)


def test_sampler_caps_roots_at_node_count(two_community_graph):
    import random

    adj = _adjacency(two_community_graph)
    nodes, sub_edges = sample_walk_subgraph(
        two_community_graph, adj, random.Random(0), SamplerConfig(batch_size=10**6)
    )
    assert len(nodes) == two_community_graph.num_nodes
    total_edges = sum(idx.size(1) for idx in sub_edges.values())
    full_edges = sum(idx.size(1) for idx in two_community_graph.edge_index.values())
    assert total_edges == full_edges


def test_sampler_subgraph_is_induced(two_community_graph):
    import random

    adj = _adjacency(two_community_graph)
    nodes, sub_edges = sample_walk_subgraph(
        two_community_graph, adj, random.Random(5), SamplerConfig(batch_size=12)
    )
    node_set = set(range(len(nodes)))
    for idx in sub_edges.values():
        assert set(idx.flatten().tolist()) <= node_set


def test_excluded_entities_never_trained_on(train_export):
    graph = extract_task_subgraph(
        train_export, "Drug", ["KINGDOM"], exclude_nodes=EXCLUDED_ENTITIES
    )
    result = train(graph, TrainConfig(epochs=5, seed=1))
    excluded = set(graph.excluded_idx.tolist())
    assert excluded
    assert result.used_label_indices
    assert result.used_label_indices.isdisjoint(excluded)
    assert excluded.isdisjoint(graph.val_idx.tolist())
