import math
import random

import torch

from gnn_service.model import NodeClassifier, load_bundle, node_log_probs, save_bundle


def random_toy_graph(rng: random.Random, max_nodes: int = 10, max_relations: int = 3):
    n = rng.randint(2, max_nodes)
    n_rel = rng.randint(1, max_relations)
    dim = rng.choice([4, 6, 8])
    torch.manual_seed(rng.randint(0, 10**6))
    x = torch.randn(n, dim)
    edge_index = {}
    for r in range(n_rel):
        pairs = set()
        for _ in range(rng.randint(0, 2 * n)):
            s, d = rng.randrange(n), rng.randrange(n)
            if s != d:
                pairs.add((s, d))
        if pairs:
            edge_index[r] = torch.tensor(sorted(pairs), dtype=torch.long).t().contiguous()
    return x, edge_index, n_rel, dim


def dense_reference(model: NodeClassifier, x: torch.Tensor, edge_index) -> torch.Tensor:
    """Literal double-sum evaluation of the layer equation in float64."""
    h = x.double()
    n = x.size(0)
    num_layers = len(model.convs)
    incoming = {
        r: [(int(s), int(d)) for s, d in idx.t().tolist()] for r, idx in edge_index.items()
    }
    for layer_i, conv in enumerate(model.convs):
        w_self = conv.self_weight.double()
        w_rel = conv.relation_weights.double()
        out = torch.zeros(n, w_self.size(1), dtype=torch.float64)
        for i in range(n):
            acc = h[i] @ w_self
            for r in incoming:
                neighbors = [s for s, d in incoming[r] if d == i]
                if neighbors:
                    total = torch.zeros(w_self.size(1), dtype=torch.float64)
                    for j in neighbors:
                        total = total + h[j] @ w_rel[r]
                    acc = acc + total / len(neighbors)
            out[i] = acc
        h = torch.relu(out) if layer_i < num_layers - 1 else out
    return torch.log_softmax(h, dim=1)


def test_forward_matches_dense_reference_50_trials():
    rng = random.Random(7)
    for _ in range(50):
        x, edge_index, n_rel, dim = random_toy_graph(rng)
        model = NodeClassifier(
            in_dim=dim, hidden_dim=5, num_classes=3, num_relations=max(n_rel, 1), num_layers=2
        ).double()
        model.eval()
        got = model(x.double(), edge_index)
        expected = dense_reference(model, x, edge_index)
        assert (got - expected).abs().max().item() < 1e-5


def test_zero_weights_give_uniform_log_probs():
    torch.manual_seed(0)
    x = torch.randn(6, 8)
    edge_index = {0: torch.tensor([[0, 1], [1, 2]], dtype=torch.long)}
    model = NodeClassifier(in_dim=8, hidden_dim=4, num_classes=5, num_relations=1)
    with torch.no_grad():
        for p in model.parameters():
            p.zero_()
    model.eval()
    out = model(x, edge_index)
    assert torch.allclose(out, torch.full((6, 5), -math.log(5.0)), atol=1e-6)


def test_isolated_node_uses_only_self_weights():
    torch.manual_seed(1)
    x = torch.randn(4, 6)
    # Node 0 receives nothing; the others form a chain.
    edge_index = {0: torch.tensor([[1, 2], [2, 3]], dtype=torch.long)}
    model = NodeClassifier(in_dim=6, hidden_dim=5, num_classes=3, num_relations=1)
    model.eval()
    out = model(x, edge_index)
    h0 = torch.relu(x[0] @ model.convs[0].self_weight)
    expected0 = torch.log_softmax(h0 @ model.convs[1].self_weight, dim=0)
    assert torch.allclose(out[0], expected0, atol=1e-6)


def test_log_probs_exponentiate_to_one():
    rng = random.Random(3)
    x, edge_index, n_rel, dim = random_toy_graph(rng)
    model = NodeClassifier(in_dim=dim, hidden_dim=4, num_classes=4, num_relations=max(n_rel, 1))
    model.eval()
    out = model(x, edge_index)
    sums = out.exp().sum(dim=1)
    assert torch.allclose(sums, torch.ones_like(sums), atol=1e-6)


def test_bundle_round_trip(tmp_path, two_community_graph):
    from gnn_service.model import ModelBundle

    torch.manual_seed(5)
    model = NodeClassifier(in_dim=128, hidden_dim=8, num_classes=2, num_relations=2)
    bundle = ModelBundle(
        kg="two",
        entity_type="node",
        edge_path=("color",),
        classes=two_community_graph.classes,
        relations=two_community_graph.relations,
        model=model,
        graph=two_community_graph,
    )
    path = tmp_path / "two__node__color.pt"
    save_bundle(bundle, path)
    loaded = load_bundle(path)
    assert loaded.canonical_key == "two:node:color"
    assert loaded.classes == ["blue", "red"]
    original = node_log_probs(model, two_community_graph)
    reloaded = node_log_probs(loaded.model, loaded.graph)
    assert torch.allclose(original, reloaded, atol=1e-7)
