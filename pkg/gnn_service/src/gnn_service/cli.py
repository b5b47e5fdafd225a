"""Training and serving command line tools."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from .graph import extract_task_subgraph
from .model import ModelBundle, save_bundle
from .service import load_registry, serve
from .train import SamplerConfig, TrainConfig, train


def _read_exclusions(path: str | None) -> list[str]:
    if not path:
        return []
    return [line.strip() for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]


def train_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gnn-train", description="Train one question-pattern model")
    parser.add_argument("--graph", required=True, help="N-Triples export of the KG")
    parser.add_argument("--kg", required=True, help="KG name for the model key")
    parser.add_argument("--entity-type", required=True)
    parser.add_argument("--edge-path", required=True, nargs="+", help="1 or 2 predicate local names")
    parser.add_argument("--exclude", default=None, help="file with one node IRI or name per line")
    parser.add_argument("--out", required=True, help="output directory for the model file")
    parser.add_argument("--epochs", type=int, default=100)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--hidden", type=int, default=64)
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--dropout", type=float, default=0.5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--batch-size", type=int, default=20000)
    parser.add_argument("--walk-length", type=int, default=2)
    parser.add_argument("--num-steps", type=int, default=10)
    parser.add_argument("--early-stop-acc", type=float, default=None)
    args = parser.parse_args(argv)

    graph = extract_task_subgraph(
        args.graph,
        entity_type=args.entity_type,
        edge_path=args.edge_path,
        exclude_nodes=_read_exclusions(args.exclude),
    )
    result = train(
        graph,
        TrainConfig(
            hidden_dim=args.hidden,
            num_layers=args.layers,
            dropout=args.dropout,
            learning_rate=args.lr,
            epochs=args.epochs,
            seed=args.seed,
            early_stop_acc=args.early_stop_acc,
        ),
        SamplerConfig(
            batch_size=args.batch_size,
            walk_length=args.walk_length,
            num_steps=args.num_steps,
        ),
    )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    key_slug = "__".join(
        [args.kg.lower(), args.entity_type.lower(), "-".join(p.lower() for p in args.edge_path)]
    )
    out_path = out_dir / f"{key_slug}.pt"
    save_bundle(
        ModelBundle(
            kg=args.kg.lower(),
            entity_type=args.entity_type.lower(),
            edge_path=tuple(p.lower() for p in args.edge_path),
            classes=graph.classes,
            relations=graph.relations,
            model=result.model,
            graph=graph,
        ),
        out_path,
    )
    print(
        json.dumps(
            {
                "model": str(out_path),
                "classes": graph.classes,
                "nodes": graph.num_nodes,
                "labeled": int((graph.labels >= 0).sum()),
                "excluded": int(graph.excluded_idx.numel()),
                "best_val_accuracy": round(result.best_val_accuracy, 4),
                "epochs_run": len(result.history),
            },
            indent=2,
        )
    )
    return 0


def serve_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gnn-serve", description="Serve trained models")
    parser.add_argument("--models", required=True, help="directory of .pt model files")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8601)
    args = parser.parse_args(argv)

    registry = load_registry(args.models)
    if not registry:
        parser.error(f"no .pt model files found in {args.models}")
    serve(registry, host=args.host, port=args.port)
    return 0
