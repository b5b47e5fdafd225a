"""Task-oriented subgraph extraction and node feature encoding.

A question pattern (entity type, edge path) turns a KG export into a
node-classification dataset: target-type nodes plus their 1-hop in/out
neighbors, relation-typed directed edges (with explicit inverses), and a
class label per target taken from the final edge-path predicate. The
supervision edges themselves are removed from the message-passing graph,
and benchmark-excluded entities keep their structure but carry no label
and never enter the train/val splits.
"""

from __future__ import annotations

import random
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import torch

from .ntriples import RawTriple, local_name, read_ntriples

FEATURE_DIM = 128
NAME_PREDICATES = ("name", "label", "title")


class GnnDataError(ValueError):
    """No usable labeled nodes for the requested pattern."""


@dataclass
class EncodedGraph:
    features: torch.Tensor  # [N, D] float32, L2-normalized rows
    edge_index: dict[int, torch.Tensor]  # relation id -> [2, E] (src, dst)
    relations: list[str]
    labels: torch.Tensor  # [N] long; -1 where unlabeled or excluded
    classes: list[str]
    iris: list[str]
    displays: list[str]
    train_idx: torch.Tensor
    val_idx: torch.Tensor
    excluded_idx: torch.Tensor
    index: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {iri: i for i, iri in enumerate(self.iris)}

    @property
    def num_nodes(self) -> int:
        return self.features.size(0)

    def node_by_ref(self, ref: str) -> int | None:
        """Resolve a node by IRI, then by display name (case-insensitive)."""
        if ref in self.index:
            return self.index[ref]
        wanted = ref.lower()
        hits = [i for i, d in enumerate(self.displays) if d.lower() == wanted]
        return min(hits) if hits else None


def hash_features(text: str, dim: int = FEATURE_DIM) -> torch.Tensor:
    """Feature-hashed bag of character 3-grams, L2-normalized."""
    lowered = text.lower()
    grams = [lowered[i : i + 3] for i in range(max(1, len(lowered) - 2))] if lowered else []
    vec = torch.zeros(dim)
    for gram in grams:
        vec[zlib.crc32(gram.encode("utf-8")) % dim] += 1.0
    norm = vec.norm()
    return vec / norm if norm > 0 else vec


def _is_typing(pred: str) -> bool:
    return (
        pred == "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
        or local_name(pred).lower() == "type"
    )


def _display_maps(triples: list[RawTriple]) -> tuple[dict[str, str], dict[str, set[str]]]:
    rank = {name: i for i, name in enumerate(NAME_PREDICATES)}
    best: dict[str, tuple[int, str]] = {}
    types: dict[str, set[str]] = {}
    for t in triples:
        pred_local = local_name(t.predicate).lower()
        if not t.object_is_iri and pred_local in rank:
            candidate = (rank[pred_local], t.object)
            if t.subject not in best or candidate < best[t.subject]:
                best[t.subject] = candidate
        if _is_typing(t.predicate) and t.object_is_iri:
            types.setdefault(t.subject, set()).add(local_name(t.object))
        elif _is_typing(t.predicate):
            types.setdefault(t.subject, set()).add(t.object)
    return {n: v for n, (_, v) in best.items()}, types


def _walk_labels(
    triples_by_subject: dict[str, list[RawTriple]],
    node: str,
    path: list[str],
    displays: dict[str, str],
) -> list[str]:
    frontier = [node]
    for hop_i, hop in enumerate(path):
        final = hop_i == len(path) - 1
        found: list[str] = []
        for n in frontier:
            for t in triples_by_subject.get(n, ()):
                if local_name(t.predicate).lower() != hop:
                    continue
                if final:
                    if t.object_is_iri:
                        found.append(displays.get(t.object, local_name(t.object)))
                    else:
                        found.append(t.object)
                elif t.object_is_iri:
                    found.append(t.object)
        if not found:
            return []
        frontier = found
    return frontier


def extract_task_subgraph(
    source: str | Path,
    entity_type: str,
    edge_path: list[str] | tuple[str, ...],
    exclude_nodes: list[str] | tuple[str, ...] = (),
    dim: int = FEATURE_DIM,
    split_seed: int = 0,
    val_fraction: float = 0.2,
) -> EncodedGraph:
    """Build the training graph for one question pattern.

    `exclude_nodes` entries may be IRIs or display names; matching nodes are
    kept in the graph but stripped of labels and splits.
    """
    triples = read_ntriples(source)
    displays, types = _display_maps(triples)
    path = [p.lower() for p in edge_path]
    wanted_type = entity_type.lower()

    by_subject: dict[str, list[RawTriple]] = {}
    for t in triples:
        by_subject.setdefault(t.subject, []).append(t)

    targets = sorted(
        n for n, ts in types.items() if any(t.lower() == wanted_type for t in ts)
    )
    if not targets:
        raise GnnDataError(f"no nodes of type {entity_type!r} in the export")

    raw_labels: dict[str, str] = {}
    for node in targets:
        found = _walk_labels(by_subject, node, path, displays)
        if found:
            raw_labels[node] = min(found)

    # Supervision edges never enter the message-passing graph.
    final_pred = path[-1]
    message_triples = [
        t
        for t in triples
        if local_name(t.predicate).lower() != final_pred
        and not _is_typing(t.predicate)
        and local_name(t.predicate).lower() not in NAME_PREDICATES
        and t.object_is_iri
    ]

    target_set = set(targets)
    included = set(targets)
    for t in message_triples:
        if t.subject in target_set:
            included.add(t.object)
        if t.object in target_set:
            included.add(t.subject)

    iris = sorted(included)
    index = {iri: i for i, iri in enumerate(iris)}
    display_list = [displays.get(iri, local_name(iri)) for iri in iris]
    features = torch.stack([hash_features(d, dim) for d in display_list])

    relation_names: list[str] = []
    rel_index: dict[str, int] = {}
    edges: dict[int, list[tuple[int, int]]] = {}
    for t in message_triples:
        if t.subject not in index or t.object not in index:
            continue
        rel = local_name(t.predicate).lower()
        for name, (src, dst) in ((rel, (t.subject, t.object)), (f"{rel}__inv", (t.object, t.subject))):
            if name not in rel_index:
                rel_index[name] = len(relation_names)
                relation_names.append(name)
            edges.setdefault(rel_index[name], []).append((index[src], index[dst]))

    edge_index = {
        r: torch.tensor(sorted(pairs), dtype=torch.long).t().contiguous()
        for r, pairs in edges.items()
    }

    excluded_ids = set()
    for ref in exclude_nodes:
        if ref in index:
            excluded_ids.add(index[ref])
            continue
        wanted = ref.lower()
        excluded_ids.update(i for i, d in enumerate(display_list) if d.lower() == wanted)

    classes = sorted(
        {
            label
            for node, label in raw_labels.items()
            if index.get(node) is not None and index[node] not in excluded_ids
        }
    )
    if not classes:
        raise GnnDataError("all labeled nodes are excluded; nothing to train on")
    class_index = {c: i for i, c in enumerate(classes)}

    labels = torch.full((len(iris),), -1, dtype=torch.long)
    for node, label in raw_labels.items():
        i = index.get(node)
        if i is None or i in excluded_ids or label not in class_index:
            continue
        labels[i] = class_index[label]

    labeled = [i for i in range(len(iris)) if labels[i].item() >= 0]
    if not labeled:
        raise GnnDataError("no labeled nodes remain after exclusion")
    rng = random.Random(split_seed)
    rng.shuffle(labeled)
    n_val = max(1, int(len(labeled) * val_fraction)) if len(labeled) > 1 else 0
    val = sorted(labeled[:n_val])
    train = sorted(labeled[n_val:])

    return EncodedGraph(
        features=features,
        edge_index=edge_index,
        relations=relation_names,
        labels=labels,
        classes=classes,
        iris=iris,
        displays=display_list,
        train_idx=torch.tensor(train, dtype=torch.long),
        val_idx=torch.tensor(val, dtype=torch.long),
        excluded_idx=torch.tensor(sorted(excluded_ids), dtype=torch.long),
        index=index,
    )
