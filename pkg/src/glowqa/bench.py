"""Benchmark suites: build, run, and aggregate into grouped reports.

Suites are line-delimited JSON records. A record fixes the grounded
question (entity, edge path, gold answer, candidate choices); running it
replays the pipeline stages and judges the prediction, and aggregation
groups EM/HM accuracy by template, hops, domain, KG and choice-count
bucket, plus mean token/latency cost per variant.
"""

from __future__ import annotations

import dataclasses
import json
import random
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import AggregationError, SuiteBuildError
from .judge import Verdict, judge_batch
from .kgstore import KGSchema, TripleStore, Term, extract_schema
from .linker import link
from .pipeline import Engine, parse_for_record
from .prompts import PromptVariant, build
from .retriever import LabelSet, get_context, get_labels

MCC_BOUNDS = {
    "2-4": (2, 4),
    "4-8": (4, 8),
    "8-16": (8, 16),
    "16-32": (16, 32),
    "32+": (32, 40),  # open bucket capped at 40 choices
}

DOMAIN_TAGS = ("DS", "E", "G")


@dataclass(frozen=True)
class SuiteTemplate:
    """One question pattern: entity type, answer edge path, phrasing."""

    template_id: str
    entity_type: str
    edge_path: tuple[str, ...]  # predicate local names, 1 or 2
    label_type: str
    question_template: str  # placeholders: {entity} {entity_type} {kg} {label_type}
    domain_tag: str = "G"

    @staticmethod
    def from_dict(data: dict) -> "SuiteTemplate":
        return SuiteTemplate(
            template_id=data["template_id"],
            entity_type=data["entity_type"],
            edge_path=tuple(data["edge_path"]),
            label_type=data["label_type"],
            question_template=data["question_template"],
            domain_tag=data.get("domain_tag", "G"),
        )


@dataclass(frozen=True)
class BenchmarkRecord:
    id: str
    template_id: str
    kg_name: str
    question_text: str
    entity_type: str
    entity_name: str
    edge_path: tuple[str, ...]
    gold_answer: str
    choices: tuple[str, ...]
    hops: int
    domain_tag: str
    class_count: int
    mcc_bucket: str

    def __post_init__(self):
        if self.gold_answer not in self.choices:
            raise ValueError(f"record {self.id}: gold answer not among choices")
        if self.hops != len(self.edge_path):
            raise ValueError(f"record {self.id}: hops != |edge_path|")
        lo, hi = MCC_BOUNDS[self.mcc_bucket]
        if not lo <= len(self.choices) <= hi:
            raise ValueError(
                f"record {self.id}: {len(self.choices)} choices outside bucket {self.mcc_bucket}"
            )

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["edge_path"] = list(self.edge_path)
        data["choices"] = list(self.choices)
        return data

    @staticmethod
    def from_dict(data: dict) -> "BenchmarkRecord":
        return BenchmarkRecord(
            id=data["id"],
            template_id=data["template_id"],
            kg_name=data["kg_name"],
            question_text=data["question_text"],
            entity_type=data["entity_type"],
            entity_name=data["entity_name"],
            edge_path=tuple(data["edge_path"]),
            gold_answer=data["gold_answer"],
            choices=tuple(data["choices"]),
            hops=int(data["hops"]),
            domain_tag=data["domain_tag"],
            class_count=int(data["class_count"]),
            mcc_bucket=data["mcc_bucket"],
        )


def records_to_jsonl(records: Iterable[BenchmarkRecord]) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in records)


def records_from_jsonl(text: str) -> list[BenchmarkRecord]:
    return [
        BenchmarkRecord.from_dict(json.loads(line))
        for line in text.splitlines()
        if line.strip()
    ]


def load_suite(path: str | Path) -> list[BenchmarkRecord]:
    return records_from_jsonl(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Suite building


def _resolve_chain(
    template: SuiteTemplate, schema: KGSchema
) -> tuple[list[str], str]:
    """Map edge-path local names to predicate IRIs; return the final hop's
    subject type (the label vocabulary scope)."""
    current_type = template.entity_type
    iris: list[str] = []
    final_subject_type = current_type
    for hop in template.edge_path:
        row = next(
            (
                b
                for b in schema.bgps
                if b.subject_type.lower() == current_type.lower()
                and b.predicate.lower() == hop.lower()
            ),
            None,
        )
        if row is None:
            raise SuiteBuildError(
                f"template {template.template_id}: edge {current_type}.{hop} not in schema"
            )
        iri = schema.predicate_iri(row.predicate)
        if iri is None:
            raise SuiteBuildError(f"predicate {hop!r} has no IRI")
        iris.append(iri)
        final_subject_type = current_type
        current_type = row.object_type
    return iris, final_subject_type


def _label_vocabulary(
    store: TripleStore, final_iri: str, subject_type: str
) -> list[str]:
    counts: dict[str, int] = {}
    for t in store.by_predicate(final_iri):
        if subject_type not in store.types(t.subject.value):
            continue
        d = store.display(t.object)
        counts[d] = counts.get(d, 0) + 1
    return sorted(counts, key=lambda label: (-counts[label], label))


def _gold_objects(store: TripleStore, node: str, iris: list[str]) -> list[Term]:
    frontier = [node]
    for i, iri in enumerate(iris):
        final = i == len(iris) - 1
        next_frontier: list[str] = []
        objects: list[Term] = []
        for n in frontier:
            for t in store.by_subject(n):
                if t.predicate.value != iri:
                    continue
                if final:
                    objects.append(t.object)
                elif t.object.is_iri:
                    next_frontier.append(t.object.value)
        if final:
            return objects
        frontier = next_frontier
    return []


def build_suite(
    store: TripleStore,
    template: SuiteTemplate,
    n_questions: int,
    mcc_bucket: str,
    seed: int,
    kg_name: str,
    schema: KGSchema | None = None,
) -> list[BenchmarkRecord]:
    """Sample reproducible records for one template.

    Raises :class:`SuiteBuildError` when the store lacks enough labeled
    nodes or enough distinct labels for the requested bucket.
    """
    if mcc_bucket not in MCC_BOUNDS:
        raise SuiteBuildError(f"unknown MCC bucket {mcc_bucket!r}")
    schema = schema or extract_schema(store, "")
    iris, final_subject_type = _resolve_chain(template, schema)
    labels = _label_vocabulary(store, iris[-1], final_subject_type)
    lo, hi = MCC_BOUNDS[mcc_bucket]
    if len(labels) < lo:
        raise SuiteBuildError(
            f"template {template.template_id}: {len(labels)} labels < bucket minimum {lo}"
        )

    eligible = [
        n for n in store.nodes_of_type(template.entity_type) if _gold_objects(store, n, iris)
    ]
    if len(eligible) < n_questions:
        raise SuiteBuildError(
            f"template {template.template_id}: {len(eligible)} eligible nodes < {n_questions}"
        )

    rng = random.Random(seed)
    chosen = rng.sample(eligible, n_questions)
    records: list[BenchmarkRecord] = []
    for idx, node in enumerate(chosen):
        gold = min(store.display(o) for o in _gold_objects(store, node, iris))
        size = rng.randint(lo, min(hi, len(labels)))
        pool = [l for l in labels if l != gold]
        choices = [gold] + rng.sample(pool, size - 1)
        rng.shuffle(choices)
        entity_name = store.display_iri(node)
        records.append(
            BenchmarkRecord(
                id=f"{template.template_id}-{idx:03d}",
                template_id=template.template_id,
                kg_name=kg_name,
                question_text=template.question_template.format(
                    entity=entity_name,
                    entity_type=template.entity_type,
                    kg=kg_name,
                    label_type=template.label_type,
                ),
                entity_type=template.entity_type,
                entity_name=entity_name,
                edge_path=template.edge_path,
                gold_answer=gold,
                choices=tuple(choices),
                hops=len(template.edge_path),
                domain_tag=template.domain_tag,
                class_count=len(labels),
                mcc_bucket=mcc_bucket,
            )
        )
    return records


# ---------------------------------------------------------------------------
# Suite running


@dataclass
class RunResult:
    record_id: str
    variant: str
    effective_variant: str
    predicted_text: str | None
    verdict: Verdict | None
    prompt_tokens: int
    completion_tokens: int
    latency: float
    degradation_flag: bool
    gnn_top1: str | None
    error: str | None = None

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["verdict"] = list(self.verdict.as_pair()) if self.verdict else None
        return data


def _answer_record(engine: Engine, record: BenchmarkRecord, variant: PromptVariant) -> RunResult:
    llm = engine.require_llm()
    kg = engine.kg(record.kg_name)
    parse = parse_for_record(
        record.entity_type, record.entity_name, record.edge_path, record.kg_name
    )
    linked = link(parse, kg.schema, kg.store, llm)
    get_labels(linked, kg.store)  # raises when the template is unanswerable
    prompt_labels = LabelSet(label_type=linked.label_type, labels=record.choices)

    rc = None
    if variant.needs_rc:
        rc = get_context(linked, kg.store, engine.caps.get(variant.value, 100))
    candidates = None
    degraded = False
    if variant.needs_gnn:
        candidates, degraded = engine.gnn_candidates(kg, linked)
    effective = variant.degraded if degraded else variant

    prompt = build(
        effective,
        record.question_text,
        linked,
        prompt_labels,
        rc=rc if effective.needs_rc else None,
        gnn=candidates,
        kg_description=kg.description,
    )
    response = llm.ask(prompt.system_text, prompt.user_text)
    return RunResult(
        record_id=record.id,
        variant=variant.value,
        effective_variant=effective.value,
        predicted_text=response.text.strip(),
        verdict=None,
        prompt_tokens=response.prompt_tokens,
        completion_tokens=response.completion_tokens,
        latency=response.latency,
        degradation_flag=degraded,
        gnn_top1=candidates.top1 if candidates else None,
    )


def run_suite(
    records: list[BenchmarkRecord],
    variant: PromptVariant,
    engine: Engine,
    judge: bool = True,
) -> list[RunResult]:
    """Run every record; per-record failures never abort the suite."""

    def worker(record: BenchmarkRecord) -> RunResult:
        try:
            return _answer_record(engine, record, variant)
        except Exception as exc:  # noqa: BLE001 - isolation is the contract
            return RunResult(
                record_id=record.id,
                variant=variant.value,
                effective_variant=variant.value,
                predicted_text=None,
                verdict=None,
                prompt_tokens=0,
                completion_tokens=0,
                latency=0.0,
                degradation_flag=False,
                gnn_top1=None,
                error=f"{type(exc).__name__}: {exc}",
            )

    with ThreadPoolExecutor(max_workers=max(1, engine.concurrency)) as pool:
        results = list(pool.map(worker, records))

    if judge:
        by_id = {r.id: r for r in records}
        answered = [r for r in results if r.error is None and r.predicted_text is not None]
        if answered:
            pairs = [(r.predicted_text or "", by_id[r.record_id].gold_answer) for r in answered]
            verdicts = judge_batch(pairs, engine.judge_llm)
            for result, verdict in zip(answered, verdicts):
                result.verdict = verdict
    return results


# ---------------------------------------------------------------------------
# Aggregation


@dataclass
class GroupStats:
    total: int = 0
    em_correct: int = 0
    hm_correct: int = 0

    def add(self, verdict: Verdict | None) -> None:
        self.total += 1
        if verdict is not None:
            self.em_correct += int(verdict.em)
            self.hm_correct += int(verdict.hm)

    @property
    def em_accuracy(self) -> float:
        return 100.0 * self.em_correct / self.total if self.total else 0.0

    @property
    def hm_accuracy(self) -> float:
        return 100.0 * self.hm_correct / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "em_correct": self.em_correct,
            "hm_correct": self.hm_correct,
            "em_accuracy": round(self.em_accuracy, 2),
            "hm_accuracy": round(self.hm_accuracy, 2),
        }


@dataclass
class CostStats:
    count: int
    mean_prompt_tokens: float
    mean_completion_tokens: float
    mean_latency: float

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean_prompt_tokens": round(self.mean_prompt_tokens, 2),
            "mean_completion_tokens": round(self.mean_completion_tokens, 2),
            "mean_latency_sec": round(self.mean_latency, 4),
        }


GROUP_DIMENSIONS = ("template", "hops", "domain", "kg", "mcc")


@dataclass
class Report:
    groups: dict[str, dict[str, GroupStats]] = field(default_factory=dict)
    variants: dict[str, CostStats] = field(default_factory=dict)
    overall: GroupStats = field(default_factory=GroupStats)

    def to_dict(self) -> dict:
        return {
            "overall": self.overall.to_dict(),
            "groups": {
                dim: {key: stats.to_dict() for key, stats in sorted(table.items())}
                for dim, table in self.groups.items()
            },
            "variants": {v: c.to_dict() for v, c in sorted(self.variants.items())},
        }

    def csv_tables(self) -> dict[str, str]:
        tables: dict[str, str] = {}
        for dim, table in self.groups.items():
            lines = ["group,total,em_correct,hm_correct,em_accuracy,hm_accuracy"]
            for key, s in sorted(table.items()):
                lines.append(
                    f"{key},{s.total},{s.em_correct},{s.hm_correct},"
                    f"{s.em_accuracy:.2f},{s.hm_accuracy:.2f}"
                )
            tables[f"accuracy_by_{dim}.csv"] = "\n".join(lines) + "\n"
        lines = ["variant,count,mean_prompt_tokens,mean_completion_tokens,mean_latency_sec"]
        for v, c in sorted(self.variants.items()):
            lines.append(
                f"{v},{c.count},{c.mean_prompt_tokens:.2f},"
                f"{c.mean_completion_tokens:.2f},{c.mean_latency:.4f}"
            )
        tables["costs.csv"] = "\n".join(lines) + "\n"
        return tables


def aggregate(results: list[RunResult], records: list[BenchmarkRecord]) -> Report:
    """Grouped EM/HM accuracy plus mean cost per variant.

    Errored results count in denominators; permutation of inputs does not
    change the output.
    """
    by_id = {r.id: r for r in records}
    report = Report(groups={dim: {} for dim in GROUP_DIMENSIONS})
    costs: dict[str, list[RunResult]] = {}
    for result in sorted(results, key=lambda r: r.record_id):
        record = by_id.get(result.record_id)
        if record is None:
            raise AggregationError(f"result references unknown record {result.record_id!r}")
        keys = {
            "template": record.template_id,
            "hops": str(record.hops),
            "domain": record.domain_tag,
            "kg": record.kg_name,
            "mcc": record.mcc_bucket,
        }
        for dim, key in keys.items():
            report.groups[dim].setdefault(key, GroupStats()).add(result.verdict)
        report.overall.add(result.verdict)
        costs.setdefault(result.variant, []).append(result)

    for variant, rs in costs.items():
        answered = [r for r in rs if r.error is None]
        if not answered:
            continue
        report.variants[variant] = CostStats(
            count=len(answered),
            mean_prompt_tokens=statistics.fmean(r.prompt_tokens for r in answered),
            mean_completion_tokens=statistics.fmean(r.completion_tokens for r in answered),
            mean_latency=statistics.fmean(r.latency for r in answered),
        )
    return report


def mean_report(reports: list[Report]) -> dict:
    """Mean accuracy across runs, keyed like a single report's groups."""
    out: dict[str, dict[str, dict[str, float]]] = {}
    for dim in GROUP_DIMENSIONS:
        keys = sorted({k for rep in reports for k in rep.groups.get(dim, {})})
        out[dim] = {}
        for key in keys:
            ems = [rep.groups[dim][key].em_accuracy for rep in reports if key in rep.groups[dim]]
            hms = [rep.groups[dim][key].hm_accuracy for rep in reports if key in rep.groups[dim]]
            out[dim][key] = {
                "em_accuracy": round(statistics.fmean(ems), 2),
                "hm_accuracy": round(statistics.fmean(hms), 2),
                "runs": len(ems),
            }
    return out


def write_outputs(
    out_dir: str | Path,
    records: list[BenchmarkRecord],
    runs: list[tuple[list[RunResult], Report]],
) -> list[Path]:
    """Write results JSONL, report JSON and CSV tables per run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for i, (results, report) in enumerate(runs, start=1):
        results_path = out / f"results_run{i}.jsonl"
        results_path.write_text(
            "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in results),
            encoding="utf-8",
        )
        written.append(results_path)
        report_path = out / f"report_run{i}.json"
        report_path.write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
        written.append(report_path)
        for name, text in report.csv_tables().items():
            p = out / f"run{i}_{name}"
            p.write_text(text, encoding="utf-8")
            written.append(p)
    if len(runs) > 1:
        mean_path = out / "report_mean.json"
        mean_path.write_text(
            json.dumps(mean_report([rep for _, rep in runs]), indent=2), encoding="utf-8"
        )
        written.append(mean_path)
    return written
