#!/usr/bin/env python3
"""Regenerate the test fixtures: KG triple files, benchmark suites, mock
transcripts and the engine config. Deterministic; run from the repo root:

    python3 tools/make_fixtures.py
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from glowqa.bench import SuiteTemplate, build_suite, records_to_jsonl  # noqa: E402
from glowqa.kgstore import extract_schema, load_triples  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"
GNN_FIXTURES = ROOT / "gnn_service" / "tests" / "fixtures"

BIOKG = "http://www.biokg.com/"
LMDB = "http://www.linkedmdb.org/"


def nt(lines: list[str]) -> str:
    return "\n".join(lines) + "\n"


def triple(s: str, p: str, o: str) -> str:
    return f"<{s}> <{p}> <{o}> ."


def lit(s: str, p: str, value: str) -> str:
    return f'<{s}> <{p}> "{value}" .'


def build_biokg() -> tuple[list[str], list[str]]:
    """Returns (pipeline fixture lines, extra training-only lines)."""
    rng = random.Random(4021)
    lines: list[str] = []

    kingdom = {
        "Organic": f"{BIOKG}kingdom/K_Organic",
        "Non-Organic": f"{BIOKG}kingdom/K_NonOrganic",
    }
    for name, iri in kingdom.items():
        lines.append(triple(iri, f"{BIOKG}TYPE", f"{BIOKG}class/Kingdom"))
        lines.append(lit(iri, f"{BIOKG}NAME", name))

    superclasses = ["Alkaloids", "Steroids", "Phenols", "Lipids", "Peptides", "Terpenes"]
    sc_iris = {}
    for name in superclasses:
        iri = f"{BIOKG}superclass/SC_{name}"
        sc_iris[name] = iri
        lines.append(triple(iri, f"{BIOKG}TYPE", f"{BIOKG}class/Superclass"))
        lines.append(lit(iri, f"{BIOKG}NAME", name))

    pathways = {"Organic": [], "Non-Organic": []}
    for i in range(1, 6):
        for prefix, group in (("O", "Organic"), ("N", "Non-Organic")):
            iri = f"{BIOKG}pathway/PW_{prefix}{i}"
            pathways[group].append(iri)
            lines.append(triple(iri, f"{BIOKG}TYPE", f"{BIOKG}class/Pathway"))
            lines.append(lit(iri, f"{BIOKG}NAME", f"PW-{prefix}{i}"))

    drugs = [f"{BIOKG}drug/D{i:03d}" for i in range(1, 121)]
    drug_kingdom = {}
    for idx, drug in enumerate(drugs):
        group = "Organic" if idx % 5 != 4 else "Non-Organic"  # 96 organic / 24 not
        drug_kingdom[drug] = group
        name = f"D{idx + 1:03d}"
        lines.append(triple(drug, f"{BIOKG}TYPE", f"{BIOKG}class/Drug"))
        lines.append(lit(drug, f"{BIOKG}NAME", name))
        lines.append(triple(drug, f"{BIOKG}KINGDOM", kingdom[group]))
        lines.append(triple(drug, f"{BIOKG}SUPERCLASS", sc_iris[rng.choice(superclasses)]))
        lines.append(lit(drug, f"{BIOKG}WEIGHT", f"{rng.uniform(100, 900):.1f}"))
        lines.append(lit(drug, f"{BIOKG}FORMULA", f"C{rng.randint(5, 40)}H{rng.randint(5, 60)}N{rng.randint(0, 8)}"))
        lines.append(lit(drug, f"{BIOKG}HALFLIFE", f"{rng.uniform(0.5, 48):.1f} h"))
        lines.append(lit(drug, f"{BIOKG}SOLUBILITY", f"{rng.uniform(0.01, 5):.3f} mg/mL"))
        lines.append(lit(drug, f"{BIOKG}MELTING", f"{rng.uniform(40, 300):.1f} C"))
        lines.append(lit(drug, f"{BIOKG}LOGP", f"{rng.uniform(-2, 7):.2f}"))
        for pw in rng.sample(pathways[group], 3):
            lines.append(triple(drug, f"{BIOKG}PATHWAY", pw))

    # Kingdom-homophilous interaction edges give every drug a neighborhood
    # well over the GLOW-G cap.
    for drug in drugs:
        same = [d for d in drugs if d != drug and drug_kingdom[d] == drug_kingdom[drug]]
        other = [d for d in drugs if d != drug and drug_kingdom[d] != drug_kingdom[drug]]
        targets = rng.sample(same, min(44, len(same))) + rng.sample(other, min(11, len(other)))
        for target in targets:
            lines.append(triple(drug, f"{BIOKG}DDI", target))

    # Proteins with species labels (linking fixture; note the /property/ namespace).
    species = {}
    for name in ["Human", "Mouse", "Rat", "Yeast"]:
        iri = f"{BIOKG}species/SP_{name}"
        species[name] = iri
        lines.append(triple(iri, f"{BIOKG}TYPE", f"{BIOKG}class/Species"))
        lines.append(lit(iri, f"{BIOKG}NAME", name))
    rng_species = ["Human", "Human", "Mouse", "Rat", "Yeast", "Human", "Mouse", "Rat"]
    for i in range(1, 13):
        prot = f"{BIOKG}protein/P{i:03d}"
        lines.append(triple(prot, f"{BIOKG}TYPE", f"{BIOKG}class/Protein"))
        lines.append(lit(prot, f"{BIOKG}NAME", f"P{i:03d}"))
        lines.append(triple(prot, f"{BIOKG}property/SPECIES", species[rng_species[i % len(rng_species)]]))
    q_prot = f"{BIOKG}protein/Q9LTJ2"
    lines.append(triple(q_prot, f"{BIOKG}TYPE", f"{BIOKG}class/Protein"))
    lines.append(lit(q_prot, f"{BIOKG}NAME", "Q9LTJ2"))
    lines.append(triple(q_prot, f"{BIOKG}property/SPECIES", species["Human"]))

    # Yohimbine sits outside the interaction cluster so its context is the
    # single DDI triple once the answer edge and name/type triples drop out.
    yo = f"{BIOKG}drug/DB01392"
    other = f"{BIOKG}drug/DB13677"
    lines.append(triple(yo, f"{BIOKG}TYPE", f"{BIOKG}class/Drug"))
    lines.append(lit(yo, f"{BIOKG}NAME", "Yohimbine"))
    lines.append(triple(yo, f"{BIOKG}KINGDOM", kingdom["Organic"]))
    lines.append(triple(yo, f"{BIOKG}DDI", other))
    lines.append(triple(other, f"{BIOKG}TYPE", f"{BIOKG}class/Drug"))

    train_extra = [
        triple(yo, f"{BIOKG}PATHWAY", pathways["Organic"][0]),
        triple(yo, f"{BIOKG}PATHWAY", pathways["Organic"][1]),
    ]
    return lines, train_extra


def build_lmdb() -> list[str]:
    rng = random.Random(90210)
    lines: list[str] = []

    genres = ["Action", "Comedy", "Drama", "Horror", "Romance", "Sci-Fi"]
    genre_iris = {}
    for name in genres:
        iri = f"{LMDB}genre/G_{name.replace('-', '')}"
        genre_iris[name] = iri
        lines.append(triple(iri, f"{LMDB}TYPE", f"{LMDB}class/Genre"))
        lines.append(lit(iri, f"{LMDB}NAME", name))

    languages = ["English", "French", "German", "Hindi", "Italian", "Japanese", "Korean", "Spanish"]
    lang_iris = {}
    for name in languages:
        iri = f"{LMDB}language/L_{name}"
        lang_iris[name] = iri
        lines.append(triple(iri, f"{LMDB}TYPE", f"{LMDB}class/Language"))
        lines.append(lit(iri, f"{LMDB}NAME", name))

    actors = [f"{LMDB}actor/A{i:03d}" for i in range(1, 301)]
    for i, actor in enumerate(actors, start=1):
        lines.append(triple(actor, f"{LMDB}TYPE", f"{LMDB}class/Actor"))
        lines.append(lit(actor, f"{LMDB}NAME", f"Actor {i:03d}"))

    def add_film(iri: str, name: str, with_genre: bool = True) -> None:
        lines.append(triple(iri, f"{LMDB}TYPE", f"{LMDB}class/Film"))
        lines.append(lit(iri, f"{LMDB}NAME", name))
        lines.append(triple(iri, f"{LMDB}LANGUAGE", lang_iris[rng.choice(languages)]))
        if with_genre:
            lines.append(triple(iri, f"{LMDB}GENRE", genre_iris[rng.choice(genres)]))
        lines.append(lit(iri, f"{LMDB}RUNTIME", f"{rng.randint(80, 190)} min"))
        lines.append(lit(iri, f"{LMDB}YEAR", str(rng.randint(1970, 2024))))
        lines.append(lit(iri, f"{LMDB}RATING", f"{rng.uniform(3.0, 9.5):.1f}"))
        lines.append(lit(iri, f"{LMDB}BUDGET", f"{rng.randint(1, 250)}M"))
        for actor in rng.sample(actors, 100):
            lines.append(triple(iri, f"{LMDB}CAST", actor))

    films = [f"{LMDB}film/F{i:03d}" for i in range(1, 31)]
    for i, film in enumerate(films, start=1):
        add_film(film, f"Film {i:03d}")
    for i, film in enumerate(films[:18], start=1):
        sequel = f"{LMDB}film/S{i:03d}"
        add_film(sequel, f"Film {i:03d} II")
        lines.append(triple(film, f"{LMDB}SEQUEL", sequel))

    # Two films sharing a name exercise the ambiguity tie-break.
    for tag in ("X", "Y"):
        iri = f"{LMDB}film/Avatar{tag}"
        lines.append(triple(iri, f"{LMDB}TYPE", f"{LMDB}class/Film"))
        lines.append(lit(iri, f"{LMDB}NAME", "Avatar"))
        lines.append(lit(iri, f"{LMDB}YEAR", "2009"))
    return lines


TEMPLATES = [
    dict(
        template_id="drug-kingdom",
        kg="biokg",
        entity_type="Drug",
        edge_path=["KINGDOM"],
        label_type="Kingdom",
        question_template="Predict the {label_type} for the {entity_type} {entity} from the {kg} knowledge graph.",
        domain_tag="DS",
        mcc="2-4",
        n=15,
        seed=11,
    ),
    dict(
        template_id="drug-superclass",
        kg="biokg",
        entity_type="Drug",
        edge_path=["SUPERCLASS"],
        label_type="Superclass",
        question_template="Predict the {label_type} for the {entity_type} {entity} from the {kg} knowledge graph.",
        domain_tag="DS",
        mcc="4-8",
        n=10,
        seed=12,
    ),
    dict(
        template_id="film-sequel-genre",
        kg="lmdb",
        entity_type="Film",
        edge_path=["SEQUEL", "GENRE"],
        label_type="Genre",
        question_template="Predict the {label_type} of the sequel of the {entity_type} {entity} from the {kg} knowledge graph.",
        domain_tag="E",
        mcc="4-8",
        n=15,
        seed=13,
    ),
    dict(
        template_id="film-language",
        kg="lmdb",
        entity_type="Film",
        edge_path=["LANGUAGE"],
        label_type="Language",
        question_template="Predict the {label_type} for the {entity_type} {entity} from the {kg} knowledge graph.",
        domain_tag="E",
        mcc="4-8",
        n=10,
        seed=14,
    ),
]

# Schema BGPs the scripted linker answers with, keyed by (entity type, hop).
LINK_ANSWERS = {
    ("Drug", "KINGDOM"): ("Drug", "Drug, KINGDOM, Kingdom"),
    ("Drug", "SUPERCLASS"): ("Drug", "Drug, SUPERCLASS, Superclass"),
    ("Drug", "kingdom"): ("Drug", "Drug, KINGDOM, Kingdom"),
    ("Film", "SEQUEL"): ("Film", "Film, SEQUEL, Film"),
    ("Film", "GENRE"): ("Film", "Film, GENRE, Genre"),
    ("Film", "LANGUAGE"): ("Film", "Film, LANGUAGE, Language"),
}

YOHIMBINE_QUESTION = (
    "Predict the chemical kingdom for the drug Yohimbine from the BioKG knowledge graph."
)

A1_SPARQL = """PREFIX biokg: <http://www.biokg.com/>
SELECT ?drug as ?vt  ?kingdom as ?vl
WHERE {
  VALUES ?name { "Yohimbine" }
  ?drug biokg:NAME ?name .
  ?drug biokg:KINGDOM ?kingdom .}"""


def linking_rules() -> list[dict]:
    rules = []
    for (etype, hop), (node_type, bgp) in LINK_ANSWERS.items():
        rules.append(
            {
                "kind": "substring",
                "value": f"describe the  {etype} {hop}.",
                "response": f"1- {node_type}\n2- {etype}, NAME, Literal\n3- {bgp}",
            }
        )
    return rules


def answer_rules(records: list, label_type: str, correct_flags: list[bool]) -> list[dict]:
    rules = []
    for record, correct in zip(records, correct_flags):
        # Yohimbine also carries the scripted ask-flow answer ("Organic");
        # keep every rule for it consistent with that.
        if correct or record.entity_name == "Yohimbine":
            answer = record.gold_answer
        else:
            answer = next(c for c in record.choices if c != record.gold_answer)
        rules.append(
            {
                "kind": "substring",
                "value": f"What is the {label_type} of the  {record.entity_type} {record.entity_name} from the",
                "response": answer,
            }
        )
    return rules


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / "transcripts").mkdir(exist_ok=True)
    (FIXTURES / "templates").mkdir(exist_ok=True)
    GNN_FIXTURES.mkdir(parents=True, exist_ok=True)

    biokg_lines, train_extra = build_biokg()
    (FIXTURES / "biokg.nt").write_text(nt(biokg_lines), encoding="utf-8")
    (GNN_FIXTURES / "biokg_train.nt").write_text(nt(biokg_lines + train_extra), encoding="utf-8")
    lmdb_lines = build_lmdb()
    (FIXTURES / "lmdb.nt").write_text(nt(lmdb_lines), encoding="utf-8")

    stores = {
        "biokg": load_triples((FIXTURES / "biokg.nt").read_text(), "ntriples"),
        "lmdb": load_triples((FIXTURES / "lmdb.nt").read_text(), "ntriples"),
    }
    schemas = {
        "biokg": extract_schema(stores["biokg"], BIOKG),
        "lmdb": extract_schema(stores["lmdb"], LMDB),
    }

    rules: list[dict] = []
    rules.append(
        {
            "kind": "substring",
            "value": YOHIMBINE_QUESTION,
            "response": (
                "1-Question main entity: Drug 2-Main Entity: Yohimbine\n"
                "3-Prediction label: kingdom 4-KG name: BioKG"
            ),
        }
    )
    rules.append(
        {
            "kind": "substring",
            "value": "Write a SPARQL query that selects the Drug that satisfy",
            "response": A1_SPARQL,
        }
    )
    rules.append(
        {
            "kind": "substring",
            "value": "What is the Kingdom of the  Drug Yohimbine from the",
            "response": "Organic",
        }
    )
    rules.extend(linking_rules())

    # 10-question suite with exactly 7 correct answers scripted (hand-computed
    # accuracy table: 70.0 EM). Its answer rules come before the 50-question
    # suite's so shared entities resolve to this plan.
    kingdom_template = SuiteTemplate(
        template_id="drug-kingdom-10",
        entity_type="Drug",
        edge_path=("KINGDOM",),
        label_type="Kingdom",
        question_template="Predict the {label_type} for the {entity_type} {entity} from the {kg} knowledge graph.",
        domain_tag="DS",
    )
    suite10 = build_suite(
        stores["biokg"], kingdom_template, 10, "2-4", 21, kg_name="biokg", schema=schemas["biokg"]
    )
    (FIXTURES / "suite10.jsonl").write_text(records_to_jsonl(suite10), encoding="utf-8")
    flags10 = [True] * 7 + [False] * 3
    for i, record in enumerate(suite10):
        # Yohimbine's scripted answer is always "Organic" (correct); keep it
        # out of the three wrong slots so the 7/10 plan holds.
        if record.entity_name == "Yohimbine" and not flags10[i]:
            flags10[i], flags10[0] = True, False
    rules.extend(answer_rules(suite10, "Kingdom", flags10))

    plan_rng = random.Random(777)
    all_records = []
    for spec in TEMPLATES:
        template = SuiteTemplate(
            template_id=spec["template_id"],
            entity_type=spec["entity_type"],
            edge_path=tuple(spec["edge_path"]),
            label_type=spec["label_type"],
            question_template=spec["question_template"],
            domain_tag=spec["domain_tag"],
        )
        records = build_suite(
            stores[spec["kg"]],
            template,
            spec["n"],
            spec["mcc"],
            spec["seed"],
            kg_name=spec["kg"],
            schema=schemas[spec["kg"]],
        )
        all_records.extend(records)
        flags = [plan_rng.random() < 0.7 for _ in records]
        rules.extend(answer_rules(records, spec["label_type"], flags))
    (FIXTURES / "suite50.jsonl").write_text(records_to_jsonl(all_records), encoding="utf-8")

    (FIXTURES / "transcripts" / "llm.json").write_text(
        json.dumps(rules, indent=2), encoding="utf-8"
    )
    (FIXTURES / "transcripts" / "judge.json").write_text(
        json.dumps([{"kind": "default", "value": "", "response": "N/A"}], indent=2),
        encoding="utf-8",
    )

    (FIXTURES / "templates" / "drug_kingdom.json").write_text(
        json.dumps(
            {
                "template_id": "drug-kingdom",
                "entity_type": "Drug",
                "edge_path": ["KINGDOM"],
                "label_type": "Kingdom",
                "question_template": "Predict the {label_type} for the {entity_type} {entity} from the {kg} knowledge graph.",
                "domain_tag": "DS",
            },
            indent=2,
        ),
        encoding="utf-8",
    )

    config = """\
kgs:
  biokg:
    triples: biokg.nt
    format: ntriples
    prefix: http://www.biokg.com/
    description: "BioKG , a Biomedical"
  lmdb:
    triples: lmdb.nt
    format: ntriples
    prefix: http://www.linkedmdb.org/
    description: "LinkedMDB , a Movie"
llm:
  mode: mock
  transcript: transcripts/llm.json
  model: mock-chat
judge:
  mode: mock
  transcript: transcripts/judge.json
  model: mock-judge
caps:
  g: 100
  gn: 50
top_k: 3
concurrency: 4
"""
    (FIXTURES / "config.yaml").write_text(config, encoding="utf-8")

    (FIXTURES / "judge_pairs.json").write_text(
        json.dumps(
            [
                ["Organic", "Organic"],
                ["organic", "Organic"],
                ["Non-Organic", "Organic"],
                ["soccer  player", "Soccer Player"],
            ],
            indent=2,
        ),
        encoding="utf-8",
    )

    print(f"biokg: {len(stores['biokg'])} triples; lmdb: {len(stores['lmdb'])} triples")
    print(f"suite50: {len(all_records)} records; suite10: {len(suite10)} records")
    print(f"llm transcript rules: {len(rules)}")


if __name__ == "__main__":
    main()
