import json

import pytest

from glowqa.cli import main

YO_QUESTION = "Predict the chemical kingdom for the drug Yohimbine from the BioKG knowledge graph."


def _config_args(fixtures_dir) -> list[str]:
    return ["--config", str(fixtures_dir / "config.yaml")]


def test_ask_command(fixtures_dir, capsys):
    rc = main(
        ["ask", "--question", YO_QUESTION, "--variant", "gn", "--top-k", "3"]
        + _config_args(fixtures_dir)
    )
    assert rc == 0
    body = json.loads(capsys.readouterr().out)
    assert body["prediction"] == "Organic"
    # The fixture config has no GNN endpoint, so GN degrades to G.
    assert body["degraded"] is True
    assert body["effective_variant"] == "g"
    assert body["rc_triples"] == [["Yohimbine", "DDI", "DB13677"]]


def test_judge_command(fixtures_dir, capsys):
    rc = main(["judge", "--pairs", str(fixtures_dir / "judge_pairs.json")] + _config_args(fixtures_dir))
    assert rc == 0
    body = json.loads(capsys.readouterr().out)
    assert body["verdicts"] == [[1, 1], [1, 1], [0, 0], [1, 1]]


def test_build_suite_command(fixtures_dir, tmp_path, capsys):
    out_file = tmp_path / "suite.jsonl"
    rc = main(
        [
            "build-suite",
            "--kg",
            "biokg",
            "--template",
            str(fixtures_dir / "templates" / "drug_kingdom.json"),
            "--n",
            "3",
            "--mcc",
            "2-4",
            "--seed",
            "5",
            "--out",
            str(out_file),
        ]
        + _config_args(fixtures_dir)
    )
    assert rc == 0
    lines = out_file.read_text().splitlines()
    assert len(lines) == 3
    record = json.loads(lines[0])
    assert record["gold_answer"] in record["choices"]


def test_bench_command(fixtures_dir, tmp_path, capsys):
    out_dir = tmp_path / "bench"
    rc = main(
        [
            "bench",
            "--suite",
            str(fixtures_dir / "suite10.jsonl"),
            "--variant",
            "basic",
            "--out",
            str(out_dir),
        ]
        + _config_args(fixtures_dir)
    )
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["overall"]["em_accuracy"] == 70.0
    report = json.loads((out_dir / "report_run1.json").read_text())
    assert report["overall"]["total"] == 10
    results = (out_dir / "results_run1.jsonl").read_text().splitlines()
    assert len(results) == 10


def test_cli_error_exit(fixtures_dir, capsys):
    with pytest.raises(SystemExit) as err:
        main(
            ["ask", "--question", "gibberish question", "--variant", "basic"]
            + _config_args(fixtures_dir)
        )
    assert err.value.code == 1
    assert "error" in capsys.readouterr().err.lower()
