"""`glow` command line tool.

Every subcommand except `serve` is a thin client of the HTTP API: it either
talks to a running server (`--server URL`) or self-hosts the app in-process
from `--config PATH`, so offline mock runs need no daemon.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx


def _add_client_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--server", help="base URL of a running glow service")
    group.add_argument("--config", help="engine config YAML (self-hosted, in-process)")


def _request(args: argparse.Namespace, method: str, path: str, payload: dict | None = None) -> dict:
    if args.server:
        with httpx.Client(base_url=args.server, timeout=600.0) as client:
            resp = client.request(method, path, json=payload)
    else:
        from .service import create_app_from_config

        app = create_app_from_config(args.config)

        async def go() -> httpx.Response:
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(
                transport=transport, base_url="http://glow", timeout=600.0
            ) as client:
                return await client.request(method, path, json=payload)

        resp = asyncio.run(go())
    if resp.status_code != 200:
        try:
            detail = resp.json()
        except json.JSONDecodeError:
            detail = {"error": "HTTPError", "detail": resp.text}
        print(json.dumps(detail, indent=2), file=sys.stderr)
        raise SystemExit(1)
    return resp.json()


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app_from_config

    app = create_app_from_config(args.config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_ask(args: argparse.Namespace) -> int:
    payload = {
        "question": args.question,
        "kg": args.kg,
        "variant": args.variant,
        "top_k": args.top_k,
    }
    out = _request(args, "POST", "/ask", payload)
    print(json.dumps(out, indent=2))
    return 0


def cmd_judge(args: argparse.Namespace) -> int:
    pairs = json.loads(Path(args.pairs).read_text(encoding="utf-8"))
    out = _request(args, "POST", "/judge", {"pairs": pairs})
    print(json.dumps(out, indent=2))
    return 0


def cmd_build_suite(args: argparse.Namespace) -> int:
    template = json.loads(Path(args.template).read_text(encoding="utf-8"))
    payload = {
        "kg": args.kg,
        "template": template,
        "n": args.n,
        "mcc_bucket": args.mcc,
        "seed": args.seed,
    }
    out = _request(args, "POST", "/suite/build", payload)
    lines = "".join(json.dumps(r, sort_keys=True) + "\n" for r in out["records"])
    if args.out:
        Path(args.out).write_text(lines, encoding="utf-8")
        print(f"wrote {len(out['records'])} records to {args.out}")
    else:
        sys.stdout.write(lines)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    from . import bench as bench_mod

    records = bench_mod.load_suite(args.suite)
    payload = {
        "records": [r.to_dict() for r in records],
        "variant": args.variant,
        "runs": args.runs,
        "judge": not args.no_judge,
    }
    out = _request(args, "POST", "/bench/run", payload)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, run in enumerate(out["runs"], start=1):
        (out_dir / f"results_run{i}.jsonl").write_text(
            "".join(json.dumps(r, sort_keys=True) + "\n" for r in run["results"]),
            encoding="utf-8",
        )
        (out_dir / f"report_run{i}.json").write_text(
            json.dumps(run["report"], indent=2), encoding="utf-8"
        )
    if out.get("mean"):
        (out_dir / "report_mean.json").write_text(
            json.dumps(out["mean"], indent=2), encoding="utf-8"
        )
    first = out["runs"][0]["report"]
    print(json.dumps({"overall": first["overall"], "out_dir": str(out_dir)}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glow", description="Open-world KGQA engine")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", required=True)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8600)
    serve.set_defaults(func=cmd_serve)

    ask = sub.add_parser("ask", help="answer one question")
    ask.add_argument("--question", required=True)
    ask.add_argument("--kg", default=None)
    ask.add_argument("--variant", default="gn", choices=["basic", "g", "n", "gn"])
    ask.add_argument("--top-k", type=int, default=None)
    _add_client_args(ask)
    ask.set_defaults(func=cmd_ask)

    judge = sub.add_parser("judge", help="judge predicted/gold pairs from a JSON file")
    judge.add_argument("--pairs", required=True)
    _add_client_args(judge)
    judge.set_defaults(func=cmd_judge)

    build = sub.add_parser("build-suite", help="sample benchmark records for a template")
    build.add_argument("--kg", required=True)
    build.add_argument("--template", required=True, help="template JSON file")
    build.add_argument("--n", type=int, required=True)
    build.add_argument("--mcc", required=True, choices=["2-4", "4-8", "8-16", "16-32", "32+"])
    build.add_argument("--seed", type=int, default=0)
    build.add_argument("--out", default=None)
    _add_client_args(build)
    build.set_defaults(func=cmd_build_suite)

    benchp = sub.add_parser("bench", help="run a suite and write grouped reports")
    benchp.add_argument("--suite", required=True)
    benchp.add_argument("--variant", default="gn", choices=["basic", "g", "n", "gn"])
    benchp.add_argument("--out", required=True)
    benchp.add_argument("--runs", type=int, default=1)
    benchp.add_argument("--no-judge", action="store_true")
    _add_client_args(benchp)
    benchp.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
