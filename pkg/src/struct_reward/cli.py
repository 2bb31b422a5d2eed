"""Command-line client for the scoring service.

Commands post file contents to the service endpoints and write the returned
reports verbatim. By default an in-process service instance is used; point
--server (or STRUCT_REWARD_URL) at a running instance for remote use.

Exit codes: 0 success, 1 input/config error, 2 external-service failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

ENV_SERVER_URL = "STRUCT_REWARD_URL"

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_SERVICE_ERROR = 2


def _open_client(server: str | None):
    server = server or os.environ.get(ENV_SERVER_URL)
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=300.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _read_file(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_config_payload(path: str | None):
    """Parse the config file client-side only to ship it; validation is server-side."""
    if path is None:
        return None
    try:
        return json.loads(_read_file(path))
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid config JSON: {exc.msg} (line {exc.lineno})") from exc


def _post(client, url: str, payload: dict):
    """Returns (exit_code, response_json). Non-zero code means failure."""
    response = client.post(url, json=payload)
    if response.status_code == 200:
        return EXIT_OK, response.json()
    try:
        detail = response.json().get("detail", response.text)
    except ValueError:
        detail = response.text
    if not isinstance(detail, str):
        detail = json.dumps(detail)
    print(detail, file=sys.stderr)
    if response.status_code == 502:
        return EXIT_SERVICE_ERROR, None
    return EXIT_INPUT_ERROR, None


def _write_out(out: str | None, text: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_score(args) -> int:
    with _open_client(args.server) as client:
        config = _load_config_payload(args.config)
        if args.workers is not None:
            if config is None:
                from .config import RunConfig, run_config_to_dict

                config = run_config_to_dict(RunConfig())
            config["workers"] = args.workers
        judge_mode = args.judge
        if judge_mode is None:
            enabled = bool(config and config.get("reward", {}).get("judge_enabled"))
            judge_mode = "live" if enabled else "off"
        payload = {
            "dataset_text": _read_file(args.dataset),
            "config": config,
            "judge_mode": judge_mode,
            "judge_fail_zero": args.judge_fail_zero,
            "explain": args.explain,
            "expected_dialect": args.dialect,
        }
        code, body = _post(client, "/v1/score", payload)
        if code != EXIT_OK:
            return code
        _write_out(args.out, body["report"])
        return EXIT_OK


def cmd_advantages(args) -> int:
    with _open_client(args.server) as client:
        payload = {
            "scores_text": _read_file(args.scores),
            "config": _load_config_payload(args.config),
        }
        code, body = _post(client, "/v1/advantages", payload)
        if code != EXIT_OK:
            return code
        _write_out(args.out, body["report"])
        return EXIT_OK


def cmd_eval(args) -> int:
    with _open_client(args.server) as client:
        payload = {
            "dataset_text": _read_file(args.dataset),
            "predictions_text": _read_file(args.predictions),
            "config": _load_config_payload(args.config),
            "exe": args.exe,
        }
        code, body = _post(client, "/v1/eval", payload)
        if code != EXIT_OK:
            return code
        _write_out(args.out, body["report"])
        return EXIT_OK


def cmd_ged(args) -> int:
    with _open_client(args.server) as client:
        payload = {
            "gold": args.gold,
            "pred": args.pred,
            "config": _load_config_payload(args.config),
        }
        code, body = _post(client, "/v1/ged", payload)
        if code != EXIT_OK:
            return code
        sys.stdout.write(body["report"])
        return EXIT_OK


def cmd_validate(args) -> int:
    with _open_client(args.server) as client:
        payload = {
            "dataset_text": _read_file(args.dataset),
            "expected_dialect": args.dialect,
        }
        code, body = _post(client, "/v1/validate", payload)
        if code != EXIT_OK:
            return code
        if body["ok"]:
            counts = body["counts"]
            print(f"records: {counts['records']} "
                  f"(sql: {counts['sql']}, cypher: {counts['cypher']})")
            return EXIT_OK
        for violation in body["violations"][:20]:
            print(f"line {violation['line']}: {violation['message']}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="struct-reward",
        description="Reward scoring, GRPO advantages and evaluation for "
                    "text-to-SQL / text-to-Cypher.",
    )
    parser.add_argument("--server", default=None,
                        help=f"service URL (default: in-process; env {ENV_SERVER_URL})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score candidate completions against gold queries")
    p.add_argument("dataset")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="-")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--dialect", choices=["sql", "cypher"], default=None)
    p.add_argument("--explain", action="store_true")
    p.add_argument("--judge", choices=["live", "mock", "off"], default=None)
    p.add_argument("--judge-fail-zero", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("advantages", help="group-relative advantages from a score report")
    p.add_argument("scores")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_advantages)

    p = sub.add_parser("eval", help="exact match / BLEU / execution metrics")
    p.add_argument("dataset")
    p.add_argument("predictions")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default="-")
    p.add_argument("--exe", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ged", help="debug the graph-edit-distance reward for two queries")
    p.add_argument("gold")
    p.add_argument("pred")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_ged)

    p = sub.add_parser("validate", help="schema-check a dataset file")
    p.add_argument("dataset")
    p.add_argument("--dialect", choices=["sql", "cypher"], default=None)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
