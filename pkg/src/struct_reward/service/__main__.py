"""Run the service: python -m struct_reward.service [--host H] [--port P] [--config F]."""
from __future__ import annotations

import argparse

import uvicorn

from ..config import load_run_config
from .app import create_app


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="struct-reward-service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--config", default=None, help="default run config (JSON)")
    args = parser.parse_args(argv)
    default = load_run_config(args.config) if args.config else None
    app = create_app(default)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
