"""Command-line entry point.

Usage::

    rewriteopt <domain> <command> --config FILE [--seed S] [--threads N] [--out DIR]

with ``domain`` one of ``expr`` / ``jobsched`` / ``vrp`` and ``command`` one
of ``gen`` / ``train`` / ``eval`` / ``rewrite`` / ``baseline``. The config
file is a JSON object; ``--seed`` and ``--out`` override its ``seed`` and
``out`` entries. All artifacts land in the output directory and are
byte-identical across runs with the same seed when ``--threads 1`` (the
default). Logs go to stderr; the ``REWRITEOPT_LOG`` environment variable
sets verbosity (``debug``, ``info``, ``warning``, ``error``, ``quiet``).

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from rewriteopt.cli.commands import (
    DOMAINS,
    cmd_baseline,
    cmd_eval,
    cmd_gen,
    cmd_rewrite,
    cmd_train,
)
from rewriteopt.cli.errors import ConfigError, DataError
from rewriteopt.train.loop import NonFiniteLossError

_COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "eval": cmd_eval,
    "rewrite": cmd_rewrite,
    "baseline": cmd_baseline,
}

_TOP_LEVEL_KEYS = {
    "seed",
    "out",
    "dataset",
    "checkpoint",
    "resume",
    "encoder",
    "model",
    "gen",
    "train",
    "rewrite",
    "eval_rewrite",
    "baseline",
    "split",
    "instance",
    "replay",
}

_LOG_LEVELS = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
    "quiet": logging.ERROR,
}

logger = logging.getLogger("rewriteopt")


def _configure_logging() -> None:
    name = os.environ.get("REWRITEOPT_LOG", "info").strip().lower()
    level = _LOG_LEVELS.get(name, logging.INFO)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    logger.handlers.clear()
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {p} does not exist")
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"config file {p} must hold a JSON object")
    unknown = sorted(set(obj) - _TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    return obj


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rewriteopt",
        description="Learned local rewriting for combinatorial optimization.",
    )
    parser.add_argument("domain", choices=DOMAINS)
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument(
        "--threads", type=int, default=1, help="rollout threads (1 = reproducible)"
    )
    parser.add_argument("--out", default=None, help="override config output dir")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    _configure_logging()
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        config = _load_config(args.config)
        seed = args.seed if args.seed is not None else int(config.get("seed", 0))
        out = args.out if args.out is not None else config.get("out")
        if out is None:
            raise ConfigError("no output directory: pass --out or set 'out' in config")
        _COMMANDS[args.command](
            args.domain, config, seed, Path(out), args.threads, logger.info
        )
        return 0
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return 2
    except DataError as exc:
        logger.error("data error: %s", exc)
        return 3
    except NonFiniteLossError as exc:
        logger.error("numeric failure: %s", exc)
        logger.error(
            "offending episode: %s", json.dumps(exc.trajectory_dump, sort_keys=True)
        )
        return 4
    except FloatingPointError as exc:
        logger.error("numeric failure: %s", exc)
        return 4


if __name__ == "__main__":
    sys.exit(main())
