"""Command-line surface: config parsing, dataset and checkpoint
persistence, and the gen/train/eval/baseline/rewrite commands."""

from rewriteopt.cli.errors import ConfigError, DataError
from rewriteopt.cli.main import main

__all__ = ["ConfigError", "DataError", "main"]
