"""Error taxonomy for the command-line surface.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure. Configuration errors are problems with the request itself (bad
config file, missing paths, mismatched checkpoint settings); data errors
are problems with file contents (unparseable instances, corrupt
checkpoints); numeric failures come from non-finite losses or gradients.
"""

from __future__ import annotations


class ConfigError(Exception):
    """The request cannot run as configured (exit code 2)."""


class DataError(Exception):
    """An input file exists but its contents are unusable (exit code 3)."""
