"""
Contains utility code and constants used throughout the project.
"""

import logging
import os

from coalition_ledger.exceptions import InputError

logger = logging.getLogger("coalition_ledger")

MAX_PLAYERS = 64
# Exact Shapley walks a 2^n table.
MAX_SHAPLEY_PLAYERS = 24
# The exact least-core reference in a threshold sweep enumerates every coalition.
MAX_REFERENCE_PLAYERS = 20

EFFICIENCY_TOLERANCE = 1e-9
BINDING_TOLERANCE = 1e-6
NEAR_BINDING_BAND = 0.05
ZERO_PAYOFF_TOLERANCE = 1e-9
# Two allocations describe the same game when their totals agree this closely.
GAME_MATCH_TOLERANCE = 1e-7
TABLE_DECIMALS = 6

# Threshold guidelines: near-zero for a handful of high-stakes participants,
# moderate for general networks, high for very large federations.
PRUNING_PRESETS: dict[str, tuple[float, float]] = {
    "exact": (0.0, 0.0),
    "balanced": (0.1, 0.1),
    "coarse": (0.15, 0.15),
}

METHOD_ORDER = ["least_core", "shapley", "leave_one_out", "proportional"]
METHOD_ALIASES = {"loo": "leave_one_out", "lc": "least_core", "sv": "shapley"}

THREADS_ENV_VAR = "COALITION_LEDGER_THREADS"
DB_ENV_VAR = "COALITION_LEDGER_DB"
DEFAULT_DB_URL = "sqlite:///coalition_runs.db"


def get_thread_count() -> int:
    """
    Reads the oracle parallelism cap from the environment.

    Returns:
        The number of worker threads, at least 1.
    """
    raw = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        threads = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}")
    if threads < 1:
        raise InputError(f"{THREADS_ENV_VAR} must be at least 1, got {threads}")
    return threads


def get_database_url() -> str:
    """Return the run-history database URL."""
    return os.environ.get(DB_ENV_VAR, DEFAULT_DB_URL)


def default_player_names(n: int) -> list[str]:
    """Name synthetic players ``a``, ``b``, ... or ``p1`` ... ``pn`` past 26."""
    if n <= 26:
        return [chr(ord("a") + i) for i in range(n)]
    return [f"p{i + 1}" for i in range(n)]


def normalise_method(name: str) -> str:
    """
    Maps a user-supplied method name onto its canonical tag.

    Args:
        name: A method tag or alias such as ``loo``.

    Returns:
        One of the tags in ``METHOD_ORDER``.
    """
    tag = METHOD_ALIASES.get(name.strip().lower(), name.strip().lower())
    if tag not in METHOD_ORDER:
        raise InputError(f"Unknown allocation method: {name}")
    return tag
