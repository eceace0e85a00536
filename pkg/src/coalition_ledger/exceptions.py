"""
Defines the exception hierarchy. Each family carries the exit code the
command-line interface reports for it.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from coalition_ledger.pruner import EvaluationLog


class CoalitionLedgerError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class InputError(CoalitionLedgerError, ValueError):
    """The supplied game, configuration or arguments are invalid."""

    exit_code = 2


class UnknownPlayer(InputError):
    def __init__(self, name: str):
        super().__init__(f"Unknown player: {name!r}")
        self.name = name


class DuplicateCoalition(InputError):
    def __init__(self, key: str):
        super().__init__(f"Duplicate coalition key after canonicalisation: {key!r}")
        self.key = key


class GameFormatError(InputError):
    pass


class MissingSingleton(InputError):
    def __init__(self, player: str):
        super().__init__(f"Missing singleton coalition for player {player!r}")
        self.player = player


class MissingGrandCoalition(InputError):
    pass


class IncompleteTable(InputError):
    def __init__(self, missing: list[str]):
        shown = ", ".join(f"{{{key}}}" for key in missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        super().__init__(f"Value table is missing coalitions: {shown}{more}")
        self.missing = missing


class TooManyPlayers(InputError):
    pass


class MissingWeights(InputError):
    pass


class DegenerateWeights(InputError):
    pass


class MismatchedGames(InputError):
    pass


class ReportFormatError(InputError):
    pass


class BadSpec(InputError):
    pass


class OracleError(CoalitionLedgerError, RuntimeError):
    """A value oracle could not produce v(S)."""

    exit_code = 3

    def __init__(self, message: str, coalition: str = ""):
        super().__init__(message)
        self.coalition = coalition
        self.partial_log: EvaluationLog | None = None


class OracleMiss(OracleError):
    def __init__(self, coalition: str):
        super().__init__(f"No value available for coalition {{{coalition}}}", coalition)


class OracleProcessFailure(OracleError):
    def __init__(self, coalition: str, detail: str):
        super().__init__(
            f"Oracle command failed for coalition {{{coalition}}}: {detail}", coalition
        )
        self.detail = detail


class SolverError(CoalitionLedgerError, RuntimeError):
    """The linear program could not be solved to a certified optimum."""

    exit_code = 4


class NumericalBreakdown(SolverError):
    pass


class LpStatusError(SolverError):
    pass
