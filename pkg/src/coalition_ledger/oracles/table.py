"""Implements the lookup-table oracle backed by a loaded game."""

from coalition_ledger.exceptions import OracleMiss
from coalition_ledger.game import Coalition, Game, value_of
from coalition_ledger.oracles.base import ValueOracle


class TableOracle(ValueOracle):
    """
    Answers queries from a game's stored values. A table cannot synthesise
    values, so a coalition it does not hold is an OracleMiss.

    Attributes:
        game: The game whose table is served.
    """

    def __init__(self, game: Game):
        super().__init__(game.names)
        self.game = game

    def _evaluate(self, coalition: Coalition) -> float:
        if not coalition.fits(self.n):
            raise OracleMiss(f"bits {coalition.bits:#x}")
        value = value_of(self.game, coalition)
        if value is None:
            raise OracleMiss(self.key(coalition))
        return value


def table_oracle(game: Game) -> TableOracle:
    """Wrap a game's value table as an oracle."""
    return TableOracle(game)
