"""
Defines the value-oracle interface: any source that answers v(S) on demand,
from a lookup table, an external training job or a synthetic generator.
"""

import threading
from abc import ABC, abstractmethod

from coalition_ledger.game import Coalition
from coalition_ledger.utils import logger

ORACLE_KINDS = ["table", "command", "synthetic"]


class ValueOracle(ABC):
    """
    Abstract base class for a value oracle.

    Answers are memoised for the lifetime of the oracle: a repeated query
    returns the identical value and does not count another trial. Queries may
    arrive from several threads; evaluation runs outside the lock so slow
    sources can overlap.

    Attributes:
        names: The player roster; index i names player i.
        trials_used: The number of distinct coalitions actually evaluated.
    """

    def __init__(self, names: list[str] | tuple[str, ...]):
        self.names = tuple(names)
        self.trials_used = 0
        self._memo: dict[Coalition, float] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return len(self.names)

    def key(self, coalition: Coalition) -> str:
        return coalition.key(self.names)

    def query(self, coalition: Coalition) -> float:
        """
        Return v(S) for a coalition.

        Args:
            coalition: The coalition to evaluate.

        Returns:
            The coalition's value; 0.0 for the empty coalition.
        """
        if coalition.is_empty:
            return 0.0
        with self._lock:
            cached = self._memo.get(coalition)
        if cached is not None:
            return cached

        value = self._evaluate(coalition)

        with self._lock:
            if coalition in self._memo:
                return self._memo[coalition]
            self._memo[coalition] = value
            self.trials_used += 1
            trial = self.trials_used
        self._record(coalition, value, trial)
        return value

    def known_values(self) -> dict[Coalition, float]:
        """Snapshot of every value answered so far."""
        with self._lock:
            return dict(self._memo)

    @abstractmethod
    def _evaluate(self, coalition: Coalition) -> float:
        """
        Produce v(S) for a nonempty coalition not seen before.

        Args:
            coalition: The coalition to evaluate.

        Returns:
            The coalition's value.
        """
        raise NotImplementedError("Method '_evaluate' must be implemented.")

    def _record(self, coalition: Coalition, value: float, trial: int) -> None:
        """Hook called once per new trial, after the memo is updated."""
        logger.debug("trial %d: {%s} = %r", trial, self.key(coalition), value)
