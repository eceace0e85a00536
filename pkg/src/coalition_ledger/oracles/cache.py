"""
Persistent value cache. A filled cache is itself a loadable game file, so the
output of an evaluation run feeds a later solve directly.
"""

from __future__ import annotations

import threading
from pathlib import Path

from coalition_ledger.exceptions import GameFormatError
from coalition_ledger.game import (
    Coalition,
    Game,
    game_to_dict,
    load_game,
    write_json_atomic,
)


class CacheFile:
    """
    A game-format JSON file mapping canonical coalition keys to values.

    Attributes:
        path: Where the cache lives on disk.
        names: The roster the keys are written against.
        entries: The cached values.
    """

    def __init__(self, path: str | Path, names: list[str] | tuple[str, ...]):
        self.path = Path(path)
        self.names = tuple(names)
        self.entries: dict[Coalition, float] = {}
        self._lock = threading.Lock()
        if self.path.exists():
            cached = load_game(self.path)
            if cached.names != self.names:
                raise GameFormatError(
                    f"Cache {self.path} was written for players {list(cached.names)}, "
                    f"not {list(self.names)}"
                )
            self.entries.update(cached.values)

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, coalition: Coalition) -> float | None:
        with self._lock:
            return self.entries.get(coalition)

    def record(self, coalition: Coalition, value: float, flush: bool = True) -> None:
        """Insert a value and, by default, persist the whole cache."""
        with self._lock:
            self.entries[coalition] = value
            if flush:
                self._write()

    def flush(self) -> None:
        with self._lock:
            self._write()

    def as_game(self) -> Game:
        with self._lock:
            return Game(self.names, dict(self.entries))

    def _write(self) -> None:
        write_json_atomic(self.path, game_to_dict(Game(self.names, self.entries)))
