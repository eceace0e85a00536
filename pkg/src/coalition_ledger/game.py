"""
Foundational value types for coalition games: coalitions as bitsets over
player indices, characteristic-function tables and payoff allocations, plus
the JSON game file format shared by every other module.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any

from coalition_ledger.exceptions import (
    DuplicateCoalition,
    GameFormatError,
    MissingGrandCoalition,
    UnknownPlayer,
)
from coalition_ledger.utils import MAX_PLAYERS


@dataclass(frozen=True, order=True, slots=True)
class Coalition:
    """
    A set of players encoded as a bitset: bit i is set iff player i belongs
    to the coalition.
    """

    bits: int = 0

    def __post_init__(self) -> None:
        if self.bits < 0:
            raise ValueError(f"Coalition bits must be non-negative, got {self.bits}")

    @classmethod
    def of(cls, indices: Iterable[int]) -> Coalition:
        bits = 0
        for index in indices:
            if index < 0:
                raise ValueError(f"Player index must be non-negative, got {index}")
            bits |= 1 << index
        return cls(bits)

    @classmethod
    def grand(cls, n: int) -> Coalition:
        return cls((1 << n) - 1)

    @property
    def is_empty(self) -> bool:
        return self.bits == 0

    @property
    def max_index(self) -> int:
        """Highest member index, or -1 for the empty coalition."""
        return self.bits.bit_length() - 1

    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.bits.bit_length()) if self.bits >> i & 1)

    def with_player(self, index: int) -> Coalition:
        return Coalition(self.bits | (1 << index))

    def without_player(self, index: int) -> Coalition:
        return Coalition(self.bits & ~(1 << index))

    def canonical_parent(self) -> Coalition:
        """The coalition minus its highest-indexed member."""
        if self.is_empty:
            raise ValueError("The empty coalition has no parent")
        return self.without_player(self.max_index)

    def is_subset(self, other: Coalition) -> bool:
        return self.bits & ~other.bits == 0

    def fits(self, n: int) -> bool:
        """Whether every member index is below ``n``."""
        return self.bits >> n == 0

    def key(self, names: Iterable[str]) -> str:
        """Render as the comma-joined canonical key used in game files."""
        roster = list(names)
        return ",".join(roster[i] for i in self.members())

    def __contains__(self, index: object) -> bool:
        return isinstance(index, int) and index >= 0 and bool(self.bits >> index & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members())

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __or__(self, other: Coalition) -> Coalition:
        return Coalition(self.bits | other.bits)


EMPTY = Coalition(0)


@dataclass(frozen=True)
class Game:
    """
    A characteristic-function game.

    Attributes:
        names: The distinct player names; index i names player i.
        values: Map from nonempty coalition to its value v(S). v(∅) = 0 is a
            convention and is never stored.
        weights: Optional non-negative per-player weights such as data
            volumes, used by the proportional baseline.
    """

    names: tuple[str, ...]
    values: Mapping[Coalition, float]
    weights: tuple[float, ...] | None = None
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        names = tuple(self.names)
        if not 1 <= len(names) <= MAX_PLAYERS:
            raise GameFormatError(
                f"A game needs between 1 and {MAX_PLAYERS} players, got {len(names)}"
            )
        if len(set(names)) != len(names):
            raise GameFormatError("Player names must be distinct")
        for name in names:
            if not name or "," in name or name != name.strip():
                raise GameFormatError(f"Invalid player name: {name!r}")
        n = len(names)
        values: dict[Coalition, float] = {}
        for coalition, value in self.values.items():
            if coalition.is_empty:
                raise GameFormatError("The empty coalition must not carry a value")
            if not coalition.fits(n):
                raise GameFormatError(
                    f"Coalition bits {coalition.bits:#x} reference players beyond {n}"
                )
            if not math.isfinite(value):
                raise GameFormatError(f"Value for coalition {coalition} is not finite")
            values[coalition] = float(value)
        if self.weights is not None:
            weights = tuple(float(w) for w in self.weights)
            if len(weights) != n:
                raise GameFormatError(f"Expected {n} weights, got {len(weights)}")
            if any(not math.isfinite(w) or w < 0 for w in weights):
                raise GameFormatError("Weights must be finite and non-negative")
            object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", MappingProxyType(values))
        object.__setattr__(
            self, "_index", MappingProxyType({name: i for i, name in enumerate(names)})
        )

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def grand_coalition(self) -> Coalition:
        return Coalition.grand(self.n)

    def index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownPlayer(name) from None

    def key(self, coalition: Coalition) -> str:
        return coalition.key(self.names)

    def with_values(self, values: Mapping[Coalition, float]) -> Game:
        """Return a game over the same roster and weights with other values."""
        return Game(self.names, values, self.weights)


@dataclass(frozen=True)
class Allocation:
    """
    A payoff vector over the players of a game.

    Attributes:
        phi: The payoff of each player, in the same units as the game values.
        method: The tag of the method that produced it.
    """

    phi: tuple[float, ...]
    method: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi", tuple(float(p) for p in self.phi))

    @property
    def total(self) -> float:
        return math.fsum(self.phi)


def coalition_from_names(names: Iterable[str], game: Game) -> Coalition:
    """
    Builds the coalition containing exactly the named players.

    Args:
        names: Player names in any order; duplicates collapse.
        game: The game whose roster resolves the names.

    Returns:
        The corresponding coalition.
    """
    return Coalition.of(game.index_of(name) for name in names)


def coalition_names(coalition: Coalition, game: Game) -> list[str]:
    """Member names in roster order."""
    return [game.names[i] for i in coalition.members()]


def value_of(game: Game, coalition: Coalition) -> float | None:
    """
    Looks up v(S).

    Args:
        game: The game to read from.
        coalition: The coalition whose value is wanted.

    Returns:
        0.0 for the empty coalition, the stored value otherwise, or None when
        the coalition was never evaluated.
    """
    if coalition.is_empty:
        return 0.0
    return game.values.get(coalition)


def grand_value(game: Game) -> float:
    """Return v(D), raising if the game does not carry it."""
    value = value_of(game, game.grand_coalition)
    if value is None:
        raise MissingGrandCoalition(
            "Game has no value for the grand coalition "
            f"{{{game.key(game.grand_coalition)}}}"
        )
    return value


def validate_complete(game: Game) -> bool:
    """Whether the game stores a value for every nonempty coalition."""
    return len(game.values) == (1 << game.n) - 1 and all(
        c.fits(game.n) and not c.is_empty for c in game.values
    )


def missing_coalitions(game: Game) -> list[Coalition]:
    """List the nonempty coalitions absent from the table, by bitmask."""
    return [
        Coalition(bits)
        for bits in range(1, 1 << game.n)
        if Coalition(bits) not in game.values
    ]


def missing_singletons(game: Game) -> list[str]:
    """Names of players whose singleton coalition has no value."""
    return [
        name
        for i, name in enumerate(game.names)
        if Coalition.of([i]) not in game.values
    ]


def parse_coalition_key(key: str, game: Game) -> Coalition:
    """Parse a comma-joined key; members are sorted and deduplicated."""
    members = [part.strip() for part in key.split(",")] if key.strip() else []
    return coalition_from_names(members, game)


def _reject_duplicate_keys(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    seen: dict[str, Any] = {}
    for key, value in pairs:
        if key in seen:
            raise DuplicateCoalition(key)
        seen[key] = value
    return seen


def _as_number(raw: Any, context: str) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise GameFormatError(f"{context} must be a number, got {raw!r}")
    value = float(raw)
    if not math.isfinite(value):
        raise GameFormatError(f"{context} must be finite, got {raw!r}")
    return value


def game_from_dict(data: Any) -> Game:
    """
    Builds a game from the decoded JSON game format.

    Args:
        data: A mapping with ``players``, ``values`` and optional ``weights``.

    Returns:
        The validated game.
    """
    if not isinstance(data, dict):
        raise GameFormatError("A game file must hold a JSON object")
    players = data.get("players")
    if not isinstance(players, list) or not all(isinstance(p, str) for p in players):
        raise GameFormatError("'players' must be a list of player-name strings")
    raw_values = data.get("values", {})
    if not isinstance(raw_values, dict):
        raise GameFormatError("'values' must be an object keyed by coalition")
    raw_weights = data.get("weights")
    weights = None
    if raw_weights is not None:
        if not isinstance(raw_weights, list):
            raise GameFormatError("'weights' must be a list of numbers")
        weights = tuple(_as_number(w, "weight") for w in raw_weights)

    roster = Game(tuple(players), {}, weights)
    values: dict[Coalition, float] = {}
    for key, raw in raw_values.items():
        coalition = parse_coalition_key(key, roster)
        value = _as_number(raw, f"Value of {{{key}}}")
        if coalition.is_empty:
            if value != 0.0:
                raise GameFormatError("v(∅) is fixed at 0 and cannot be overridden")
            continue
        if coalition in values:
            raise DuplicateCoalition(roster.key(coalition))
        values[coalition] = value
    return roster.with_values(values)


def game_to_dict(game: Game) -> dict[str, Any]:
    """Encode a game in the JSON game format, keys ordered by bitmask."""
    data: dict[str, Any] = {
        "players": list(game.names),
        "values": {game.key(c): v for c, v in sorted(game.values.items())},
    }
    if game.weights is not None:
        data["weights"] = list(game.weights)
    return data


def load_game(path: str | Path) -> Game:
    """
    Loads a game file.

    Args:
        path: Path to a UTF-8 JSON game file.

    Returns:
        The validated game.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise GameFormatError(f"Cannot read game file {path}: {e}") from e
    try:
        data = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as e:
        raise GameFormatError(f"Game file {path} is not valid JSON: {e}") from e
    return game_from_dict(data)


def write_json_atomic(path: str | Path, payload: Any) -> None:
    """Write JSON through a temporary file in the same directory, then rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(
        dir=target.parent, prefix=f".{target.name}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2)
            handle.write("\n")
        os.replace(tmp_name, target)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def save_game(path: str | Path, game: Game) -> None:
    """Write a game file atomically."""
    write_json_atomic(path, game_to_dict(game))
