"""
Synthetic value functions for tests and experiments: additive games,
unanimity games and concave coverage games that mimic the diminishing
marginal gains seen when federations grow.
"""

from __future__ import annotations

import math
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from coalition_ledger.exceptions import BadSpec
from coalition_ledger.game import Coalition
from coalition_ledger.oracles.base import ValueOracle
from coalition_ledger.utils import MAX_PLAYERS, default_player_names

SYNTHETIC_KINDS = ["additive", "unanimity", "coverage"]

DEFAULT_ITEMS_PER_PLAYER = 4
DEFAULT_DENSITY = 0.35
DEFAULT_ALPHA = 1.0


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Describes a synthetic game.

    Attributes:
        kind: One of ``additive``, ``unanimity`` or ``coverage``.
        seed: Seed for generated coverage instances.
        params: Kind-specific parameters:
            additive: ``weights`` (one per player);
            unanimity: ``carrier`` (player indices);
            coverage: ``alpha`` in (0, 1] and either explicit ``items`` (one
            list of item labels per player, optional ``item_weights`` by
            label) or generated ``num_items`` and ``density``.
    """

    kind: str
    seed: int = 0
    params: Mapping[str, Any] = field(default_factory=dict)


class SyntheticOracle(ValueOracle):
    """
    Deterministic oracle over a synthetic value function. The same spec and
    seed always produce the same game.

    Attributes:
        spec: The spec this oracle was built from.
    """

    def __init__(self, spec: SyntheticSpec, n: int, names: list[str] | None = None):
        if not 1 <= n <= MAX_PLAYERS:
            raise BadSpec(f"A synthetic game needs 1 to {MAX_PLAYERS} players, got {n}")
        super().__init__(names or default_player_names(n))
        if len(self.names) != n:
            raise BadSpec(f"Expected {n} player names, got {len(self.names)}")
        self.spec = spec
        match spec.kind:
            case "additive":
                self._weights = _additive_weights(spec, n)
            case "unanimity":
                self._carrier = _unanimity_carrier(spec, n)
            case "coverage":
                self._membership, self._item_weights = _coverage_instance(spec, n)
                self._total_weight = float(self._item_weights.sum())
                self._alpha = _coverage_alpha(spec)
            case _:
                raise BadSpec(f"Unknown synthetic game kind: {spec.kind!r}")

    def _evaluate(self, coalition: Coalition) -> float:
        match self.spec.kind:
            case "additive":
                return math.fsum(self._weights[i] for i in coalition.members())
            case "unanimity":
                return 1.0 if self._carrier.is_subset(coalition) else 0.0
            case _:
                rows = list(coalition.members())
                covered = self._membership[rows].any(axis=0)
                share = float(self._item_weights[covered].sum()) / self._total_weight
                return share**self._alpha


def _additive_weights(spec: SyntheticSpec, n: int) -> list[float]:
    weights = spec.params.get("weights")
    if weights is None or len(weights) != n:
        raise BadSpec(f"An additive game needs exactly {n} weights")
    values = [float(w) for w in weights]
    if not all(math.isfinite(w) for w in values):
        raise BadSpec("Additive weights must be finite")
    return values


def _unanimity_carrier(spec: SyntheticSpec, n: int) -> Coalition:
    carrier = spec.params.get("carrier")
    if not carrier:
        raise BadSpec("A unanimity game needs a nonempty carrier")
    indices = [int(i) for i in carrier]
    if any(not 0 <= i < n for i in indices):
        raise BadSpec(f"Carrier indices must lie in [0, {n})")
    return Coalition.of(indices)


def _coverage_alpha(spec: SyntheticSpec) -> float:
    alpha = float(spec.params.get("alpha", DEFAULT_ALPHA))
    if not 0.0 < alpha <= 1.0:
        raise BadSpec(f"Coverage exponent alpha must lie in (0, 1], got {alpha}")
    return alpha


def _coverage_instance(spec: SyntheticSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    items = spec.params.get("items")
    if items is not None:
        if len(items) != n:
            raise BadSpec(f"Coverage items must list one item set per player ({n})")
        labels = sorted({label for player_items in items for label in player_items})
        if not labels:
            raise BadSpec("Coverage items must contain at least one item")
        column = {label: j for j, label in enumerate(labels)}
        membership = np.zeros((n, len(labels)), dtype=bool)
        for i, player_items in enumerate(items):
            for label in player_items:
                membership[i, column[label]] = True
        item_weights_by_label = spec.params.get("item_weights", {})
        item_weights = np.array(
            [float(item_weights_by_label.get(label, 1.0)) for label in labels]
        )
    else:
        num_items = int(spec.params.get("num_items", DEFAULT_ITEMS_PER_PLAYER * n))
        density = float(spec.params.get("density", DEFAULT_DENSITY))
        if num_items < 1:
            raise BadSpec("A coverage game needs at least one item")
        if not 0.0 < density <= 1.0:
            raise BadSpec(f"Coverage density must lie in (0, 1], got {density}")
        rng = np.random.default_rng(spec.seed)
        membership = rng.random((n, num_items)) < density
        for i in range(n):
            if not membership[i].any():
                membership[i, rng.integers(num_items)] = True
        for j in range(num_items):
            if not membership[:, j].any():
                membership[rng.integers(n), j] = True
        item_weights = rng.uniform(0.5, 1.5, size=num_items)

    if (item_weights < 0).any() or not np.isfinite(item_weights).all():
        raise BadSpec("Coverage item weights must be finite and non-negative")
    if item_weights.sum() <= 0:
        raise BadSpec("Coverage item weights must not all be zero")
    return membership, item_weights


def synthetic_oracle(
    spec: SyntheticSpec, n: int, names: list[str] | None = None
) -> SyntheticOracle:
    """Build a deterministic oracle for a synthetic game over ``n`` players."""
    return SyntheticOracle(spec, n, names)


_KEY_ALIASES = {"α": "alpha", "items": "num_items"}


def parse_synthetic_spec(text: str) -> tuple[SyntheticSpec, int]:
    """
    Parses the command-line synthetic game grammar.

    Accepted forms are ``additive:0.2,0.3,0.5``, ``unanimity:n=4;carrier=a,b``,
    ``coverage:n=10;seed=7;alpha=0.5`` and ``coverage(seed=7, n=10, α=0.5)``.

    Args:
        text: The spec string.

    Returns:
        The spec and its player count.
    """
    text = text.strip()
    paren = re.fullmatch(r"(\w+)\s*\((.*)\)", text)
    if paren:
        kind, body = paren.group(1), paren.group(2)
        pairs = [part for part in body.split(",") if part.strip()]
    elif ":" in text:
        kind, body = text.split(":", 1)
        pairs = [part for part in body.split(";") if part.strip()]
    else:
        raise BadSpec(f"Cannot parse synthetic spec {text!r}")
    kind = kind.strip().lower()
    if kind not in SYNTHETIC_KINDS:
        raise BadSpec(f"Unknown synthetic game kind: {kind!r}")

    if kind == "additive" and pairs and "=" not in body:
        options: dict[str, str] = {"weights": body}
    else:
        options = {}
        for pair in pairs:
            if "=" not in pair:
                raise BadSpec(f"Expected key=value in synthetic spec, got {pair!r}")
            key, value = pair.split("=", 1)
            key = key.strip().lower()
            options[_KEY_ALIASES.get(key, key)] = value.strip()

    try:
        seed = int(options.pop("seed", "0"))
        if kind == "additive":
            weights = [float(w) for w in options.pop("weights", "").split(",") if w]
            n = int(options.pop("n", str(len(weights))))
            params: dict[str, Any] = {"weights": weights}
        else:
            if "n" not in options:
                raise BadSpec(f"A {kind} spec needs n=<players>")
            n = int(options.pop("n"))
            params = {}
            if kind == "unanimity":
                names = default_player_names(n)
                carrier = [c.strip() for c in options.pop("carrier", "").split(",")]
                params["carrier"] = [
                    names.index(c) if c in names else int(c) for c in carrier if c
                ]
            else:
                casts = (("alpha", float), ("num_items", int), ("density", float))
                for key, cast in casts:
                    if key in options:
                        params[key] = cast(options.pop(key))
    except BadSpec:
        raise
    except ValueError as e:
        raise BadSpec(f"Invalid value in synthetic spec {text!r}: {e}") from e
    if options:
        raise BadSpec(f"Unknown synthetic spec keys: {sorted(options)}")
    return SyntheticSpec(kind, seed, params), n
