"""
Wires value sources, the pruner and the allocators into the end-to-end runs
behind each command.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field
from typing import Any

from coalition_ledger.allocator import (
    LeastCoreResult,
    compare,
    leave_one_out,
    leave_one_out_game,
    materialize_game,
    proportional,
    shapley_exact,
    solve_least_core,
)
from coalition_ledger.exceptions import (
    IncompleteTable,
    InputError,
    MissingSingleton,
    TooManyPlayers,
)
from coalition_ledger.game import (
    Allocation,
    Coalition,
    Game,
    grand_value,
    load_game,
    missing_coalitions,
    missing_singletons,
    validate_complete,
)
from coalition_ledger.oracles import (
    CacheFile,
    ValueOracle,
    command_oracle,
    parse_synthetic_spec,
    synthetic_oracle,
    table_oracle,
)
from coalition_ledger.pruner import EvaluationLog, PruneConfig, prune_enumerate
from coalition_ledger.report import build_report
from coalition_ledger.utils import (
    MAX_SHAPLEY_PLAYERS,
    PRUNING_PRESETS,
    logger,
    normalise_method,
)


@dataclass
class RunConfig:
    """
    Everything one command run needs.

    Attributes:
        game_path: A game file to read values from.
        oracle_cmd: An external command serving values, split with shell rules.
        cache_path: Persistent cache for the command oracle.
        players: Roster for the command oracle.
        synthetic: A synthetic game spec such as ``coverage:n=10;seed=7``.
        t1: Explicit diminishing-returns threshold; overrides the preset.
        t2: Explicit performance-ceiling threshold; overrides the preset.
        preset: One of ``PRUNING_PRESETS``.
        methods: Allocation methods to run.
        full: Treat the source as a complete table and skip pruning.
        weights: Proportional weights overriding any in the game file.
        threads: Maximum concurrent oracle queries.
    """

    game_path: str | None = None
    oracle_cmd: str | None = None
    cache_path: str | None = None
    players: list[str] | None = None
    synthetic: str | None = None
    t1: float | None = None
    t2: float | None = None
    preset: str | None = None
    methods: list[str] = field(default_factory=lambda: ["least_core"])
    full: bool = False
    weights: list[float] | None = None
    threads: int | None = None

    def __post_init__(self) -> None:
        sources = [self.game_path, self.oracle_cmd, self.synthetic]
        if sum(source is not None for source in sources) != 1:
            raise InputError(
                "Configure exactly one value source: a game file, "
                "an oracle command or a synthetic spec"
            )
        if self.oracle_cmd is not None and not self.players:
            raise InputError("An oracle command needs the player roster")
        if self.preset is not None and self.preset not in PRUNING_PRESETS:
            raise InputError(
                f"Unknown preset {self.preset!r}; choose from {list(PRUNING_PRESETS)}"
            )
        methods = [normalise_method(m) for m in self.methods]
        if not methods:
            raise InputError("Select at least one allocation method")
        self.methods = list(dict.fromkeys(methods))

    @property
    def source(self) -> str:
        if self.game_path is not None:
            return "table"
        if self.oracle_cmd is not None:
            return "command"
        return "synthetic"

    def thresholds(self) -> tuple[float, float]:
        """Explicit thresholds win; otherwise the preset's, else exact."""
        base = PRUNING_PRESETS[self.preset or "exact"]
        t1 = self.t1 if self.t1 is not None else base[0]
        t2 = self.t2 if self.t2 is not None else base[1]
        return t1, t2


@dataclass
class ValueSource:
    """
    An opened value source.

    Attributes:
        oracle: Answers v(S) on demand.
        game: The loaded game when the source is a file.
        weights: Proportional weights, if any were supplied.
        cache: The command oracle's cache, if any.
    """

    oracle: ValueOracle
    game: Game | None = None
    weights: tuple[float, ...] | None = None
    cache: CacheFile | None = None

    @property
    def names(self) -> tuple[str, ...]:
        return self.oracle.names

    def v_grand(self) -> float:
        if self.game is not None:
            return grand_value(self.game)
        return self.oracle.query(Coalition.grand(self.oracle.n))


def create_oracle(config: RunConfig) -> ValueSource:
    """
    Opens the value source a configuration names.

    Args:
        config: The run configuration.

    Returns:
        The oracle plus whatever else the source carries.
    """
    weights = tuple(config.weights) if config.weights is not None else None
    match config.source:
        case "table":
            game = load_game(str(config.game_path))
            return ValueSource(table_oracle(game), game, weights or game.weights)
        case "command":
            names = list(config.players or [])
            # Roster errors surface before any trial is spent.
            Game(tuple(names), {})
            command = shlex.split(str(config.oracle_cmd))
            if not command:
                raise InputError("The oracle command is empty")
            cache = CacheFile(config.cache_path, names) if config.cache_path else None
            oracle = command_oracle(command, names, cache)
            return ValueSource(oracle, None, weights, cache)
        case _:
            spec, n = parse_synthetic_spec(str(config.synthetic))
            oracle = synthetic_oracle(spec, n, config.players)
            return ValueSource(oracle, None, weights)


def _constraints(
    config: RunConfig, source: ValueSource, v_grand: float
) -> tuple[Game, int, tuple[float, float] | None]:
    """Fragment to constrain the least core with, its size and the thresholds."""
    if config.full:
        game = _exact_game(source)
        if not validate_complete(game):
            if game.n > MAX_SHAPLEY_PLAYERS:
                raise TooManyPlayers(
                    f"A complete table over {game.n} players cannot be checked"
                )
            raise IncompleteTable([game.key(c) for c in missing_coalitions(game)])
        return game, len(game.values) - 1, None

    if source.game is not None and (missing := missing_singletons(source.game)):
        raise MissingSingleton(missing[0])
    t1, t2 = config.thresholds()
    fragment, log = prune_enumerate(
        source.oracle, source.oracle.n, PruneConfig(t1, t2, v_grand), config.threads
    )
    return fragment, log.evaluated_count, (t1, t2)


def _exact_game(source: ValueSource) -> Game:
    if source.game is not None:
        return source.game
    return materialize_game(source.oracle)


def run_solve(config: RunConfig, generated_at: str | None = None) -> dict[str, Any]:
    """
    Runs pruning (unless the table is full) and every requested method.

    Args:
        config: The run configuration.
        generated_at: Timestamp to stamp the report with.

    Returns:
        The report payload.
    """
    source = create_oracle(config)
    v_grand = source.v_grand()
    names = source.names
    constrained, evaluated_count, thresholds = _constraints(config, source, v_grand)

    allocations: list[Allocation] = []
    least_core: LeastCoreResult | None = None
    for method in config.methods:
        match method:
            case "least_core":
                least_core = solve_least_core(constrained, v_grand)
                allocations.append(least_core.phi)
            case "shapley":
                allocations.append(shapley_exact(_exact_game(source)))
            case "leave_one_out":
                game = source.game or leave_one_out_game(source.oracle)
                allocations.append(leave_one_out(game))
            case "proportional":
                grand = {Coalition.grand(len(names)): v_grand}
                roster = Game(names, grand, source.weights)
                allocations.append(proportional(roster))

    report = compare(
        allocations,
        evaluated_count=evaluated_count,
        e_star=None if least_core is None else least_core.e_star,
    )
    if source.cache is not None:
        source.cache.flush()
    logger.info("Solved %s for %d players", ", ".join(config.methods), len(names))
    return build_report(names, v_grand, report, least_core, thresholds, generated_at)


def run_prune(config: RunConfig) -> EvaluationLog:
    """
    Runs the pruned enumeration only, filling the cache for command oracles.

    Args:
        config: The run configuration.

    Returns:
        The evaluation log.
    """
    source = create_oracle(config)
    v_grand = source.v_grand()
    t1, t2 = config.thresholds()
    _, log = prune_enumerate(
        source.oracle, source.oracle.n, PruneConfig(t1, t2, v_grand), config.threads
    )
    if source.cache is not None:
        source.cache.flush()
    return log


def validate_summary(game: Game) -> dict[str, Any]:
    """Describe how much of a game's table is present."""
    missing_count = (1 << game.n) - 1 - len(game.values)
    return {
        "players": list(game.names),
        "entries": len(game.values),
        "complete": missing_count == 0,
        "has_grand_coalition": game.grand_coalition in game.values,
        "missing_singletons": missing_singletons(game),
        "missing_count": missing_count,
    }
