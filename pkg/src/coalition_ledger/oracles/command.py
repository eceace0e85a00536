"""
Implements the external-command oracle: one subprocess per coalition, talking
JSON over stdin/stdout, so a training pipeline in any stack can serve values.
"""

from __future__ import annotations

import json
import math
import subprocess
from collections.abc import Sequence

from coalition_ledger.exceptions import OracleProcessFailure
from coalition_ledger.game import Coalition
from coalition_ledger.oracles.base import ValueOracle
from coalition_ledger.oracles.cache import CacheFile
from coalition_ledger.utils import logger


class CommandOracle(ValueOracle):
    """
    Evaluates coalitions by spawning an external command.

    The compact request ``{"players":[...]}``, names sorted, plus a newline is
    written to the command's stdin, which is then closed; the command must print
    ``{"value": <number>}`` and exit 0. Cached coalitions are answered without
    spawning and without counting a trial.

    Attributes:
        command: The executable and its fixed arguments.
        cache: Optional persistent cache; new values are flushed after every
            trial.
    """

    def __init__(
        self,
        command: Sequence[str],
        names: list[str] | tuple[str, ...],
        cache: CacheFile | None = None,
    ):
        super().__init__(names)
        if not command:
            raise ValueError("An oracle command must name an executable")
        self.command = list(command)
        self.cache = cache
        if cache is not None:
            self._memo.update(cache.entries)

    def request_for(self, coalition: Coalition) -> str:
        members = sorted(self.names[i] for i in coalition.members())
        return json.dumps({"players": members}, separators=(",", ":")) + "\n"

    def _evaluate(self, coalition: Coalition) -> float:
        key = self.key(coalition)
        try:
            completed = subprocess.run(
                self.command,
                input=self.request_for(coalition),
                capture_output=True,
                text=True,
                check=False,
            )
        except OSError as e:
            raise OracleProcessFailure(key, f"cannot start {self.command[0]}: {e}")

        if completed.returncode != 0:
            stderr = completed.stderr.strip().splitlines()
            tail = f": {stderr[-1]}" if stderr else ""
            raise OracleProcessFailure(
                key, f"exit code {completed.returncode}{tail}"
            )
        return _parse_response(key, completed.stdout)

    def _record(self, coalition: Coalition, value: float, trial: int) -> None:
        logger.info("trial %d: {%s} = %r", trial, self.key(coalition), value)
        if self.cache is not None:
            self.cache.record(coalition, value)


def _parse_response(key: str, stdout: str) -> float:
    text = stdout.strip()
    try:
        payload = json.loads(text.splitlines()[-1] if text else "")
    except json.JSONDecodeError:
        raise OracleProcessFailure(key, f"malformed output {text[:200]!r}") from None
    if not isinstance(payload, dict) or "value" not in payload:
        raise OracleProcessFailure(key, f"output lacks a 'value' field: {text[:200]!r}")
    raw = payload["value"]
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise OracleProcessFailure(key, f"value is not a number: {raw!r}")
    value = float(raw)
    if not math.isfinite(value):
        raise OracleProcessFailure(key, f"value is not finite: {raw!r}")
    return value


def command_oracle(
    command: Sequence[str],
    names: list[str] | tuple[str, ...],
    cache: CacheFile | None = None,
) -> CommandOracle:
    """Build an oracle that shells out once per uncached coalition."""
    return CommandOracle(command, names, cache)
