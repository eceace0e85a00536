"""Value oracles: sources that answer v(S) on demand."""

from coalition_ledger.oracles.base import ORACLE_KINDS, ValueOracle
from coalition_ledger.oracles.cache import CacheFile
from coalition_ledger.oracles.command import CommandOracle, command_oracle
from coalition_ledger.oracles.synthetic import (
    SyntheticOracle,
    SyntheticSpec,
    parse_synthetic_spec,
    synthetic_oracle,
)
from coalition_ledger.oracles.table import TableOracle, table_oracle

__all__ = [
    "ORACLE_KINDS",
    "CacheFile",
    "CommandOracle",
    "SyntheticOracle",
    "SyntheticSpec",
    "TableOracle",
    "ValueOracle",
    "command_oracle",
    "parse_synthetic_spec",
    "synthetic_oracle",
    "table_oracle",
]
