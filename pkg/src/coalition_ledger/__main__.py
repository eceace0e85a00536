"""Entry point for running the command-line interface via ``python -m``."""

import sys

from coalition_ledger.cli import main

if __name__ == "__main__":
    sys.exit(main())
