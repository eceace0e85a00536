"""
A minimal external value oracle that serves coalition values from a game file.

Reads ``{"players": [...]}`` on stdin and prints ``{"value": <number>}``.
Usage: ``python scripts/stub_oracle.py GAME.json``.
"""

import json
import sys


def main() -> int:
    with open(sys.argv[1], encoding="utf-8") as handle:
        game = json.load(handle)
    roster = {name: i for i, name in enumerate(game["players"])}
    values = {
        frozenset(part.strip() for part in key.split(",")): value
        for key, value in game["values"].items()
    }
    request = json.loads(sys.stdin.read())
    members = frozenset(request["players"])
    if any(name not in roster for name in members):
        print(f"unknown player in {sorted(members)}", file=sys.stderr)
        return 1
    if members not in values:
        print(f"no value for {sorted(members)}", file=sys.stderr)
        return 1
    print(json.dumps({"value": values[members]}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
