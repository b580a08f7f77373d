#!/usr/bin/env python3
"""Run the full causal verification suite at several cardinalities."""

import sys

from causalfsl.cli import main

CARD_SETS = [(1, 3, 3, 3), (2, 2, 2, 2), (4, 4, 4, 4), (6, 6, 6, 6)]


def run():
    rc = 0
    for cards in CARD_SETS:
        rc |= main(["causal-verify", "--seeds", "100", "--cards", *map(str, cards)])
    return rc


if __name__ == "__main__":
    sys.exit(run())
