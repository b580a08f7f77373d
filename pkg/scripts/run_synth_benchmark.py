#!/usr/bin/env python3
"""Generate the seed-42 synthetic benchmark and evaluate every method,
then run the alpha/beta ablation sweep. Results land in ./out/."""

import sys
from pathlib import Path

from causalfsl.cli import main

OUT = Path("out")


def run():
    OUT.mkdir(exist_ok=True)
    data = OUT / "synth42"
    rc = main(["gen", "--out", str(data), "--seed", "42"])
    rc |= main([
        "eval", "--data-dir", str(data),
        "--method", "zs-clip,zs-blip,mn,pn,tip,ours,ours-f",
        "--out", str(OUT / "benchmark.json"),
    ])
    rc |= main([
        "ablate", "--data-dir", str(data),
        "--out", str(OUT / "ablation.json"),
    ])
    return rc


if __name__ == "__main__":
    sys.exit(run())
