"""Run every sample config through the CLI and collect the tables under one directory.

    python scripts/reproduce_figures.py [--out out/figures] [--workers 2]

The mode for each config is fixed below; a non-zero exit from any run is
reported and the script carries on with the rest.
"""

import argparse
import sys
from pathlib import Path

from bogocool.cli import main as bogocool

ROOT = Path(__file__).resolve().parent.parent

RUNS = [
    ("supersonic_rb.ini", "rates"),
    ("supersonic_rb.ini", "evolve"),
    ("supersonic_rb.ini", "dissipation"),
    ("supersonic_rb.ini", "semiclassical"),
    ("supersonic_rb.ini", "compare"),
    ("subsonic.ini", "dissipation"),
    ("equilibrium_500nk.ini", "equilibrium"),
    ("sweep_density.ini", "sweep"),
    ("onedim_weak.ini", "onedim"),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/figures")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)
    failed = []
    for config, mode in RUNS:
        out = Path(args.out) / f"{Path(config).stem}_{mode}"
        argv = [mode, "--config", str(ROOT / "configs" / config), "--out", str(out)]
        if mode == "sweep":
            argv += ["--workers", str(args.workers)]
        code = bogocool(argv)
        print(f"{config:24s} {mode:14s} exit {code}  -> {out}")
        if code:
            failed.append((config, mode, code))
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
