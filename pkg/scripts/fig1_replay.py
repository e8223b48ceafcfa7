"""Replay the deterministic two-peer scenario and print its transcript."""
import argparse
import sys
from pathlib import Path

from chainstab.cli import main

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "fig1.yaml"

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output-dir", default="chainstab-out/fig1")
    args = ap.parse_args()
    sys.exit(main(["simulate", str(CONFIG), "--output-dir", args.output_dir]))
