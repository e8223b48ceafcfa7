"""Single-block dissemination times on complete and random-regular graphs."""
import argparse

from chainstab.metrics import ci95
from chainstab.netgraph import complete, random_regular
from chainstab.simengine import simulate_single_block_spread


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3500)
    ap.add_argument("--degree", type=int, default=32)
    ap.add_argument("--bandwidth", type=float, default=9.14)
    ap.add_argument("--replications", type=int, default=100)
    ap.add_argument("--seed", type=int, default=41)
    args = ap.parse_args()

    graphs = {
        f"complete({args.n})": complete(args.n),
        f"random_regular({args.n}, {args.degree})": random_regular(args.n, args.degree, seed=1),
    }
    for i, (name, g) in enumerate(graphs.items()):
        xs = simulate_single_block_spread(g, args.bandwidth, args.replications, seed=args.seed + i)
        mean, half = ci95(xs)
        print(f"{name:32s} {mean:.3f} +- {half:.3f} s  ({len(xs)} spreads)")


if __name__ == "__main__":
    main()
