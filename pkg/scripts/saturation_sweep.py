"""Estimate the critical rate on a few small topologies and compare with the bounds."""
import argparse

from chainstab.netgraph import generate
from chainstab.saturation import estimate_mu

FAMILIES = [
    ("complete", {"n": 10}),
    ("star", {"n": 10}),
    ("torus", {"n": 12, "dim": 1, "k": 2}),
    ("random_regular", {"n": 16, "d": 4}),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bandwidth", type=float, default=1.0)
    ap.add_argument("--n-max", type=int, default=256)
    ap.add_argument("--replications", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    for family, params in FAMILIES:
        g = generate(family, seed=1, **params)
        s = estimate_mu(g, args.bandwidth, args.n_max, args.replications, args.seed)
        b = s.bounds
        print(f"{family:15s} mu {s.mu_hat:.4f} [{s.mu_low:.4f}, {s.mu_high:.4f}]  "
              f"bounds [{b['lower']:.4f}, {b['upper']:.4f}]  contained {s.contained}")


if __name__ == "__main__":
    main()
