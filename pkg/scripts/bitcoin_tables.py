"""Bitcoin-scale metrics: complete(3500), B = 9.14, Poisson arrivals at 1/600.

``--write-trace`` instead writes a synthetic timestamp trace for
configs/bitcoin_trace.yaml.
"""
import argparse
from pathlib import Path

from chainstab.netgraph import complete
from chainstab.simengine import PoissonArrivals, SimConfig, Stop, StochasticComm, run
from chainstab.traceio import synthetic_trace

TRACE = Path(__file__).resolve().parent.parent / "configs" / "synthetic_trace.txt"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cycles", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--policy", default="tree")
    ap.add_argument("--write-trace", action="store_true")
    ap.add_argument("--trace-blocks", type=int, default=2000)
    args = ap.parse_args()

    if args.write_trace:
        TRACE.write_text(synthetic_trace(args.trace_blocks, 1 / 600, seed=args.seed))
        print(f"wrote {TRACE}")
        return
    cfg = SimConfig(complete(3500), args.policy, PoissonArrivals(1 / 600), StochasticComm(9.14),
                    Stop("cycles", args.cycles), master_seed=args.seed, record_periods=False)
    r = run(cfg)
    for name in ("time_to_consistency", "cycle_length", "consistency_fraction", "age_of_information"):
        print(f"{name:22s} {r.metric(name).mean:.6g}")
    print(f"cycles {r.counts['cycles']}")


if __name__ == "__main__":
    main()
