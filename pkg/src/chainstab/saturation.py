"""Critical-rate estimation from clearing times, and monotone-separability checks.

``X_n`` is the time needed to clear ``n`` blocks that are all present at
t = 0 with no later arrivals.  Because gossip always pushes the lowest
missing block, the first ``n`` blocks of a larger batch spread exactly as a
batch of ``n`` would under the same communication clocks, so a single run
with ``n_max`` blocks yields the whole ladder ``X_1 <= X_2 <= ...``.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass, field

from .metrics import Estimate, estimate
from .netgraph import PeerGraph, stability_bounds
from .simengine import (
    ROLE_ARRIVAL_PEER,
    DeterministicArrivals,
    ReplaySchedule,
    SimConfig,
    Simulation,
    Stop,
    StochasticComm,
    clearing_time_arrivals,
    replication_seed,
    stream_seed,
)
from .traceio import format_replay


@dataclass
class SaturationSweep:
    ladder: list
    means: list
    halfwidths: list
    inverse: Estimate
    mu_hat: float
    mu_low: float
    mu_high: float
    bandwidth: float
    replications: int
    seed: int
    bounds: dict | None = None
    contained: bool | None = None
    graph: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["inverse"] = self.inverse.to_dict()
        return d


def batch_ladder(n_max: int) -> list:
    out = []
    n = n_max
    while n >= 1:
        out.append(n)
        n //= 2
    return out[::-1]


def clearing_ladder(graph: PeerGraph, bandwidth: float, n_max: int, seed: int, mode: str = "dense") -> list:
    """``[X_1, ..., X_{n_max}]`` from one batch run with uniform block placement."""
    rng = random.Random(stream_seed(seed, ROLE_ARRIVAL_PEER))
    peers = [rng.randrange(graph.n) for _ in range(n_max)]
    cfg = SimConfig(graph, "tree", DeterministicArrivals(tuple((0.0, p) for p in peers)),
                    StochasticComm(bandwidth, mode), Stop("blocks", n_max),
                    master_seed=seed, record_periods=False)
    sim = Simulation(cfg)
    sim.execute()
    out, acc = [], 0.0
    for b in range(1, n_max + 1):
        acc = max(acc, sim.complete_time[b])
        out.append(acc)
    return out


def estimate_mu(graph: PeerGraph, bandwidth: float = 1.0, n_max: int = 256, replications: int = 30,
                seed: int = 0, mode: str = "dense", bounds_mode: str = "auto") -> SaturationSweep:
    """Difference-quotient estimate ``1/mu = (E X_n - E X_{n/2}) / (n/2)`` at ``n = n_max``."""
    if n_max < 8:
        raise ValueError(f"n_max must be >= 8, got {n_max}")
    if replications < 10:
        raise ValueError(f"replications must be >= 10, got {replications}")
    ladder = batch_ladder(n_max)
    half = n_max // 2
    per_n = {n: [] for n in ladder}
    inverse = []
    for r in range(replications):
        xs = clearing_ladder(graph, bandwidth, n_max, replication_seed(seed, r), mode)
        for n in ladder:
            per_n[n].append(xs[n - 1])
        inverse.append((xs[n_max - 1] - xs[half - 1]) / (n_max - half))
    inv = estimate(inverse)
    h = inv.halfwidth or 0.0
    mu_hat = 1.0 / inv.mean
    mu_low = 1.0 / (inv.mean + h)
    mu_high = 1.0 / (inv.mean - h) if inv.mean > h else math.inf
    sweep = SaturationSweep(
        ladder=ladder,
        means=[estimate(per_n[n]).mean for n in ladder],
        halfwidths=[estimate(per_n[n]).halfwidth for n in ladder],
        inverse=inv, mu_hat=mu_hat, mu_low=mu_low, mu_high=mu_high,
        bandwidth=bandwidth, replications=replications, seed=seed, graph=graph.describe(),
    )
    if graph.connected:
        b = stability_bounds(graph, bandwidth, bounds_mode)
        sweep.bounds = b.to_dict()
        sweep.contained = b.lower <= mu_low and mu_high <= b.upper
    return sweep


# ------------------------------------------------------------------ property checks


@dataclass(frozen=True)
class Instance:
    graph: PeerGraph
    schedule: ReplaySchedule
    arrivals: tuple

    def clearing(self, m: int = 1, n: int | None = None) -> float:
        """``X_[m,n]``: clearing time of arrivals ``m..n`` (1-based, inclusive) alone."""
        return clearing_time_arrivals(self.graph, self.schedule, self.arrivals[m - 1:n])

    def with_arrivals(self, arrivals) -> "Instance":
        return Instance(self.graph, self.schedule, tuple(sorted(arrivals, key=lambda e: e[0])))

    def shifted(self, c: float) -> "Instance":
        return Instance(self.graph, self.schedule.shifted(c), tuple((t + c, p) for t, p in self.arrivals))

    def to_text(self) -> str:
        return format_replay(DeterministicArrivals(self.arrivals), self.schedule)


@dataclass(frozen=True)
class Verdict:
    check: str
    ok: bool
    skipped: int = 0
    evaluated: int = 0
    detail: str = ""
    counterexample: str | None = None


def _fail(check, inst, detail):
    return Verdict(check, False, detail=detail, counterexample=inst.to_text())


def check_causality(inst: Instance) -> Verdict:
    if not inst.arrivals:
        return Verdict("causality", True)
    x = inst.clearing()
    last = inst.arrivals[-1][0]
    if x >= last:
        return Verdict("causality", True)
    return _fail("causality", inst, f"X={x} < A_n={last}")


def check_external_monotonicity(inst: Instance, delays) -> Verdict:
    if len(delays) != len(inst.arrivals) or any(d < 0 for d in delays):
        raise ValueError("need one nonnegative delay per arrival")
    x = inst.clearing()
    later = inst.with_arrivals([(t + d, p) for (t, p), d in zip(inst.arrivals, delays)])
    x2 = later.clearing()
    if x2 >= x:
        return Verdict("external_monotonicity", True)
    return _fail("external_monotonicity", inst, f"delays {list(delays)} cut X from {x} to {x2}")


def check_homogeneity(inst: Instance, c: float) -> Verdict:
    x = inst.clearing()
    x2 = inst.shifted(c).clearing()
    if x2 == x + c:
        return Verdict("homogeneity", True)
    return _fail("homogeneity", inst, f"shift {c}: X={x}, shifted X={x2} != {x + c}")


def check_separability(inst: Instance) -> Verdict:
    """For every ``m <= l < n`` with ``X_[m,l] <= A_{l+1}``, require ``X_[m,n] = X_[l+1,n]``."""
    n = len(inst.arrivals)
    table = {}

    def X(m, k):
        if (m, k) not in table:
            table[(m, k)] = inst.clearing(m, k)
        return table[(m, k)]

    skipped = evaluated = 0
    for m in range(1, n + 1):
        for l in range(m, n):
            if X(m, l) <= inst.arrivals[l][0]:
                evaluated += 1
                if X(m, n) != X(l + 1, n):
                    return _fail("separability", inst,
                                 f"m={m}, l={l}: X[m,n]={X(m, n)} but X[l+1,n]={X(l + 1, n)}")
            else:
                skipped += 1
    return Verdict("separability", True, skipped, evaluated)


def _random_graph(rng: random.Random, n: int) -> PeerGraph:
    if rng.random() < 0.3:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        order = list(range(n))
        rng.shuffle(order)
        pairs = {tuple(sorted((order[i], order[rng.randrange(i)]))) for i in range(1, n)}
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.3:
                    pairs.add((i, j))
        pairs = sorted(pairs)
    return PeerGraph(n, pairs, "custom", {"n": n})


def random_instance(rng: random.Random, max_peers: int = 5, max_blocks: int = 10,
                    horizon: float = 64.0) -> Instance:
    """Small replay instance on dyadic time grids.

    Arrivals sit on odd multiples of 1/16 and epochs on multiples of 1/8, so
    the two never coincide and shifts by multiples of 1/8 are exact.
    """
    n = rng.randint(2, max_peers)
    graph = _random_graph(rng, n)
    k = rng.randint(1, max_blocks)
    slots = sorted(rng.sample(range(192), k))
    arrivals = tuple(((2 * s + 1) / 16, rng.randrange(n)) for s in slots)
    nbrs = graph.neighbor_lists()
    epochs = []
    for p in range(n):
        for j in range(1, int(horizon * 8) + 1):
            if rng.random() < 0.5:
                epochs.append((p, j / 8, nbrs[p][rng.randrange(len(nbrs[p]))]))
    return Instance(graph, ReplaySchedule.from_events(n, epochs), arrivals)


def run_property_suite(instances: int = 1000, seed: int = 1, joint_delays: bool = True) -> dict:
    """Run the four checks on ``instances`` random instances.

    Single-arrival delays are asserted; joint delays of every arrival are
    only tallied under ``joint``.
    """
    rng = random.Random(seed)
    tally = {name: {"run": 0, "violations": 0, "evaluated_splits": 0, "skipped_splits": 0}
             for name in ("causality", "external_monotonicity", "homogeneity", "separability")}
    failures = []
    joint = {"run": 0, "decreases": 0}
    for _ in range(instances):
        inst = random_instance(rng)
        k = len(inst.arrivals)
        delays = [0.0] * k
        delays[rng.randrange(k)] = rng.randrange(0, 65) / 8
        verdicts = [
            check_causality(inst),
            check_external_monotonicity(inst, delays),
            check_homogeneity(inst, rng.randrange(0, 513) / 8),
            check_separability(inst),
        ]
        for v in verdicts:
            row = tally[v.check]
            row["run"] += 1
            row["skipped_splits"] += v.skipped
            row["evaluated_splits"] += v.evaluated
            if not v.ok:
                row["violations"] += 1
                failures.append({"check": v.check, "detail": v.detail, "instance": v.counterexample})
        if joint_delays:
            jd = [rng.randrange(0, 17) / 8 for _ in range(k)]
            joint["run"] += 1
            if not check_external_monotonicity(inst, jd).ok:
                joint["decreases"] += 1
    total = sum(r["run"] for r in tally.values())
    bad = sum(r["violations"] for r in tally.values())
    return {"instances": instances, "seed": seed, "checks": total, "violations": bad,
            "by_check": tally, "failures": failures, "joint_delays": joint}
