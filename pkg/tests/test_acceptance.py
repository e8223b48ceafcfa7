"""Acceptance criteria 1-12; each test prints one PASS/FAIL line."""

import statistics
import timeit
from fractions import Fraction

import pytest
from scipy import stats

from chainstab.chaindag import THROUGHPUT, TREE, confirmed_at_consistency
from chainstab.invariants import (
    ClosureMonitor,
    DegreeMonitor,
    GenesisPathMonitor,
    PersistenceMonitor,
    ReachabilityMonitor,
)
from chainstab.metrics import BUSY, PeriodLog
from chainstab.netgraph import (
    Cut,
    complete,
    cut_conductance,
    graph_conductance_exact,
    random_regular,
    stability_bounds,
    star,
)
from chainstab.saturation import estimate_mu, run_property_suite
from chainstab.simengine import (
    DeterministicArrivals,
    PoissonArrivals,
    ReplaySchedule,
    SimConfig,
    Simulation,
    Stop,
    StochasticComm,
    run,
    run_replications,
    simulate_single_block_spread,
)

from oracles import brute_conductance
from scenarios import FIG1_ARRIVALS, FIG1_EPOCHS, FIG1_REFS


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:>2}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return emit


# ---------------------------------------------------------------- 1


def test_c01_two_peer_replay(verdict):
    def replay():
        cfg = SimConfig(complete(2), TREE, DeterministicArrivals(FIG1_ARRIVALS),
                        ReplaySchedule.from_events(2, FIG1_EPOCHS), Stop("cycles", 2), record_transcript=True)
        sim = Simulation(cfg)
        sim.execute()
        return sim

    sim = replay()
    transfers = [(e[1], e[2], e[3], e[4]) for e in sim.transcript if e[0] == "transfer"]
    flips = [(e[0], e[1]) for e in sim.transcript if e[0] in ("consistent", "inconsistent")]
    views = [sorted(sim.view(p)) for p in range(2)]
    expected_flips = [("inconsistent", 1.1), ("consistent", 5.8), ("inconsistent", 6.2), ("consistent", 6.9)]
    # peer views just after each event
    checkpoints = {1.1: ([0, 1], [0]), 2.4: ([0, 1, 2], [0]), 2.6: ([0, 1, 2], [0, 1]),
                   4.0: ([0, 1, 2], [0, 1, 3]), 5.2: ([0, 1, 2], [0, 1, 2, 3]),
                   5.8: ([0, 1, 2, 3], [0, 1, 2, 3]), 6.2: ([0, 1, 2, 3], [0, 1, 2, 3, 4]),
                   6.9: ([0, 1, 2, 3, 4], [0, 1, 2, 3, 4])}
    panel_ok = True
    for t, (vp, vq) in checkpoints.items():
        cfg = SimConfig(complete(2), TREE, DeterministicArrivals(FIG1_ARRIVALS),
                        ReplaySchedule.from_events(2, FIG1_EPOCHS), Stop("sim_time", t + 0.05))
        s = Simulation(cfg)
        s.run()
        panel_ok &= sorted(s.view(0)) == vp and sorted(s.view(1)) == vq
    elapsed = min(timeit.repeat(replay, number=1, repeat=20))
    ok = (transfers == [(2.6, 0, 1, 1), (5.2, 0, 1, 2), (5.8, 1, 0, 3), (6.9, 1, 0, 4)]
          and sim.dag.refs == FIG1_REFS and flips == expected_flips and panel_ok
          and views == [[0, 1, 2, 3, 4]] * 2 and elapsed < 1e-3)
    verdict(1, ok, f"transfers, edges 3->1 4->2, consistency [0,1.1) [5.8,6.2) [6.9,..); "
                   f"panels {'match' if panel_ok else 'differ'}; runtime {elapsed * 1e3:.3f} ms")


# ---------------------------------------------------------------- 2


def test_c02_conductance_oracle(verdict):
    worst = 0.0
    for n in range(4, 13):
        phi, _ = graph_conductance_exact(complete(n))
        worst = max(worst, abs(float(phi) - n / (n - 1)))
    g = star(7)
    leaf = cut_conductance(g, Cut.complement_of([3], 7))
    edges = [tuple(e) for e in g.edges.tolist()]
    brute_phi, brute_up = brute_conductance(7, edges)
    singles = all(cut_conductance(complete(n), Cut.complement_of([0], n)) == Fraction(n, n - 1)
                  for n in range(4, 13))
    ok = worst <= 1e-12 and leaf == Fraction(7, 36) and brute_up == Fraction(7, 36) and singles
    ok &= brute_phi == graph_conductance_exact(g)[0]
    verdict(2, ok, f"max |phi - N/(N-1)| = {worst:.1e}; star(7) leaf cut {leaf}; brute-force min |S^C|phi {brute_up}")


# ---------------------------------------------------------------- 3


def test_c03_stability_bounds(verdict):
    uppers, lowers = [], []
    for n in (10, 20, 30):
        b = stability_bounds(complete(n), 1.0)
        uppers.append(round(b.upper, 3))
        lowers.append(round(b.lower, 3))
    reference_lower = (0.47, 0.35, 0.30)
    # reference lower values sit at phi/ln N, twice the computed phi/(2 ln N)
    doubled = [2 * stability_bounds(complete(n)).lower for n in (10, 20, 30)]
    discrepancy = all(abs(d - p) < 0.015 for d, p in zip(doubled, reference_lower))
    discrepancy &= all(p / low > 1.9 for p, low in zip(reference_lower, lowers))
    ok = uppers == [1.111, 1.053, 1.034] and lowers == [0.241, 0.176, 0.152] and discrepancy
    verdict(3, ok, f"upper {uppers}, lower {lowers}; reference lower {list(reference_lower)} "
                   f"match phi/ln N = {[round(d, 3) for d in doubled]}")


# ---------------------------------------------------------------- 4


@pytest.mark.slow
def test_c04_single_block_spread(verdict):
    kn = simulate_single_block_spread(complete(3500), 9.14, 100, seed=41)
    rr = simulate_single_block_spread(random_regular(3500, 32, seed=1), 9.14, 100, seed=42)
    m1, m2 = statistics.fmean(kn), statistics.fmean(rr)
    ok = 1.72 <= m1 <= 2.11 and 1.77 <= m2 <= 2.17
    verdict(4, ok, f"complete(3500) mean {m1:.3f} s in [1.72, 2.11]; random_regular(3500, 32) mean {m2:.3f} s "
                   f"in [1.77, 2.17] (100 spreads each)")


# ---------------------------------------------------------------- 5


@pytest.mark.slow
def test_c05_bitcoin_scale_metrics(verdict):
    cycles = 60_000
    cfg = SimConfig(complete(3500), TREE, PoissonArrivals(1 / 600), StochasticComm(9.14),
                    Stop("cycles", cycles), master_seed=2024, record_periods=False)
    r = run(cfg)
    cl, cf, aoi = r.cycle_length.mean, r.consistency_fraction.mean, r.age_of_information.mean
    ok = abs(cl - 625) <= 0.05 * 625 and cf >= 0.996 and 0.0011 <= aoi <= 0.0021
    verdict(5, ok, f"{r.counts['cycles']} cycles: cycle length {cl:.1f} s (625 +- 5%), "
                   f"consistency fraction {cf:.5f} >= 0.996, AoI {aoi:.5f} in [0.0011, 0.0021]")


# ---------------------------------------------------------------- 6


@pytest.mark.slow
def test_c06_monotone_separability(verdict):
    res = run_property_suite(1000, seed=1)
    by = res["by_check"]
    ok = res["checks"] == 4000 and res["violations"] == 0
    verdict(6, ok, f"{res['checks']} checks, {res['violations']} violations; separability splits evaluated "
                   f"{by['separability']['evaluated_splits']}; joint-delay decreases "
                   f"{res['joint_delays']['decreases']}/{res['joint_delays']['run']} (reported only)")


# ---------------------------------------------------------------- 7-9


def monitored_runs(policy, seeds=20, blocks=1000):
    out = []
    for seed in range(seeds):
        mons = [ClosureMonitor(), DegreeMonitor(policy), GenesisPathMonitor(),
                PersistenceMonitor() if policy == TREE else ReachabilityMonitor()]
        cfg = SimConfig(complete(10), policy, PoissonArrivals(0.2), StochasticComm(1.0),
                        Stop("blocks", blocks), master_seed=seed, observers=tuple(mons))
        sim = Simulation(cfg)
        report = sim.run()
        out.append((sim, report, mons))
    return out


@pytest.fixture(scope="module")
def tree_runs():
    return monitored_runs(TREE)


@pytest.fixture(scope="module")
def throughput_runs():
    return monitored_runs(THROUGHPUT)


def test_c07_distinguished_path_persistence(verdict, tree_runs):
    events = min(r.counts["events"] for _, r, _ in tree_runs)
    persistence = [m[3] for _, _, m in tree_runs]
    bad = sum(len(m.violations) for m in persistence)
    onsets = sum(m.onsets for m in persistence)
    ok = bad == 0 and events >= 10_000 and onsets > 0
    verdict(7, ok, f"20 seeds, >= {events} events each, {onsets} consistency times: {bad} persistence "
                   f"or monotonicity violations")


def test_c08_throughput_confirmation(verdict, throughput_runs):
    events = min(r.counts["events"] for _, r, _ in throughput_runs)
    reach = [m[3] for _, _, m in throughput_runs]
    bad = sum(len(m.violations) for m in reach)
    checks = sum(m.checks for m in reach)
    full = all(confirmed_at_consistency(sim.dag, THROUGHPUT) == set(range(len(sim.dag)))
               for sim, _, _ in throughput_runs)
    ok = bad == 0 and events >= 10_000 and checks > 0 and full
    verdict(8, ok, f"20 seeds, >= {events} events each: {checks} post-consistency arrivals checked, "
                   f"{bad} missing paths; confirmed set = all blocks: {full}")


def test_c09_structural_invariants(verdict, tree_runs, throughput_runs):
    cfg = SimConfig(complete(10), TREE, PoissonArrivals(0.2), StochasticComm(1.0),
                    Stop("blocks", 1000), master_seed=99, debug=True)
    report = Simulation(cfg).run()
    structural = [m for runs in (tree_runs, throughput_runs) for _, _, ms in runs for m in ms[:3]]
    bad = sum(len(m.violations) for m in structural)
    checks = sum(m.checks for m in structural)
    ok = bad == 0 and report.counts["invariant_violations"] == 0 and report.counts["events"] >= 10_000
    verdict(9, ok, f"debug run of {report.counts['events']} events: {report.counts['invariant_violations']} "
                   f"violations; {checks} closure/degree/genesis checks over 40 runs: {bad} violations")


# ---------------------------------------------------------------- 10


def test_c10_saturation_bracket(verdict):
    one = estimate_mu(complete(10), 1.0, n_max=256, replications=30, seed=5)
    two = estimate_mu(complete(10), 2.0, n_max=256, replications=30, seed=6)
    ratio = two.mu_hat / one.mu_hat
    ok = 0.241 <= one.mu_low and one.mu_high <= 1.112 and 1.8 <= ratio <= 2.2
    verdict(10, ok, f"mu_hat {one.mu_hat:.3f}, CI [{one.mu_low:.3f}, {one.mu_high:.3f}] in [0.241, 1.112]; "
                    f"mu_hat(2B)/mu_hat(B) = {ratio:.3f}")


# ---------------------------------------------------------------- 11


@pytest.mark.slow
def test_c11_lambda_trends(verdict):
    grid = [round(0.05 * k, 2) for k in range(1, 9)]
    means = {name: [] for name in ("time_to_consistency", "age_of_information", "consistency_fraction", "growth_rate")}
    for lam in grid:
        cfg = SimConfig(complete(10), TREE, PoissonArrivals(lam), StochasticComm(1.0),
                        Stop("sim_time", 2000.0), warmup_cycles=5, master_seed=int(lam * 100), record_periods=False)
        agg, _ = run_replications(cfg, 30)
        for name in means:
            means[name].append(agg.metric(name).mean)
    rho_ttc = stats.spearmanr(grid, means["time_to_consistency"]).statistic
    rho_aoi = stats.spearmanr(grid, means["age_of_information"]).statistic
    rho_cf = stats.spearmanr(grid, means["consistency_fraction"]).statistic
    growth = means["growth_rate"]
    peak = max(growth)
    interior = growth[0] < peak and growth[-1] < peak
    ok = rho_ttc > 0.95 and rho_aoi > 0.95 and rho_cf < -0.95 and interior
    verdict(11, ok, f"Spearman TtC {rho_ttc:.3f}, AoI {rho_aoi:.3f}, consistency fraction {rho_cf:.3f}; "
                    f"growth peaks at lambda={grid[growth.index(peak)]} "
                    f"({', '.join(f'{g:.4f}' for g in growth)})")


# ---------------------------------------------------------------- 12


def busy_samples(mode, seed, count=2000):
    cfg = SimConfig(complete(5), TREE, PoissonArrivals(0.2), StochasticComm(1.0, mode),
                    Stop("cycles", count), master_seed=seed, bulk_spread=False)
    r = run(cfg)
    return PeriodLog.from_rows(r.periods).durations(BUSY)


def test_c12_lazy_dense_equivalence(verdict):
    lazy = busy_samples("lazy", 12)
    dense = busy_samples("dense", 13)
    p = stats.ks_2samp(lazy, dense).pvalue
    ok = len(lazy) == len(dense) == 2000 and p > 0.01
    verdict(12, ok, f"K5 time-to-consistency samples {len(lazy)} lazy vs {len(dense)} dense: KS p = {p:.3f}")
