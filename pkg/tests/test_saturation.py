import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from chainstab.netgraph import complete, random_regular, star
from chainstab.saturation import (
    Instance,
    batch_ladder,
    check_causality,
    check_external_monotonicity,
    check_homogeneity,
    check_separability,
    clearing_ladder,
    estimate_mu,
    random_instance,
    run_property_suite,
)
from chainstab.simengine import (
    ROLE_ARRIVAL_PEER,
    ReplaySchedule,
    StochasticComm,
    clearing_time,
    clearing_time_arrivals,
    stream_seed,
)

from scenarios import FIG1_ARRIVALS, FIG1_EPOCHS


def fig1_instance():
    return Instance(complete(2), ReplaySchedule.from_events(2, FIG1_EPOCHS), FIG1_ARRIVALS)


def ladder_peers(graph, n, seed):
    rng = random.Random(stream_seed(seed, ROLE_ARRIVAL_PEER))
    return [rng.randrange(graph.n) for _ in range(n)]


def test_batch_ladder():
    assert batch_ladder(256) == [1, 2, 4, 8, 16, 32, 64, 128, 256]
    assert batch_ladder(12) == [1, 3, 6, 12]


def test_k2_alternating_replay_slope_one():
    epochs = [(0, float(k), 1) for k in range(1, 40)] + [(1, k + 0.5, 0) for k in range(1, 40)]
    sched = ReplaySchedule.from_events(2, epochs)
    xs = [clearing_time(complete(2), sched, [(0, i) for i in range(1, n + 1)]) for n in range(1, 17)]
    assert xs == [float(n) for n in range(1, 17)]
    assert (xs[15] - xs[7]) / 8 == 1.0


@pytest.mark.parametrize("graph", [complete(6), star(5), random_regular(12, 3, seed=1)], ids=["K6", "star5", "rr12"])
def test_ladder_matches_separate_runs(graph):
    seed, n_max = 5, 12
    xs = clearing_ladder(graph, 1.5, n_max, seed)
    peers = ladder_peers(graph, n_max, seed)
    comm = StochasticComm(1.5, "dense")
    for n in (1, 2, 5, 12):
        direct = clearing_time_arrivals(graph, comm, [(0.0, p) for p in peers[:n]], seed=seed)
        assert xs[n - 1] == direct
    assert all(a <= b for a, b in zip(xs, xs[1:]))


def test_ladder_first_rung_is_spread():
    g = complete(8)
    seed = 3
    xs = clearing_ladder(g, 1.0, 8, seed)
    origin = ladder_peers(g, 1, seed)[0]
    spread = clearing_time_arrivals(g, StochasticComm(1.0, "dense"), [(0.0, origin)], seed=seed)
    assert xs[0] == spread


def test_estimate_mu_argument_checks():
    with pytest.raises(ValueError):
        estimate_mu(complete(4), n_max=4)
    with pytest.raises(ValueError):
        estimate_mu(complete(4), replications=3)


def test_estimate_mu_small():
    sweep = estimate_mu(complete(5), 1.0, n_max=32, replications=10, seed=2)
    assert sweep.mu_low <= sweep.mu_hat <= sweep.mu_high
    assert sweep.bounds["upper"] == pytest.approx(5 / 4)
    assert sweep.ladder == [1, 2, 4, 8, 16, 32]
    assert all(a <= b for a, b in zip(sweep.means, sweep.means[1:]))
    assert isinstance(sweep.to_dict()["inverse"], dict)


# ---------------------------------------------------------------- property checks


def test_fig1_checks():
    inst = fig1_instance()
    assert inst.clearing() == 6.9
    assert check_causality(inst).ok
    delayed = inst.with_arrivals([(2.7, 0)] + list(FIG1_ARRIVALS[1:]))
    assert delayed.clearing() >= 6.9
    assert check_external_monotonicity(inst, [1.6, 0, 0, 0]).ok
    assert check_external_monotonicity(inst, [0, 0, 0, 0]).ok
    assert inst.shifted(10).clearing() == pytest.approx(16.9)
    assert check_homogeneity(inst, 0.0).ok
    assert check_separability(inst).ok


def test_zero_delay_equality_and_identity_shift():
    inst = fig1_instance()
    assert inst.with_arrivals(inst.arrivals).clearing() == inst.clearing()
    assert inst.shifted(0.0).clearing() == inst.clearing()


def test_constructed_separation():
    # blocks 1 and 2 clear by t = 3; block 3 arrives at t = 5
    epochs = [(0, 1.0, 1), (0, 3.0, 1), (0, 6.0, 1), (1, 7.0, 0)]
    inst = Instance(complete(2), ReplaySchedule.from_events(2, epochs), ((0.5, 0), (2.0, 0), (5.0, 0)))
    assert inst.clearing(1, 2) == 3.0
    assert inst.clearing(1, 3) == inst.clearing(3, 3) == 6.0
    v = check_separability(inst)
    assert v.ok and v.evaluated >= 1


def test_exhausted_schedule_is_infinite():
    inst = Instance(complete(2), ReplaySchedule.from_events(2, [(0, 1.0, 1)]), ((0.5, 0), (0.7, 0)))
    assert math.isinf(inst.clearing())


def test_external_monotonicity_rejects_bad_delays():
    with pytest.raises(ValueError):
        check_external_monotonicity(fig1_instance(), [1.0])
    with pytest.raises(ValueError):
        check_external_monotonicity(fig1_instance(), [-1.0, 0, 0, 0])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_random_instance_shape(seed):
    inst = random_instance(random.Random(seed))
    assert 2 <= inst.graph.n <= 5 and 1 <= len(inst.arrivals) <= 10
    epoch_times = {t for row in inst.schedule.epochs for t, _ in row}
    assert not epoch_times & {t for t, _ in inst.arrivals}
    times = [t for t, _ in inst.arrivals]
    assert times == sorted(set(times))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), k=st.integers(0, 512))
def test_homogeneity_bit_exact(seed, k):
    inst = random_instance(random.Random(seed))
    x = inst.clearing()
    assert inst.shifted(k / 8).clearing() == x + k / 8


def test_property_suite_small():
    res = run_property_suite(60, seed=9)
    assert res["checks"] == 240 and res["violations"] == 0
    assert res["by_check"]["separability"]["evaluated_splits"] > 0
    assert res == run_property_suite(60, seed=9)
