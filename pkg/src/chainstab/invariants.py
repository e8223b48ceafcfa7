"""Runtime monitors that check structural DAG properties while a run executes.

Each monitor collects human-readable violation messages in ``violations``.
"""

from __future__ import annotations

from .chaindag import TREE, all_paths_end_at_genesis, distinguished_path, reachable_from
from .simengine import Observer


class Monitor(Observer):
    def __init__(self):
        self.violations = []
        self.checks = 0

    def fail(self, msg):
        self.violations.append(msg)


class ClosureMonitor(Monitor):
    """Reference closure of the view that changed, plus set-level consistency bookkeeping."""

    def _check_view(self, sim, p, t):
        self.checks += 1
        refs = sim.dag.refs
        for b in sim.incomplete:
            if sim.holders[b][p]:
                for r in refs[b]:
                    if not sim.holds(p, r):
                        self.fail(f"t={t}: peer {p} holds {b} but not its reference {r}")

    def _check_counts(self, sim, t):
        full = sum(1 for p in range(sim.n) if all(sim.holders[b][p] for b in sim.incomplete))
        if full != sim.consistent:
            self.fail(f"t={t}: consistent count {sim.consistent} but {full} peers hold every block")
        sizes = [sim.completed + sum(sim.holders[b][p] for b in sim.incomplete) for p in range(sim.n)]
        if sizes != sim.size:
            self.fail(f"t={t}: view sizes out of sync")

    def on_arrival(self, sim, t, b):
        self._check_view(sim, sim.dag.miner[b], t)
        self._check_counts(sim, t)

    def on_transfer(self, sim, t, p, q, b):
        lowest = min(c for c in sim.incomplete if sim.holders[c][p] and (c == b or not sim.holders[c][q]))
        if lowest != b:
            self.fail(f"t={t}: pushed {b} from {p} to {q} but {lowest} was lower")
        self._check_view(sim, q, t)
        if sim.hcount[b] == sim.n:
            for r in sim.dag.refs[b]:
                if r in sim.holders:
                    self.fail(f"t={t}: block {b} complete before its reference {r}")
        self._check_counts(sim, t)

    def on_consistency(self, sim, t):
        if sim.incomplete:
            self.fail(f"t={t}: consistency flagged with incomplete blocks {sim.incomplete}")


class DegreeMonitor(Monitor):
    """In-degree never exceeds N; out-degree matches the policy."""

    def __init__(self, policy):
        super().__init__()
        self.policy = policy

    def on_arrival(self, sim, t, b):
        self.checks += 1
        dag = sim.dag
        refs = dag.refs[b]
        if self.policy == TREE and len(refs) != 1:
            self.fail(f"block {b}: tree policy out-degree {len(refs)}")
        if not refs:
            self.fail(f"block {b}: no references")
        for r in refs:
            if len(dag.inrefs[r]) > sim.n:
                self.fail(f"block {r}: in-degree {len(dag.inrefs[r])} exceeds N={sim.n}")


class GenesisPathMonitor(Monitor):
    """Every maximal reference path ends at block 0."""

    def __init__(self):
        super().__init__()
        self.ok = [True]

    def on_arrival(self, sim, t, b):
        self.checks += 1
        refs = sim.dag.refs[b]
        good = bool(refs) and all(self.ok[r] for r in refs)
        self.ok.append(good)
        if not good:
            self.fail(f"block {b}: a maximal path avoids genesis")

    def on_finish(self, sim):
        self.checks += 1
        if not all_paths_end_at_genesis(sim.dag):
            self.fail("final DAG has a maximal path not ending at genesis")


class PersistenceMonitor(Monitor):
    """Tree policy: each distinguished path passes through the previous start; confirmed sets grow."""

    def __init__(self):
        super().__init__()
        self.prev_start = None
        self.prev_confirmed = set()
        self.onsets = 0

    def on_consistency(self, sim, t):
        self.checks += 1
        self.onsets += 1
        path = distinguished_path(sim.dag, range(sim.total))
        confirmed = set(path)
        if self.prev_start is not None and self.prev_start not in confirmed:
            self.fail(f"t={t}: distinguished path misses previous start {self.prev_start}")
        if not self.prev_confirmed <= confirmed:
            lost = sorted(self.prev_confirmed - confirmed)
            self.fail(f"t={t}: confirmed blocks {lost} dropped")
        self.prev_start = path[0]
        self.prev_confirmed = confirmed


class ReachabilityMonitor(Monitor):
    """Throughput policy: blocks arriving after a consistency time reach all of G(C)."""

    def __init__(self):
        super().__init__()
        self.snapshot = None  # (block count, leaves) at the last consistency time
        self.fresh = False
        self.onsets = 0

    def on_consistency(self, sim, t):
        self.onsets += 1
        self.snapshot = (sim.total, frozenset(sim.global_leaves))
        self.fresh = True

    def on_arrival(self, sim, t, b):
        if self.snapshot is None:
            return
        self.checks += 1
        m, leaves = self.snapshot
        if self.fresh:
            # first arrival after C: every block of G(C) must be an ancestor
            seen = reachable_from(sim.dag, b)
            missing = [c for c in range(m) if c not in seen]
            self.fresh = False
        else:
            seen = reachable_from(sim.dag, b, floor=min(leaves))
            missing = sorted(leaves - seen)
        if missing:
            self.fail(f"t={t}: block {b} has no path to {missing[:5]} of the consistent DAG")


def default_monitors(policy):
    mons = [ClosureMonitor(), DegreeMonitor(policy), GenesisPathMonitor()]
    mons.append(PersistenceMonitor() if policy == TREE else ReachabilityMonitor())
    return mons

