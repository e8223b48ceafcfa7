"""Discrete-event simulation of block arrivals and lowest-index-first gossip.

Each peer keeps the set of blocks it knows.  At a communication epoch peer
``p`` picks a link endpoint ``q`` and pushes ``min(B_p minus B_q)``.  Blocks
held by every peer are "complete"; every peer holds all complete blocks, so
only incomplete blocks ever need to be inspected when searching for the
block to push, and ``|B_p| - completed`` counts the incomplete blocks a peer
holds.

Stochastic communication comes in two flavours:

* ``dense``: every peer runs its own rate-``B`` Poisson clock all the time.
* ``lazy``: a peer only keeps a clock while it holds an incomplete block;
  a fresh exponential delay is drawn when it becomes active again.  While
  exactly one block is incomplete, the time to the next useful transfer is
  drawn directly from the total useful-transfer rate.  On complete graphs
  without observers a whole spread is sampled in one vectorised step.

Ties: arrivals precede epochs at equal times, then lower peer id first.
"""

from __future__ import annotations

import heapq
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .chaindag import POLICIES, TREE, BlockDag
from .metrics import BUSY, IDLE, PeriodLog, RunTotals, SimReport, aggregate, summarize
from .netgraph import PeerGraph

ROLE_ARRIVAL_TIME = 0
ROLE_ARRIVAL_PEER = 1
ROLE_PEER = 2
ROLE_SPREAD = 3
ROLE_BULK = 4
ROLE_REPLICATION = 5

STOP_KINDS = ("cycles", "blocks", "sim_time")
COMM_MODES = ("lazy", "dense")


class SimError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


class SourceExhausted(SimError):
    """The arrival list ran out before the stop condition was met."""


class ScheduleExhausted(SimError):
    """Replay epochs ran out while blocks were still spreading."""


# ------------------------------------------------------------------ config


@dataclass(frozen=True)
class PoissonArrivals:
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ConfigError(f"arrivals.rate: must be positive, got {self.rate}")

    def describe(self):
        return {"kind": "poisson", "rate": self.rate}


@dataclass(frozen=True)
class DeterministicArrivals:
    """Explicit ``(time, peer)`` pairs; equal times are handled in list order."""

    events: tuple

    def __post_init__(self):
        ev = tuple((float(t), int(p)) for t, p in self.events)
        object.__setattr__(self, "events", ev)
        for (a, _), (b, _) in zip(ev, ev[1:]):
            if b < a:
                raise ConfigError(f"arrivals: times must be nondecreasing, got {a} then {b}")

    def describe(self):
        return {"kind": "deterministic", "events": [list(e) for e in self.events]}


@dataclass(frozen=True)
class TraceArrivals:
    """Recorded arrival times; peers are drawn uniformly at random."""

    times: tuple
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        ts = tuple(float(t) for t in self.times)
        object.__setattr__(self, "times", ts)
        for a, b in zip(ts, ts[1:]):
            if not b > a:
                raise ConfigError(f"arrivals: trace times must be strictly increasing, got {a} then {b}")

    def describe(self):
        return {"kind": "trace", "count": len(self.times), "source": dict(self.source)}


@dataclass(frozen=True)
class StochasticComm:
    rate: float
    mode: str = "lazy"

    def __post_init__(self):
        if not self.rate > 0:
            raise ConfigError(f"comm.rate: must be positive, got {self.rate}")
        if self.mode not in COMM_MODES:
            raise ConfigError(f"comm.mode: must be one of {COMM_MODES}, got {self.mode!r}")

    def describe(self):
        return {"mode": self.mode, "rate": self.rate}


@dataclass(frozen=True)
class ReplaySchedule:
    """Per-peer increasing ``(time, target)`` epochs."""

    epochs: tuple

    def __post_init__(self):
        eps = tuple(tuple((float(t), int(q)) for t, q in row) for row in self.epochs)
        object.__setattr__(self, "epochs", eps)
        for p, row in enumerate(eps):
            for (a, _), (b, _) in zip(row, row[1:]):
                if not b > a:
                    raise ConfigError(f"comm.schedule: epochs of peer {p} must increase, got {a} then {b}")

    @classmethod
    def from_events(cls, n: int, events) -> "ReplaySchedule":
        rows = [[] for _ in range(n)]
        for p, t, q in sorted(events, key=lambda e: (e[0], e[1])):
            if not 0 <= p < n:
                raise ConfigError(f"comm.schedule: peer {p} outside 0..{n - 1}")
            rows[p].append((t, q))
        return cls(tuple(tuple(r) for r in rows))

    def shifted(self, c: float) -> "ReplaySchedule":
        return ReplaySchedule(tuple(tuple((t + c, q) for t, q in row) for row in self.epochs))

    def describe(self):
        return {"mode": "replay", "epochs": [[list(e) for e in row] for row in self.epochs]}


@dataclass(frozen=True)
class Stop:
    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in STOP_KINDS:
            raise ConfigError(f"stop.kind: must be one of {STOP_KINDS}, got {self.kind!r}")
        if not self.value > 0:
            raise ConfigError(f"stop.value: must be positive, got {self.value}")

    def describe(self):
        return {"kind": self.kind, "value": self.value}


@dataclass
class SimConfig:
    graph: PeerGraph
    policy: str = TREE
    arrivals: object = None
    comm: object = None
    stop: Stop = field(default_factory=lambda: Stop("cycles", 1))
    warmup_cycles: int = 0
    master_seed: int = 0
    record_periods: bool = True
    record_series: bool = False
    record_transcript: bool = False
    debug: bool = False
    bulk_spread: bool = True
    observers: tuple = ()

    def describe(self) -> dict:
        return {
            "topology": self.graph.describe(),
            "policy": self.policy,
            "arrivals": self.arrivals.describe() if self.arrivals else None,
            "comm": self.comm.describe() if self.comm else None,
            "stop": self.stop.describe(),
            "warmup_cycles": self.warmup_cycles,
            "master_seed": self.master_seed,
        }


def stream_seed(master: int, role: int, index: int = 0) -> int:
    """64-bit seed of the independent stream keyed by ``(role, index)``."""
    words = np.random.SeedSequence(master, spawn_key=(role, index)).generate_state(2)
    return int(words[0]) << 32 | int(words[1])


def replication_seed(master: int, r: int) -> int:
    return stream_seed(master, ROLE_REPLICATION, r)


# ------------------------------------------------------------------ engine


class Observer:
    """Callback hooks; subclasses override what they need."""

    def on_arrival(self, sim, t, b):
        pass

    def on_transfer(self, sim, t, p, q, b):
        pass

    def on_noop(self, sim, t, p, q):
        pass

    def on_consistency(self, sim, t):
        pass

    def on_break(self, sim, t):
        pass

    def on_finish(self, sim):
        pass


class Simulation:
    def __init__(self, config: SimConfig):
        self.config = cfg = config
        g = cfg.graph
        if not g.connected:
            raise ConfigError("topology: graph is not connected")
        if cfg.policy not in POLICIES:
            raise ConfigError(f"policy: must be one of {POLICIES}, got {cfg.policy!r}")
        if cfg.arrivals is None or cfg.comm is None:
            raise ConfigError("arrivals and comm are required")
        if cfg.warmup_cycles < 0:
            raise ConfigError("warmup_cycles: must be >= 0")
        n = self.n = g.n
        self.graph = g
        self.complete_graph = g.is_complete
        self.deg = g.degree.tolist()
        self.nbrs = None if self.complete_graph else g.neighbor_lists()
        self.seed = cfg.master_seed
        self.replay = isinstance(cfg.comm, ReplaySchedule)
        if self.replay:
            self._check_replay(cfg.comm)
        else:
            self.B = float(cfg.comm.rate)
        self.lazy = not self.replay and cfg.comm.mode == "lazy"
        if isinstance(cfg.arrivals, DeterministicArrivals):
            for t, p in cfg.arrivals.events:
                if not 0 <= p < n:
                    raise ConfigError(f"arrivals: peer {p} outside 0..{n - 1}")
                if t < 0:
                    raise ConfigError(f"arrivals: negative time {t}")

        self.observers = list(cfg.observers)
        if cfg.debug:
            from .invariants import default_monitors

            self.observers.extend(default_monitors(cfg.policy))
        self.series = [] if cfg.record_series else None
        self.transcript = [] if cfg.record_transcript else None
        self.collapse = self.lazy
        self.bulk = (self.lazy and cfg.bulk_spread and self.complete_graph
                     and not self.observers and self.series is None and self.transcript is None)

        self.dag = BlockDag()
        self.t = 0.0
        self.total = 1
        self.completed = 1
        self.size = [1] * n
        self.sum_size = n
        self.consistent = n
        self.holders = {}
        self.hcount = {}
        self.incomplete = []
        self.complete_time = [0.0]
        if cfg.policy == TREE:
            self.best_depth = [0] * n
            self.best_idx = [0] * n
        else:
            self.leaves = [{0} for _ in range(n)]
            self.global_leaves = {0}
        self.gbest = (0, 0)  # (depth, index) of the least-index deepest block

        self.periods = PeriodLog()
        self.periods.open(IDLE, 0.0)
        self.onsets = 0
        self.measuring = cfg.warmup_cycles == 0
        self.window_start = 0.0
        self.window_period = 0
        self.cint = 0.0
        self.aint = 0.0
        self.growth_first = None
        self.growth_last = None
        self.arrivals_seen = 0
        self.events = 0
        self.transfers = 0
        self.noops = 0
        self.stopped = False

        self._peer_rng = {}
        self.heap = []
        self.gen = [0] * n
        self.active = set()
        self._spread = None
        self._spread_rngs = None
        self._init_arrivals()
        self._init_comm()

    # -- randomness -------------------------------------------------------

    def _rng(self, p):
        r = self._peer_rng.get(p)
        if r is None:
            r = self._peer_rng[p] = random.Random(stream_seed(self.seed, ROLE_PEER, p))
        return r

    def seeds(self) -> dict:
        return {
            "master_seed": self.seed,
            "derivation": "numpy SeedSequence(master_seed, spawn_key=(role, index))",
            "roles": {"arrival_time": ROLE_ARRIVAL_TIME, "arrival_peer": ROLE_ARRIVAL_PEER,
                      "peer": ROLE_PEER, "spread": ROLE_SPREAD, "bulk": ROLE_BULK},
        }

    # -- arrivals ---------------------------------------------------------

    def _init_arrivals(self):
        arr = self.config.arrivals
        self.arr_time_rng = random.Random(stream_seed(self.seed, ROLE_ARRIVAL_TIME))
        self.arr_peer_rng = random.Random(stream_seed(self.seed, ROLE_ARRIVAL_PEER))
        self.arr_pos = 0
        self.next_arrival = None
        if isinstance(arr, PoissonArrivals):
            self.arr_rate = arr.rate
        self._advance_arrival()

    def _advance_arrival(self):
        arr = self.config.arrivals
        if isinstance(arr, PoissonArrivals):
            prev = self.next_arrival[0] if self.next_arrival else 0.0
            self.next_arrival = (prev + self.arr_time_rng.expovariate(self.arr_rate),
                                 self.arr_peer_rng.randrange(self.n))
        elif isinstance(arr, DeterministicArrivals):
            ev = arr.events
            self.next_arrival = ev[self.arr_pos] if self.arr_pos < len(ev) else None
            self.arr_pos += 1
        else:
            ts = arr.times
            self.next_arrival = ((ts[self.arr_pos], self.arr_peer_rng.randrange(self.n))
                                 if self.arr_pos < len(ts) else None)
            self.arr_pos += 1

    # -- communication schedule -------------------------------------------

    def _check_replay(self, sched):
        g = self.graph
        if len(sched.epochs) != g.n:
            raise ConfigError(f"comm.schedule: has {len(sched.epochs)} peers, graph has {g.n}")
        for p, row in enumerate(sched.epochs):
            ok = set(range(g.n)) - {p} if g.is_complete else set(g.neighbors(p).tolist())
            for t, q in row:
                if q not in ok:
                    raise ConfigError(f"comm.schedule: target {q} of peer {p} at t={t} is not a neighbour")

    def _init_comm(self):
        if self.replay:
            self.replay_pos = [0] * self.n
            for p, row in enumerate(self.config.comm.epochs):
                if row:
                    heapq.heappush(self.heap, (row[0][0], p, 0))
        elif not self.lazy:
            for p in range(self.n):
                self._schedule(p, 0.0)

    def _schedule(self, p, now):
        self.gen[p] += 1
        heapq.heappush(self.heap, (now + self._rng(p).expovariate(self.B), p, self.gen[p]))

    def _activate(self, p):
        if p not in self.active:
            self.active.add(p)
            self._schedule(p, self.t)

    def _target(self, p):
        rng = self._rng(p)
        if self.complete_graph:
            r = rng.randrange(self.n - 1)
            return r + (r >= p)
        nb = self.nbrs[p]
        return nb[rng.randrange(len(nb))]

    # -- state helpers ----------------------------------------------------

    def holds(self, p, b) -> bool:
        if b >= self.total:
            return False
        h = self.holders.get(b)
        return True if h is None else bool(h[p])

    def view(self, p) -> set:
        return {b for b in range(self.total) if self.holds(p, b)}

    def aoi_sum(self) -> int:
        return self.n * self.total - self.sum_size

    def _advance(self, t):
        dt = t - self.t
        if self.measuring and dt > 0:
            self.cint += self.consistent * dt
            self.aint += (self.n * self.total - self.sum_size) * dt
        self.t = t

    def _record(self):
        if self.series is not None:
            self.series.append((self.t, self.consistent, self.total, self.n * self.total - self.sum_size))

    def _note(self, *entry):
        if self.transcript is not None:
            self.transcript.append(entry)

    # -- event handlers ---------------------------------------------------

    def _arrival(self, p):
        t = self.t
        self.events += 1
        self.arrivals_seen += 1
        tree = self.config.policy == TREE
        refs = (self.best_idx[p],) if tree else tuple(sorted(self.leaves[p]))
        b = self.dag.add(p, t, refs)
        self.complete_time.append(None)
        was_consistent = self.consistent == self.n
        miner_consistent = self.size[p] == self.total
        self.total += 1
        self.size[p] += 1
        self.sum_size += 1
        h = bytearray(self.n)
        h[p] = 1
        self.holders[b] = h
        self.hcount[b] = 1
        self.incomplete.append(b)
        self.consistent = 1 if miner_consistent else 0
        depth = self.dag.depth[b]
        if tree:
            self.best_depth[p] = depth
            self.best_idx[p] = b
        else:
            self.leaves[p] = {b}
            self.global_leaves.difference_update(refs)
            self.global_leaves.add(b)
        if depth > self.gbest[0]:
            self.gbest = (depth, b)
        self._note("arrival", t, b, p, refs)
        if was_consistent:
            self.periods.open(BUSY, t)
            self._note("inconsistent", t)
            for ob in self.observers:
                ob.on_break(self, t)
        for ob in self.observers:
            ob.on_arrival(self, t, b)
        if self.lazy and not self._spread:
            self._activate(p)
        self._advance_arrival()
        self._record()

    def _give(self, p, q, b):
        """Move block ``b`` from ``p`` to ``q`` and update all derived state."""
        t = self.t
        self.transfers += 1
        self.holders[b][q] = 1
        self.hcount[b] += 1
        self.size[q] += 1
        self.sum_size += 1
        if self.config.policy == TREE:
            d = self.dag.depth[b]
            if d > self.best_depth[q] or (d == self.best_depth[q] and b < self.best_idx[q]):
                self.best_depth[q] = d
                self.best_idx[q] = b
        else:
            lv = self.leaves[q]
            lv.difference_update(self.dag.refs[b])
            lv.add(b)
        if self.size[q] == self.total:
            self.consistent += 1
        self._note("transfer", t, p, q, b)
        for ob in self.observers:
            ob.on_transfer(self, t, p, q, b)
        if self.hcount[b] == self.n:
            self._complete(b)
        if self.lazy and not self._spread and self.size[q] > self.completed:
            self._activate(q)
        if self.consistent == self.n:
            self._onset()

    def _complete(self, b):
        self.incomplete.remove(b)
        del self.holders[b]
        del self.hcount[b]
        self.completed += 1
        self.complete_time[b] = self.t

    def _onset(self):
        t = self.t
        self.onsets += 1
        self.periods.open(IDLE, t)
        self._note("consistent", t)
        cfg = self.config
        if not self.measuring and self.onsets == cfg.warmup_cycles:
            self.measuring = True
            self.window_start = t
            self.window_period = len(self.periods) - 1
        if self.measuring and cfg.policy == TREE:
            mark = (self.gbest[0], t)
            if self.growth_first is None:
                self.growth_first = mark
            self.growth_last = mark
        for ob in self.observers:
            ob.on_consistency(self, t)
        kind, value = cfg.stop.kind, cfg.stop.value
        if kind == "cycles" and self.onsets >= cfg.warmup_cycles + value:
            self.stopped = True
        elif kind == "blocks" and self.measuring and self.arrivals_seen >= value:
            self.stopped = True

    def _epoch(self, p):
        self.events += 1
        if self.replay:
            row = self.config.comm.epochs[p]
            k = self.replay_pos[p]
            q = row[k][1]
            self.replay_pos[p] = k + 1
            if k + 1 < len(row):
                heapq.heappush(self.heap, (row[k + 1][0], p, k + 1))
        else:
            q = self._target(p)
        for b in self.incomplete:
            h = self.holders[b]
            if h[p] and not h[q]:
                self._give(p, q, b)
                break
        else:
            self.noops += 1
            self._note("noop", self.t, p, q)
            for ob in self.observers:
                ob.on_noop(self, self.t, p, q)
        if not self.replay:
            if self.lazy and self.size[p] == self.completed:
                self.active.discard(p)
            elif not self._spread:
                self._schedule(p, self.t)
        self._record()

    # -- single-block fast path ---------------------------------------------

    def _enter_spread(self):
        b = self.incomplete[0]
        for p in self.active:
            self.gen[p] += 1
        self.active.clear()
        h = self.holders[b]
        st = {"b": b}
        if self.bulk:
            pass
        elif self.complete_graph:
            st["hl"] = [i for i in range(self.n) if h[i]]
            nh = [i for i in range(self.n) if not h[i]]
            st["nh"] = nh
            st["pos"] = {q: i for i, q in enumerate(nh)}
        else:
            L = math.lcm(*set(self.deg))
            w = [L // d for d in self.deg]
            cnt = {}
            act = []
            W = 0
            for p in range(self.n):
                if h[p]:
                    c = sum(1 for r in self.nbrs[p] if not h[r])
                    cnt[p] = c
                    if c:
                        act.append(p)
                        W += c * w[p]
            st.update(L=L, w=w, cnt=cnt, act=act, apos={p: i for i, p in enumerate(act)}, W=W)
        if self._spread_rngs is None:
            self._spread_rngs = {
                "rng": random.Random(stream_seed(self.seed, ROLE_SPREAD)),
                "np": np.random.default_rng(stream_seed(self.seed, ROLE_BULK)),
            }
        self._spread = st

    def _leave_spread(self, now):
        """Hand back to per-peer clocks: every peer holding the block restarts one."""
        st = self._spread
        self._spread = None
        h = self.holders.get(st["b"])
        if h is None:
            return
        for p in range(self.n):
            if h[p]:
                self.active.add(p)
                self._schedule(p, now)

    def _spread_limit(self):
        ta = self.next_arrival[0] if self.next_arrival else math.inf
        T = self.config.stop.value if self.config.stop.kind == "sim_time" else math.inf
        return ta, T

    def _spread_step(self):
        """Advance while exactly one block is incomplete.

        Returns when the block completes, an arrival is due, or the time
        limit is reached.
        """
        if self.bulk:
            return self._bulk_spread()
        st = self._spread
        rng = self._spread_rngs["rng"]
        b = st["b"]
        h = self.holders[b]
        k = self.hcount[b]
        n = self.n
        if self.complete_graph:
            rate = self.B * k * (n - k) / (n - 1)
        else:
            rate = self.B * st["W"] / st["L"]
        t_next = self.t + rng.expovariate(rate)
        ta, T = self._spread_limit()
        if ta <= t_next or T < t_next:
            limit = min(ta, T)
            self._advance(limit)
            if T < ta:
                self.stopped = True
            self._leave_spread(limit)
            return
        self._advance(t_next)
        self.events += 1
        if self.complete_graph:
            hl, nh, pos = st["hl"], st["nh"], st["pos"]
            p = hl[rng.randrange(k)]
            q = nh[rng.randrange(n - k)]
            last = nh.pop()
            if last != q:
                i = pos[q]
                nh[i] = last
                pos[last] = i
            del pos[q]
            hl.append(q)
        else:
            act, nbrs = st["act"], self.nbrs
            while True:
                p = act[rng.randrange(len(act))]
                nb = nbrs[p]
                q = nb[rng.randrange(len(nb))]
                if not h[q]:
                    break
        self._give(p, q, b)
        if not self.complete_graph and self.hcount.get(b):
            self._spread_update(q)
        self._record()
        if b not in self.holders:
            self._spread = None

    def _spread_update(self, q):
        st = self._spread
        h = self.holders[st["b"]]
        cnt, act, apos, w = st["cnt"], st["act"], st["apos"], st["w"]
        for r in self.nbrs[q]:
            if r != q and h[r]:
                cnt[r] -= 1
                st["W"] -= w[r]
                if cnt[r] == 0:
                    i = apos.pop(r)
                    last = act.pop()
                    if last != r:
                        act[i] = last
                        apos[last] = i
        c = sum(1 for r in self.nbrs[q] if not h[r])
        cnt[q] = c
        if c:
            apos[q] = len(act)
            act.append(q)
            st["W"] += c * w[q]

    def _bulk_spread(self):
        """Sample the rest of a complete-graph spread in one shot.

        With ``j`` holders the next useful transfer comes at rate
        ``B j (N-j)/(N-1)``; the holder set is exchangeable, so holder
        identities are only drawn if an arrival interrupts the spread.
        """
        st = self._spread
        gen = self._spread_rngs["np"]
        b = st["b"]
        n = self.n
        k = self.hcount[b]
        js = np.arange(k, n, dtype=float)
        cum = self.t + np.cumsum(gen.exponential(1.0, n - k) * (n - 1) / (self.B * js * (n - js)))
        ta, T = self._spread_limit()
        limit = min(ta, T)
        if cum[-1] < limit:
            m = n - k
            end = float(cum[-1])
        else:
            m = int(np.searchsorted(cum, limit, side="left"))
            end = limit
        if self.measuring:
            edges = np.concatenate(([self.t], cum[:m], [end]))
            seg = np.diff(edges)
            held = np.arange(k, k + m + 1, dtype=float)
            self.cint += float(seg @ held)
            self.aint += float(seg @ (n - held))
        self.events += m
        self.transfers += m
        if m == n - k:
            self.t = end
            self._finish_bulk(b)
            return
        h = self.holders[b]
        missing = np.flatnonzero(np.frombuffer(bytes(h), dtype=np.uint8) == 0)
        for q in gen.choice(missing, size=m, replace=False).tolist():
            self._materialize(q, b)
        self.t = end
        if T < ta:
            self.stopped = True
        self._leave_spread(end)

    def _materialize(self, q, b):
        self.holders[b][q] = 1
        self.hcount[b] += 1
        self.size[q] += 1
        self.sum_size += 1
        self.consistent += 1
        if self.config.policy == TREE:
            d = self.dag.depth[b]
            if d > self.best_depth[q] or (d == self.best_depth[q] and b < self.best_idx[q]):
                self.best_depth[q] = d
                self.best_idx[q] = b
        else:
            self.leaves[q].difference_update(self.dag.refs[b])
            self.leaves[q].add(b)

    def _finish_bulk(self, b):
        n = self.n
        self.size = [self.total] * n
        self.sum_size = n * self.total
        self.consistent = n
        if self.config.policy == TREE:
            self.best_depth = [self.gbest[0]] * n
            self.best_idx = [self.gbest[1]] * n
        else:
            self.leaves = [set(self.global_leaves) for _ in range(n)]
        self._complete(b)
        self._spread = None
        self._onset()

    # -- main loop ------------------------------------------------------------

    def _next_epoch_time(self):
        heap = self.heap
        if not self.replay:
            gen = self.gen
            while heap and heap[0][2] != gen[heap[0][1]]:
                heapq.heappop(heap)
        return heap[0][0] if heap else math.inf

    def run(self) -> SimReport:
        self.execute()
        return self._report()

    def execute(self):
        """Process events until the stop condition; leaves the final state in place."""
        cfg = self.config
        T = cfg.stop.value if cfg.stop.kind == "sim_time" else math.inf
        while not self.stopped:
            if self.collapse and len(self.incomplete) == 1:
                if self._spread is None:
                    self._enter_spread()
                self._spread_step()
                if self._spread is not None or self.stopped:
                    continue
                if self.next_arrival is None or len(self.incomplete) != 1:
                    continue
                # an arrival is due right now; fall through to handle it
            te = self._next_epoch_time()
            ta = self.next_arrival[0] if self.next_arrival else math.inf
            tn = ta if ta <= te else te
            if tn > T:
                self._advance(T)
                break
            if tn == math.inf:
                self._exhausted()
                break
            self._advance(tn)
            if ta <= te:
                self._arrival(self.next_arrival[1])
            else:
                _, p, _ = heapq.heappop(self.heap)
                self._epoch(p)
        for ob in self.observers:
            ob.on_finish(self)

    def _exhausted(self):
        if self.consistent != self.n:
            if self.replay:
                raise ScheduleExhausted(f"replay schedule exhausted at t={self.t} with blocks still spreading")
            raise SimError(f"no further events at t={self.t} while inconsistent")
        raise SourceExhausted(
            f"arrival source exhausted at t={self.t} before stop condition "
            f"{self.config.stop.kind}={self.config.stop.value}"
        )

    def _report(self) -> SimReport:
        cfg = self.config
        end = self.t
        self.periods.close(end)
        window = PeriodLog(
            self.periods.kinds[self.window_period:],
            self.periods.starts[self.window_period:],
            self.periods.ends[self.window_period:],
        ) if self.measuring else PeriodLog()
        dissem = [
            self.complete_time[b] - self.dag.time[b]
            for b in range(1, self.total)
            if self.complete_time[b] is not None and self.dag.time[b] >= self.window_start
        ] if self.measuring else []
        growth = None
        if self.growth_first is not None:
            growth = (self.growth_first[0], self.growth_last[0], self.growth_first[1], self.growth_last[1])
        totals = RunTotals(self.window_start, end, self.n, self.cint, self.aint, window, dissem, growth)
        metrics = summarize(totals) if self.measuring else {}
        counts = {
            "cycles": len(window.durations(BUSY)),
            "blocks": self.total - 1,
            "events": self.events,
            "transfers": self.transfers,
            "noops": self.noops,
            "onsets": self.onsets,
        }
        violations = sum(len(getattr(ob, "violations", ())) for ob in self.observers)
        if self.observers:
            counts["invariant_violations"] = violations
        report = SimReport(
            counts=counts,
            window=[self.window_start, end] if self.measuring else None,
            config=cfg.describe(),
            seeds=self.seeds(),
            periods=window.rows() if cfg.record_periods else None,
            **{k: v for k, v in metrics.items()},
        )
        if isinstance(cfg.arrivals, TraceArrivals):
            report.trace = cfg.arrivals.describe()
        return report


def run(config: SimConfig) -> SimReport:
    return Simulation(config).run()


def _run_one(args):
    config, r = args
    return run(replace(config, master_seed=replication_seed(config.master_seed, r)))


def run_replications(config: SimConfig, replications: int, jobs: int = 1) -> tuple[SimReport, list]:
    """Independent replications with derived seeds, aggregated in replication order."""
    if replications < 1:
        raise ConfigError("replications: must be >= 1")
    tasks = [(config, r) for r in range(replications)]
    if jobs > 1 and replications > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_run_one, tasks))
    else:
        reports = [_run_one(t) for t in tasks]
    agg = aggregate(reports)
    agg.config = config.describe()
    agg.seeds = {"master_seed": config.master_seed,
                 "replication_seeds": [r.seeds["master_seed"] for r in reports]}
    return agg, reports


# ------------------------------------------------------------------ helpers


def clearing_time_arrivals(graph: PeerGraph, comm, arrivals, policy: str = TREE, seed: int = 0,
                           observers=()) -> float:
    """Time at which every peer holds every block of ``arrivals`` (``inf`` if the replay runs dry)."""
    arrivals = sorted(((float(t), int(p)) for t, p in arrivals), key=lambda e: e[0])
    if not arrivals:
        return 0.0
    cfg = SimConfig(graph, policy, DeterministicArrivals(tuple(arrivals)), comm,
                    Stop("blocks", len(arrivals)), master_seed=seed, record_periods=False,
                    observers=tuple(observers))
    sim = Simulation(cfg)
    try:
        sim.execute()
    except ScheduleExhausted:
        return math.inf
    return sim.t


def clearing_time(graph: PeerGraph, comm, batch, seed: int = 0) -> float:
    """Clearing time of a batch of ``(peer, block index)`` all present at t = 0."""
    batch = sorted(batch, key=lambda e: e[1])
    for i, (_, b) in enumerate(batch, start=1):
        if b != i:
            raise ConfigError("batch block indices must run 1..n")
    return clearing_time_arrivals(graph, comm, [(0.0, p) for p, _ in batch], seed=seed)


def simulate_single_block_spread(graph: PeerGraph, bandwidth: float = 1.0, replications: int = 1,
                                 seed: int = 0, comm=None, origin: int | None = None,
                                 mode: str = "lazy") -> list:
    """Full-dissemination times of one block placed at t = 0.

    The origin is uniform unless given.  ``comm`` overrides the stochastic
    clock with a replay schedule.
    """
    if replications < 1:
        raise ConfigError("replications: must be >= 1")
    comm = comm or StochasticComm(bandwidth, mode)
    out = []
    for r in range(replications):
        rs = replication_seed(seed, r)
        p = origin if origin is not None else random.Random(stream_seed(rs, ROLE_ARRIVAL_PEER)).randrange(graph.n)
        out.append(clearing_time_arrivals(graph, comm, [(0.0, p)], seed=rs))
    return out
