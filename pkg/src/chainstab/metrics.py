"""Run metrics, period logs, confidence intervals and replication aggregation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

SCHEMA_VERSION = 1

IDLE = "idle"
BUSY = "busy"

METRIC_NAMES = (
    "time_to_consistency",
    "idle_period",
    "cycle_length",
    "consistency_fraction",
    "age_of_information",
    "growth_rate",
    "per_block_dissemination",
)


@dataclass(frozen=True)
class Estimate:
    """Sample mean with Student-t 95% halfwidth (``None`` when n < 2)."""

    mean: float
    halfwidth: float | None
    n: int

    @property
    def interval(self):
        h = self.halfwidth or 0.0
        return self.mean - h, self.mean + h

    def to_dict(self):
        return {"mean": self.mean, "halfwidth": self.halfwidth, "n": self.n}

    @classmethod
    def from_dict(cls, d):
        return None if d is None else cls(d["mean"], d["halfwidth"], d["n"])


def ci95(samples) -> tuple[float, float | None]:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("ci95 needs at least one sample")
    mean = float(x.mean())
    if x.size < 2:
        return mean, None
    sd = float(x.std(ddof=1))
    return mean, float(stats.t.ppf(0.975, x.size - 1) * sd / math.sqrt(x.size))


def estimate(samples) -> Estimate | None:
    if len(samples) == 0:
        return None
    mean, half = ci95(samples)
    return Estimate(mean, half, len(samples))


@dataclass
class PeriodLog:
    """Alternating idle/busy intervals; the last one may still be open."""

    kinds: list = field(default_factory=list)
    starts: list = field(default_factory=list)
    ends: list = field(default_factory=list)

    def open(self, kind: str, t: float):
        if self.kinds and self.ends[-1] is None:
            if self.kinds[-1] == kind:
                raise ValueError(f"two consecutive {kind} periods at t={t}")
            self.ends[-1] = t
        self.kinds.append(kind)
        self.starts.append(t)
        self.ends.append(None)

    def close(self, t: float):
        if self.kinds and self.ends[-1] is None:
            self.ends[-1] = t

    def durations(self, kind: str, complete_only: bool = True) -> list:
        """Lengths of ``kind`` periods; the trailing period counts only if ``complete_only`` is off."""
        out = []
        n = len(self.kinds)
        for i, (k, s, e) in enumerate(zip(self.kinds, self.starts, self.ends)):
            if k != kind:
                continue
            if complete_only and (e is None or i == n - 1):
                continue
            out.append(e - s)
        return out

    def cycles(self) -> list:
        """Idle period plus the busy period that follows it, for completed pairs."""
        idle = None
        out = []
        n = len(self.kinds)
        for i, (k, s, e) in enumerate(zip(self.kinds, self.starts, self.ends)):
            if e is None or i == n - 1:
                break
            if k == IDLE:
                idle = e - s
            elif idle is not None:
                out.append(idle + e - s)
                idle = None
        return out

    def rows(self):
        return [[k, s, e] for k, s, e in zip(self.kinds, self.starts, self.ends)]

    @classmethod
    def from_rows(cls, rows):
        log = cls()
        for k, s, e in rows:
            log.kinds.append(k)
            log.starts.append(s)
            log.ends.append(e)
        return log

    def __len__(self):
        return len(self.kinds)


@dataclass
class RunTotals:
    """Raw quantities a run hands over for metric computation."""

    window_start: float
    window_end: float
    n_peers: int
    consistent_integral: float
    aoi_integral: float
    periods: PeriodLog
    dissemination: list
    growth: tuple | None = None  # (depth_first, depth_last, t_first, t_last)


@dataclass
class SimReport:
    time_to_consistency: Estimate | None = None
    idle_period: Estimate | None = None
    cycle_length: Estimate | None = None
    consistency_fraction: Estimate | None = None
    age_of_information: Estimate | None = None
    growth_rate: Estimate | None = None
    per_block_dissemination: Estimate | None = None
    counts: dict = field(default_factory=dict)
    window: list | None = None
    replications: int = 1
    config: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    periods: list | None = None
    bounds: dict | None = None
    saturation: dict | None = None
    trace: dict | None = None
    sweep: list | None = None
    properties: dict | None = None
    analysis: dict | None = None
    schema_version: int = SCHEMA_VERSION

    def metric(self, name: str) -> Estimate | None:
        return getattr(self, name)

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in METRIC_NAMES:
            est = getattr(self, name)
            d[name] = None if est is None else est.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimReport":
        d = dict(d)
        for name in METRIC_NAMES:
            d[name] = Estimate.from_dict(d.get(name))
        return cls(**d)


def summarize(totals: RunTotals) -> dict:
    """Metric estimates for one run's measurement window.

    Busy-period mean gives the time to consistency; cycle length is the mean
    busy plus mean idle period.  Consistency fraction and age of information
    are exact time averages of piecewise-constant trajectories.
    """
    span = totals.window_end - totals.window_start
    busy = totals.periods.durations(BUSY)
    idle = totals.periods.durations(IDLE)
    out = {name: None for name in METRIC_NAMES}
    out["time_to_consistency"] = estimate(busy)
    out["idle_period"] = estimate(idle)
    cycles = totals.periods.cycles()
    if busy and idle and cycles:
        _, half = ci95(cycles)
        out["cycle_length"] = Estimate(float(np.mean(busy)) + float(np.mean(idle)), half, len(cycles))
    if span > 0:
        n = totals.n_peers
        out["consistency_fraction"] = Estimate(totals.consistent_integral / (span * n), None, 1)
        out["age_of_information"] = Estimate(totals.aoi_integral / (span * n), None, 1)
    if totals.growth is not None:
        d0, d1, t0, t1 = totals.growth
        if t1 > t0:
            out["growth_rate"] = Estimate((d1 - d0) / (t1 - t0), None, 1)
    out["per_block_dissemination"] = estimate(totals.dissemination)
    return out


def _config_key(cfg: dict) -> dict:
    return {k: v for k, v in cfg.items() if k not in ("master_seed", "replication")}


def aggregate(reports: list) -> SimReport:
    """Across-replication mean and CI of each per-run metric mean."""
    if not reports:
        raise ValueError("nothing to aggregate")
    key = _config_key(reports[0].config)
    for r in reports[1:]:
        if _config_key(r.config) != key:
            raise ValueError("reports come from different configurations")
    out = SimReport(config=dict(reports[0].config), replications=len(reports))
    for name in METRIC_NAMES:
        vals = [r.metric(name).mean for r in reports if r.metric(name) is not None]
        if len(vals) == len(reports):
            setattr(out, name, estimate(vals))
    counts = {}
    for r in reports:
        for k, v in r.counts.items():
            counts[k] = counts.get(k, 0) + v
    out.counts = counts
    out.seeds = {"replications": [r.seeds for r in reports]}
    out.trace = reports[0].trace
    return out
