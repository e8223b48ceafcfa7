"""Arrival traces, replay files, experiment configs and report serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import yaml

from .metrics import SCHEMA_VERSION, SimReport
from .netgraph import FAMILIES, PeerGraph, from_edgelist, generate
from .simengine import (
    ConfigError,
    DeterministicArrivals,
    PoissonArrivals,
    ReplaySchedule,
    SimConfig,
    StochasticComm,
    Stop,
    TraceArrivals,
)


# ------------------------------------------------------------------ traces


@dataclass(frozen=True)
class ArrivalTrace:
    times: tuple
    source: dict
    summary: dict


def _trace_lines(data):
    if isinstance(data, (str, bytes)):
        text = data.decode("utf-8") if isinstance(data, bytes) else data
        return text.splitlines()
    return [ln.rstrip("\n") for ln in data]


def parse_trace(data, format: str = "seconds") -> ArrivalTrace:
    """Parse one timestamp per line; ``#`` lines and blanks are skipped.

    ``seconds`` takes decimal seconds, ``epoch_seconds`` Unix timestamps.
    Both are shifted so the first arrival is at 0.  Input must already be
    strictly increasing.
    """
    if format not in ("seconds", "epoch_seconds"):
        raise ValueError(f"format must be 'seconds' or 'epoch_seconds', got {format!r}")
    raw = []
    prev = None
    for lineno, line in enumerate(_trace_lines(data), start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            v = float(s)
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse timestamp {s!r}") from None
        if not math.isfinite(v):
            raise ValueError(f"line {lineno}: timestamp {s!r} is not finite")
        if prev is not None and not v > prev:
            raise ValueError(f"line {lineno}: timestamp {s} is not after the previous one ({prev:g})")
        prev = v
        raw.append(v)
    if len(raw) < 2:
        raise ValueError(f"trace needs at least 2 timestamps, got {len(raw)}")
    first = raw[0]
    times = tuple(v - first for v in raw)
    gaps = [b - a for a, b in zip(times, times[1:])]
    mean = sum(gaps) / len(gaps)
    var = sum((g - mean) ** 2 for g in gaps) / (len(gaps) - 1) if len(gaps) > 1 else 0.0
    summary = {"count": len(times), "mean_interarrival": mean, "var_interarrival": var,
               "rate": (len(times) - 1) / times[-1]}
    source = {"format": format, "original_count": len(raw), "original_first": first}
    return ArrivalTrace(times, source, summary)


def synthetic_trace(count: int = 2000, rate: float = 1 / 600, seed: int = 0, start: int = 1_230_000_000) -> str:
    """Epoch-second trace with exponential gaps, rounded to whole seconds."""
    rng = random.Random(seed)
    t = float(start)
    lines = [f"{start}"]
    last = start
    while len(lines) < count:
        t += rng.expovariate(rate)
        v = int(round(t))
        if v > last:
            lines.append(str(v))
            last = v
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ replay files


def parse_replay(text: str, n: int):
    """Read ``arrival <time> <peer>`` and ``epoch <peer> <time> <target>`` lines."""
    arrivals = []
    epochs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        try:
            if parts[0] == "arrival" and len(parts) == 3:
                arrivals.append((float(parts[1]), int(parts[2])))
            elif parts[0] == "epoch" and len(parts) == 4:
                epochs.append((int(parts[1]), float(parts[2]), int(parts[3])))
            else:
                raise ValueError
        except ValueError:
            raise ConfigError(f"replay line {lineno}: cannot parse {line.strip()!r}") from None
    arrivals.sort(key=lambda e: e[0])
    return DeterministicArrivals(tuple(arrivals)), ReplaySchedule.from_events(n, epochs)


def format_replay(arrivals, schedule: ReplaySchedule | None = None) -> str:
    lines = [f"arrival {t!r} {p}" for t, p in arrivals.events]
    if schedule is not None:
        for p, row in enumerate(schedule.epochs):
            lines.extend(f"epoch {p} {t!r} {q}" for t, q in row)
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ configs

_POS = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["topology", "policy", "arrivals", "comm", "stop"],
    "properties": {
        "topology": {
            "type": "object",
            "additionalProperties": False,
            "required": ["family"],
            "properties": {
                "family": {"enum": list(FAMILIES) + ["edgelist"]},
                "params": {"type": "object"},
                "seed": {"type": "integer", "minimum": 0},
                "path": {"type": "string"},
            },
        },
        "policy": {"enum": ["tree", "throughput_optimal"]},
        "arrivals": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["poisson", "deterministic", "trace"]},
                "rate": _POS,
                "path": {"type": "string"},
                "format": {"enum": ["seconds", "epoch_seconds"]},
                "events": {"type": "array", "items": {
                    "type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}},
            },
            "allOf": [
                {"if": {"properties": {"kind": {"const": "poisson"}}}, "then": {"required": ["rate"]}},
                {"if": {"properties": {"kind": {"const": "trace"}}}, "then": {"required": ["path"]}},
            ],
        },
        "comm": {
            "type": "object",
            "additionalProperties": False,
            "required": ["mode"],
            "properties": {
                "mode": {"enum": ["stochastic", "lazy", "dense", "replay"]},
                "rate": _POS,
                "schedule_path": {"type": "string"},
            },
            "allOf": [
                {"if": {"properties": {"mode": {"const": "replay"}}},
                 "then": {"required": ["schedule_path"]}, "else": {"required": ["rate"]}},
            ],
        },
        "stop": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "value"],
            "properties": {"kind": {"enum": ["cycles", "blocks", "sim_time"]}, "value": _POS},
        },
        "warmup_cycles": {"type": "integer", "minimum": 0},
        "replications": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0},
        "debug": {"type": "boolean"},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "report": {"type": "string"},
                "series": {"type": "boolean"},
                "periods": {"type": "boolean"},
                "transcript": {"type": "boolean"},
            },
        },
    },
}


def _path_of(err) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "required":
        missing = err.message.split("'")[1]
        parts.append(missing)
    elif err.validator == "additionalProperties":
        extra = err.message.split("'")[1]
        parts.append(extra)
    return ".".join(parts) or "<root>"


def validate_config(doc) -> None:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(e.absolute_path), e.validator))
    if errors:
        err = errors[0]
        raise ConfigError(f"{_path_of(err)}: {err.message}")


@dataclass
class ExperimentConfig:
    """A validated config document plus the directory relative paths resolve against."""

    doc: dict
    base_dir: Path = field(default_factory=Path)

    @property
    def replications(self) -> int:
        return self.doc.get("replications", 1)

    @property
    def output(self) -> dict:
        return self.doc.get("output", {})

    def _path(self, rel: str) -> Path:
        p = Path(rel)
        return p if p.is_absolute() else self.base_dir / p

    def build_graph(self) -> PeerGraph:
        topo = self.doc["topology"]
        if topo["family"] == "edgelist":
            if "path" not in topo:
                raise ConfigError("topology.path: required for family 'edgelist'")
            return from_edgelist(self._path(topo["path"]).read_text())
        return generate(topo["family"], seed=topo.get("seed", 0), **topo.get("params", {}))

    def _replay_text(self, rel):
        try:
            return self._path(rel).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {rel}: {exc.strerror}") from None

    def build_sim_config(self, graph: PeerGraph | None = None, **overrides) -> SimConfig:
        d = self.doc
        graph = graph or self.build_graph()
        arr = d["arrivals"]
        kind = arr["kind"]
        if kind == "poisson":
            arrivals = PoissonArrivals(arr["rate"])
        elif kind == "deterministic":
            if "events" in arr:
                arrivals = DeterministicArrivals(tuple(tuple(e) for e in arr["events"]))
            elif "path" in arr:
                arrivals, _ = parse_replay(self._replay_text(arr["path"]), graph.n)
            else:
                raise ConfigError("arrivals: deterministic arrivals need 'events' or 'path'")
        else:
            try:
                trace = parse_trace(self._path(arr["path"]).read_text(), arr.get("format", "seconds"))
            except OSError as exc:
                raise ConfigError(f"arrivals.path: cannot read {arr['path']}: {exc.strerror}") from None
            except ValueError as exc:
                raise ConfigError(f"arrivals.path: {exc}") from None
            src = dict(trace.source, path=arr["path"], **trace.summary)
            arrivals = TraceArrivals(trace.times, src)
        comm_doc = d["comm"]
        if comm_doc["mode"] == "replay":
            _, comm = parse_replay(self._replay_text(comm_doc["schedule_path"]), graph.n)
        else:
            mode = "dense" if comm_doc["mode"] == "dense" else "lazy"
            comm = StochasticComm(comm_doc["rate"], mode)
        out = self.output
        kw = dict(
            graph=graph,
            policy=d["policy"],
            arrivals=arrivals,
            comm=comm,
            stop=Stop(d["stop"]["kind"], d["stop"]["value"]),
            warmup_cycles=d.get("warmup_cycles", 0),
            master_seed=d.get("master_seed", 0),
            record_periods=out.get("periods", True),
            record_transcript=out.get("transcript", False),
            debug=d.get("debug", False),
        )
        kw.update(overrides)
        return SimConfig(**kw)


def load_config_text(text: str, base_dir=".") -> ExperimentConfig:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"<root>: not a valid YAML document ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError("<root>: config must be a mapping")
    validate_config(doc)
    return ExperimentConfig(doc, Path(base_dir))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return load_config_text(text, path.parent)


# ------------------------------------------------------------------ reports

_EST = {"oneOf": [{"type": "null"}, {
    "type": "object", "required": ["mean", "halfwidth", "n"],
    "properties": {"mean": {"type": "number"}, "halfwidth": {"type": ["number", "null"]},
                   "n": {"type": "integer", "minimum": 0}}}]}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "config", "seeds", "counts"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "time_to_consistency": _EST,
        "idle_period": _EST,
        "cycle_length": _EST,
        "consistency_fraction": _EST,
        "age_of_information": _EST,
        "growth_rate": _EST,
        "per_block_dissemination": _EST,
        "counts": {"type": "object"},
        "config": {"type": "object"},
        "seeds": {"type": "object"},
        "replications": {"type": "integer", "minimum": 1},
        "saturation": {"type": ["object", "null"]},
        "bounds": {"type": ["object", "null"]},
        "sweep": {"type": ["array", "null"]},
    },
}


def canonical_json(obj) -> str:
    if isinstance(obj, SimReport):
        obj = obj.to_dict()
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def validate_report(doc: dict) -> None:
    jsonschema.validate(doc, REPORT_SCHEMA)


def write_report(report: SimReport, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(report))


def read_report(path) -> SimReport:
    doc = json.loads(Path(path).read_text())
    validate_report(doc)
    return SimReport.from_dict(doc)


SERIES_HEADER = ("time", "consistent_peers", "total_blocks", "aoi_sum")


def series_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SERIES_HEADER)
    for t, c, b, a in rows:
        w.writerow((repr(float(t)), c, b, a))
    return buf.getvalue()


def write_series(rows, path) -> None:
    Path(path).write_text(series_csv(rows))
