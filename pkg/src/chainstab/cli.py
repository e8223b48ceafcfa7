"""Command-line interface.

Exit codes: 0 success, 1 invalid input or failed check, 2 runtime error.
The default output directory comes from ``CHAINSTAB_OUTPUT_DIR``.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import jsonschema

from .chaindag import POLICIES, TREE, BlockDag, DagError, confirmed_at_consistency, distinguished_path, max_in_degree
from .metrics import METRIC_NAMES, SimReport
from .netgraph import FAMILIES, TopologyError, generate, per_peer_rate_cap, stability_bounds, to_edgelist
from .saturation import estimate_mu, run_property_suite
from .simengine import (
    ConfigError,
    PoissonArrivals,
    SimError,
    Simulation,
    replication_seed,
    run_replications,
)
from .traceio import canonical_json, load_config, series_csv, validate_report, write_report

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
OUTPUT_ENV = "CHAINSTAB_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _add_topology_args(p):
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--branching", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--seed", type=int, default=0)


def _graph(args):
    params = {k: getattr(args, k) for k in ("n", "dim", "k", "branching", "depth", "p", "d", "c")
              if getattr(args, k) is not None}
    return generate(args.family, seed=args.seed, **params)


def _emit(report: SimReport, as_json: bool):
    doc = report.to_dict()
    validate_report(doc)
    if as_json:
        sys.stdout.write(canonical_json(doc))
    return doc


def _outdir(args, cfg_dir=None) -> Path:
    return Path(args.output_dir or cfg_dir or os.environ.get(OUTPUT_ENV) or "chainstab-out")


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)


# ------------------------------------------------------------------ topology


def cmd_topology(args) -> int:
    g = _graph(args)
    mode = "exact" if args.exact else "heuristic" if args.heuristic else "auto"
    b = stability_bounds(g, args.bandwidth, mode)
    cap, share = per_peer_rate_cap(g.n)
    bounds = b.to_dict()
    bounds["per_peer_cap"] = {"global": float(cap), "per_peer": float(share)}
    report = SimReport(config={"topology": g.describe(), "bandwidth": args.bandwidth},
                       seeds={"master_seed": args.seed}, bounds=bounds)
    if args.edgelist:
        Path(args.edgelist).write_text(to_edgelist(g))
    _emit(report, args.json)
    if not args.json:
        tag = "exact" if b.exact else "estimate"
        print(f"family       {g.family}")
        print(f"peers        {g.n}")
        print(f"links        {g.link_count}")
        print(f"conductance  {float(b.conductance):.6f} ({tag}, {_frac(b.conductance)})")
        print(f"lower bound  {b.lower:.4f} blocks/s")
        print(f"upper bound  {b.upper:.4f} blocks/s ({tag})")
        print(f"rate cap     global {_frac(cap)} = {float(cap):.4f}, per peer {_frac(share)} = {float(share):.4f}")
    return EXIT_OK


# ------------------------------------------------------------------ simulate


def _grid(spec: str) -> list:
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise ConfigError(f"--lambda-grid: expected start:stop:step, got {spec!r}") from None
    if step <= 0 or stop <= start or start <= 0:
        raise ConfigError(f"--lambda-grid: need 0 < start < stop and step > 0, got {spec!r}")
    count = int(round((stop - start) / step))
    return [round(start + i * step, 12) for i in range(count)]


def _metric_rows(report: SimReport):
    for name in METRIC_NAMES:
        est = report.metric(name)
        if est is None:
            yield name, "-", "", ""
        else:
            half = "" if est.halfwidth is None else f"± {est.halfwidth:.6g}"
            yield name, f"{est.mean:.6g}", half, str(est.n)


def _print_table(report: SimReport):
    for name, mean, half, n in _metric_rows(report):
        print(f"{name:<25} {mean:>12} {half:<16} n={n}" if n else f"{name:<25} {mean:>12}")


def _transcript_lines(entries):
    for e in entries:
        kind, t = e[0], e[1]
        if kind == "arrival":
            _, _, b, p, refs = e
            yield f"t={t:g} arrival block {b} at peer {p} refs {','.join(map(str, refs))}"
        elif kind == "transfer":
            _, _, p, q, b = e
            yield f"t={t:g} transfer block {b} peer {p} -> peer {q}"
        elif kind == "noop":
            _, _, p, q = e
            yield f"t={t:g} noop peer {p} -> peer {q}"
        else:
            yield f"t={t:g} {kind}"


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.debug:
        overrides["debug"] = True
    sim_cfg = cfg.build_sim_config(**overrides)
    reps = args.replications or cfg.replications
    out = _outdir(args, cfg.output.get("dir"))
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / cfg.output.get("report", "report.json")

    if args.lambda_grid:
        if not isinstance(sim_cfg.arrivals, PoissonArrivals):
            raise ConfigError("--lambda-grid needs poisson arrivals")
        rows = []
        for lam in _grid(args.lambda_grid):
            agg, _ = run_replications(replace(sim_cfg, arrivals=PoissonArrivals(lam)), reps, args.jobs)
            row = {"lambda": lam}
            for name in METRIC_NAMES:
                est = agg.metric(name)
                row[name] = None if est is None else est.to_dict()
            rows.append(row)
        report = SimReport(config=sim_cfg.describe(), replications=reps, sweep=rows,
                           seeds={"master_seed": sim_cfg.master_seed})
        write_report(report, report_path)
        (out / "sweep.csv").write_text(_sweep_csv(rows))
        _emit(report, args.json)
        if not args.json:
            print(f"{'lambda':>8} " + " ".join(f"{n[:14]:>15}" for n in METRIC_NAMES))
            for row in rows:
                vals = ["-" if row[n] is None else f"{row[n]['mean']:.5g}" for n in METRIC_NAMES]
                print(f"{row['lambda']:>8g} " + " ".join(f"{v:>15}" for v in vals))
            print(f"report written to {report_path}")
        return EXIT_OK

    agg, reports = run_replications(sim_cfg, reps, args.jobs)
    want_series = args.series or cfg.output.get("series", False)
    want_transcript = args.transcript or cfg.output.get("transcript", False)
    if want_series or want_transcript or args.dag:
        first = replace(sim_cfg, master_seed=replication_seed(sim_cfg.master_seed, 0),
                        record_series=want_series, record_transcript=want_transcript)
        sim = Simulation(first)
        sim.run()
        (out / "dag.txt").write_text(sim.dag.to_text())
        if want_series:
            (out / "series.csv").write_text(series_csv(sim.series))
        if want_transcript:
            lines = list(_transcript_lines(sim.transcript))
            (out / "transcript.txt").write_text("\n".join(lines) + "\n")
            if not args.json:
                print("\n".join(lines))
    if reps == 1:
        agg = reports[0]
    agg.config = dict(agg.config, document=cfg.doc)
    write_report(agg, report_path)
    doc = _emit(agg, args.json)
    if not args.json:
        print(f"replications {reps}; " + ", ".join(f"{k} {v}" for k, v in doc["counts"].items()))
        if agg.trace:
            print(f"trace {agg.trace.get('source', {})}")
        _print_table(agg)
        print(f"report written to {report_path}")
    return EXIT_OK


def _sweep_csv(rows) -> str:
    cols = ["lambda"]
    for n in METRIC_NAMES:
        cols += [n, f"{n}_halfwidth"]
    lines = [",".join(cols)]
    for row in rows:
        vals = [repr(row["lambda"])]
        for n in METRIC_NAMES:
            est = row[n]
            vals += ["", ""] if est is None else [repr(est["mean"]), "" if est["halfwidth"] is None else repr(est["halfwidth"])]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ saturate / properties / analyze


def cmd_saturate(args) -> int:
    g = _graph(args)
    sweep = estimate_mu(g, args.bandwidth, args.n_max, args.replications, args.seed, args.mode)
    report = SimReport(config={"topology": g.describe(), "bandwidth": args.bandwidth,
                               "n_max": args.n_max, "replications": args.replications},
                       seeds={"master_seed": args.seed}, saturation=sweep.to_dict(),
                       bounds=sweep.bounds, replications=args.replications)
    _emit(report, args.json)
    if not args.json:
        print(f"{'n':>6} {'E[X_n]':>12} {'halfwidth':>12}")
        for n, m, h in zip(sweep.ladder, sweep.means, sweep.halfwidths):
            print(f"{n:>6} {m:>12.5g} {h if h is None else format(h, '.4g'):>12}")
        print(f"mu_hat       {sweep.mu_hat:.4f}  CI [{sweep.mu_low:.4f}, {sweep.mu_high:.4f}]")
        if sweep.bounds:
            print(f"bounds       [{sweep.bounds['lower']:.4f}, {sweep.bounds['upper']:.4f}]")
            print(f"contained    {sweep.contained}")
    return EXIT_OK


def cmd_properties(args) -> int:
    res = run_property_suite(args.instances, args.seed)
    report = SimReport(config={"instances": args.instances}, seeds={"master_seed": args.seed},
                       counts={"checks": res["checks"], "violations": res["violations"]}, properties=res)
    _emit(report, args.json)
    if not args.json:
        for name, row in res["by_check"].items():
            print(f"{name:<22} run {row['run']:>6}  violations {row['violations']}")
        jd = res["joint_delays"]
        print(f"joint delays (reported only): {jd['run']} tried, {jd['decreases']} decreased clearing time")
        print(f"{res['checks']} checks, {res['violations']} violations")
        for f in res["failures"][:3]:
            print(f"FAILED {f['check']}: {f['detail']}\n{f['instance']}")
    return EXIT_OK if res["violations"] == 0 else EXIT_INVALID


def cmd_analyze(args) -> int:
    try:
        text = Path(args.path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.path}: {exc.strerror}") from None
    dag = BlockDag.from_text(text)
    path = distinguished_path(dag)
    confirmed = confirmed_at_consistency(dag, args.policy)
    orphaned = sorted(set(range(len(dag))) - confirmed)
    analysis = {
        "blocks": len(dag),
        "distinguished_path": path,
        "confirmed": sorted(confirmed),
        "orphaned": orphaned,
        "orphan_count": len(orphaned),
        "max_in_degree": max_in_degree(dag),
        "max_out_degree": max(len(r) for r in dag.refs),
    }
    report = SimReport(config={"dag": str(args.path), "policy": args.policy}, analysis=analysis)
    _emit(report, args.json)
    if not args.json:
        print(f"blocks              {analysis['blocks']}")
        print(f"distinguished path  {' -> '.join(map(str, path))}")
        print(f"confirmed           {{{', '.join(map(str, analysis['confirmed']))}}}")
        print(f"orphaned            {{{', '.join(map(str, orphaned))}}} ({len(orphaned)})")
        print(f"max in-degree       {analysis['max_in_degree']}")
        print(f"max out-degree      {analysis['max_out_degree']}")
    return EXIT_OK


# ------------------------------------------------------------------ entry point


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chainstab", description="Block dissemination simulation and stability analysis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("topology", help="generate a topology and print its stability bounds")
    _add_topology_args(p)
    p.add_argument("--bandwidth", type=float, default=1.0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="enumerate every cut (N <= 20)")
    g.add_argument("--heuristic", action="store_true", help="evaluate the heuristic cut family")
    p.add_argument("--edgelist", help="also write the graph as an edge list")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_topology)

    p = sub.add_parser("simulate", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--lambda-grid", help="start:stop:step arrival rates (stop excluded)")
    p.add_argument("--transcript", action="store_true", help="print and save the event transcript")
    p.add_argument("--series", action="store_true", help="write the per-event time series CSV")
    p.add_argument("--dag", action="store_true", help="export the first replication's DAG to dag.txt")
    p.add_argument("--debug", action="store_true", help="run invariant monitors")
    p.add_argument("--output-dir")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("saturate", help="estimate the critical rate from clearing times")
    _add_topology_args(p)
    p.add_argument("--bandwidth", type=float, default=1.0)
    p.add_argument("--n-max", type=int, default=256)
    p.add_argument("--replications", type=int, default=30)
    p.add_argument("--mode", choices=("dense", "lazy"), default="dense")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_saturate)

    p = sub.add_parser("properties", help="randomised monotone-separability checks")
    p.add_argument("--instances", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_properties)

    p = sub.add_parser("analyze", help="distinguished path and confirmation of an exported DAG")
    p.add_argument("path")
    p.add_argument("--policy", choices=POLICIES, default=TREE)
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; analysis is deterministic")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, TopologyError, DagError, jsonschema.ValidationError, ValueError) as exc:
        msg = exc.message if isinstance(exc, jsonschema.ValidationError) else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
