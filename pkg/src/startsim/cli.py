"""Command line: run one scenario, sweep an axis, or render saved metrics.

    startsim run --scenario table1 --out results/
    startsim run --scenario my.scn --seed 7 --horizon 20 --out results/
    startsim sweep --axis buffer --values 100,150,200,250,300 --out results/
    startsim report --in results/
"""

from __future__ import annotations

import argparse
import os
import sys

from .metrics import (METRICS_HEADER, render_metrics_table, write_metrics,
                      write_trace)
from .presets import PRESET_NAMES, preset
from .run import SWEEP_CONTROLLERS, run_scenario, sweep
from .scenario import ConfigError, ScenarioConfig, load_scenario


def _load_scenarios(spec):
    """A --scenario argument is either a preset name or a scenario file."""
    if spec in PRESET_NAMES:
        return preset(spec)
    if not os.path.exists(spec):
        raise ConfigError(
            f"{spec!r} is neither a preset ({', '.join(PRESET_NAMES)}) "
            f"nor a scenario file")
    cfg = load_scenario(spec)
    return {cfg.scenario_id: cfg}


def _cmd_run(args):
    scenarios = _load_scenarios(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    reports = []
    for label, cfg in scenarios.items():
        if args.seed is not None:
            cfg.seed = args.seed
        if args.horizon is not None:
            cfg.horizon_s = args.horizon
            cfg.measurement_windows = [
                (a, min(b, args.horizon))
                for a, b in cfg.measurement_windows if a < args.horizon]
        cfg.validate()
        result = run_scenario(cfg)
        safe = cfg.scenario_id.replace("/", "_")
        write_trace(result.trace_records,
                    os.path.join(args.out, f"trace_{safe}.csv"))
        reports.extend(result.reports)
        for rep in result.reports:
            for fid, tput in sorted(rep.throughput_bps.items()):
                print(f"{cfg.scenario_id} flow {fid} "
                      f"[{rep.window_start_s:g},{rep.window_end_s:g}s): "
                      f"util {rep.link_utilization:.4f} "
                      f"tput {tput / 1e6:.2f} Mbps "
                      f"drops {rep.drops_total}")
    write_metrics(reports, os.path.join(args.out, "metrics.csv"))
    print(f"wrote {os.path.join(args.out, 'metrics.csv')}")
    return 0


def _parse_controllers(raw):
    """Entries like 'slowstart:ssthresh=32' or bare names; 'default' keeps
    the standard comparison set."""
    if raw is None or raw == "default":
        return None
    out = []
    for entry in raw.split(","):
        entry = entry.strip()
        if not entry:
            continue
        name, _, rest = entry.partition(":")
        params = {}
        label = name
        for kv in filter(None, rest.split(":")):
            key, _, val = kv.partition("=")
            params[key] = float(val)
            label += f"_{key}{val}"
        out.append((label, name, params))
    return out


def _cmd_sweep(args):
    values = [float(v) for v in args.values.split(",") if v.strip()]
    if args.axis == "buffer":
        values = [int(v) for v in values]
    elif args.axis == "delay":
        values = [v / 1000.0 for v in values]   # given in ms
    elif args.axis == "bandwidth":
        values = [v * 1e6 for v in values]      # given in Mbps
    base = ScenarioConfig()
    controllers = _parse_controllers(args.controllers)
    points = sweep(base, args.axis, values, controllers,
                   horizon_s=args.horizon or 20.0)
    os.makedirs(args.out, exist_ok=True)
    reports, rows = [], []
    for p in points:
        if p.error is not None:
            rows.append((p.axis, f"{p.value:g}", p.label, "ERROR", p.error))
            continue
        rep = p.report
        reports.append(rep)
        ratio = rep.throughput_ratio.get(0, "")
        rows.append((p.axis, f"{p.value:g}", p.label,
                     f"{rep.link_utilization:.4f}",
                     f"{ratio:.4f}" if ratio != "" else ""))
    print(render_metrics_table(rows, ("axis", "value", "controller",
                                      "utilization", "sls_ratio")))
    write_metrics(reports, os.path.join(args.out, "metrics.csv"))
    print(f"wrote {os.path.join(args.out, 'metrics.csv')}")
    return 0


def _cmd_report(args):
    path = os.path.join(args.indir, "metrics.csv")
    if not os.path.exists(path):
        print(f"no metrics.csv under {args.indir}", file=sys.stderr)
        return 1
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines or lines[0] != METRICS_HEADER:
        print(f"{path} does not look like a metrics file", file=sys.stderr)
        return 1
    columns = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    print(render_metrics_table(rows, columns))
    if args.csv_out:
        with open(args.csv_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {args.csv_out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="startsim",
        description="Deterministic packet-level TCP startup simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario file or preset")
    p_run.add_argument("--scenario", required=True,
                       help="scenario file path or preset name")
    p_run.add_argument("--out", default="results",
                       help="output directory for traces and metrics")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--horizon", type=float, default=None,
                       help="override the horizon in seconds")
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep buffer, delay or bandwidth")
    p_sweep.add_argument("--axis", required=True,
                         choices=("buffer", "delay", "bandwidth"))
    p_sweep.add_argument("--values", required=True,
                         help="comma list: packets, ms, or Mbps per axis")
    p_sweep.add_argument("--controllers", default=None,
                         help="comma list like 'slowstart:ssthresh=32,vegas'")
    p_sweep.add_argument("--out", default="results")
    p_sweep.add_argument("--horizon", type=float, default=None)
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_rep = sub.add_parser("report", help="render a saved metrics.csv")
    p_rep.add_argument("--in", dest="indir", required=True)
    p_rep.add_argument("--csv-out", default=None)
    p_rep.set_defaults(fn=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
