"""Command line interface.

Exit codes identify the failing stage:

    0  success
    1  unexpected internal error
    2  configuration or usage error
    3  ingest      4  graph      5  homes
    6  risk        7  heatmap    8  synth
    9  validate found a disagreement

The output directory of `run` can be overridden with the
RISKMAP_OUTPUT_DIR environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from datetime import date
from pathlib import Path

from . import __version__
from .errors import ConfigError, RiskmapError
from .graph import read_edge_list, write_edge_list
from .heatmap import PRESETS, FilterParams, build_circles, export_layer, filter_antennas
from .homes import NightWindowConfig, read_homes, write_homes
from .ingest import ActivityFilterConfig, load_antennas
from .pipeline import (
    PipelineConfig,
    StageError,
    build_viewer_bundle,
    compute_call_volumes,
    compute_graph,
    compute_homes,
    compute_indicator_table,
    compute_ingest,
    run_pipeline,
)
from .risk import (
    indicators_to_json,
    load_zone_geojson,
    read_indicators_json,
    residents_of_zone,
    tag_vulnerable,
    write_indicators_csv,
)

STAGE_EXIT_CODES = {
    "config": 2,
    "ingest": 3,
    "graph": 4,
    "homes": 5,
    "risk": 6,
    "heatmap": 7,
    "synth": 8,
    "validate": 9,
}


def _expand_cdr(patterns: list[str]) -> list[str]:
    import glob as globmod

    paths: list[str] = []
    for pattern in patterns:
        paths.extend(globmod.glob(pattern))
    if not paths:
        raise ConfigError(f"no CDR files match {patterns!r}")
    return sorted(set(paths))


def _window(args) -> tuple[date, date] | None:
    start = getattr(args, "start", None)
    end = getattr(args, "end", None)
    if start is None and end is None:
        return None
    if start is None or end is None:
        raise ConfigError("--start and --end must be given together")
    start_d, end_d = date.fromisoformat(start), date.fromisoformat(end)
    if not start_d < end_d:
        raise ConfigError("--start must precede --end")
    return (start_d, end_d)


def _night_cfg(args) -> NightWindowConfig:
    return NightWindowConfig.from_day_names(
        args.night_start, args.night_end, args.night_days.split(",")
    )


def _add_cdr_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cdr", action="append", required=True, metavar="GLOB",
                   help="CDR file or glob; repeatable")
    p.add_argument("--antennas", required=True, help="antenna registry CSV")
    p.add_argument("--start", help="observation window start date (YYYY-MM-DD)")
    p.add_argument("--end", help="observation window end date, exclusive")
    p.add_argument("--partitions", type=int, default=1,
                   help="parallel scan partitions (default 1)")


def _add_night_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--night-start", type=int, default=20,
                   help="night window start hour, inclusive (default 20)")
    p.add_argument("--night-end", type=int, default=6,
                   help="night window end hour, exclusive (default 6)")
    p.add_argument("--night-days", default="mon,tue,wed,thu",
                   help="weekdays whose evening opens a night window")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskmap",
        description="Risk mapping from call detail records.",
    )
    parser.add_argument("--version", action="version", version=f"riskmap {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p_run = sub.add_parser("run", help="run the full pipeline from a TOML config")
    p_run.add_argument("--config", required=True, help="pipeline TOML config file")
    p_run.add_argument("--output", help="override the configured output directory")
    p_run.add_argument("--partitions", type=int, help="override partition count")
    p_run.add_argument("--emit-viewer-bundle", action="store_true",
                       help="also write viewer_bundle.json for the map viewer")
    p_run.set_defaults(handler=_cmd_run)

    p_ing = sub.add_parser("ingest", help="parse, activity-filter, and report")
    _add_cdr_args(p_ing)
    p_ing.add_argument("--mu", type=int, default=5,
                       help="minimum monthly calls, inclusive (default 5)")
    p_ing.add_argument("--m-cap", type=int, default=400,
                       help="maximum monthly calls, inclusive (default 400)")
    p_ing.add_argument("--mode", choices=["strict", "lenient"], default="lenient")
    p_ing.add_argument("--out-dir", required=True)
    p_ing.set_defaults(handler=_cmd_ingest)

    p_graph = sub.add_parser("graph", help="build the client communication graph")
    _add_cdr_args(p_graph)
    p_graph.add_argument("--clients", required=True, help="clients.txt from ingest")
    p_graph.add_argument("--out", required=True, help="edge list output path")
    p_graph.set_defaults(handler=_cmd_graph)

    p_homes = sub.add_parser("homes", help="detect home antennas")
    _add_cdr_args(p_homes)
    _add_night_args(p_homes)
    p_homes.add_argument("--clients", required=True, help="clients.txt from ingest")
    p_homes.add_argument("--out", required=True, help="home assignments output path")
    p_homes.set_defaults(handler=_cmd_homes)

    p_risk = sub.add_parser("risk", help="residency, vulnerability, and indicators")
    _add_cdr_args(p_risk)
    p_risk.add_argument("--zone", required=True, help="endemic zone GeoJSON")
    p_risk.add_argument("--homes", required=True, help="homes.csv from the homes stage")
    p_risk.add_argument("--edges", required=True, help="edges.csv from the graph stage")
    p_risk.add_argument("--out-dir", required=True)
    p_risk.set_defaults(handler=_cmd_risk)

    p_heat = sub.add_parser("heatmap", help="filter indicators into a circle layer")
    p_heat.add_argument("--indicators", required=True,
                        help="indicators.json from the risk stage")
    p_heat.add_argument("--beta", type=float, help="minimum vulnerable fraction, strict")
    p_heat.add_argument("--min-volume", type=int, help="minimum population, strict")
    p_heat.add_argument("--preset", choices=sorted(PRESETS),
                        help="named filter regime (overridden by --beta/--min-volume)")
    p_heat.add_argument("--radius-constant", type=float, default=1.0)
    p_heat.add_argument("--format", choices=["geojson", "csv"], default="geojson")
    p_heat.add_argument("--out", required=True)
    p_heat.set_defaults(handler=_cmd_heatmap)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset with manifest")
    p_synth.add_argument("--out-dir", default="synth-data")
    p_synth.add_argument("--seed", type=int, default=7)
    p_synth.add_argument("--users", type=int, default=1000)
    p_synth.add_argument("--antennas", type=int, default=50)
    p_synth.add_argument("--days", type=int, default=30)
    p_synth.add_argument("--endemic-fraction", type=float, default=0.3)
    p_synth.add_argument("--affinity", type=float, default=0.8,
                         help="probability a night call uses the home antenna")
    p_synth.add_argument("--mean-degree", type=float, default=6.0)
    p_synth.add_argument("--tie-bias", type=float, default=2.0)
    p_synth.add_argument("--calls-per-day", type=float, default=1.5)
    p_synth.add_argument("--decay", type=float, default=3.0,
                         help="edge probability distance decay, degrees")
    p_synth.add_argument("--start-date", default="2011-11-01")
    p_synth.add_argument("--gzip", action="store_true", help="write gzipped CDR files")
    p_synth.set_defaults(handler=_cmd_synth)

    p_val = sub.add_parser(
        "validate", help="run brute-force oracles of every stage on a small dataset"
    )
    p_val.add_argument("--small", action="store_true",
                       help="use the built-in 100-user dataset")
    p_val.add_argument("--seed", type=int, default=20111107)
    p_val.add_argument("--keep", help="keep the working directory at this path")
    p_val.set_defaults(handler=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "handler", None) is None:
        parser.print_help()
        return 0
    try:
        return args.handler(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return STAGE_EXIT_CODES.get(exc.stage, 1)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return STAGE_EXIT_CODES["config"]
    except RiskmapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        stage = getattr(args, "command", None)
        return STAGE_EXIT_CODES.get(stage, 1)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_run(args) -> int:
    output_override = args.output or os.environ.get("RISKMAP_OUTPUT_DIR")
    cfg = PipelineConfig.from_toml(args.config, output_override=output_override)
    if args.partitions is not None:
        cfg.partitions = args.partitions
    if args.emit_viewer_bundle:
        cfg.emit_viewer_bundle = True
    result = run_pipeline(cfg)
    cached = sum(1 for s in result.stages if s.cached)
    print(f"pipeline complete: {len(result.stages)} stages "
          f"({cached} cached), artifacts in {result.output_dir}")
    return 0


def _wrap_stage(stage: str, fn):
    try:
        return fn()
    except (StageError, ConfigError):
        raise
    except (RiskmapError, OSError) as exc:
        raise StageError(stage, str(exc)) from exc


def _cmd_ingest(args) -> int:
    def go():
        paths = _expand_cdr(args.cdr)
        registry = load_antennas(args.antennas)
        activity = ActivityFilterConfig(args.mu, args.m_cap)
        report, clients = compute_ingest(
            paths, registry, activity, _window(args), args.mode, args.partitions
        )
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ingest_report.json").write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        (out / "ingest_report.txt").write_text(report.to_text(), encoding="utf-8")
        (out / "clients.txt").write_text(
            "".join(f"{u}\n" for u in sorted(clients)), encoding="utf-8"
        )
        print(report.to_text(), end="")

    _wrap_stage("ingest", go)
    return 0


def _read_clients_file(path: str) -> frozenset[str]:
    text = Path(path).read_text(encoding="utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def _cmd_graph(args) -> int:
    def go():
        paths = _expand_cdr(args.cdr)
        registry = load_antennas(args.antennas)
        clients = _read_clients_file(args.clients)
        graph = compute_graph(paths, registry, _window(args), clients, args.partitions)
        write_edge_list(graph, args.out)
        print(f"graph: {len(graph.nodes)} nodes, {graph.edge_count()} edges -> {args.out}")

    _wrap_stage("graph", go)
    return 0


def _cmd_homes(args) -> int:
    def go():
        paths = _expand_cdr(args.cdr)
        registry = load_antennas(args.antennas)
        clients = _read_clients_file(args.clients)
        homes = compute_homes(
            paths, registry, _window(args), clients, _night_cfg(args), args.partitions
        )
        write_homes(homes, args.out)
        print(f"homes: {len(homes)} assignments -> {args.out}")

    _wrap_stage("homes", go)
    return 0


def _cmd_risk(args) -> int:
    def go():
        paths = _expand_cdr(args.cdr)
        registry = load_antennas(args.antennas)
        zone = load_zone_geojson(args.zone)
        homes = read_homes(args.homes)
        graph = read_edge_list(args.edges)
        residents = residents_of_zone(homes, registry, zone)
        vulnerable = tag_vulnerable(graph, residents)
        calls, vcalls = compute_call_volumes(
            paths, registry, _window(args), frozenset(residents), args.partitions
        )
        indicators = compute_indicator_table(homes, vulnerable, calls, vcalls, registry)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "residents.txt").write_text(
            "".join(f"{u}\n" for u in sorted(residents)), encoding="utf-8"
        )
        (out / "vulnerable.txt").write_text(
            "".join(f"{u}\n" for u in sorted(vulnerable)), encoding="utf-8"
        )
        write_indicators_csv(indicators, out / "indicators.csv")
        (out / "indicators.json").write_text(
            indicators_to_json(indicators, registry), encoding="utf-8"
        )
        print(f"risk: {len(residents)} residents, {len(vulnerable)} vulnerable -> {out}")

    _wrap_stage("risk", go)
    return 0


def _cmd_heatmap(args) -> int:
    def go():
        indicators, registry = read_indicators_json(args.indicators)
        if args.preset:
            params = PRESETS[args.preset]
            beta = args.beta if args.beta is not None else params.beta
            min_volume = args.min_volume if args.min_volume is not None else params.min_volume
        else:
            if args.beta is None or args.min_volume is None:
                raise ConfigError("give --preset, or both --beta and --min-volume")
            beta, min_volume = args.beta, args.min_volume
        params = FilterParams(beta, min_volume)
        kept = filter_antennas(indicators, params)
        circles = build_circles(kept, indicators, registry, args.radius_constant)
        Path(args.out).write_bytes(export_layer(circles, args.format))
        print(f"heatmap: {len(circles)} antennas kept "
              f"(beta={params.beta}, min_volume={params.min_volume}) -> {args.out}")

    _wrap_stage("heatmap", go)
    return 0


def _cmd_synth(args) -> int:
    def go():
        from .synth import SynthConfig, generate

        cfg = SynthConfig(
            seed=args.seed,
            n_users=args.users,
            n_antennas=args.antennas,
            n_days=args.days,
            endemic_fraction=args.endemic_fraction,
            home_night_affinity=args.affinity,
            mean_degree=args.mean_degree,
            endemic_tie_bias=args.tie_bias,
            calls_per_user_day=args.calls_per_day,
            distance_decay=args.decay,
            start_date=date.fromisoformat(args.start_date),
            gzip_output=args.gzip,
        )
        manifest = generate(cfg, args.out_dir)
        print(f"synth: {cfg.n_users} users, {manifest.n_records} records, "
              f"{len(manifest.edges)} edges -> {args.out_dir}")

    _wrap_stage("synth", go)
    return 0


def _cmd_validate(args) -> int:
    from .validate import run_validation

    failures = run_validation(seed=args.seed, keep_dir=args.keep)
    if failures:
        print(f"validate: {failures} check(s) FAILED", file=sys.stderr)
        return STAGE_EXIT_CODES["validate"]
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
