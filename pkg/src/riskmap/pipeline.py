"""Pipeline orchestration: configuration, staged execution, and caching.

Stages run in order (ingest, graph, homes, risk, heatmap) and write their
artifacts under the output directory. Each stage is keyed by a content
hash of its inputs plus the slice of configuration it depends on; when the
key matches the previous run and the artifacts still exist, the stage is
skipped. Artifacts are deterministic: same inputs and config give byte
identical files, whatever the partition count.
"""

from __future__ import annotations

import glob as globmod
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .errors import ConfigError, RiskmapError
from .graph import SocialGraph, read_edge_list, write_edge_list
from .heatmap import PRESETS, FilterParams, build_circles, export_layer, filter_antennas
from .homes import (
    NightWindowConfig,
    assignments_from_histograms,
    merge_histograms,
    read_homes,
    write_homes,
)
from .ingest import (
    ActivityFilterConfig,
    AntennaRegistry,
    IngestReport,
    kept_users,
    load_antennas,
    merge_counts,
)
from .partition import (
    merged_report,
    plan_chunks,
    run_scans,
    scan_activity,
    scan_edges,
    scan_nights,
    scan_outgoing,
    window_tuple,
)
from .risk import (
    EndemicZone,
    indicators_from_parts,
    indicators_to_json,
    load_zone_geojson,
    read_indicators_csv,
    residents_of_zone,
    tag_vulnerable,
    write_indicators_csv,
)

STAGES = ("ingest", "graph", "homes", "risk", "heatmap")

CACHE_FILE = ".riskmap-cache.json"


def _as_date(value, key: str) -> date | None:
    if value is None:
        return None
    if isinstance(value, datetime):
        return value.date()
    if isinstance(value, date):
        return value
    if isinstance(value, str):
        try:
            return date.fromisoformat(value)
        except ValueError:
            pass
    raise ConfigError(f"{key}: expected a date (YYYY-MM-DD), got {value!r}")


@dataclass
class PipelineConfig:
    cdr_glob: str
    antenna_path: str
    zone_path: str
    output_dir: str
    activity: ActivityFilterConfig = field(default_factory=ActivityFilterConfig)
    night: NightWindowConfig = field(default_factory=NightWindowConfig)
    filter_params: FilterParams = field(default_factory=lambda: PRESETS["argentina-national"])
    radius_constant: float = 1.0
    window_start: date | None = None
    window_end: date | None = None
    partitions: int = 1
    mode: str = "lenient"
    emit_viewer_bundle: bool = False
    zone_name: str | None = None

    @classmethod
    def from_toml(cls, path: str | Path, output_override: str | None = None) -> "PipelineConfig":
        p = Path(path)
        try:
            with open(p, "rb") as f:
                doc = tomllib.load(f)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {p}")
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{p}: {exc}")

        def section(name: str) -> dict:
            value = doc.get(name, {})
            if not isinstance(value, dict):
                raise ConfigError(f"[{name}] must be a table")
            return value

        paths = section("paths")
        for key in ("cdr", "antennas", "zone", "output"):
            if key not in paths:
                raise ConfigError(f"[paths] missing required key {key!r}")
        base = p.parent

        def resolve(value: str) -> str:
            q = Path(value)
            return str(q if q.is_absolute() else base / q)

        activity = section("activity")
        night = section("night")
        filt = section("filter")
        window = section("window")
        run = section("run")

        if "preset" in filt:
            preset = filt["preset"]
            if preset not in PRESETS:
                raise ConfigError(
                    f"unknown preset {preset!r}; choose from {sorted(PRESETS)}"
                )
            params = PRESETS[preset]
            beta = filt.get("beta", params.beta)
            min_volume = filt.get("min_volume", params.min_volume)
        else:
            beta = filt.get("beta", 0.15)
            min_volume = filt.get("min_volume", 50)
        try:
            filter_params = FilterParams(float(beta), int(min_volume))
            activity_cfg = ActivityFilterConfig(
                int(activity.get("mu", 5)), int(activity.get("m_cap", 400))
            )
            night_cfg = NightWindowConfig.from_day_names(
                int(night.get("start_hour", 20)),
                int(night.get("end_hour", 6)),
                night.get("night_days", ["mon", "tue", "wed", "thu"]),
            )
        except ValueError as exc:
            raise ConfigError(str(exc))

        cfg = cls(
            cdr_glob=resolve(paths["cdr"]),
            antenna_path=resolve(paths["antennas"]),
            zone_path=resolve(paths["zone"]),
            output_dir=output_override or resolve(paths["output"]),
            activity=activity_cfg,
            night=night_cfg,
            filter_params=filter_params,
            radius_constant=float(filt.get("radius_constant", 1.0)),
            window_start=_as_date(window.get("start"), "window.start"),
            window_end=_as_date(window.get("end"), "window.end"),
            partitions=int(run.get("partitions", 1)),
            mode=str(run.get("mode", "lenient")),
            emit_viewer_bundle=bool(run.get("emit_viewer_bundle", False)),
            zone_name=doc.get("zone_name"),
        )
        cfg.validate()
        return cfg

    def cdr_paths(self) -> list[str]:
        return sorted(globmod.glob(self.cdr_glob))

    def validate(self) -> None:
        if self.partitions < 1:
            raise ConfigError("partitions must be >= 1")
        if self.mode not in ("strict", "lenient"):
            raise ConfigError("mode must be 'strict' or 'lenient'")
        if self.radius_constant <= 0:
            raise ConfigError("radius_constant must be > 0")
        if (self.window_start is None) != (self.window_end is None):
            raise ConfigError("window needs both start and end")
        if self.window_start is not None and not self.window_start < self.window_end:
            raise ConfigError("window start must precede end")

    def check_inputs(self) -> None:
        """Missing input files abort with the exit code of the stage that
        consumes them, so the failure names the responsible stage."""
        if not self.cdr_paths():
            raise StageError("ingest", f"no CDR files match {self.cdr_glob!r}")
        if not Path(self.antenna_path).exists():
            raise StageError("ingest", f"antenna file not found: {self.antenna_path}")
        if not Path(self.zone_path).exists():
            raise StageError("risk", f"zone file not found: {self.zone_path}")


class StageError(RiskmapError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class StageResult:
    stage: str
    cached: bool
    seconds: float
    artifacts: list[str]


@dataclass
class PipelineResult:
    stages: list[StageResult]
    output_dir: str

    def all_cached(self) -> bool:
        return all(s.cached for s in self.stages)


def _hash_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _stage_key(input_hashes: list[str], config_bits: dict) -> str:
    payload = json.dumps(
        {"inputs": input_hashes, "config": config_bits, "version": __version__},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class _Cache:
    def __init__(self, out_dir: Path):
        self.path = out_dir / CACHE_FILE
        self.entries: dict[str, dict] = {}
        if self.path.exists():
            try:
                self.entries = json.loads(self.path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError):
                self.entries = {}

    def fresh(self, stage: str, key: str, out_dir: Path, artifacts: list[str]) -> bool:
        entry = self.entries.get(stage)
        if not entry or entry.get("key") != key:
            return False
        return all((out_dir / name).exists() for name in artifacts)

    def store(self, stage: str, key: str, artifacts: list[str]) -> None:
        self.entries[stage] = {"key": key, "artifacts": artifacts}
        self.path.write_text(
            json.dumps(self.entries, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


def _night_cfg_bits(cfg: NightWindowConfig) -> dict:
    return {
        "start_hour": cfg.start_hour,
        "end_hour": cfg.end_hour,
        "night_days": sorted(cfg.night_days),
    }


# stage computations shared by run_pipeline and the standalone subcommands


def compute_ingest(
    cdr_paths: list[str],
    registry: AntennaRegistry,
    activity: ActivityFilterConfig,
    window: tuple[date, date] | None,
    mode: str = "lenient",
    partitions: int = 1,
) -> tuple[IngestReport, set[str]]:
    """Activity-filter users over the CDR inputs; returns (report, clients)."""
    if mode == "strict":
        # strict needs exact per-file line numbers, so scan sequentially
        chunks = plan_chunks(cdr_paths, 1)
        processes = 1
    else:
        chunks = plan_chunks(cdr_paths, partitions)
        processes = partitions
    args = [(c, registry.entries, window, mode) for c in chunks]
    outs = run_scans(scan_activity, args, processes)
    report = merged_report(outs)
    monthly: dict = {}
    users: set[str] = set()
    for acc, _ in outs:
        merge_counts(monthly, acc["monthly"])
        users |= acc["users"]
    clients = kept_users(monthly, activity)
    report.users_seen = len(users)
    report.users_kept = len(clients)
    return report, clients


def compute_graph(
    cdr_paths: list[str],
    registry: AntennaRegistry,
    window: tuple[date, date] | None,
    clients: frozenset[str],
    partitions: int = 1,
) -> SocialGraph:
    chunks = plan_chunks(cdr_paths, partitions)
    args = [(c, registry.entries, window, clients) for c in chunks]
    outs = run_scans(scan_edges, args, partitions)
    edges: set[tuple[str, str]] = set()
    for acc, _ in outs:
        edges |= acc["edges"]
    return SocialGraph(clients, edges)


def compute_homes(
    cdr_paths: list[str],
    registry: AntennaRegistry,
    window: tuple[date, date] | None,
    clients: frozenset[str],
    night: NightWindowConfig,
    partitions: int = 1,
):
    chunks = plan_chunks(cdr_paths, partitions)
    args = [(c, registry.entries, window, clients, night) for c in chunks]
    outs = run_scans(scan_nights, args, partitions)
    hist: dict[str, dict[str, int]] = {}
    for acc, _ in outs:
        merge_histograms(hist, acc["hist"])
    return assignments_from_histograms(hist)


def compute_call_volumes(
    cdr_paths: list[str],
    registry: AntennaRegistry,
    window: tuple[date, date] | None,
    residents: frozenset[str],
    partitions: int = 1,
) -> tuple[dict[str, int], dict[str, int]]:
    chunks = plan_chunks(cdr_paths, partitions)
    args = [(c, registry.entries, window, residents) for c in chunks]
    outs = run_scans(scan_outgoing, args, partitions)
    calls: dict[str, int] = {}
    vcalls: dict[str, int] = {}
    for acc, _ in outs:
        merge_counts(calls, acc["calls"])
        merge_counts(vcalls, acc["vcalls"])
    return calls, vcalls


def compute_indicator_table(
    homes,
    vulnerable: set[str],
    calls: dict[str, int],
    vcalls: dict[str, int],
    registry: AntennaRegistry,
):
    population: dict[str, int] = {}
    vulnerable_pop: dict[str, int] = {}
    for user, h in homes.items():
        population[h.home_antenna] = population.get(h.home_antenna, 0) + 1
        if user in vulnerable:
            vulnerable_pop[h.home_antenna] = vulnerable_pop.get(h.home_antenna, 0) + 1
    return indicators_from_parts(population, vulnerable_pop, calls, vcalls, registry)


def run_pipeline(cfg: PipelineConfig, log=None) -> PipelineResult:
    """Run all stages; returns per-stage timings and cache hits."""
    if log is None:
        log = lambda msg: print(msg, file=sys.stderr)
    cfg.validate()
    cfg.check_inputs()
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache = _Cache(out_dir)
    cdr_paths = cfg.cdr_paths()
    cdr_hashes = [_hash_file(p) for p in cdr_paths]
    antenna_hash = _hash_file(cfg.antenna_path)
    zone_hash = _hash_file(cfg.zone_path)
    window = window_tuple(cfg.window_start, cfg.window_end)
    window_bits = [str(cfg.window_start), str(cfg.window_end)]

    results: list[StageResult] = []

    def run_stage(stage: str, key: str, artifacts: list[str], fn) -> None:
        t0 = time.perf_counter()
        if cache.fresh(stage, key, out_dir, artifacts):
            log(f"{stage}: cached")
            results.append(StageResult(stage, True, time.perf_counter() - t0, artifacts))
            return
        try:
            fn()
        except RiskmapError as exc:
            raise StageError(stage, str(exc)) from exc
        cache.store(stage, key, artifacts)
        dt = time.perf_counter() - t0
        log(f"{stage}: done in {dt:.2f}s")
        results.append(StageResult(stage, False, dt, artifacts))

    registry = load_antennas(cfg.antenna_path)

    ingest_key = _stage_key(
        cdr_hashes + [antenna_hash],
        {
            "mu": cfg.activity.mu,
            "m_cap": cfg.activity.m_cap,
            "mode": cfg.mode,
            "window": window_bits,
        },
    )

    def do_ingest() -> None:
        report, clients = compute_ingest(
            cdr_paths, registry, cfg.activity, window, cfg.mode, cfg.partitions
        )
        (out_dir / "ingest_report.json").write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        (out_dir / "ingest_report.txt").write_text(report.to_text(), encoding="utf-8")
        (out_dir / "clients.txt").write_text(
            "".join(f"{u}\n" for u in sorted(clients)), encoding="utf-8"
        )

    run_stage(
        "ingest", ingest_key, ["ingest_report.json", "ingest_report.txt", "clients.txt"], do_ingest
    )

    def read_clients() -> frozenset[str]:
        text = (out_dir / "clients.txt").read_text(encoding="utf-8")
        return frozenset(line for line in text.splitlines() if line)

    graph_key = _stage_key(cdr_hashes + [antenna_hash], {"after": ingest_key})

    def do_graph() -> None:
        graph = compute_graph(cdr_paths, registry, window, read_clients(), cfg.partitions)
        write_edge_list(graph, out_dir / "edges.csv")

    run_stage("graph", graph_key, ["edges.csv"], do_graph)

    homes_key = _stage_key(
        cdr_hashes + [antenna_hash],
        {"after": ingest_key, "night": _night_cfg_bits(cfg.night)},
    )

    def do_homes() -> None:
        homes = compute_homes(
            cdr_paths, registry, window, read_clients(), cfg.night, cfg.partitions
        )
        write_homes(homes, out_dir / "homes.csv")

    run_stage("homes", homes_key, ["homes.csv"], do_homes)

    risk_key = _stage_key(
        cdr_hashes + [antenna_hash, zone_hash],
        {"after": [graph_key, homes_key]},
    )
    risk_artifacts = ["residents.txt", "vulnerable.txt", "indicators.csv", "indicators.json"]

    def do_risk() -> None:
        zone = load_zone_geojson(cfg.zone_path, name=cfg.zone_name)
        homes = read_homes(out_dir / "homes.csv")
        graph = read_edge_list(out_dir / "edges.csv")
        residents = residents_of_zone(homes, registry, zone)
        vulnerable = tag_vulnerable(graph, residents)
        calls, vcalls = compute_call_volumes(
            cdr_paths, registry, window, frozenset(residents), cfg.partitions
        )
        indicators = compute_indicator_table(homes, vulnerable, calls, vcalls, registry)
        (out_dir / "residents.txt").write_text(
            "".join(f"{u}\n" for u in sorted(residents)), encoding="utf-8"
        )
        (out_dir / "vulnerable.txt").write_text(
            "".join(f"{u}\n" for u in sorted(vulnerable)), encoding="utf-8"
        )
        write_indicators_csv(indicators, out_dir / "indicators.csv")
        (out_dir / "indicators.json").write_text(
            indicators_to_json(indicators, registry), encoding="utf-8"
        )

    run_stage("risk", risk_key, risk_artifacts, do_risk)

    # heatmap: filtered circle layers
    heatmap_key = _stage_key(
        [zone_hash],
        {
            "after": risk_key,
            "beta": cfg.filter_params.beta,
            "min_volume": cfg.filter_params.min_volume,
            "k": cfg.radius_constant,
            "bundle": cfg.emit_viewer_bundle,
        },
    )
    heatmap_artifacts = ["heatmap.geojson", "heatmap.csv"]
    if cfg.emit_viewer_bundle:
        heatmap_artifacts.append("viewer_bundle.json")

    def do_heatmap() -> None:
        indicators = read_indicators_csv(out_dir / "indicators.csv")
        kept = filter_antennas(indicators, cfg.filter_params)
        circles = build_circles(kept, indicators, registry, cfg.radius_constant)
        (out_dir / "heatmap.geojson").write_bytes(export_layer(circles, "geojson"))
        (out_dir / "heatmap.csv").write_bytes(export_layer(circles, "csv"))
        if cfg.emit_viewer_bundle:
            zone = load_zone_geojson(cfg.zone_path, name=cfg.zone_name)
            bundle = build_viewer_bundle(indicators, registry, zone, cfg.radius_constant)
            (out_dir / "viewer_bundle.json").write_text(bundle, encoding="utf-8")

    run_stage("heatmap", heatmap_key, heatmap_artifacts, do_heatmap)

    return PipelineResult(results, str(out_dir))


def build_viewer_bundle(
    indicators,
    registry: AntennaRegistry,
    zone: EndemicZone,
    radius_constant: float = 1.0,
) -> str:
    """The single JSON file the browser viewer consumes."""
    from .risk import zone_to_geojson

    rows = []
    for antenna_id, ind in sorted(indicators.items()):
        lat, lon = registry[antenna_id]
        rows.append(
            {
                "id": antenna_id,
                "lat": lat,
                "lon": lon,
                "N": ind.n_residents,
                "V": ind.n_vulnerable,
                "C": ind.calls_out,
                "VC": ind.vulnerable_calls,
            }
        )
    doc = {
        "schema": "riskmap-viewer-bundle@1",
        "antennas": rows,
        "zone": zone_to_geojson(zone),
        "radius_constant": radius_constant,
        "presets": [
            {"name": name, "beta": p.beta, "min_volume": p.min_volume}
            for name, p in sorted(PRESETS.items())
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
