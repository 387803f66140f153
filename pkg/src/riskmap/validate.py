"""Self-check harness: pipeline implementations versus brute-force oracles.

Generates a small seeded dataset, runs every stage, and recomputes each
result with the naive reference code in `oracles`. Prints one line per
check. Used by `riskmap validate --small` and meant to finish in seconds.
"""

from __future__ import annotations

import shutil
import tempfile
from datetime import date
from pathlib import Path

from .graph import build_graph
from .heatmap import FilterParams, filter_antennas
from .homes import NightWindowConfig, detect_homes
from .ingest import (
    ActivityFilterConfig,
    IngestReport,
    filter_users_by_activity,
    load_antennas,
    parse_cdr_stream,
)
from .oracles import (
    brute_force_edges,
    brute_force_homes,
    brute_force_indicators,
    brute_force_kept_users,
    brute_force_vulnerable,
    crossing_number_inside,
)
from .risk import (
    compute_indicators,
    load_zone_geojson,
    point_in_zone,
    residents_of_zone,
    tag_vulnerable,
)
from .synth import SplitMix64, SynthConfig, generate

BETA_GRID = (0.0, 0.01, 0.02, 0.15, 0.5)
VOLUME_GRID = (0, 50, 80)


def run_validation(seed: int = 20111107, keep_dir: str | None = None) -> int:
    """Run all oracle checks; returns the number of failures."""
    work = Path(keep_dir) if keep_dir else Path(tempfile.mkdtemp(prefix="riskmap-validate-"))
    work.mkdir(parents=True, exist_ok=True)
    failures = 0

    def check(name: str, ok: bool) -> None:
        nonlocal failures
        print(f"{name}: {'ok' if ok else 'FAIL'}")
        if not ok:
            failures += 1

    cfg = SynthConfig(
        seed=seed,
        n_users=100,
        n_antennas=12,
        n_days=7,
        mean_degree=4.0,
        calls_per_user_day=1.2,
    )
    manifest = generate(cfg, work)

    registry = load_antennas(work / manifest.antenna_file)
    zone = load_zone_geojson(work / manifest.zone_file)
    report = IngestReport()
    records = []
    for name in manifest.cdr_files:
        with open(work / name, encoding="utf-8") as f:
            records.extend(parse_cdr_stream(f, registry=registry, report=report))
    check(
        "ingest conservation",
        report.records_yielded() == len(records) == manifest.n_records,
    )

    activity = ActivityFilterConfig(mu=1, m_cap=10**9)
    clients = filter_users_by_activity(records, activity)
    check("activity filter vs recount", clients == brute_force_kept_users(records, activity))

    graph = build_graph(records, clients)
    check(
        "graph edges vs manifest",
        set(graph.edges()) == set(manifest.edges),
    )
    subset = set(sorted(clients)[:40])
    sub_edges = {(a, b) for a, b in graph.edges() if a in subset and b in subset}
    check(
        "graph vs pairwise scan",
        sub_edges == brute_force_edges(records, subset),
    )

    night = NightWindowConfig()
    homes = detect_homes(records, clients, night)
    check("homes vs recount", homes == brute_force_homes(records, clients, night))
    check(
        "homes vs manifest",
        {u: h.home_antenna for u, h in homes.items()} == manifest.homes,
    )

    rng = SplitMix64(seed ^ 0xDEADBEEF)
    min_lat, min_lon, max_lat, max_lon = cfg.bbox
    agree = True
    for _ in range(1000):
        lat = min_lat + rng.below(1_000_001) * (max_lat - min_lat) / 1_000_000
        lon = min_lon + rng.below(1_000_001) * (max_lon - min_lon) / 1_000_000
        if point_in_zone((lat, lon), zone) != crossing_number_inside((lat, lon), zone):
            agree = False
            break
    for ring in zone.rings:
        for vertex in ring:
            if not (point_in_zone(vertex, zone) and crossing_number_inside(vertex, zone)):
                agree = False
    check("point-in-zone vs crossing number", agree)

    residents = residents_of_zone(homes, registry, zone)
    check("residents vs manifest", residents == manifest.endemic_residents)

    vulnerable = tag_vulnerable(graph, residents)
    check("vulnerable vs node scan", vulnerable == brute_force_vulnerable(graph, residents))

    indicators = compute_indicators(records, homes, residents, vulnerable, registry)
    oracle_ind = brute_force_indicators(records, homes, residents, vulnerable, registry)
    check(
        "indicators vs recount",
        {
            a: (i.n_residents, i.n_vulnerable, i.calls_out, i.vulnerable_calls)
            for a, i in indicators.items()
        }
        == oracle_ind,
    )
    check(
        "indicator conservation",
        sum(i.n_residents for i in indicators.values()) == len(homes)
        and sum(i.n_vulnerable for i in indicators.values())
        == len([u for u in vulnerable if u in homes])
        and all(
            i.n_vulnerable <= i.n_residents and i.vulnerable_calls <= i.calls_out
            for i in indicators.values()
        ),
    )

    chain_ok = True
    for mv in VOLUME_GRID:
        kept_sets = [filter_antennas(indicators, FilterParams(b, mv)) for b in BETA_GRID]
        for a, b in zip(kept_sets, kept_sets[1:]):
            if not b <= a:
                chain_ok = False
    for beta in BETA_GRID:
        kept_sets = [filter_antennas(indicators, FilterParams(beta, mv)) for mv in VOLUME_GRID]
        for a, b in zip(kept_sets, kept_sets[1:]):
            if not b <= a:
                chain_ok = False
    check("filter monotonicity chains", chain_ok)

    if keep_dir is None:
        shutil.rmtree(work, ignore_errors=True)
    return failures
