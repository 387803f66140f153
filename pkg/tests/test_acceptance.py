"""Acceptance criteria, one test per criterion.

Each test prints `ACCEPTANCE <name>: PASS` when its assertions hold, so
`pytest tests/test_acceptance.py -v -s` reads as a checklist. The 10k
dataset is generated once per session by the acceptance_fixture in
conftest.
"""

import random
import time
from collections import defaultdict

import pytest

from riskmap.graph import SocialGraph
from riskmap.heatmap import FilterParams, filter_antennas
from riskmap.homes import NightWindowConfig
from riskmap.ingest import ActivityFilterConfig, Direction, load_antennas
from riskmap.pipeline import (
    PipelineConfig,
    compute_call_volumes,
    compute_graph,
    compute_homes,
    compute_indicator_table,
    compute_ingest,
    run_pipeline,
)
from riskmap.risk import (
    EndemicZone,
    distance_to_zone,
    load_zone_geojson,
    point_in_zone,
    residents_of_zone,
    tag_vulnerable,
)
from riskmap.synth import SplitMix64, SynthConfig, default_zone, generate

BETA_GRID = [0.0, 0.01, 0.02, 0.15, 0.5]
VOLUME_GRID = [0, 50, 80]

WIDE_OPEN = ActivityFilterConfig(mu=1, m_cap=10**9)


def announce(name):
    print(f"\nACCEPTANCE {name}: PASS")


@pytest.fixture(scope="module")
def pipeline_10k(acceptance_fixture):
    """One in-process pipeline pass over the 10k fixture, plus timings."""
    root, cfg, manifest = acceptance_fixture
    registry = load_antennas(root / manifest.antenna_file)
    zone = load_zone_geojson(root / manifest.zone_file)
    paths = [str(root / name) for name in manifest.cdr_files]

    t0 = time.perf_counter()
    report, clients = compute_ingest(paths, registry, WIDE_OPEN, None, partitions=1)
    homes = compute_homes(paths, registry, None, frozenset(clients), NightWindowConfig(), 1)
    homes_seconds = time.perf_counter() - t0

    graph = compute_graph(paths, registry, None, frozenset(clients), partitions=1)
    residents = residents_of_zone(homes, registry, zone)
    vulnerable = tag_vulnerable(graph, residents)
    calls, vcalls = compute_call_volumes(paths, registry, None, frozenset(residents), 1)
    indicators = compute_indicator_table(homes, vulnerable, calls, vcalls, registry)
    return {
        "root": root,
        "manifest": manifest,
        "registry": registry,
        "zone": zone,
        "report": report,
        "clients": clients,
        "homes": homes,
        "graph": graph,
        "residents": residents,
        "vulnerable": vulnerable,
        "indicators": indicators,
        "homes_seconds": homes_seconds,
    }


def test_home_detection_oracle(pipeline_10k):
    manifest = pipeline_10k["manifest"]
    homes = pipeline_10k["homes"]
    qualified = {u for u, n in manifest.night_call_counts.items() if n >= 4}
    assert qualified, "fixture must provide users with >= 4 night calls"
    mismatches = [
        u for u in qualified
        if u not in homes or homes[u].home_antenna != manifest.homes[u]
    ]
    assert mismatches == [], f"{len(mismatches)} wrong homes, e.g. {mismatches[:5]}"
    elapsed = pipeline_10k["homes_seconds"]
    assert elapsed < 60.0, f"single-threaded ingest+homes took {elapsed:.1f}s"
    print(f"\n  ingest+homes on 10k fixture: {elapsed:.1f}s single-threaded")
    announce("home-detection oracle (100% recovery, < 60s)")


def test_vulnerability_oracle_100_random_graphs():
    rnd = random.Random(90125)
    for trial in range(100):
        n = rnd.randint(1, 200)
        nodes = [f"n{i:03d}" for i in range(n)]
        p = rnd.choice([0.005, 0.02, 0.05, 0.15])
        edges = [
            (nodes[i], nodes[j])
            for i in range(n)
            for j in range(i + 1, n)
            if rnd.random() < p
        ]
        graph = SocialGraph(nodes, edges)
        residents = {u for u in nodes if rnd.random() < 0.15}

        tagged = tag_vulnerable(graph, residents)
        brute = {u for u in nodes if any(v in residents for v in graph.neighbors(u))}
        assert tagged == brute, f"trial {trial}: mismatch"
    announce("vulnerability oracle (100 random graphs, exact)")


def test_indicator_conservation(pipeline_10k, small_fixture):
    from riskmap.ingest import parse_cdr_stream

    fixtures = [pipeline_10k]

    root, _, manifest = small_fixture
    registry = load_antennas(root / manifest.antenna_file)
    zone = load_zone_geojson(root / manifest.zone_file)
    paths = [str(root / name) for name in manifest.cdr_files]
    _, clients = compute_ingest(paths, registry, WIDE_OPEN, None)
    homes = compute_homes(paths, registry, None, frozenset(clients), NightWindowConfig())
    graph = compute_graph(paths, registry, None, frozenset(clients))
    residents = residents_of_zone(homes, registry, zone)
    vulnerable = tag_vulnerable(graph, residents)
    calls, vcalls = compute_call_volumes(paths, registry, None, frozenset(residents))
    fixtures.append(
        {
            "root": root,
            "manifest": manifest,
            "registry": registry,
            "homes": homes,
            "vulnerable": vulnerable,
            "indicators": compute_indicator_table(homes, vulnerable, calls, vcalls, registry),
        }
    )

    for fx in fixtures:
        indicators = fx["indicators"]
        homes = fx["homes"]
        vulnerable = fx["vulnerable"]
        for ind in indicators.values():
            assert 0 <= ind.n_vulnerable <= ind.n_residents
            assert 0 <= ind.vulnerable_calls <= ind.calls_out
        assert sum(i.n_residents for i in indicators.values()) == len(homes)
        assert sum(i.n_vulnerable for i in indicators.values()) == sum(
            1 for u in vulnerable if u in homes
        )
        outgoing = 0
        for name in fx["manifest"].cdr_files:
            for r in parse_cdr_stream(fx["root"] / name, registry=fx["registry"]):
                if r.direction is Direction.OUTGOING:
                    outgoing += 1
        assert sum(i.calls_out for i in indicators.values()) == outgoing
    announce("indicator conservation (zero tolerance)")


def test_filter_monotonicity_grids(pipeline_10k):
    indicators = pipeline_10k["indicators"]
    for mv in VOLUME_GRID:
        chain = [filter_antennas(indicators, FilterParams(b, mv)) for b in BETA_GRID]
        for bigger, smaller in zip(chain, chain[1:]):
            assert smaller <= bigger, f"beta chain broken at m_v={mv}"
    for beta in BETA_GRID:
        chain = [filter_antennas(indicators, FilterParams(beta, mv)) for mv in VOLUME_GRID]
        for bigger, smaller in zip(chain, chain[1:]):
            assert smaller <= bigger, f"m_v chain broken at beta={beta}"
    announce("filter monotonicity (beta x m_v grids, exact chains)")


ARTIFACTS = [
    "ingest_report.json",
    "ingest_report.txt",
    "clients.txt",
    "edges.csv",
    "homes.csv",
    "residents.txt",
    "vulnerable.txt",
    "indicators.csv",
    "indicators.json",
    "heatmap.geojson",
    "heatmap.csv",
    "viewer_bundle.json",
]


def test_determinism_and_partition_invariance(small_fixture, tmp_path):
    root, _, _ = small_fixture

    def run_once(tag, partitions):
        out = tmp_path / tag
        cfg = PipelineConfig(
            cdr_glob=f"{root}/cdr-*.csv",
            antenna_path=f"{root}/antennas.csv",
            zone_path=f"{root}/zone.geojson",
            output_dir=str(out),
            activity=WIDE_OPEN,
            filter_params=FilterParams(0.01, 5),
            partitions=partitions,
            emit_viewer_bundle=True,
        )
        run_pipeline(cfg, log=lambda m: None)
        return {name: (out / name).read_bytes() for name in ARTIFACTS}

    baseline = run_once("run1-p1", 1)
    assert run_once("run2-p1", 1) == baseline
    assert run_once("run3-p1", 1) == baseline
    assert run_once("run-p2", 2) == baseline
    assert run_once("run-p8", 8) == baseline
    announce("determinism and partition invariance (3 runs; partitions 1, 2, 8)")


def crossing_number_oracle(point, zone):
    """Textbook crossing-number implementation, division form, boundary-inside."""
    lat, lon = point
    for ring in zone.rings:
        for (y1, x1), (y2, x2) in zip(ring, ring[1:]):
            if (lat - y1) * (x2 - x1) == (lon - x1) * (y2 - y1):
                if min(x1, x2) <= lon <= max(x1, x2) and min(y1, y2) <= lat <= max(y1, y2):
                    return True
    crossings = 0
    for ring in zone.rings:
        for (y1, x1), (y2, x2) in zip(ring, ring[1:]):
            if (y1 <= lat < y2) or (y2 <= lat < y1):
                if lon < x1 + (lat - y1) * (x2 - x1) / (y2 - y1):
                    crossings += 1
    return crossings % 2 == 1


def test_point_in_polygon_oracle_agreement():
    grid_poly = EndemicZone(
        "grid",
        (
            (
                (0.0, 4.0), (2.0, 6.0), (1.0, 8.0), (4.0, 9.0), (6.0, 7.0),
                (9.0, 8.0), (8.0, 4.0), (9.0, 1.0), (5.0, 2.0), (4.0, 0.0),
                (2.0, 1.0), (1.0, 3.0), (0.0, 4.0),
            ),
        ),
    )
    square = EndemicZone(
        "square", (((-2.0, -2.0), (-2.0, 2.0), (2.0, 2.0), (2.0, -2.0), (-2.0, -2.0)),)
    )
    holey = EndemicZone(
        "holey",
        (
            ((0.0, 0.0), (0.0, 10.0), (10.0, 10.0), (10.0, 0.0), (0.0, 0.0)),
            ((4.0, 4.0), (4.0, 6.0), (6.0, 6.0), (6.0, 4.0), (4.0, 4.0)),
        ),
    )
    zones = [grid_poly, square, holey, default_zone()]
    rng = SplitMix64(20260809)
    for zone in zones:
        min_lat, min_lon, max_lat, max_lon = zone.bounding_box()
        pad_lat = (max_lat - min_lat) * 0.5
        pad_lon = (max_lon - min_lon) * 0.5
        for _ in range(10_000):
            lat = (min_lat - pad_lat) + rng.below(1 << 30) * (max_lat - min_lat + 2 * pad_lat) / (1 << 30)
            lon = (min_lon - pad_lon) + rng.below(1 << 30) * (max_lon - min_lon + 2 * pad_lon) / (1 << 30)
            p = (lat, lon)
            assert point_in_zone(p, zone) == crossing_number_oracle(p, zone), (zone.name, p)

        # boundary cases: every vertex, and exact points on the edges
        for ring in zone.rings:
            for i in range(len(ring) - 1):
                (y1, x1), (y2, x2) = ring[i], ring[i + 1]
                assert point_in_zone((y1, x1), zone)
                assert crossing_number_oracle((y1, x1), zone)
                if y1 == y2 or x1 == x2:  # axis-aligned: interior point is exact
                    mid = ((y1 + y2) / 2, (x1 + x2) / 2)
                    assert point_in_zone(mid, zone)
                    assert crossing_number_oracle(mid, zone)
    announce("point-in-polygon vs crossing-number oracle (10k points/polygon + boundaries)")


def test_qualitative_gradient_distance_decay():
    zone = default_zone()
    n_bins = 6  # bin 0 is the zone core, 5 distance bins outside (last open-ended)
    bin_width = 1.7
    sums = [0.0] * n_bins
    counts = [0] * n_bins
    for seed in range(1, 11):
        root = None
        import tempfile

        with tempfile.TemporaryDirectory(prefix="riskmap-gradient-") as tmp:
            cfg = SynthConfig(
                seed=seed,
                n_users=1500,
                n_antennas=60,
                n_days=7,
                mean_degree=8.0,
                endemic_fraction=0.25,
                endemic_tie_bias=3.0,
                distance_decay=2.5,
            )
            manifest = generate(cfg, tmp)
            registry = load_antennas(f"{tmp}/{manifest.antenna_file}")
            paths = [f"{tmp}/{name}" for name in manifest.cdr_files]
            _, clients = compute_ingest(paths, registry, WIDE_OPEN, None)
            homes = compute_homes(paths, registry, None, frozenset(clients), NightWindowConfig())
            graph = compute_graph(paths, registry, None, frozenset(clients))
            residents = residents_of_zone(homes, registry, zone)
            vulnerable = tag_vulnerable(graph, residents)
            calls, vcalls = compute_call_volumes(paths, registry, None, frozenset(residents))
            indicators = compute_indicator_table(homes, vulnerable, calls, vcalls, registry)

            for antenna, ind in indicators.items():
                if ind.n_residents == 0:
                    continue
                d = distance_to_zone(registry[antenna], zone)
                if d == 0.0:
                    b = 0
                else:
                    b = min(n_bins - 1, 1 + int(d / bin_width))
                sums[b] += ind.n_vulnerable / ind.n_residents
                counts[b] += 1

    assert all(c > 0 for c in counts), f"empty distance bin: {counts}"
    means = [s / c for s, c in zip(sums, counts)]
    print("\n  mean V/N by distance bin:", [f"{m:.3f}" for m in means])
    for closer, farther in zip(means, means[1:]):
        assert farther <= closer + 1e-12, f"gradient inversion: {means}"
    announce("qualitative gradient (V/N non-increasing over 6 distance bins, 10 seeds)")


def test_throughput_soft_target(acceptance_fixture):
    root, _, manifest = acceptance_fixture
    registry = load_antennas(root / manifest.antenna_file)
    paths = [str(root / name) for name in manifest.cdr_files]

    t0 = time.perf_counter()
    report, clients = compute_ingest(paths, registry, WIDE_OPEN, None, partitions=2)
    compute_graph(paths, registry, None, frozenset(clients), partitions=2)
    compute_homes(paths, registry, None, frozenset(clients), NightWindowConfig(), 2)
    elapsed = time.perf_counter() - t0

    rate = report.records_read / elapsed
    projected = 10_000_000 / rate / 60
    print(
        f"\n  ingest+graph+homes: {report.records_read} records in {elapsed:.1f}s "
        f"({rate:,.0f} rec/s); projected 10M records: {projected:.1f} min "
        f"(soft target 5 min on 4 cores; RISKMAP_PERF=1 runs the full-scale benchmark)"
    )
    announce("throughput (soft target, regression-tracked)")
