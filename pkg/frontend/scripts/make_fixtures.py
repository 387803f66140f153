#!/usr/bin/env python3
"""Regenerate the viewer test fixtures from the primary pipeline.

Outputs, written to frontend/fixtures/:
  viewer_bundle.json   the bundle the viewer consumes
  golden_filters.json  visible antenna sets for every (beta, min_volume)
                       combination on the test grids
  heatmap_all.csv      primary CSV export covering every populated antenna

Deterministic: a fixed-seed synthetic dataset feeds a single in-process
pipeline pass. Run from anywhere; paths resolve relative to this file.
"""

import json
import sys
import tempfile
from pathlib import Path

from riskmap.heatmap import FilterParams, build_circles, export_layer, filter_antennas
from riskmap.homes import NightWindowConfig
from riskmap.ingest import ActivityFilterConfig, load_antennas
from riskmap.pipeline import (
    build_viewer_bundle,
    compute_call_volumes,
    compute_graph,
    compute_homes,
    compute_indicator_table,
    compute_ingest,
)
from riskmap.risk import load_zone_geojson, residents_of_zone, tag_vulnerable
from riskmap.synth import SynthConfig, generate

BETA_GRID = [0.0, 0.01, 0.02, 0.15, 0.5]
VOLUME_GRID = [0, 50, 80]
RADIUS_CONSTANT = 1.0


def main() -> int:
    out_dir = Path(__file__).resolve().parent.parent / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory(prefix="riskmap-fixtures-") as tmp:
        # chosen so the grids discriminate: vulnerable fractions populate
        # every band between adjacent beta values, populations straddle
        # both volume thresholds, and a couple of antennas have V = 0
        cfg = SynthConfig(
            seed=5,
            n_users=4000,
            n_antennas=30,
            n_days=7,
            endemic_fraction=0.05,
            mean_degree=2.0,
            distance_decay=0.7,
        )
        manifest = generate(cfg, tmp)
        registry = load_antennas(f"{tmp}/{manifest.antenna_file}")
        zone = load_zone_geojson(f"{tmp}/{manifest.zone_file}")
        paths = [f"{tmp}/{name}" for name in manifest.cdr_files]

        _, clients = compute_ingest(paths, registry, ActivityFilterConfig(1, 10**9), None)
        homes = compute_homes(paths, registry, None, frozenset(clients), NightWindowConfig())
        graph = compute_graph(paths, registry, None, frozenset(clients))
        residents = residents_of_zone(homes, registry, zone)
        vulnerable = tag_vulnerable(graph, residents)
        calls, vcalls = compute_call_volumes(paths, registry, None, frozenset(residents))
        indicators = compute_indicator_table(homes, vulnerable, calls, vcalls, registry)

    bundle = build_viewer_bundle(indicators, registry, zone, RADIUS_CONSTANT)
    (out_dir / "viewer_bundle.json").write_text(bundle, encoding="utf-8")

    tables = []
    for beta in BETA_GRID:
        for mv in VOLUME_GRID:
            kept = filter_antennas(indicators, FilterParams(beta, mv))
            tables.append({"beta": beta, "min_volume": mv, "visible": sorted(kept)})
    golden = {
        "beta_grid": BETA_GRID,
        "volume_grid": VOLUME_GRID,
        "tables": tables,
    }
    (out_dir / "golden_filters.json").write_text(
        json.dumps(golden, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    populated = {a for a, ind in indicators.items() if ind.n_residents > 0}
    circles = build_circles(populated, indicators, registry, RADIUS_CONSTANT)
    (out_dir / "heatmap_all.csv").write_bytes(export_layer(circles, "csv"))

    print(f"fixtures written to {out_dir}")
    print(f"  antennas: {len(registry)}, populated: {len(populated)}")
    print(f"  golden tables: {len(tables)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
