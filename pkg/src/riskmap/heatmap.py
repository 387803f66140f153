"""Map-ready circle layers from antenna indicators.

An antenna is plotted only when its resident population strictly exceeds
the minimum volume and its vulnerable fraction strictly exceeds beta.
Circle area is proportional to population (radius goes with its square
root) and color is carried as the raw vulnerable fraction; the viewer owns
the color ramp.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

from .errors import ConsistencyError
from .ingest import AntennaRegistry
from .risk import AntennaIndicators

# Filter regimes for the shipped regional map reproductions.
PRESETS: dict[str, "FilterParams"] = {}


@dataclass(frozen=True)
class FilterParams:
    beta: float
    min_volume: int

    def __post_init__(self) -> None:
        if not (0.0 <= self.beta <= 1.0):
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        if self.min_volume < 0:
            raise ValueError(f"min_volume must be >= 0, got {self.min_volume}")


PRESETS.update(
    {
        "argentina-national": FilterParams(beta=0.15, min_volume=50),
        "argentina-broad": FilterParams(beta=0.01, min_volume=50),
        "amba": FilterParams(beta=0.02, min_volume=50),
        "mexico": FilterParams(beta=0.50, min_volume=80),
    }
)


@dataclass(frozen=True)
class HeatmapCircle:
    antenna_id: str
    center: tuple[float, float]
    radius_scale: float
    intensity: float
    population: int
    vulnerable: int


def filter_antennas(
    indicators: Mapping[str, AntennaIndicators], params: FilterParams
) -> set[str]:
    """Antennas with population > min_volume and vulnerable fraction > beta.

    Both inequalities are strict; unpopulated antennas are always excluded
    because their fraction is undefined.
    """
    kept: set[str] = set()
    for antenna_id, ind in indicators.items():
        n = ind.n_residents
        if n == 0 or n <= params.min_volume:
            continue
        if ind.n_vulnerable / n > params.beta:
            kept.add(antenna_id)
    return kept


def build_circles(
    kept: set[str],
    indicators: Mapping[str, AntennaIndicators],
    registry: AntennaRegistry,
    k: float = 1.0,
) -> list[HeatmapCircle]:
    """One circle per kept antenna, sorted by antenna id."""
    if k <= 0:
        raise ValueError(f"radius constant must be > 0, got {k}")
    circles = []
    for antenna_id in sorted(kept):
        ind = indicators[antenna_id]
        if antenna_id not in registry:
            raise ConsistencyError(f"antenna {antenna_id!r} missing from registry")
        if ind.n_residents == 0:
            raise ConsistencyError(f"antenna {antenna_id!r} kept with zero population")
        circles.append(
            HeatmapCircle(
                antenna_id=antenna_id,
                center=registry[antenna_id],
                radius_scale=k * math.sqrt(ind.n_residents),
                intensity=ind.n_vulnerable / ind.n_residents,
                population=ind.n_residents,
                vulnerable=ind.n_vulnerable,
            )
        )
    return circles


def export_layer(circles: list[HeatmapCircle], format: str = "geojson") -> bytes:
    """Serialize a circle layer; output bytes are deterministic."""
    ordered = sorted(circles, key=lambda c: c.antenna_id)
    if format == "geojson":
        features = [
            {
                "type": "Feature",
                "geometry": {
                    "type": "Point",
                    "coordinates": [c.center[1], c.center[0]],
                },
                "properties": {
                    "antenna_id": c.antenna_id,
                    "population": c.population,
                    "vulnerable": c.vulnerable,
                    "intensity": c.intensity,
                    "radius_scale": c.radius_scale,
                },
            }
            for c in ordered
        ]
        doc = {"type": "FeatureCollection", "features": features}
        return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")
    if format == "csv":
        lines = ["antenna_id,lat,lon,N,V,intensity,radius_scale"]
        for c in ordered:
            lines.append(
                f"{c.antenna_id},{c.center[0]!r},{c.center[1]!r},{c.population},"
                f"{c.vulnerable},{c.intensity!r},{c.radius_scale!r}"
            )
        return ("\n".join(lines) + "\n").encode("utf-8")
    raise ValueError(f"unknown export format {format!r}")
