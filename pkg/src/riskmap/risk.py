"""Endemic-zone residency, vulnerability tagging, and antenna indicators.

The endemic zone is a set of closed polygon rings in geographic
coordinates. Point membership follows the even-odd rule over all rings
(ring crossing parity), with points exactly on an edge or vertex counting
as inside; boundary antennas are treated as endemic on purpose, the
conservative choice for a screening tool.

Per antenna we aggregate four numbers: resident population, vulnerable
residents, outgoing call volume, and outgoing calls received by someone
homed in the zone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping

from .errors import ConsistencyError, ZoneError
from .graph import SocialGraph
from .homes import HomeAssignment
from .ingest import ANTENNA, CALLEE, DIRECTION, AntennaRegistry, CallRecord, Direction

Point = tuple[float, float]  # (latitude, longitude)
Ring = tuple[Point, ...]


@dataclass(frozen=True)
class EndemicZone:
    name: str
    rings: tuple[Ring, ...]

    def __post_init__(self) -> None:
        if not self.rings:
            raise ZoneError("zone has no rings")
        for i, ring in enumerate(self.rings):
            _validate_ring(ring, i)

    def bounding_box(self) -> tuple[float, float, float, float]:
        """(min_lat, min_lon, max_lat, max_lon) over all rings."""
        lats = [p[0] for ring in self.rings for p in ring]
        lons = [p[1] for ring in self.rings for p in ring]
        return (min(lats), min(lons), max(lats), max(lons))


@dataclass(frozen=True)
class AntennaIndicators:
    antenna_id: str
    n_residents: int
    n_vulnerable: int
    calls_out: int
    vulnerable_calls: int

    def __post_init__(self) -> None:
        if not (0 <= self.n_vulnerable <= self.n_residents):
            raise ValueError(f"{self.antenna_id}: vulnerable exceeds residents")
        if not (0 <= self.vulnerable_calls <= self.calls_out):
            raise ValueError(f"{self.antenna_id}: vulnerable calls exceed outgoing calls")


def _validate_ring(ring: Ring, index: int) -> None:
    if len(ring) < 4:
        raise ZoneError(f"ring {index}: needs >= 3 vertices plus closure, got {len(ring)}")
    if ring[0] != ring[-1]:
        raise ZoneError(f"ring {index}: not closed (first vertex != last)")
    area2 = 0.0
    for (y1, x1), (y2, x2) in zip(ring, ring[1:]):
        area2 += x1 * y2 - x2 * y1
    if area2 == 0.0:
        raise ZoneError(f"ring {index}: degenerate (zero area)")
    if _ring_self_intersects(ring):
        raise ZoneError(f"ring {index}: self-intersecting")


def _segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool:
    """Proper intersection test for two segments that share no endpoint."""

    def orient(p: Point, q: Point, r: Point) -> float:
        return (q[1] - p[1]) * (r[0] - p[0]) - (q[0] - p[0]) * (r[1] - p[1])

    def on_seg(p: Point, q: Point, r: Point) -> bool:
        return (
            min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
            and min(p[1], q[1]) <= r[1] <= max(p[1], q[1])
        )

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0:
        return True
    for (p, q, r) in ((a, b, c), (a, b, d), (c, d, a), (c, d, b)):
        o = orient(p, q, r)
        if o == 0 and on_seg(p, q, r) and r not in (p, q):
            return True
    return False


def _ring_self_intersects(ring: Ring) -> bool:
    n = len(ring) - 1  # closing vertex repeats the first
    for i in range(n):
        a, b = ring[i], ring[i + 1]
        for j in range(i + 1, n):
            # adjacent edges share a vertex and may touch there
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            c, d = ring[j], ring[j + 1]
            if _segments_cross(a, b, c, d):
                return True
    return False


def _on_segment(lat: float, lon: float, p1: Point, p2: Point) -> bool:
    y1, x1 = p1
    y2, x2 = p2
    cross = (x2 - x1) * (lat - y1) - (lon - x1) * (y2 - y1)
    if cross != 0.0:
        return False
    return min(x1, x2) <= lon <= max(x1, x2) and min(y1, y2) <= lat <= max(y1, y2)


def point_in_zone(p: Point, zone: EndemicZone) -> bool:
    """Even-odd membership over all rings; boundary points are inside."""
    lat, lon = p
    inside = False
    for ring in zone.rings:
        for i in range(len(ring) - 1):
            p1 = ring[i]
            p2 = ring[i + 1]
            if _on_segment(lat, lon, p1, p2):
                return True
            y1, x1 = p1
            y2, x2 = p2
            if (y1 > lat) != (y2 > lat):
                # the edge straddles the horizontal ray through p; count it
                # when the intersection lies strictly to the east of p
                cross = (x2 - x1) * (lat - y1) - (lon - x1) * (y2 - y1)
                if (cross > 0.0) if (y2 > y1) else (cross < 0.0):
                    inside = not inside
    return inside


def _rings_from_polygon_coords(coords, what: str) -> list[Ring]:
    rings = []
    for ring_coords in coords:
        try:
            rings.append(tuple((float(lat), float(lon)) for lon, lat in ring_coords))
        except (TypeError, ValueError) as exc:
            raise ZoneError(f"{what}: bad ring coordinates") from exc
    return rings


def load_zone_geojson(source: IO[str] | str | Path, name: str | None = None) -> EndemicZone:
    """Load the zone from a GeoJSON Polygon or MultiPolygon.

    Accepts a bare geometry, a Feature, or a FeatureCollection (all
    polygonal features contribute rings). GeoJSON positions are
    [longitude, latitude]; rings are stored as (latitude, longitude).
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ZoneError(f"zone file is not valid JSON: {exc}") from exc

    geometries = []

    def add_geometry(geom) -> None:
        if not isinstance(geom, dict):
            raise ZoneError("zone geometry is not an object")
        gtype = geom.get("type")
        if gtype == "Polygon":
            geometries.append(("Polygon", geom.get("coordinates", [])))
        elif gtype == "MultiPolygon":
            for poly in geom.get("coordinates", []):
                geometries.append(("Polygon", poly))
        else:
            raise ZoneError(f"unsupported zone geometry type {gtype!r}")

    zone_name = name
    if obj.get("type") == "FeatureCollection":
        features = obj.get("features", [])
        if not features:
            raise ZoneError("zone FeatureCollection has no features")
        for feat in features:
            add_geometry(feat.get("geometry"))
        if zone_name is None:
            zone_name = (features[0].get("properties") or {}).get("name")
    elif obj.get("type") == "Feature":
        add_geometry(obj.get("geometry"))
        if zone_name is None:
            zone_name = (obj.get("properties") or {}).get("name")
    else:
        add_geometry(obj)

    rings: list[Ring] = []
    for _, coords in geometries:
        rings.extend(_rings_from_polygon_coords(coords, "zone"))
    return EndemicZone(zone_name or "endemic-zone", tuple(rings))


def zone_to_geojson(zone: EndemicZone) -> dict:
    """Inverse of `load_zone_geojson`, as a MultiPolygon Feature."""
    return {
        "type": "Feature",
        "properties": {"name": zone.name},
        "geometry": {
            "type": "MultiPolygon",
            "coordinates": [
                [[[lon, lat] for lat, lon in ring]] for ring in zone.rings
            ],
        },
    }


def endemic_antennas(registry: AntennaRegistry, zone: EndemicZone) -> set[str]:
    """Antennas whose coordinates fall inside the zone."""
    return {a for a, coords in registry.entries.items() if point_in_zone(coords, zone)}


def distance_to_zone(p: Point, zone: EndemicZone) -> float:
    """0 for points inside or on the zone, else the minimum Euclidean
    distance to any ring edge, in degree space."""
    if point_in_zone(p, zone):
        return 0.0
    lat, lon = p
    best = float("inf")
    for ring in zone.rings:
        for i in range(len(ring) - 1):
            y1, x1 = ring[i]
            y2, x2 = ring[i + 1]
            dy, dx = y2 - y1, x2 - x1
            seg_sq = dy * dy + dx * dx
            if seg_sq == 0.0:
                t = 0.0
            else:
                t = ((lat - y1) * dy + (lon - x1) * dx) / seg_sq
            t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
            cy, cx = y1 + t * dy, x1 + t * dx
            d_sq = (lat - cy) ** 2 + (lon - cx) ** 2
            if d_sq < best:
                best = d_sq
    return math.sqrt(best)


def residents_of_zone(
    homes: Mapping[str, HomeAssignment],
    registry: AntennaRegistry,
    zone: EndemicZone,
) -> set[str]:
    """Users whose home antenna sits inside the zone."""
    inside: dict[str, bool] = {}
    residents: set[str] = set()
    for user, assignment in homes.items():
        antenna = assignment.home_antenna
        hit = inside.get(antenna)
        if hit is None:
            if antenna not in registry:
                raise ConsistencyError(
                    f"home antenna {antenna!r} for user {user!r} missing from registry"
                )
            hit = inside[antenna] = point_in_zone(registry[antenna], zone)
        if hit:
            residents.add(user)
    return residents


def tag_vulnerable(graph: SocialGraph, residents: set[str]) -> set[str]:
    """Users with at least one zone-resident neighbor.

    Residents themselves may be tagged; residency neither grants nor blocks
    the tag.
    """
    tagged: set[str] = set()
    for r in residents:
        tagged.update(graph.neighbors(r))
    return tagged


def count_outgoing(
    records: Iterable[tuple], residents: frozenset[str] | set[str]
) -> tuple[dict[str, int], dict[str, int]]:
    """Per-antenna outgoing call counts and zone-homed-receiver counts.

    Partition-friendly: both dicts merge by addition.
    """
    calls: dict[str, int] = {}
    vulnerable_calls: dict[str, int] = {}
    outgoing = Direction.OUTGOING
    for r in records:
        if r[DIRECTION] is not outgoing:
            continue
        a = r[ANTENNA]
        calls[a] = calls.get(a, 0) + 1
        if r[CALLEE] in residents:
            vulnerable_calls[a] = vulnerable_calls.get(a, 0) + 1
    return calls, vulnerable_calls


def compute_indicators(
    records: Iterable[CallRecord],
    homes: Mapping[str, HomeAssignment],
    residents: set[str],
    vulnerable: set[str],
    registry: AntennaRegistry,
) -> dict[str, AntennaIndicators]:
    """Aggregate the four indicators for every registry antenna.

    A record whose callee has no home assignment contributes to the
    outgoing count but never to the vulnerable-call count. Antennas with
    all-zero indicators are still emitted.
    """
    population: dict[str, int] = {}
    vulnerable_pop: dict[str, int] = {}
    for user, assignment in homes.items():
        a = assignment.home_antenna
        population[a] = population.get(a, 0) + 1
        if user in vulnerable:
            vulnerable_pop[a] = vulnerable_pop.get(a, 0) + 1
    calls, vcalls = count_outgoing(records, frozenset(residents))
    return indicators_from_parts(population, vulnerable_pop, calls, vcalls, registry)


def indicators_from_parts(
    population: Mapping[str, int],
    vulnerable_pop: Mapping[str, int],
    calls: Mapping[str, int],
    vulnerable_calls: Mapping[str, int],
    registry: AntennaRegistry,
) -> dict[str, AntennaIndicators]:
    out: dict[str, AntennaIndicators] = {}
    for antenna in registry.ids():
        out[antenna] = AntennaIndicators(
            antenna_id=antenna,
            n_residents=population.get(antenna, 0),
            n_vulnerable=vulnerable_pop.get(antenna, 0),
            calls_out=calls.get(antenna, 0),
            vulnerable_calls=vulnerable_calls.get(antenna, 0),
        )
    return out


def write_indicators_csv(
    indicators: Mapping[str, AntennaIndicators], dest: IO[str] | str | Path
) -> None:
    """`antenna_id,N,V,C,VC` lines, sorted by antenna id."""
    lines = "".join(
        f"{i.antenna_id},{i.n_residents},{i.n_vulnerable},{i.calls_out},{i.vulnerable_calls}\n"
        for _, i in sorted(indicators.items())
    )
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(lines, encoding="utf-8")
    else:
        dest.write(lines)


def read_indicators_csv(source: IO[str] | str | Path) -> dict[str, AntennaIndicators]:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    out: dict[str, AntennaIndicators] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        antenna, n, v, c, vc = line.split(",")
        out[antenna] = AntennaIndicators(antenna, int(n), int(v), int(c), int(vc))
    return out


def indicators_to_json(
    indicators: Mapping[str, AntennaIndicators], registry: AntennaRegistry
) -> str:
    """JSON export with registry coordinates embedded, sorted by antenna."""
    rows = []
    for antenna_id, ind in sorted(indicators.items()):
        lat, lon = registry[antenna_id]
        rows.append(
            {
                "antenna_id": antenna_id,
                "lat": lat,
                "lon": lon,
                "N": ind.n_residents,
                "V": ind.n_vulnerable,
                "C": ind.calls_out,
                "VC": ind.vulnerable_calls,
            }
        )
    return json.dumps({"antennas": rows}, indent=2, sort_keys=True) + "\n"


def read_indicators_json(
    source: IO[str] | str | Path,
) -> tuple[dict[str, AntennaIndicators], AntennaRegistry]:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    obj = json.loads(text)
    indicators: dict[str, AntennaIndicators] = {}
    entries: dict[str, tuple[float, float]] = {}
    for row in obj["antennas"]:
        a = row["antenna_id"]
        indicators[a] = AntennaIndicators(a, row["N"], row["V"], row["C"], row["VC"])
        entries[a] = (row["lat"], row["lon"])
    return indicators, AntennaRegistry(entries)
