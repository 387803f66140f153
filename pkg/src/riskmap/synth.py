"""Synthetic CDR dataset generator with a ground-truth manifest.

Every dataset is reproducible: all sampling runs on a seeded splitmix64
stream (a well-known 64-bit integer generator, implementable in a dozen
lines in any language), probabilities are compared as scaled integers,
and the only floating-point operations on sampling paths are IEEE basic
arithmetic. Fixed seed, fixed bytes.

Guarantees encoded in the manifest:
  * every user has at least 4 weekday-night calls per calendar month;
  * after a per-user resampling pass, the modal night antenna equals the
    true home under the pipeline's own tie-break, so home detection can
    be checked for exact recovery instead of statistically;
  * every edge of the true social graph carries at least one call, and
    every call joins an edge of that graph;
  * edge probability decays with distance between homes and is boosted
    toward endemic residents, which produces the outward cooling of the
    vulnerable fraction that real maps show.
"""

from __future__ import annotations

import gzip
import json
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path

from .errors import ConfigError
from .homes import NightWindowConfig, is_weekday_night
from .risk import EndemicZone, point_in_zone, zone_to_geojson

_M64 = (1 << 64) - 1

NIGHT_CALLS_MIN = 4  # per user per calendar month

_DAY_START_S = 6 * 3600  # daytime draws run 06:00..20:00
_DAY_SPAN_S = 14 * 3600
_EVENING_SPAN_S = 4 * 3600  # 20:00..24:00
_NIGHT_SPAN_S = 10 * 3600  # 20:00..06:00 next day


class SplitMix64:
    """splitmix64 PRNG; pure 64-bit integer state."""

    def __init__(self, seed: int):
        self._state = seed & _M64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _M64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), rejection-sampled to avoid modulo bias."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        bound = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < bound:
                return r % n

    def chance(self, p_millionths: int) -> bool:
        return self.below(1_000_000) < p_millionths

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def default_zone() -> EndemicZone:
    """A 12-vertex non-convex test zone in the northwest of the default box."""
    ring = (
        (-23.0, -63.0),
        (-23.5, -60.5),
        (-25.0, -58.8),
        (-27.0, -58.2),
        (-29.5, -59.0),
        (-31.0, -61.0),
        (-30.5, -63.0),
        (-29.0, -64.5),
        (-27.0, -65.3),
        (-25.0, -65.0),
        (-24.0, -64.4),
        (-23.4, -63.8),
        (-23.0, -63.0),
    )
    return EndemicZone("synthetic-endemic-zone", (ring,))


DEFAULT_BBOX = (-38.0, -70.0, -22.0, -53.0)  # (min_lat, min_lon, max_lat, max_lon)


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 7
    n_users: int = 1000
    n_antennas: int = 50
    n_days: int = 30
    endemic_zone: EndemicZone = field(default_factory=default_zone)
    endemic_fraction: float = 0.3
    home_night_affinity: float = 0.8
    mean_degree: float = 6.0
    endemic_tie_bias: float = 2.0
    calls_per_user_day: float = 1.5
    distance_decay: float = 3.0
    start_date: date = date(2011, 11, 1)
    utc_offset_minutes: int = -180
    bbox: tuple[float, float, float, float] = DEFAULT_BBOX
    gzip_output: bool = False
    # resample night draws until the modal antenna is the true home, making
    # home recovery exact; disable only for throughput fixtures
    exact_home_recovery: bool = True

    def validate(self) -> None:
        if self.n_users < 2 or self.n_users > 999_999:
            raise ConfigError("n_users must be in [2, 999999]")
        if self.n_antennas < 2 or self.n_antennas > 9999:
            raise ConfigError("n_antennas must be in [2, 9999]")
        if self.n_days < 1:
            raise ConfigError("n_days must be >= 1")
        if not (0.0 <= self.endemic_fraction <= 1.0):
            raise ConfigError("endemic_fraction must be in [0, 1]")
        if not (0.5 < self.home_night_affinity <= 1.0):
            raise ConfigError("home_night_affinity must be in (0.5, 1]")
        if self.mean_degree < 1.0 or self.mean_degree >= self.n_users:
            raise ConfigError("mean_degree must be in [1, n_users)")
        if self.endemic_tie_bias < 1.0:
            raise ConfigError("endemic_tie_bias must be >= 1")
        if self.calls_per_user_day <= 0:
            raise ConfigError("calls_per_user_day must be > 0")
        if self.distance_decay <= 0:
            raise ConfigError("distance_decay must be > 0")
        min_lat, min_lon, max_lat, max_lon = self.bbox
        if not (min_lat < max_lat and min_lon < max_lon):
            raise ConfigError("bbox must have positive extent")
        zlat0, zlon0, zlat1, zlon1 = self.endemic_zone.bounding_box()
        if not (min_lat <= zlat0 and zlat1 <= max_lat and min_lon <= zlon0 and zlon1 <= max_lon):
            raise ConfigError("endemic zone must lie inside the bounding box")
        for part in _month_parts(self.start_date, self.n_days):
            if not any(d.weekday() in (0, 1, 2, 3) for d in part):
                raise ConfigError(
                    "every calendar month in the window needs at least one "
                    "Monday..Thursday for night calls"
                )


@dataclass
class GroundTruthManifest:
    """What the generator actually did; the oracle for every pipeline stage."""

    homes: dict[str, str]
    endemic_residents: set[str]
    edges: list[tuple[str, str]]
    antenna_population: dict[str, int]
    night_call_counts: dict[str, int]
    n_calls: int
    n_records: int
    cdr_files: list[str]
    antenna_file: str
    zone_file: str
    config: dict

    def to_json(self) -> str:
        doc = {
            "schema": "riskmap-synth-manifest@1",
            "config": self.config,
            "users": {
                u: {
                    "home": self.homes[u],
                    "endemic": u in self.endemic_residents,
                    "night_calls": self.night_call_counts[u],
                }
                for u in sorted(self.homes)
            },
            "edges": [list(e) for e in self.edges],
            "antenna_population": self.antenna_population,
            "n_calls": self.n_calls,
            "n_records": self.n_records,
            "cdr_files": self.cdr_files,
            "antenna_file": self.antenna_file,
            "zone_file": self.zone_file,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GroundTruthManifest":
        doc = json.loads(text)
        users = doc["users"]
        return cls(
            homes={u: rec["home"] for u, rec in users.items()},
            endemic_residents={u for u, rec in users.items() if rec["endemic"]},
            edges=[tuple(e) for e in doc["edges"]],
            antenna_population=doc["antenna_population"],
            night_call_counts={u: rec["night_calls"] for u, rec in users.items()},
            n_calls=doc["n_calls"],
            n_records=doc["n_records"],
            cdr_files=doc["cdr_files"],
            antenna_file=doc["antenna_file"],
            zone_file=doc["zone_file"],
            config=doc["config"],
        )

    @classmethod
    def load(cls, path: str | Path) -> "GroundTruthManifest":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def _month_parts(start: date, n_days: int) -> list[list[date]]:
    """Window days grouped into runs sharing a calendar month."""
    parts: list[list[date]] = []
    for i in range(n_days):
        d = start + timedelta(days=i)
        if parts and parts[-1][-1].month == d.month and parts[-1][-1].year == d.year:
            parts[-1].append(d)
        else:
            parts.append([d])
    return parts


def _micro_uniform(rng: SplitMix64, lo: float, hi: float) -> float:
    """Uniform draw on a microdegree grid; exact decimal-to-float round trip."""
    lo_micro = round(lo * 1e6)
    hi_micro = round(hi * 1e6)
    return (lo_micro + rng.below(hi_micro - lo_micro + 1)) / 1_000_000


def _place_antennas(
    rng: SplitMix64, cfg: SynthConfig
) -> tuple[list[tuple[str, float, float]], list[int], list[int]]:
    min_lat, min_lon, max_lat, max_lon = cfg.bbox
    need_inside = cfg.endemic_fraction > 0.0
    need_outside = cfg.endemic_fraction < 1.0
    for _ in range(100):
        antennas = []
        inside_idx: list[int] = []
        outside_idx: list[int] = []
        for i in range(cfg.n_antennas):
            lat = _micro_uniform(rng, min_lat, max_lat)
            lon = _micro_uniform(rng, min_lon, max_lon)
            antennas.append((f"A{i:04d}", lat, lon))
            if point_in_zone((lat, lon), cfg.endemic_zone):
                inside_idx.append(i)
            else:
                outside_idx.append(i)
        if (inside_idx or not need_inside) and (outside_idx or not need_outside):
            return antennas, inside_idx, outside_idx
    raise ConfigError(
        "could not place antennas both inside and outside the zone; "
        "check zone size relative to the bounding box"
    )


def _sample_edges(
    rng: SplitMix64,
    cfg: SynthConfig,
    home_coords: list[tuple[float, float]],
    endemic_flags: list[bool],
) -> set[tuple[int, int]]:
    """Distance-decaying random edges, biased toward endemic residents.

    The decay kernel is 1 / (1 + (d / decay)^2): monotone in distance like
    an exponential but free of libm, so acceptance decisions reproduce
    bit-for-bit everywhere.
    """
    n = cfg.n_users
    target = int(round(n * cfg.mean_degree / 2.0))
    bias = cfg.endemic_tie_bias
    w_max = bias if any(endemic_flags) else 1.0
    decay_sq = cfg.distance_decay * cfg.distance_decay
    edges: set[tuple[int, int]] = set()
    attempts = 0
    max_attempts = 500 * max(target, 1)
    scale = 1 << 53
    while len(edges) < target and attempts < max_attempts:
        attempts += 1
        u = rng.below(n)
        v = rng.below(n)
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        if key in edges:
            continue
        du = home_coords[u]
        dv = home_coords[v]
        d2 = (du[0] - dv[0]) ** 2 + (du[1] - dv[1]) ** 2
        w = 1.0 / (1.0 + d2 / decay_sq)
        if endemic_flags[u] or endemic_flags[v]:
            w *= bias
        if rng.below(scale) < int(w / w_max * scale):
            edges.add(key)

    # guarantee degree >= 1 so every user has a call partner: attach each
    # isolated user to its nearest home among a fixed-size random sample
    degree = [0] * n
    for a, b in edges:
        degree[a] += 1
        degree[b] += 1
    for u in range(n):
        if degree[u] > 0:
            continue
        best = None
        for _ in range(64):
            v = rng.below(n)
            if v == u:
                continue
            d2 = (home_coords[u][0] - home_coords[v][0]) ** 2 + (
                home_coords[u][1] - home_coords[v][1]
            ) ** 2
            if best is None or (d2, v) < best:
                best = (d2, v)
        v = best[1]
        edges.add((u, v) if u < v else (v, u))
        degree[u] += 1
        degree[v] += 1
    return edges


def generate(cfg: SynthConfig, out_dir: str | Path) -> GroundTruthManifest:
    """Write CDR files, the antenna file, the zone file, and manifest.json.

    Deterministic for a fixed config: two runs produce byte-identical
    trees. Returns the manifest; it is also written to ``manifest.json``.
    """
    cfg.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = SplitMix64(cfg.seed)
    tz = timezone(timedelta(minutes=cfg.utc_offset_minutes))
    night_cfg = NightWindowConfig()
    affinity_m = int(round(cfg.home_night_affinity * 1_000_000))

    antennas, inside_idx, outside_idx = _place_antennas(rng, cfg)
    antenna_ids = [a[0] for a in antennas]
    antenna_coords = [(a[1], a[2]) for a in antennas]

    n = cfg.n_users
    user_ids = [f"u{i:06d}" for i in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    n_endemic = int(round(cfg.endemic_fraction * n))
    endemic_flags = [False] * n
    for i in order[:n_endemic]:
        endemic_flags[i] = True

    home_idx: list[int] = [0] * n
    for i in range(n):
        pool = inside_idx if endemic_flags[i] else outside_idx
        home_idx[i] = pool[rng.below(len(pool))]
    home_coords = [antenna_coords[home_idx[i]] for i in range(n)]

    # day pool: the home antenna plus 2 or 3 regular others
    day_pools: list[list[int]] = []
    other_pools: list[list[int]] = []
    for i in range(n):
        k_others = 2 + rng.below(2)
        others: list[int] = []
        while len(others) < k_others:
            a = rng.below(cfg.n_antennas)
            if a != home_idx[i] and a not in others:
                others.append(a)
        other_pools.append(others)
        day_pools.append([home_idx[i]] + others)

    edges = _sample_edges(rng, cfg, home_coords, endemic_flags)
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in sorted(edges):
        adj[a].append(b)
        adj[b].append(a)

    def draw_antenna(user: int, night: bool) -> int:
        if night:
            if rng.chance(affinity_m):
                return home_idx[user]
            others = other_pools[user]
            return others[rng.below(len(others))]
        pool = day_pools[user]
        return pool[rng.below(len(pool))]

    month_parts = _month_parts(cfg.start_date, cfg.n_days)
    window_days = [d for part in month_parts for d in part]
    window_set = set(window_days)

    calls: list[list] = []  # [caller_idx, callee_idx, datetime, caller_ant, callee_ant]
    night_legs: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    covered: set[tuple[int, int]] = set()

    def add_call(ci: int, ce: int, dt: datetime) -> None:
        night = is_weekday_night(dt, night_cfg)
        idx = len(calls)
        calls.append([ci, ce, dt, draw_antenna(ci, night), draw_antenna(ce, night)])
        if night:
            night_legs[ci].append((idx, 3))
            night_legs[ce].append((idx, 4))
        covered.add((ci, ce) if ci < ce else (ce, ci))

    def draw_night_time(eligible: list[date]) -> datetime:
        d = eligible[rng.below(len(eligible))]
        tail_ok = (d + timedelta(days=1)) in window_set and (d + timedelta(days=1)).month == d.month
        span = _NIGHT_SPAN_S if tail_ok else _EVENING_SPAN_S
        s = rng.below(span)
        return datetime.combine(d, time(20, 0, 0), tz) + timedelta(seconds=s)

    def draw_day_time(days: list[date]) -> datetime:
        d = days[rng.below(len(days))]
        s = rng.below(_DAY_SPAN_S)
        return datetime.combine(d, time(0, 0, 0), tz) + timedelta(seconds=_DAY_START_S + s)

    for u in range(n):
        partners = adj[u]
        for part in month_parts:
            eligible = [d for d in part if d.weekday() in (0, 1, 2, 3)]
            target = cfg.calls_per_user_day * len(part)
            lo = max(NIGHT_CALLS_MIN + 1, int(target * 0.5))
            hi = max(lo + 1, int(target * 1.5) + 1)
            n_calls = lo + rng.below(hi - lo)
            n_night = max(NIGHT_CALLS_MIN, n_calls // 3)
            n_day = n_calls - n_night
            for _ in range(n_night):
                add_call(u, partners[rng.below(len(partners))], draw_night_time(eligible))
            for _ in range(n_day):
                add_call(u, partners[rng.below(len(partners))], draw_day_time(part))

    for a, b in sorted(edges):
        if (a, b) not in covered:
            add_call(a, b, draw_day_time(window_days))

    if cfg.exact_home_recovery:
        _resample_until_home_modal(rng, cfg, calls, night_legs, home_idx, other_pools, affinity_m)

    # emit two records per call: the outgoing leg locates the caller, the
    # incoming leg locates the callee
    per_day: dict[date, list[str]] = {}
    for ci, ce, dt, ac, ae in calls:
        iso = dt.isoformat()
        u, v = user_ids[ci], user_ids[ce]
        bucket = per_day.setdefault(dt.date(), [])
        bucket.append(f"{u},{v},{iso},out,{antenna_ids[ac]}")
        bucket.append(f"{u},{v},{iso},in,{antenna_ids[ae]}")

    suffix = ".csv.gz" if cfg.gzip_output else ".csv"
    cdr_files = []
    for d in sorted(per_day):
        name = f"cdr-{d.strftime('%Y%m%d')}{suffix}"
        cdr_files.append(name)
        body = ("\n".join(sorted(per_day[d])) + "\n").encode("utf-8")
        if cfg.gzip_output:
            (out / name).write_bytes(gzip.compress(body, 9, mtime=0))
        else:
            (out / name).write_bytes(body)

    antenna_file = "antennas.csv"
    (out / antenna_file).write_text(
        "".join(f"{aid},{lat!r},{lon!r}\n" for aid, lat, lon in antennas), encoding="utf-8"
    )
    zone_file = "zone.geojson"
    (out / zone_file).write_text(
        json.dumps(zone_to_geojson(cfg.endemic_zone), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )

    population: dict[str, int] = {aid: 0 for aid in antenna_ids}
    for i in range(n):
        population[antenna_ids[home_idx[i]]] += 1

    manifest = GroundTruthManifest(
        homes={user_ids[i]: antenna_ids[home_idx[i]] for i in range(n)},
        endemic_residents={user_ids[i] for i in range(n) if endemic_flags[i]},
        edges=sorted((user_ids[a], user_ids[b]) for a, b in edges),
        antenna_population=population,
        night_call_counts={user_ids[i]: len(night_legs[i]) for i in range(n)},
        n_calls=len(calls),
        n_records=2 * len(calls),
        cdr_files=cdr_files,
        antenna_file=antenna_file,
        zone_file=zone_file,
        config={
            "seed": cfg.seed,
            "n_users": cfg.n_users,
            "n_antennas": cfg.n_antennas,
            "n_days": cfg.n_days,
            "endemic_fraction": cfg.endemic_fraction,
            "home_night_affinity": cfg.home_night_affinity,
            "mean_degree": cfg.mean_degree,
            "endemic_tie_bias": cfg.endemic_tie_bias,
            "calls_per_user_day": cfg.calls_per_user_day,
            "distance_decay": cfg.distance_decay,
            "start_date": cfg.start_date.isoformat(),
            "utc_offset_minutes": cfg.utc_offset_minutes,
            "bbox": list(cfg.bbox),
            "zone_name": cfg.endemic_zone.name,
            "exact_home_recovery": cfg.exact_home_recovery,
        },
    )
    (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return manifest


def _resample_until_home_modal(
    rng: SplitMix64,
    cfg: SynthConfig,
    calls: list[list],
    night_legs: list[list[tuple[int, int]]],
    home_idx: list[int],
    other_pools: list[list[int]],
    affinity_m: int,
) -> None:
    """Redraw each user's night-side antennas until home wins the mode.

    The modal comparison uses the same smallest-id tie-break as home
    detection, so recovery downstream is exact, not probabilistic.
    """
    for u in range(len(night_legs)):
        legs = night_legs[u]
        if not legs:
            continue
        home = home_idx[u]
        others = other_pools[u]
        for _ in range(10_000):
            counts: dict[int, int] = {}
            for call_idx, side in legs:
                a = calls[call_idx][side]
                counts[a] = counts.get(a, 0) + 1
            modal = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]
            if modal == home:
                break
            for call_idx, side in legs:
                if rng.chance(affinity_m):
                    calls[call_idx][side] = home
                else:
                    calls[call_idx][side] = others[rng.below(len(others))]
        else:
            # unreachable in practice with affinity > 0.5; keep the guarantee
            for call_idx, side in legs:
                calls[call_idx][side] = home
