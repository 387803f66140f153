"""Brute-force reference implementations backing `riskmap validate`.

Each function recomputes a pipeline quantity from first principles, with
none of the pipeline's shortcuts, so a disagreement points at a real bug
rather than a shared one. Kept deliberately naive; do not optimize.
"""

from __future__ import annotations

from collections import Counter, defaultdict

from .graph import SocialGraph
from .homes import HomeAssignment, NightWindowConfig, is_weekday_night
from .ingest import ActivityFilterConfig, AntennaRegistry, CallRecord, Direction
from .risk import EndemicZone


def crossing_number_inside(p: tuple[float, float], zone: EndemicZone) -> bool:
    """Textbook crossing-number point-in-polygon with the boundary-inside rule.

    Written independently of risk.point_in_zone: horizontal ray to the
    east, upward/downward edge crossing counts via the explicit
    intersection abscissa.
    """
    lat, lon = p
    for ring in zone.rings:
        for i in range(len(ring) - 1):
            (y1, x1), (y2, x2) = ring[i], ring[i + 1]
            if (y2 - y1) * (lon - x1) == (lat - y1) * (x2 - x1):
                if min(x1, x2) <= lon <= max(x1, x2) and min(y1, y2) <= lat <= max(y1, y2):
                    return True
    crossings = 0
    for ring in zone.rings:
        for i in range(len(ring) - 1):
            (y1, x1), (y2, x2) = ring[i], ring[i + 1]
            upward = y1 <= lat < y2
            downward = y2 <= lat < y1
            if not (upward or downward):
                continue
            x_at = x1 + (lat - y1) * (x2 - x1) / (y2 - y1)
            if x_at > lon:
                crossings += 1
    return crossings % 2 == 1


def brute_force_vulnerable(graph: SocialGraph, residents: set[str]) -> set[str]:
    """Scan every node and ask whether any neighbor is a resident."""
    tagged = set()
    for u in graph.nodes:
        for v in graph.neighbors(u):
            if v in residents:
                tagged.add(u)
                break
    return tagged


def brute_force_edges(records: list[CallRecord], clients: set[str]) -> set[tuple[str, str]]:
    """Pairwise scan over all client pairs against the raw record list."""
    client_list = sorted(clients)
    edges = set()
    for i, a in enumerate(client_list):
        for b in client_list[i + 1 :]:
            for r in records:
                if (r.caller_id == a and r.callee_id == b) or (
                    r.caller_id == b and r.callee_id == a
                ):
                    edges.add((a, b))
                    break
    return edges


def brute_force_kept_users(records: list[CallRecord], cfg: ActivityFilterConfig) -> set[str]:
    per_user_month: dict[str, Counter] = defaultdict(Counter)
    for r in records:
        per_user_month[r.caller_id][(r.timestamp.year, r.timestamp.month)] += 1
        per_user_month[r.callee_id][(r.timestamp.year, r.timestamp.month)] += 1
    kept = set()
    for user, months in per_user_month.items():
        if all(cfg.mu <= n <= cfg.m_cap for n in months.values()):
            kept.add(user)
    return kept


def brute_force_homes(
    records: list[CallRecord], clients: set[str], cfg: NightWindowConfig
) -> dict[str, HomeAssignment]:
    """Recount night calls per user and antenna, then re-derive the mode."""
    night: dict[str, Counter] = defaultdict(Counter)
    for r in records:
        if not is_weekday_night(r.timestamp, cfg):
            continue
        user = r.caller_id if r.direction is Direction.OUTGOING else r.callee_id
        if user in clients:
            night[user][r.antenna_id] += 1
    out = {}
    for user, hist in night.items():
        best_count = max(hist.values())
        home = min(a for a, n in hist.items() if n == best_count)
        out[user] = HomeAssignment(user, home, hist[home], sum(hist.values()))
    return out


def brute_force_indicators(
    records: list[CallRecord],
    homes: dict[str, HomeAssignment],
    residents: set[str],
    vulnerable: set[str],
    registry: AntennaRegistry,
) -> dict[str, tuple[int, int, int, int]]:
    """Exhaustive recount of the four per-antenna numbers."""
    out = {}
    for antenna in registry.ids():
        n = sum(1 for h in homes.values() if h.home_antenna == antenna)
        v = sum(1 for u, h in homes.items() if h.home_antenna == antenna and u in vulnerable)
        c = sum(
            1
            for r in records
            if r.direction is Direction.OUTGOING and r.antenna_id == antenna
        )
        vc = sum(
            1
            for r in records
            if r.direction is Direction.OUTGOING
            and r.antenna_id == antenna
            and r.callee_id in residents
        )
        out[antenna] = (n, v, c, vc)
    return out
