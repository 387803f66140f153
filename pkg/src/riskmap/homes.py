"""Home antenna inference from weekday-night call activity.

A user's home antenna is the one where they place or receive the most
calls during configured night windows. The default window runs from 20:00
on Monday through Thursday evenings to 06:00 the following morning, start
inclusive and end exclusive. CDRs log events rather than durations, so
"time spent" is operationalized as night call-event counts.

Each record locates exactly one party, the operator-client side: the
caller for outgoing records, the callee for incoming ones. Only records
localizing the user feed that user's night histogram.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import IO, Iterable, Mapping

from .ingest import ANTENNA, CALLEE, CALLER, DIRECTION, TIMESTAMP, CallRecord, Direction

WEEKDAY_NAMES = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")


@dataclass(frozen=True)
class NightWindowConfig:
    """Night window bounds in local civil time.

    night_days are the weekdays whose evening starts a window, as
    datetime.weekday() indices (Monday = 0).
    """

    start_hour: int = 20
    end_hour: int = 6
    night_days: frozenset[int] = frozenset({0, 1, 2, 3})

    def __post_init__(self) -> None:
        if not (0 <= self.start_hour <= 23 and 0 <= self.end_hour <= 23):
            raise ValueError("hours must be in [0, 23]")
        if not self.night_days:
            raise ValueError("night_days must be nonempty")
        if not all(0 <= d <= 6 for d in self.night_days):
            raise ValueError("night_days entries must be weekday indices 0..6")

    @classmethod
    def from_day_names(
        cls, start_hour: int, end_hour: int, names: Iterable[str]
    ) -> "NightWindowConfig":
        days = frozenset(WEEKDAY_NAMES.index(n.strip().lower()[:3]) for n in names)
        return cls(start_hour, end_hour, days)


@dataclass(frozen=True)
class HomeAssignment:
    user_id: str
    home_antenna: str
    night_calls_at_home: int
    night_calls_total: int


def is_weekday_night(t: datetime, cfg: NightWindowConfig = NightWindowConfig()) -> bool:
    """True iff t is in [start_hour, 24) of a night day, or [0, end_hour) of
    the day following a night day."""
    h = t.hour
    wd = t.weekday()
    if h >= cfg.start_hour:
        return wd in cfg.night_days
    if h < cfg.end_hour:
        return (wd - 1) % 7 in cfg.night_days
    return False


def night_histograms(
    records: Iterable[tuple],
    clients: frozenset[str] | set[str],
    cfg: NightWindowConfig,
) -> dict[str, dict[str, int]]:
    """Per-client night call counts by antenna.

    Partition-friendly: merge nested dicts by adding counts.
    """
    hist: dict[str, dict[str, int]] = {}
    outgoing = Direction.OUTGOING
    for r in records:
        if not is_weekday_night(r[TIMESTAMP], cfg):
            continue
        user = r[CALLER] if r[DIRECTION] is outgoing else r[CALLEE]
        if user not in clients:
            continue
        per_user = hist.get(user)
        if per_user is None:
            per_user = hist[user] = {}
        antenna = r[ANTENNA]
        per_user[antenna] = per_user.get(antenna, 0) + 1
    return hist


def merge_histograms(
    target: dict[str, dict[str, int]], part: dict[str, dict[str, int]]
) -> None:
    for user, per_antenna in part.items():
        dst = target.setdefault(user, {})
        for antenna, n in per_antenna.items():
            dst[antenna] = dst.get(antenna, 0) + n


def assignments_from_histograms(
    hist: Mapping[str, Mapping[str, int]],
) -> dict[str, HomeAssignment]:
    """Pick each user's modal night antenna; ties go to the smallest id."""
    out: dict[str, HomeAssignment] = {}
    for user, per_antenna in hist.items():
        if not per_antenna:
            continue
        home, at_home = min(per_antenna.items(), key=lambda kv: (-kv[1], kv[0]))
        out[user] = HomeAssignment(user, home, at_home, sum(per_antenna.values()))
    return out


def detect_homes(
    records: Iterable[CallRecord],
    clients: set[str],
    cfg: NightWindowConfig = NightWindowConfig(),
) -> dict[str, HomeAssignment]:
    """Home assignments for every client with at least one night call.

    Clients with zero night calls receive no assignment and are absent from
    the result, so they never count toward antenna populations.
    """
    return assignments_from_histograms(night_histograms(records, frozenset(clients), cfg))


def write_homes(homes: Mapping[str, HomeAssignment], dest: IO[str] | str | Path) -> None:
    """`user_id,antenna_id,night_calls_at_home,night_calls_total`, sorted by user."""
    lines = "".join(
        f"{h.user_id},{h.home_antenna},{h.night_calls_at_home},{h.night_calls_total}\n"
        for _, h in sorted(homes.items())
    )
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(lines, encoding="utf-8")
    else:
        dest.write(lines)


def read_homes(source: IO[str] | str | Path) -> dict[str, HomeAssignment]:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    homes: dict[str, HomeAssignment] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        user, antenna, at_home, total = line.split(",")
        homes[user] = HomeAssignment(user, antenna, int(at_home), int(total))
    return homes
