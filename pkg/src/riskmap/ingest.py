"""CDR and antenna file ingestion.

Input files are UTF-8 comma-delimited text, one record per line:

    caller_id,callee_id,timestamp,direction,antenna_id

The timestamp is ISO-8601 with an explicit numeric UTC offset; direction is
``in`` or ``out`` relative to the operator client. Files ending in ``.gz``
are decompressed transparently.

Besides parsing, this module owns the monthly activity filter that screens
out inactive lines and machine-like callers before any downstream analysis.
"""

from __future__ import annotations

import enum
import gzip
import io
from collections import defaultdict
from dataclasses import dataclass, field, fields as dc_fields
from datetime import date, datetime
from pathlib import Path
from typing import IO, Iterable, Iterator, NamedTuple

from .errors import AntennaFileError, CdrParseError


class Direction(enum.Enum):
    """Call direction relative to the operator client."""

    INCOMING = "in"
    OUTGOING = "out"


_DIRECTIONS = {"in": Direction.INCOMING, "out": Direction.OUTGOING}


class CallRecord(NamedTuple):
    caller_id: str
    callee_id: str
    timestamp: datetime
    direction: Direction
    antenna_id: str

    def localized_user(self) -> str:
        """The party whose position the record's antenna describes.

        An outgoing record is logged from the caller's side of the network,
        an incoming record from the callee's side.
        """
        return self.caller_id if self.direction is Direction.OUTGOING else self.callee_id


# Index layout of the (caller, callee, timestamp, direction, antenna) tuples
# that the accumulator helpers consume. CallRecord shares this layout.
CALLER, CALLEE, TIMESTAMP, DIRECTION, ANTENNA = range(5)


@dataclass(frozen=True)
class ActivityFilterConfig:
    """Monthly call-count bounds a user must satisfy to be kept."""

    mu: int = 5
    m_cap: int = 400

    def __post_init__(self) -> None:
        if self.mu < 0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if self.m_cap < self.mu:
            raise ValueError(f"m_cap ({self.m_cap}) must be >= mu ({self.mu})")


@dataclass
class IngestReport:
    """Counters describing one ingest pass.

    Conservation: records_read equals the number of yielded records plus
    every dropped_* counter.
    """

    records_read: int = 0
    records_dropped_malformed: int = 0
    records_dropped_selfcall: int = 0
    records_dropped_unknown_antenna: int = 0
    records_dropped_out_of_window: int = 0
    users_seen: int = 0
    users_kept: int = 0

    def dropped_total(self) -> int:
        return (
            self.records_dropped_malformed
            + self.records_dropped_selfcall
            + self.records_dropped_unknown_antenna
            + self.records_dropped_out_of_window
        )

    def records_yielded(self) -> int:
        return self.records_read - self.dropped_total()

    def merge(self, other: "IngestReport") -> None:
        """Add another partition's counters into this report."""
        for f in dc_fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def to_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in dc_fields(self)}

    def to_text(self) -> str:
        """Flat key=value block, one counter per line."""
        return "\n".join(f"{k}={v}" for k, v in self.to_dict().items()) + "\n"


@dataclass
class AntennaRegistry:
    """Maps antenna ids to (latitude, longitude) in decimal degrees."""

    entries: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __contains__(self, antenna_id: str) -> bool:
        return antenna_id in self.entries

    def __getitem__(self, antenna_id: str) -> tuple[float, float]:
        return self.entries[antenna_id]

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[str]:
        return sorted(self.entries)


def open_text(path: str | Path) -> IO[str]:
    """Open a text file for reading, decompressing ``.gz`` transparently."""
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


# Counter slots used by the line parser; kept as a plain list in the hot loop.
_READ, _MALFORMED, _SELFCALL, _UNKNOWN_ANT, _OUT_OF_WINDOW = range(5)


def _report_from_counts(counts: list[int]) -> IngestReport:
    return IngestReport(
        records_read=counts[_READ],
        records_dropped_malformed=counts[_MALFORMED],
        records_dropped_selfcall=counts[_SELFCALL],
        records_dropped_unknown_antenna=counts[_UNKNOWN_ANT],
        records_dropped_out_of_window=counts[_OUT_OF_WINDOW],
    )


def _parse_line(
    line: str,
    lineno: int,
    strict: bool,
    antennas: dict[str, tuple[float, float]] | None,
    window: tuple[date, date] | None,
    counts: list[int],
):
    """Validate one non-blank CDR line.

    Returns a (caller, callee, timestamp, direction, antenna) tuple, or None
    when the line was dropped and counted. Drop checks run in a fixed order:
    malformed, self-call, unknown antenna, out of observation window.
    """
    counts[_READ] += 1
    parts = line.split(",")
    if len(parts) != 5:
        if strict:
            raise CdrParseError(f"expected 5 fields, got {len(parts)}", lineno)
        counts[_MALFORMED] += 1
        return None
    caller, callee, ts, d, antenna = parts
    direction = _DIRECTIONS.get(d)
    if direction is None or not caller or not callee or not antenna:
        if strict:
            raise CdrParseError(f"bad field in record: {line!r}", lineno)
        counts[_MALFORMED] += 1
        return None
    try:
        t = datetime.fromisoformat(ts)
    except ValueError:
        t = None
    if t is None or t.tzinfo is None:
        if strict:
            raise CdrParseError(f"bad timestamp {ts!r} (ISO-8601 with UTC offset required)", lineno)
        counts[_MALFORMED] += 1
        return None
    if caller == callee:
        counts[_SELFCALL] += 1
        return None
    if antennas is not None and antenna not in antennas:
        if strict:
            raise CdrParseError(f"unknown antenna {antenna!r}", lineno)
        counts[_UNKNOWN_ANT] += 1
        return None
    if window is not None:
        day = t.date()
        if not (window[0] <= day < window[1]):
            counts[_OUT_OF_WINDOW] += 1
            return None
    return (caller, callee, t, direction, antenna)


def iter_cdr_fields(
    lines: Iterable[str] | Iterable[bytes],
    *,
    mode: str = "lenient",
    registry: AntennaRegistry | None = None,
    window: tuple[date, date] | None = None,
    counts: list[int] | None = None,
    first_lineno: int = 1,
) -> Iterator[tuple]:
    """Yield validated field tuples from an iterable of CDR lines.

    This is the single validation path shared by `parse_cdr_stream` and the
    partition workers, so every consumer sees identical drop semantics.
    Blank lines are ignored without being counted.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"mode must be 'strict' or 'lenient', got {mode!r}")
    strict = mode == "strict"
    antennas = registry.entries if registry is not None else None
    if counts is None:
        counts = [0, 0, 0, 0, 0]
    lineno = first_lineno - 1
    try:
        for raw in lines:
            lineno += 1
            if isinstance(raw, bytes):
                raw = raw.decode("utf-8")
            line = raw.strip()
            if not line:
                continue
            parsed = _parse_line(line, lineno, strict, antennas, window, counts)
            if parsed is not None:
                yield parsed
    except (OSError, UnicodeDecodeError) as exc:
        raise CdrParseError(f"unreadable CDR stream: {exc}") from exc


def parse_cdr_stream(
    source: IO[str] | IO[bytes] | Iterable[str] | str | Path,
    mode: str = "lenient",
    *,
    registry: AntennaRegistry | None = None,
    window: tuple[date, date] | None = None,
    report: IngestReport | None = None,
) -> Iterator[CallRecord]:
    """Parse a CDR stream into CallRecords, in input order.

    In lenient mode malformed lines are counted and skipped; in strict mode
    the first malformed line raises CdrParseError with its line number.
    Self-calls are dropped and counted in both modes. When a registry is
    given, records routed through unknown antennas are dropped (lenient) or
    fatal (strict); when a window is given, records outside it are dropped
    and counted.

    Pass a `report` to receive the counters; it is filled as the iterator
    is consumed.
    """
    if isinstance(source, (str, Path)):
        source = open_text(source)
    counts = [0, 0, 0, 0, 0]
    try:
        for fields_tuple in iter_cdr_fields(
            source, mode=mode, registry=registry, window=window, counts=counts
        ):
            yield CallRecord(*fields_tuple)
    finally:
        if report is not None:
            report.merge(_report_from_counts(counts))


def parse_cdr_file(
    path: str | Path,
    mode: str = "lenient",
    *,
    registry: AntennaRegistry | None = None,
    window: tuple[date, date] | None = None,
) -> tuple[list[CallRecord], IngestReport]:
    """Read a whole CDR file; convenience wrapper over `parse_cdr_stream`."""
    report = IngestReport()
    with open_text(path) as f:
        records = list(
            parse_cdr_stream(f, mode, registry=registry, window=window, report=report)
        )
    return records, report


def load_antennas(source: IO[str] | Iterable[str] | str | Path) -> AntennaRegistry:
    """Load the antenna registry from `antenna_id,latitude,longitude` lines.

    Duplicate ids, out-of-range coordinates, and malformed lines are errors.
    """
    close_after = False
    if isinstance(source, (str, Path)):
        source = open_text(source)
        close_after = True
    entries: dict[str, tuple[float, float]] = {}
    try:
        for lineno, raw in enumerate(source, start=1):
            if isinstance(raw, bytes):
                raw = raw.decode("utf-8")
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3 or not parts[0]:
                raise AntennaFileError(f"line {lineno}: expected 'id,lat,lon', got {line!r}")
            antenna_id = parts[0]
            try:
                lat = float(parts[1])
                lon = float(parts[2])
            except ValueError as exc:
                raise AntennaFileError(f"line {lineno}: bad coordinate in {line!r}") from exc
            if not (-90.0 <= lat <= 90.0):
                raise AntennaFileError(f"line {lineno}: latitude {lat} out of [-90, 90]")
            if not (-180.0 <= lon <= 180.0):
                raise AntennaFileError(f"line {lineno}: longitude {lon} out of [-180, 180]")
            if antenna_id in entries:
                raise AntennaFileError(f"line {lineno}: duplicate antenna id {antenna_id!r}")
            entries[antenna_id] = (lat, lon)
    finally:
        if close_after:
            source.close()
    return AntennaRegistry(entries)


def count_monthly_activity(records: Iterable[tuple]) -> dict[tuple[str, int, int], int]:
    """Per (user, year, month) participation counts.

    Both the caller and the callee of a record participate in it. Months are
    calendar months of the record's local civil time. The returned dicts
    from disjoint partitions merge by addition.
    """
    counts: dict[tuple[str, int, int], int] = defaultdict(int)
    for r in records:
        t = r[TIMESTAMP]
        ym = (t.year, t.month)
        counts[(r[CALLER], *ym)] += 1
        counts[(r[CALLEE], *ym)] += 1
    return dict(counts)


def merge_counts(
    target: dict[tuple[str, int, int], int], part: dict[tuple[str, int, int], int]
) -> None:
    for key, n in part.items():
        target[key] = target.get(key, 0) + n


def kept_users(
    monthly_counts: dict[tuple[str, int, int], int], cfg: ActivityFilterConfig
) -> set[str]:
    """Users whose count sits in [mu, m_cap] in every month they appear."""
    bad: set[str] = set()
    seen: set[str] = set()
    for (user, _y, _m), n in monthly_counts.items():
        seen.add(user)
        if not (cfg.mu <= n <= cfg.m_cap):
            bad.add(user)
    return seen - bad


def filter_users_by_activity(
    records: Iterable[CallRecord], cfg: ActivityFilterConfig
) -> set[str]:
    """Apply the monthly activity bounds; returns the kept user set.

    A user is kept iff every calendar month in which they appear, as caller
    or callee, has a participation count within [mu, m_cap], inclusive on
    both ends.
    """
    return kept_users(count_monthly_activity(records), cfg)
