"""Partition-parallel scanning of CDR files.

Plain-text files are split into byte-range chunks; a line belongs to the
chunk containing its first byte, so any chunking of the same bytes yields
the same multiset of lines. Gzipped files cannot be range-split and are
scanned whole. Workers return plain dicts and sets that merge by addition
or union, which keeps every result independent of the partition count.
"""

from __future__ import annotations

import gzip
from dataclasses import dataclass
from datetime import date
from multiprocessing import Pool
from pathlib import Path
from typing import Callable, Iterator

from .errors import CdrParseError
from .graph import collect_client_edges
from .homes import night_histograms
from .ingest import (
    AntennaRegistry,
    _report_from_counts,
    IngestReport,
    count_monthly_activity,
    iter_cdr_fields,
)
from .risk import count_outgoing


@dataclass(frozen=True)
class Chunk:
    path: str
    start: int | None  # None: whole file (gz)
    end: int | None


def plan_chunks(paths: list[str | Path], partitions: int) -> list[Chunk]:
    """Split input files into roughly `partitions` byte-range chunks."""
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    sizes = {str(p): Path(p).stat().st_size for p in paths}
    total = sum(sizes.values()) or 1
    chunks: list[Chunk] = []
    for p in paths:
        p = str(p)
        if p.endswith(".gz"):
            chunks.append(Chunk(p, None, None))
            continue
        size = sizes[p]
        n = max(1, round(partitions * size / total))
        if partitions == 1 or size == 0:
            n = 1
        step = size // n or 1
        bounds = [i * step for i in range(n)] + [size]
        for a, b in zip(bounds, bounds[1:]):
            if b > a:
                chunks.append(Chunk(p, a, b))
    return chunks


def iter_chunk_lines(chunk: Chunk) -> Iterator[bytes]:
    """Lines of a chunk under the first-byte ownership rule."""
    if chunk.start is None:
        with gzip.open(chunk.path, "rb") as f:
            yield from f
        return
    with open(chunk.path, "rb") as f:
        pos = chunk.start
        if pos > 0:
            # the line straddling the boundary belongs to the previous chunk
            f.seek(pos - 1)
            if f.read(1) != b"\n":
                f.readline()
            pos = f.tell()
        else:
            f.seek(0)
        end = chunk.end
        while pos < end:
            raw = f.readline()
            if not raw:
                break
            yield raw
            pos += len(raw)


# Worker entry points must be module-level for multiprocessing pickling.
# Each returns (accumulators..., counts list) for a single chunk.


def scan_activity(args) -> tuple[dict, list[int]]:
    chunk, registry_entries, window, mode = args
    counts = [0, 0, 0, 0, 0]
    registry = AntennaRegistry(registry_entries)
    try:
        fields = iter_cdr_fields(
            iter_chunk_lines(chunk),
            mode=mode,
            registry=registry,
            window=window,
            counts=counts,
        )
        users: set[str] = set()

        def tap(it):
            for r in it:
                users.add(r[0])
                users.add(r[1])
                yield r

        monthly = count_monthly_activity(tap(fields))
    except CdrParseError as exc:
        raise CdrParseError(f"{chunk.path}: {exc}") from exc
    return {"monthly": monthly, "users": users}, counts


def scan_edges(args) -> tuple[dict, list[int]]:
    chunk, registry_entries, window, clients = args
    counts = [0, 0, 0, 0, 0]
    registry = AntennaRegistry(registry_entries)
    fields = iter_cdr_fields(
        iter_chunk_lines(chunk), registry=registry, window=window, counts=counts
    )
    return {"edges": collect_client_edges(fields, clients)}, counts


def scan_nights(args) -> tuple[dict, list[int]]:
    chunk, registry_entries, window, clients, night_cfg = args
    counts = [0, 0, 0, 0, 0]
    registry = AntennaRegistry(registry_entries)
    fields = iter_cdr_fields(
        iter_chunk_lines(chunk), registry=registry, window=window, counts=counts
    )
    return {"hist": night_histograms(fields, clients, night_cfg)}, counts


def scan_outgoing(args) -> tuple[dict, list[int]]:
    chunk, registry_entries, window, residents = args
    counts = [0, 0, 0, 0, 0]
    registry = AntennaRegistry(registry_entries)
    fields = iter_cdr_fields(
        iter_chunk_lines(chunk), registry=registry, window=window, counts=counts
    )
    calls, vcalls = count_outgoing(fields, residents)
    return {"calls": calls, "vcalls": vcalls}, counts


def run_scans(
    worker: Callable, arg_list: list, processes: int
) -> list[tuple[dict, list[int]]]:
    """Run chunk scans, in-process when a single worker suffices."""
    if processes <= 1 or len(arg_list) <= 1:
        return [worker(a) for a in arg_list]
    with Pool(processes=min(processes, len(arg_list))) as pool:
        return pool.map(worker, arg_list)


def merged_report(results: list[tuple[dict, list[int]]]) -> IngestReport:
    report = IngestReport()
    for _, counts in results:
        report.merge(_report_from_counts(counts))
    return report


def window_tuple(
    start: date | None, end: date | None
) -> tuple[date, date] | None:
    if start is None and end is None:
        return None
    if start is None or end is None:
        raise ValueError("window needs both start and end")
    return (start, end)
