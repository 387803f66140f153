"""Boolean client-to-client communication graph.

An edge exists between two clients when at least one record joins them in
either direction during the observation window. Call volumes are not kept
here; per-antenna volumes live with the risk indicators.
"""

from __future__ import annotations

from pathlib import Path
from typing import IO, Iterable

from .errors import RiskmapError
from .ingest import CALLER, CALLEE, CallRecord


class SocialGraph:
    """Undirected, boolean, immutable after construction."""

    def __init__(self, nodes: Iterable[str], edges: Iterable[tuple[str, str]]):
        adj: dict[str, set[str]] = {}
        node_set = set(nodes)
        for a, b in edges:
            if a == b:
                raise RiskmapError(f"self-loop on {a!r}")
            node_set.add(a)
            node_set.add(b)
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        self._nodes = frozenset(node_set)
        self._adj: dict[str, tuple[str, ...]] = {
            u: tuple(sorted(vs)) for u, vs in adj.items()
        }

    @property
    def nodes(self) -> frozenset[str]:
        return self._nodes

    def neighbors(self, u: str) -> tuple[str, ...]:
        """Sorted neighbors of u; empty for unknown users."""
        return self._adj.get(u, ())

    def edge_count(self) -> int:
        return sum(len(vs) for vs in self._adj.values()) // 2

    def edges(self) -> list[tuple[str, str]]:
        """Canonical (min, max) pairs, sorted."""
        out = [(u, v) for u, vs in self._adj.items() for v in vs if u < v]
        out.sort()
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SocialGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._adj == other._adj

    def __repr__(self) -> str:
        return f"SocialGraph(nodes={len(self._nodes)}, edges={self.edge_count()})"


def collect_client_edges(
    records: Iterable[tuple], clients: frozenset[str] | set[str]
) -> set[tuple[str, str]]:
    """Canonical edge set from records whose both endpoints are clients.

    Partition-friendly: edge sets from disjoint record partitions merge by
    set union.
    """
    edges: set[tuple[str, str]] = set()
    for r in records:
        a = r[CALLER]
        b = r[CALLEE]
        if a != b and a in clients and b in clients:
            edges.add((a, b) if a < b else (b, a))
    return edges


def build_graph(records: Iterable[CallRecord], clients: set[str]) -> SocialGraph:
    """Build the client graph; records touching non-clients are ignored."""
    return SocialGraph(clients, collect_client_edges(records, frozenset(clients)))


def neighbors(graph: SocialGraph, u: str) -> tuple[str, ...]:
    return graph.neighbors(u)


def write_edge_list(graph: SocialGraph, dest: IO[str] | str | Path) -> None:
    """Write `n_i,n_j` lines, canonically ordered and sorted."""
    lines = "".join(f"{a},{b}\n" for a, b in graph.edges())
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(lines, encoding="utf-8")
    else:
        dest.write(lines)


def read_edge_list(source: IO[str] | str | Path) -> SocialGraph:
    """Read an edge list written by `write_edge_list`.

    Lines must be canonical (first id < second id); nodes are the edge
    endpoints. Round-tripping through write_edge_list is bit-exact.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    edges = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise RiskmapError(f"edge list line {lineno}: expected 'n_i,n_j', got {line!r}")
        a, b = parts
        if not a < b:
            raise RiskmapError(
                f"edge list line {lineno}: not canonically ordered: {line!r}"
            )
        edges.append((a, b))
    return SocialGraph((), edges)
