"""Builders for connection matrices from communication-distance patterns.

A bulk-synchronous code's point-to-point pattern is summarised by a set of
signed distances: d = {+1, -1} is next-neighbour exchange on a chain or
ring, {+1, -1, -2} adds a second backward partner, and so on.  The edge
set is T_ij = 1 iff j = i + d for some d in the set, wrapped around for
periodic boundaries or truncated for open ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigError
from .model import Topology

PERIODIC = "periodic"
OPEN = "open"


@dataclass(frozen=True)
class DistanceSet:
    """Signed communication distances plus the boundary treatment."""

    distances: tuple[int, ...]
    boundary: str = PERIODIC

    def __post_init__(self):
        dists = tuple(int(d) for d in self.distances)
        if not dists:
            raise ConfigError("distance set must not be empty")
        if any(d == 0 for d in dists):
            raise ConfigError("communication distance 0 (self) is not allowed")
        if len(set(dists)) != len(dists):
            raise ConfigError("duplicate communication distance")
        if self.boundary not in (PERIODIC, OPEN):
            raise ConfigError(f"boundary must be '{PERIODIC}' or '{OPEN}'")
        object.__setattr__(self, "distances", dists)


def build_from_distances(n: int, dset: DistanceSet) -> Topology:
    """Topology with an edge from every i to each i+d in the distance set."""
    if n < 2:
        raise ConfigError(f"need at least 2 processes, got {n}")
    if any(abs(d) >= n for d in dset.distances):
        raise ConfigError(f"|distance| must be < n={n}")
    edges = []
    for i in range(n):
        for d in dset.distances:
            j = i + d
            if dset.boundary == PERIODIC:
                j %= n
            elif not 0 <= j < n:
                continue
            edges.append((i, j))
    # periodic wrap can map two distances onto the same partner (e.g. n=2,
    # d=+-1); keep the edge set a set
    edges = sorted(set(edges))
    if not edges:
        raise ConfigError("distance set produces no edges for this n")
    return Topology(n=n, edges=tuple(edges), distances=dset.distances)


def build_all_to_all(n: int) -> Topology:
    """Fully connected topology, T_ij = 1 for all i != j."""
    if n < 2:
        raise ConfigError(f"need at least 2 processes, got {n}")
    edges = tuple((i, j) for i in range(n) for j in range(n) if i != j)
    return Topology(n=n, edges=edges)


def load_from_file(path) -> Topology:
    """Read the edge-list text format: header ``n=<N>``, then ``i j`` lines.

    Whitespace-separated 0-based indices, ``#`` comments and blank lines
    ignored.  No distance metadata is attached, so a model using such a
    topology must supply kappa (or the full coupling) explicitly.
    """
    n = None
    edges = []
    seen: set[tuple[int, int]] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if n is None:
                if not line.startswith("n="):
                    raise ConfigError(f"{path}:{lineno}: expected header 'n=<N>'")
                try:
                    n = int(line[2:])
                except ValueError:
                    raise ConfigError(f"{path}:{lineno}: bad dimension {line[2:]!r}") from None
                if n < 1:
                    raise ConfigError(f"{path}:{lineno}: dimension must be >= 1")
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ConfigError(f"{path}:{lineno}: expected 'i j', got {line!r}")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: non-integer edge {line!r}") from None
            if not (0 <= i < n and 0 <= j < n):
                raise ConfigError(f"{path}:{lineno}: edge ({i}, {j}) out of range for n={n}")
            if i == j:
                raise ConfigError(f"{path}:{lineno}: self-connection ({i}, {i}) rejected")
            if (i, j) in seen:
                raise ConfigError(f"{path}:{lineno}: duplicate edge ({i}, {j})")
            seen.add((i, j))
            edges.append((i, j))
    if n is None:
        raise ConfigError(f"{path}: missing 'n=<N>' header")
    return Topology(n=n, edges=tuple(edges))


def save_to_file(top: Topology, path) -> None:
    """Write the edge-list text format (exact inverse of ``load_from_file``)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"n={top.n}\n")
        for i, j in top.edges:
            fh.write(f"{i} {j}\n")


def ring(n: int, boundary: str = PERIODIC) -> Topology:
    """Convenience next-neighbour topology, d = {+1, -1}."""
    return build_from_distances(n, DistanceSet((1, -1), boundary=boundary))
