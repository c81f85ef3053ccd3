"""Gabriel graph construction and queries.

Two points are joined when no third point lies strictly inside the ball that
has them as diameter.  With squared Euclidean distances the test for a pair
(i, j) against a witness k reads ``d(i,k)^2 + d(j,k)^2 < d(i,j)^2``; a witness
exactly on the sphere does not block the edge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .dataset import DataError

__all__ = [
    "DuplicatePointsError",
    "GabrielGraph",
    "EdgeCertificate",
    "is_gabriel_edge",
    "build_gabriel",
    "vertex_degrees",
    "find_duplicates",
]


class DuplicatePointsError(DataError):
    pass


@dataclass(frozen=True)
class EdgeCertificate:
    i: int
    j: int
    blocked_by: Optional[int] = None


@dataclass(frozen=True, eq=False)
class GabrielGraph:
    n: int
    adjacency: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.array(self.adjacency, dtype=bool, copy=True)
        if A.shape != (self.n, self.n):
            raise ValueError(f"adjacency shape {A.shape} does not match n={self.n}")
        if A.diagonal().any() or not np.array_equal(A, A.T):
            raise ValueError("adjacency must be symmetric without self-loops")
        A.setflags(write=False)
        object.__setattr__(self, "adjacency", A)

    @property
    def edge_list(self) -> np.ndarray:
        """Edges as an (E, 2) array of ``i < j`` pairs, lexicographically sorted."""
        i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return np.column_stack([i, j])

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(self.adjacency)) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[i])

    def edge_set(self) -> set:
        return {(int(a), int(b)) for a, b in self.edge_list}

    def write_edge_list(self, fh, delimiter: str = "\t"):
        for a, b in self.edge_list:
            fh.write(f"{a}{delimiter}{b}\n")

    def to_json(self) -> str:
        return json.dumps({
            "schema_version": 1,
            "n": self.n,
            "edges": [[int(a), int(b)] for a, b in self.edge_list],
            "adjacency": [[int(v) for v in np.flatnonzero(row)] for row in self.adjacency],
        })


def _sq(a, b) -> float:
    s = 0.0
    for u, v in zip(a, b):
        diff = u - v
        s += diff * diff
    return s


def is_gabriel_edge(i: int, j: int, points) -> tuple[bool, EdgeCertificate]:
    """Test a single pair; on rejection the certificate names the lowest blocking index."""
    if i == j:
        raise ValueError("is_gabriel_edge needs two distinct vertices")
    P = np.asarray(points, dtype=np.float64)
    if not np.all(np.isfinite(P)):
        raise DataError("points must be finite")
    dij = _sq(P[i], P[j])
    for k in range(P.shape[0]):
        if k == i or k == j:
            continue
        if _sq(P[i], P[k]) + _sq(P[j], P[k]) < dij:
            return False, EdgeCertificate(int(i), int(j), int(k))
    return True, EdgeCertificate(int(i), int(j), None)


def find_duplicates(points) -> list[list[int]]:
    """Groups of row indices holding identical points (only groups of size > 1)."""
    P = np.ascontiguousarray(points, dtype=np.float64)
    groups = {}
    for i, row in enumerate(P):
        groups.setdefault(row.tobytes(), []).append(i)
    return [g for g in groups.values() if len(g) > 1]


def build_gabriel(points, check_duplicates: bool = True) -> GabrielGraph:
    """Gabriel graph of the rows of ``points``.

    Repeated points are rejected: they would produce zero-length edges.
    """
    P = np.ascontiguousarray(points, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] < 2:
        raise DataError(f"need at least 2 points in a 2-D array, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise DataError("points must be finite")
    if check_duplicates:
        dup = find_duplicates(P)
        if dup:
            shown = "; ".join(str(g) for g in dup[:5])
            raise DuplicatePointsError(f"{len(dup)} groups of duplicate points, rows: {shown}")
    D = kernels.pairwise_sq_dists(P)
    return GabrielGraph(P.shape[0], kernels.gabriel_adjacency(D))


def vertex_degrees(graph: GabrielGraph) -> np.ndarray:
    return graph.adjacency.sum(axis=1).astype(np.intp)
