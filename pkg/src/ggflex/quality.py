"""Per-sample quality indices and threshold-based sample filtering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import NEGATIVE, POSITIVE, DataError, Dataset
from .graph import GabrielGraph, build_gabriel, vertex_degrees

__all__ = [
    "EmptyClassError",
    "QualityProfile",
    "FilterResult",
    "quality_index",
    "class_thresholds",
    "quality_profile",
    "removal_mask",
    "fixed_removal_mask",
    "flexible_filter",
    "fixed_filter",
]


class EmptyClassError(DataError):
    """Filtering would remove every sample of a class."""


@dataclass(frozen=True, eq=False)
class QualityProfile:
    q: np.ndarray
    theta_pos: float
    theta_neg: float
    h_pos: float = 1.0
    h_neg: float = 1.0


@dataclass(frozen=True, eq=False)
class FilterResult:
    kept_indices: np.ndarray
    removed_indices: np.ndarray
    filtered_dataset: Dataset
    filtered_graph: GabrielGraph


def quality_index(graph: GabrielGraph, labels) -> np.ndarray:
    """Fraction of each vertex's neighbours that share its label."""
    y = np.asarray(labels)
    if y.shape != (graph.n,):
        raise ValueError(f"{y.shape[0]} labels for a graph with {graph.n} vertices")
    deg = vertex_degrees(graph)
    if np.any(deg == 0):
        raise DataError(f"isolated vertices: {np.flatnonzero(deg == 0).tolist()}")
    same = (graph.adjacency & (y[:, None] == y[None, :])).sum(axis=1)
    return same / deg


def class_thresholds(q, labels) -> tuple[float, float]:
    """Mean quality per class, as ``(theta_pos, theta_neg)``."""
    q = np.asarray(q, dtype=np.float64)
    y = np.asarray(labels)
    out = []
    for cls, name in ((POSITIVE, "positive"), (NEGATIVE, "negative")):
        sel = y == cls
        if not sel.any():
            raise DataError(f"no {name} samples")
        out.append(float(q[sel].mean()))
    return out[0], out[1]


def quality_profile(data: Dataset, graph: GabrielGraph, h: Sequence[float] = (1.0, 1.0)) -> QualityProfile:
    q = quality_index(graph, data.y)
    tp, tn = class_thresholds(q, data.y)
    return QualityProfile(q, tp, tn, float(h[0]), float(h[1]))


def _check_h(h):
    hp, hn = (float(v) for v in h)
    if not (hp > 0 and hn > 0) or not (np.isfinite(hp) and np.isfinite(hn)):
        raise ValueError(f"h multipliers must be positive and finite, got {(hp, hn)}")
    return hp, hn


def removal_mask(q, labels, theta: Sequence[float], h: Sequence[float]) -> np.ndarray:
    """True where ``h_class * q < theta_class``."""
    hp, hn = _check_h(h)
    q = np.asarray(q, dtype=np.float64)
    pos = np.asarray(labels) == POSITIVE
    hh = np.where(pos, hp, hn)
    th = np.where(pos, float(theta[0]), float(theta[1]))
    return hh * q < th


def fixed_removal_mask(q, labels, theta: Sequence[float]) -> np.ndarray:
    """True where ``q < theta_class`` (the rule with no multipliers)."""
    q = np.asarray(q, dtype=np.float64)
    y = np.asarray(labels)
    return np.where(y == POSITIVE, q < theta[0], q < theta[1])


def _apply(data: Dataset, remove: np.ndarray) -> FilterResult:
    for cls, name in ((POSITIVE, "positive"), (NEGATIVE, "negative")):
        sel = data.y == cls
        if sel.any() and remove[sel].all():
            raise EmptyClassError(
                f"filtering removes all {int(sel.sum())} {name} samples "
                f"({int(remove.sum())} of {data.m} removed in total)"
            )
    kept = np.flatnonzero(~remove)
    removed = np.flatnonzero(remove)
    sub = data.subset(kept)
    return FilterResult(kept, removed, sub, build_gabriel(sub.X))


def flexible_filter(data: Dataset, graph: GabrielGraph, q, theta: Sequence[float],
                    h: Sequence[float]) -> FilterResult:
    """Drop samples with ``h_class * q < theta_class`` and rebuild the graph once.

    Raises :class:`EmptyClassError` if a class would vanish.
    """
    if graph.n != data.m or len(q) != data.m:
        raise ValueError("graph, quality vector and dataset sizes differ")
    return _apply(data, removal_mask(q, data.y, theta, h))


def fixed_filter(data: Dataset, graph: GabrielGraph, q, theta: Sequence[float]) -> FilterResult:
    if graph.n != data.m or len(q) != data.m:
        raise ValueError("graph, quality vector and dataset sizes differ")
    return _apply(data, fixed_removal_mask(q, data.y, theta))
