"""Nearest-hit / nearest-miss margins and the margin experiments built on them.

The margin of sample i is ``(d_miss - d_hit) / d_miss`` where ``d_hit`` and
``d_miss`` are the distances to the closest other sample of the same class and
of the opposite class.  It is at most 1 and negative when the nearest miss is
closer than the nearest hit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .dataset import DataError, Dataset, gen_gaussian_pair
from .graph import DuplicatePointsError, build_gabriel
from .quality import class_thresholds, fixed_removal_mask, quality_index, removal_mask

__all__ = [
    "MarginReport",
    "MarginSurface",
    "hit_miss_distances",
    "sample_margins",
    "sample_margin",
    "mean_margin",
    "filtered_mean_margin",
    "fixed_threshold_mean_margin",
    "margin_surface",
    "margin_curve",
    "log_grid",
]


@dataclass(frozen=True, eq=False)
class MarginReport:
    per_sample: np.ndarray
    mean_all: float
    mean_kept: float
    removed_contribution: float
    n_kept: int
    n_removed: int


def hit_miss_distances(data: Dataset):
    D = kernels.pairwise_sq_dists(np.ascontiguousarray(data.X))
    hit, miss = kernels.nearest_hit_miss(D, np.ascontiguousarray(data.y))
    return np.sqrt(hit), np.sqrt(miss)


def _margins(hit, miss, idx):
    h, m = hit[idx], miss[idx]
    if np.isinf(h).any():
        raise DataError(f"no nearest hit for samples {idx[np.isinf(h)].tolist()} (single-sample class)")
    if np.isinf(m).any():
        raise DataError("no nearest miss: dataset holds a single class")
    if (m == 0).any():
        raise DataError(f"samples {idx[m == 0].tolist()} coincide with an opposite-class sample")
    return (m - h) / m


def sample_margins(data: Dataset) -> np.ndarray:
    hit, miss = hit_miss_distances(data)
    return _margins(hit, miss, np.arange(data.m))


def sample_margin(i: int, data: Dataset) -> float:
    return float(sample_margins_at(data, [i])[0])


def sample_margins_at(data: Dataset, idx) -> np.ndarray:
    hit, miss = hit_miss_distances(data)
    return _margins(hit, miss, np.asarray(idx, dtype=np.intp))


def mean_margin(data: Dataset, restrict_to: Optional[Iterable[int]] = None) -> MarginReport:
    """Mean margin over the dataset, split into the ``restrict_to`` samples and the rest.

    Neighbours are always searched over the whole dataset.  ``mean_kept`` is
    the mean over ``restrict_to`` (all samples when omitted) and
    ``removed_contribution`` the mean over its complement (NaN if empty).
    """
    M = sample_margins(data)
    if restrict_to is None:
        kept = np.ones(data.m, dtype=bool)
    else:
        idx = np.unique(np.asarray(list(restrict_to), dtype=np.intp))
        if idx.size == 0:
            raise DataError("empty restriction set")
        if idx[0] < 0 or idx[-1] >= data.m:
            raise IndexError("restriction index out of range")
        kept = np.zeros(data.m, dtype=bool)
        kept[idx] = True
    n_in = int(kept.sum())
    n_out = data.m - n_in
    return MarginReport(
        per_sample=M,
        mean_all=float(M.mean()),
        mean_kept=float(M[kept].mean()),
        removed_contribution=float(M[~kept].mean()) if n_out else float("nan"),
        n_kept=n_in,
        n_removed=n_out,
    )


def filtered_mean_margin(data: Dataset, keep: np.ndarray) -> float:
    """Mean margin of the kept samples with neighbours searched among kept samples only.

    NaN when the kept set lacks a class or has a single-sample class.
    """
    keep = np.asarray(keep, dtype=bool)
    kept_y = data.y[keep]
    if (kept_y == 1).sum() < 2 or (kept_y == 0).sum() < 2:
        return float("nan")
    sub = data.subset(np.flatnonzero(keep))
    return float(sample_margins(sub).mean())


def _profile(data: Dataset):
    graph = build_gabriel(data.X)
    q = quality_index(graph, data.y)
    return q, class_thresholds(q, data.y)


def fixed_threshold_mean_margin(data: Dataset) -> float:
    q, theta = _profile(data)
    return filtered_mean_margin(data, ~fixed_removal_mask(q, data.y, theta))


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """``n`` log-spaced values from ``lo`` to ``hi``; 1.0 is hit exactly when it is a node."""
    g = np.exp(np.linspace(np.log(lo), np.log(hi), n))
    g[0], g[-1] = lo, hi
    g[np.isclose(g, 1.0, rtol=1e-12, atol=0)] = 1.0
    return g


@dataclass(frozen=True, eq=False)
class MarginSurface:
    h_pos: np.ndarray
    h_neg: np.ndarray
    mean_margin: np.ndarray  # [i, j] at (h_pos[i], h_neg[j]); NaN where undefined
    kept_count: np.ndarray

    def rows(self):
        for i, hp in enumerate(self.h_pos):
            for j, hn in enumerate(self.h_neg):
                yield float(hp), float(hn), float(self.mean_margin[i, j]), int(self.kept_count[i, j])


def margin_surface(data: Dataset, h_pos: Sequence[float] = None,
                   h_neg: Sequence[float] = None) -> MarginSurface:
    """Kept-sample mean margin for every ``(h_pos, h_neg)`` grid cell.

    Quality indices and thresholds come from the full dataset; each cell
    filters with its multipliers and scores the survivors.  Cells that empty a
    class (or leave it a single sample) are NaN with the kept count still set.
    The default grid is 17 x 17 log-spaced over [0.25, 4].
    """
    h_pos = log_grid(0.25, 4.0, 17) if h_pos is None else np.asarray(h_pos, dtype=np.float64)
    h_neg = log_grid(0.25, 4.0, 17) if h_neg is None else np.asarray(h_neg, dtype=np.float64)
    if (h_pos <= 0).any() or (h_neg <= 0).any():
        raise ValueError("grid values must be positive")
    q, theta = _profile(data)
    out = np.full((len(h_pos), len(h_neg)), np.nan)
    kept_count = np.zeros(out.shape, dtype=np.intp)
    cache = {}
    for i, hp in enumerate(h_pos):
        for j, hn in enumerate(h_neg):
            keep = ~removal_mask(q, data.y, theta, (hp, hn))
            kept_count[i, j] = int(keep.sum())
            key = keep.tobytes()
            if key not in cache:
                cache[key] = filtered_mean_margin(data, keep)
            out[i, j] = cache[key]
    return MarginSurface(h_pos, h_neg, out, kept_count)


def margin_curve(variances: Sequence[float], seed: int = 0, n_per_class: int = 500,
                 mu0=(3.0, 3.0), mu1=(5.0, 5.0)):
    """Rows ``(variance, mean_unfiltered, mean_filtered, mean_q)`` for two Gaussian classes.

    Filtering uses the class-mean thresholds.  At a variance that yields
    repeated points (variance 0) the graph is undefined, so ``mean_filtered``
    and ``mean_q`` are NaN there.
    """
    rows = []
    for v in variances:
        data = gen_gaussian_pair(mu0, mu1, float(v), n_per_class, seed)
        unfiltered = float(sample_margins(data).mean())
        try:
            q, theta = _profile(data)
        except DuplicatePointsError:
            rows.append((float(v), unfiltered, float("nan"), float("nan")))
            continue
        filtered = filtered_mean_margin(data, ~fixed_removal_mask(q, data.y, theta))
        rows.append((float(v), unfiltered, filtered, float(q.mean())))
    return rows
