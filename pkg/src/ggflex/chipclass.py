"""Chipclass: a classifier assembled from the bisectors of Gabriel support edges.

Each support edge joins a positive and a negative sample (its structural
support vectors).  A test point is scored by a gated vote over edges: edge k
votes for the class of whichever endpoint is nearer to the point, with weight
``exp(D_max^2 / dist(x, midpoint_k))`` where ``D_max`` is the largest
point-to-midpoint distance.  Weights are handled in log space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import kernels
from .dataset import NEGATIVE, POSITIVE, DataError, Dataset, Normalization, normalize_zscore
from .graph import GabrielGraph, build_gabriel
from .quality import class_thresholds, fixed_filter, flexible_filter, quality_index

__all__ = [
    "SupportEdge",
    "ChipclassModel",
    "extract_support_edges",
    "train",
    "train_fixed",
    "log_gating_weights",
    "gating_weights",
    "class_weights",
    "predict_proba",
    "predict",
    "save_model",
    "load_model",
]

MODEL_SCHEMA_VERSION = 1


@dataclass(frozen=True, eq=False)
class SupportEdge:
    ssv_pos: np.ndarray
    ssv_neg: np.ndarray
    midpoint: np.ndarray


@dataclass(frozen=True, eq=False)
class ChipclassModel:
    """Trained model.  Coordinates live in the normalized feature space."""

    ssv_pos: np.ndarray
    ssv_neg: np.ndarray
    midpoints: np.ndarray
    h_used: tuple = (1.0, 1.0)
    theta_used: tuple = (1.0, 1.0)
    normalization: Optional[Normalization] = None
    metadata: dict = field(default_factory=dict)
    # original-row indices of each edge's (positive, negative) endpoint; not serialized
    support_rows: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("ssv_pos", "ssv_neg", "midpoints"):
            a = np.array(getattr(self, name), dtype=np.float64, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.ssv_pos.ndim != 2 or self.ssv_pos.shape[0] < 1:
            raise ValueError("a model needs at least one support edge")
        if not (self.ssv_pos.shape == self.ssv_neg.shape == self.midpoints.shape):
            raise ValueError("support vector and midpoint arrays differ in shape")
        if self.normalization is None:
            object.__setattr__(self, "normalization", Normalization.identity(self.dimension))

    @property
    def dimension(self) -> int:
        return self.ssv_pos.shape[1]

    @property
    def n_edges(self) -> int:
        return self.ssv_pos.shape[0]

    @property
    def edges(self) -> list:
        return [SupportEdge(p, n, m) for p, n, m in zip(self.ssv_pos, self.ssv_neg, self.midpoints)]

    def edge_keys(self) -> set:
        """Support edges as a set of coordinate-byte pairs, for exact comparisons."""
        return {(p.tobytes(), n.tobytes()) for p, n in zip(self.ssv_pos, self.ssv_neg)}

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.dimension:
            raise DataError(f"expected {self.dimension} features, got {X.shape[-1]}")
        return self.normalization.apply(X)

    def to_dict(self) -> dict:
        return {
            "schema_version": MODEL_SCHEMA_VERSION,
            "dimension": self.dimension,
            "edges": [
                {"ssv_pos": [float(v) for v in p], "ssv_neg": [float(v) for v in n],
                 "midpoint": [float(v) for v in m]}
                for p, n, m in zip(self.ssv_pos, self.ssv_neg, self.midpoints)
            ],
            "h": [float(v) for v in self.h_used],
            "theta": [float(v) for v in self.theta_used],
            "normalization": self.normalization.to_dict(),
            "metadata": dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChipclassModel":
        if d.get("schema_version") != MODEL_SCHEMA_VERSION:
            raise DataError(f"unsupported model schema version {d.get('schema_version')!r}")
        edges = d["edges"]
        return cls(
            ssv_pos=[e["ssv_pos"] for e in edges],
            ssv_neg=[e["ssv_neg"] for e in edges],
            midpoints=[e["midpoint"] for e in edges],
            h_used=tuple(d["h"]),
            theta_used=tuple(d["theta"]),
            normalization=Normalization.from_dict(d["normalization"]),
            metadata=dict(d.get("metadata", {})),
        )


def save_model(model: ChipclassModel, path: Union[str, Path]):
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n")


def load_model(path: Union[str, Path]) -> ChipclassModel:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such model file: {path}")
    return ChipclassModel.from_dict(json.loads(path.read_text()))


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def extract_support_edges(graph: GabrielGraph, data: Dataset) -> list:
    return [SupportEdge(*t) for t in zip(*_support_arrays(graph, data)[:3])]


def _support_arrays(graph, data):
    if graph.n != data.m:
        raise ValueError(f"graph has {graph.n} vertices, dataset {data.m} samples")
    data.require_both_classes()
    E = graph.edge_list
    ya, yb = data.y[E[:, 0]], data.y[E[:, 1]]
    E = E[ya != yb]
    # a connected graph over two non-empty classes always has a crossing edge
    assert len(E) > 0, "no support edges"
    flip = data.y[E[:, 0]] == NEGATIVE
    rows = np.where(flip[:, None], E[:, ::-1], E)
    pos, neg = data.X[rows[:, 0]], data.X[rows[:, 1]]
    return pos, neg, (pos + neg) / 2.0, rows


def _fit(data, normalize, make_filter, h, filter_name):
    data.require_both_classes()
    if normalize:
        work, norm = normalize_zscore(data)
    else:
        work, norm = data, Normalization.identity(data.d)
    graph = build_gabriel(work.X)
    q = quality_index(graph, work.y)
    theta = class_thresholds(q, work.y)
    if make_filter is None:
        kept = np.arange(work.m)
        fdata, fgraph = work, graph
    else:
        res = make_filter(work, graph, q, theta)
        kept = res.kept_indices
        fdata, fgraph = res.filtered_dataset, res.filtered_graph
    pos, neg, mid, rows = _support_arrays(fgraph, fdata)
    meta = {"dataset_hash": data.digest(), "n_train": data.m, "n_kept": int(fdata.m),
            "normalized": bool(normalize), "filter": filter_name}
    return ChipclassModel(pos, neg, mid, tuple(float(v) for v in h), theta, norm, meta,
                          support_rows=kept[rows])


def train(data: Dataset, h: Sequence[float] = (1.0, 1.0), enable_filter: bool = True,
          normalize: bool = True) -> ChipclassModel:
    """Fit Chipclass with the per-class filtering multipliers ``h = (h_pos, h_neg)``.

    Pipeline: optional z-scoring, Gabriel graph, quality indices, class
    thresholds, flexible filtering with one graph rebuild, support edges.
    With ``enable_filter=False`` the support edges of the raw graph are used.
    Filtering that empties a class raises :class:`~ggflex.quality.EmptyClassError`.
    """
    h = (float(h[0]), float(h[1]))
    make = (lambda d, g, q, t: flexible_filter(d, g, q, t, h)) if enable_filter else None
    return _fit(data, normalize, make, h, "flexible" if enable_filter else "none")


def train_fixed(data: Dataset, normalize: bool = True) -> ChipclassModel:
    """Fit the standard model: remove samples with quality below their class mean."""
    return _fit(data, normalize, fixed_filter, (1.0, 1.0), "fixed")


# ---------------------------------------------------------------------------
# inference
# ---------------------------------------------------------------------------


def _as_batch(x, model):
    X = model.transform(x)
    return np.atleast_2d(X), X.ndim == 1


def log_gating_weights(x, model: ChipclassModel) -> np.ndarray:
    """``log c_k`` for a single point; ``+inf`` where the point sits on a midpoint."""
    X, _ = _as_batch(x, model)
    if X.shape[0] != 1:
        raise ValueError("log_gating_weights takes a single point")
    sq = ((X[0] - model.midpoints) ** 2).sum(axis=1)
    with np.errstate(divide="ignore"):
        return sq.max() / np.sqrt(sq)


def gating_weights(x, model: ChipclassModel, normalized: bool = False) -> np.ndarray:
    """Gate weights ``c_k`` for a single point.

    Raw weights overflow for points close to a midpoint; ``normalized=True``
    returns ``c / sum(c)`` computed stably.  On a midpoint, all weight goes to
    the edge(s) whose midpoint coincides with the point.
    """
    e = log_gating_weights(x, model)
    inf = np.isinf(e)
    if inf.any():
        w = inf.astype(np.float64)
        return w / w.sum() if normalized else np.where(inf, np.inf, 0.0)
    if normalized:
        w = np.exp(e - e.max())
        return w / w.sum()
    return np.exp(e)


def class_weights(x, model: ChipclassModel):
    """Rescaled ``(w_pos, w_neg)``; arrays for a batch, floats for one point."""
    X, single = _as_batch(x, model)
    wp, wn = kernels.chipclass_votes(np.ascontiguousarray(X), model.midpoints,
                                     model.ssv_pos, model.ssv_neg)
    if single:
        return float(wp[0]), float(wn[0])
    return wp, wn


def predict_proba(x, model: ChipclassModel):
    """Probability of the positive class, ``w_pos / (w_pos + w_neg)``."""
    wp, wn = class_weights(x, model)
    return wp / (wp + wn)


def predict(x, model: ChipclassModel):
    """1 (positive) where ``w_pos >= w_neg``, else 0."""
    wp, wn = class_weights(x, model)
    out = np.asarray(wp) >= np.asarray(wn)
    if np.ndim(out) == 0:
        return POSITIVE if out else NEGATIVE
    return out.astype(np.int8)
