"""Benchmark harness and rank statistics for comparing classifiers."""

from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy.stats import f as f_dist
from scipy.stats import norm, rankdata

from .chipclass import predict_proba, train, train_fixed
from .dataset import DataError, Dataset, stratified_kfold
from .metrics import auc
from .quality import EmptyClassError
from .tuner import cv_objective, h_search_space, tune

__all__ = [
    "auc",
    "ScoreTable",
    "RankSummary",
    "BenchmarkReport",
    "load_score_table",
    "average_ranks",
    "friedman_test",
    "bonferroni_dunn_q",
    "bonferroni_dunn_cd",
    "rank_summary",
    "run_benchmark",
    "BONFERRONI_DUNN_Q",
]

log = logging.getLogger(__name__)

# Two-tailed Bonferroni-Dunn critical values (Demsar 2006, Table 5b), k = 2..10.
BONFERRONI_DUNN_Q = {
    0.05: (1.960, 2.241, 2.394, 2.498, 2.576, 2.638, 2.690, 2.724, 2.773),
    0.10: (1.645, 1.960, 2.128, 2.241, 2.326, 2.394, 2.450, 2.498, 2.539),
}


@dataclass(frozen=True, eq=False)
class ScoreTable:
    datasets: tuple
    classifiers: tuple
    scores: np.ndarray  # (N datasets, k classifiers)
    unit: str = "percent"

    def __post_init__(self):
        S = np.array(self.scores, dtype=np.float64, copy=True)
        if S.shape != (len(self.datasets), len(self.classifiers)):
            raise DataError(f"score matrix shape {S.shape} does not match labels")
        if np.isnan(S).any():
            r, c = np.argwhere(np.isnan(S))[0]
            raise DataError(f"missing score for {self.datasets[r]!r} / {self.classifiers[c]!r}")
        S.setflags(write=False)
        object.__setattr__(self, "scores", S)


def load_score_table(path: Union[str, Path], delimiter: str = ",") -> ScoreTable:
    """Read a CSV whose header is ``dataset, clf_1, ..., clf_k``; empty cells are errors."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r]
    if len(rows) < 2:
        raise DataError(f"{path}: need a header and at least one row")
    classifiers = tuple(c.strip() for c in rows[0][1:])
    names, S = [], []
    for ln, row in enumerate(rows[1:], start=2):
        if len(row) != len(classifiers) + 1:
            raise DataError(f"{path}: row {ln} has {len(row)} cells, expected {len(classifiers) + 1}")
        names.append(row[0].strip())
        vals = []
        for c, cell in enumerate(row[1:], start=1):
            cell = cell.strip()
            if not cell:
                raise DataError(f"{path}: row {ln}, column {c}: missing score")
            try:
                vals.append(float(cell))
            except ValueError:
                raise DataError(f"{path}: row {ln}, column {c}: cannot parse {cell!r}") from None
        S.append(vals)
    S = np.array(S)
    return ScoreTable(tuple(names), classifiers, S, "percent" if S.max() > 1.0 else "fraction")


def average_ranks(table: ScoreTable) -> np.ndarray:
    """Mean rank per classifier; rank 1 is the highest score, ties share the average rank."""
    return np.vstack([rankdata(-row) for row in table.scores]).mean(axis=0)


def friedman_test(avg_ranks, N: int, k: int) -> tuple[float, float]:
    """Friedman chi-square and its F-distributed (Iman-Davenport) version."""
    R = np.asarray(avg_ranks, dtype=np.float64)
    if k < 3 or N < 2:
        raise ValueError(f"need k >= 3 classifiers and N >= 2 datasets, got k={k}, N={N}")
    if R.shape != (k,):
        raise ValueError(f"expected {k} average ranks, got {R.shape}")
    chi2 = 12.0 * N / (k * (k + 1)) * (np.sum(R * R) - k * (k + 1) ** 2 / 4.0)
    chi2 = max(chi2, 0.0)
    denom = N * (k - 1) - chi2
    if denom <= 0:
        raise ValueError("degenerate Friedman statistic: N(k-1) equals chi2")
    return float(chi2), float((N - 1) * chi2 / denom)


def bonferroni_dunn_q(k: int, alpha: float = 0.05, exact: bool = False) -> float:
    """Critical value for comparing k classifiers against one control.

    Uses the published table for k <= 10 and alpha in {0.05, 0.10}; otherwise
    (or with ``exact=True``) the normal quantile ``z(1 - alpha / (2 (k - 1)))``.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if not exact and alpha in BONFERRONI_DUNN_Q and k <= 10:
        return BONFERRONI_DUNN_Q[alpha][k - 2]
    return float(norm.ppf(1.0 - alpha / (2.0 * (k - 1))))


def bonferroni_dunn_cd(k: int, N: int, q_alpha: float) -> float:
    if k < 2 or N < 1 or q_alpha < 0:
        raise ValueError(f"invalid arguments k={k}, N={N}, q_alpha={q_alpha}")
    return float(q_alpha * np.sqrt(k * (k + 1) / (6.0 * N)))


@dataclass(frozen=True)
class RankSummary:
    classifiers: tuple
    average_ranks: tuple
    N: int
    k: int
    friedman_chi2: float
    friedman_F: float
    f_critical: float
    reject_null: bool
    alpha: float
    q_alpha: float
    cd: float
    best: str
    within_cd_of_best: tuple

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema_version"] = 1
        return d

    def to_text(self) -> str:
        w = max(len(c) for c in self.classifiers)
        lines = [f"{'classifier':<{w}}  avg_rank  within_CD_of_best"]
        for c, r, ok in zip(self.classifiers, self.average_ranks, self.within_cd_of_best):
            lines.append(f"{c:<{w}}  {r:8.4f}  {'yes' if ok else 'no'}")
        lines += [
            f"N={self.N} k={self.k}",
            f"Friedman chi2={self.friedman_chi2:.4f} F={self.friedman_F:.4f} "
            f"F_crit={self.f_critical:.4f} reject_H0={self.reject_null}",
            f"Bonferroni-Dunn alpha={self.alpha} q={self.q_alpha} CD={self.cd:.4f} best={self.best}",
        ]
        return "\n".join(lines)


def rank_summary(table: ScoreTable, alpha: float = 0.05, q_alpha: Optional[float] = None,
                 f_critical: Optional[float] = None) -> RankSummary:
    """Average ranks, Friedman statistics and Bonferroni-Dunn CD for a score table.

    ``f_critical`` defaults to the ``1 - alpha`` quantile of F(k-1, (k-1)(N-1)).
    """
    N, k = table.scores.shape
    R = average_ranks(table)
    chi2, F = friedman_test(R, N, k)
    if f_critical is None:
        f_critical = float(f_dist.ppf(1.0 - alpha, k - 1, (k - 1) * (N - 1)))
    q = bonferroni_dunn_q(k, alpha) if q_alpha is None else float(q_alpha)
    cd = bonferroni_dunn_cd(k, N, q)
    b = int(np.argmin(R))
    return RankSummary(
        classifiers=table.classifiers,
        average_ranks=tuple(float(r) for r in R),
        N=N, k=k,
        friedman_chi2=chi2, friedman_F=F,
        f_critical=float(f_critical), reject_null=bool(F > f_critical),
        alpha=alpha, q_alpha=q, cd=cd,
        best=table.classifiers[b],
        within_cd_of_best=tuple(bool(r - R[b] <= cd) for r in R),
    )


# ---------------------------------------------------------------------------
# nested cross-validation
# ---------------------------------------------------------------------------


@dataclass
class BenchmarkReport:
    per_fold: list
    mean: float
    chosen_h: list
    fixed_baseline: list
    fixed_mean: float
    inner_best: list
    inner_anchor: list
    refit_fallback: list
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema_version"] = 1
        return d


def run_benchmark(data: Dataset, outer_k: int = 10, inner_k: int = 5, budget: int = 50,
                  seed: int = 0, normalize: bool = True, h_low: float = 0.1,
                  h_high: float = 10.0, progress=None) -> BenchmarkReport:
    """Nested cross-validation of flexible Chipclass against the fixed-threshold model.

    For every outer fold the multipliers are tuned on the training part with
    an inner stratified CV (objective: mean validation AUC), the model is
    refitted on the whole training part and scored on the held-out fold.  If
    the tuned multipliers empty a class on the full training part the fold
    falls back to ``h = (1, 1)`` and says so in ``refit_fallback``.
    """
    data.require_both_classes()
    outer = stratified_kfold(data, outer_k, seed)
    per_fold, chosen, fixed, inner_best, inner_anchor, fallback = [], [], [], [], [], []
    for fold, (tr_idx, te_idx) in enumerate(outer.splits()):
        tr, te = data.subset(tr_idx), data.subset(te_idx)
        inner_seed = seed + 1 + fold
        objective = cv_objective(tr, inner_k, inner_seed, normalize=normalize)
        space = h_search_space(h_low, h_high, budget=budget, seed=inner_seed)
        result = tune(objective, space)
        h = (result.best.params["h_pos"], result.best.params["h_neg"])
        anchor = result.history[0]
        try:
            model = train(tr, h, normalize=normalize)
            fallback.append(False)
        except EmptyClassError:
            log.warning("fold %d: tuned h=%s empties a class on the full training set", fold, h)
            model = train(tr, (1.0, 1.0), normalize=normalize)
            fallback.append(True)
        per_fold.append(auc(predict_proba(te.X, model), te.y))
        fixed.append(auc(predict_proba(te.X, train_fixed(tr, normalize=normalize)), te.y))
        chosen.append([float(h[0]), float(h[1])])
        inner_best.append(result.best.score)
        inner_anchor.append(anchor.score)
        if progress is not None:
            progress(fold, per_fold[-1], fixed[-1])
    return BenchmarkReport(
        per_fold=per_fold, mean=float(np.mean(per_fold)), chosen_h=chosen,
        fixed_baseline=fixed, fixed_mean=float(np.mean(fixed)),
        inner_best=inner_best, inner_anchor=inner_anchor, refit_fallback=fallback,
        config={"outer_k": outer_k, "inner_k": inner_k, "budget": budget, "seed": seed,
                "normalize": normalize, "h_bounds": [h_low, h_high],
                "dataset_hash": data.digest()},
    )
