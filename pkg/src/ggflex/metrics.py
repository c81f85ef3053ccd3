import numpy as np
from scipy.stats import rankdata

from .dataset import DataError

__all__ = ["auc"]


def auc(scores, labels) -> float:
    """Area under the ROC curve via the rank-sum statistic.

    Equals the probability that a random positive (label 1) outscores a
    random negative, with ties counted as one half.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-D and the same length")
    if not np.all(np.isfinite(s)):
        raise DataError("scores must be finite")
    pos = y == 1
    n_pos = int(pos.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC needs both classes")
    r = rankdata(s)
    return float((r[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))
