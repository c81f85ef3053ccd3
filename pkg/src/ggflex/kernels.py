"""Hot numeric kernels, each in two flavours.

``*_loops`` are explicit loops compiled with numba (plain Python when numba is
unavailable, which is only sensible for tiny inputs).  ``*_vectorized`` are the
numpy fallbacks.  The module-level names without suffix point at whichever
flavour the active backend prefers.

Squared distances are accumulated feature by feature in index order in every
flavour, so the graph kernels agree bit for bit across backends.
"""

import numpy as np

from ._accel import NUMBA_AVAILABLE, njit

__all__ = [
    "pairwise_sq_dists",
    "gabriel_adjacency",
    "nearest_hit_miss",
    "chipclass_votes",
]


# ---------------------------------------------------------------------------
# squared distances
# ---------------------------------------------------------------------------


@njit(cache=True)
def pairwise_sq_dists_loops(X):
    n, d = X.shape
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for f in range(d):
                diff = X[i, f] - X[j, f]
                s += diff * diff
            D[i, j] = s
            D[j, i] = s
    return D


def pairwise_sq_dists_vectorized(X):
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    D = np.zeros((n, n))
    for f in range(d):
        diff = X[:, f][:, None] - X[:, f][None, :]
        D += diff * diff
    return D


# ---------------------------------------------------------------------------
# Gabriel adjacency
# ---------------------------------------------------------------------------


@njit(cache=True)
def gabriel_adjacency_loops(D):
    # k == i or k == j can never block: D[i,i] + D[j,i] == D[i,j] exactly.
    n = D.shape[0]
    A = np.zeros((n, n), dtype=np.bool_)
    for i in range(n):
        for j in range(i + 1, n):
            dij = D[i, j]
            keep = True
            for k in range(n):
                if D[i, k] + D[j, k] < dij:
                    keep = False
                    break
            if keep:
                A[i, j] = True
                A[j, i] = True
    return A


def gabriel_adjacency_vectorized(D, block_rows=256):
    n = D.shape[0]
    A = np.zeros((n, n), dtype=bool)
    for i in range(n - 1):
        for start in range(i + 1, n, block_rows):
            stop = min(start + block_rows, n)
            lhs = D[i][None, :] + D[start:stop, :]
            blocked = (lhs < D[i, start:stop, None]).any(axis=1)
            A[i, start:stop] = ~blocked
    A |= A.T
    return A


# ---------------------------------------------------------------------------
# nearest hit / nearest miss
# ---------------------------------------------------------------------------


@njit(cache=True)
def nearest_hit_miss_loops(D, y):
    """Squared distance from each sample to its nearest hit and nearest miss.

    ``inf`` marks a missing neighbour (a class with a single sample, or no
    opposite class at all).
    """
    n = D.shape[0]
    hit = np.full(n, np.inf)
    miss = np.full(n, np.inf)
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            dij = D[i, j]
            if y[j] == y[i]:
                if dij < hit[i]:
                    hit[i] = dij
            elif dij < miss[i]:
                miss[i] = dij
    return hit, miss


def nearest_hit_miss_vectorized(D, y):
    y = np.asarray(y)
    same = y[:, None] == y[None, :]
    np.fill_diagonal(same, False)
    other = y[:, None] != y[None, :]
    hit = np.where(same, D, np.inf).min(axis=1) if len(y) else np.empty(0)
    miss = np.where(other, D, np.inf).min(axis=1) if len(y) else np.empty(0)
    return hit, miss


# ---------------------------------------------------------------------------
# Chipclass gating and voting
# ---------------------------------------------------------------------------


@njit(cache=True)
def chipclass_votes_loops(Xt, mid, pos, neg):
    """Class weights (w_pos, w_neg) for every row of ``Xt``.

    Weights are rescaled per test point by a common factor, so only their
    ratio is meaningful.
    """
    t, d = Xt.shape
    H = mid.shape[0]
    w_pos = np.zeros(t)
    w_neg = np.zeros(t)
    sq = np.empty(H)
    expo = np.empty(H)
    vote = np.empty(H)
    for a in range(t):
        n_zero = 0
        max_sq = 0.0
        for k in range(H):
            s = 0.0
            sp = 0.0
            sn = 0.0
            for f in range(d):
                u = Xt[a, f] - mid[k, f]
                s += u * u
                u = Xt[a, f] - pos[k, f]
                sp += u * u
                u = Xt[a, f] - neg[k, f]
                sn += u * u
            sq[k] = s
            if s == 0.0:
                n_zero += 1
            if s > max_sq:
                max_sq = s
            if sp < sn:
                vote[k] = 1.0
            elif sn < sp:
                vote[k] = 0.0
            else:
                vote[k] = 0.5
        wp = 0.0
        wn = 0.0
        if n_zero > 0:
            for k in range(H):
                if sq[k] == 0.0:
                    wp += vote[k]
                    wn += 1.0 - vote[k]
        else:
            top = -np.inf
            for k in range(H):
                expo[k] = max_sq / np.sqrt(sq[k])
                if expo[k] > top:
                    top = expo[k]
            for k in range(H):
                c = np.exp(expo[k] - top)
                wp += c * vote[k]
                wn += c * (1.0 - vote[k])
        w_pos[a] = wp
        w_neg[a] = wn
    return w_pos, w_neg


def _sq_to(Xt, P):
    S = np.zeros((Xt.shape[0], P.shape[0]))
    for f in range(Xt.shape[1]):
        u = Xt[:, f][:, None] - P[:, f][None, :]
        S += u * u
    return S


def chipclass_votes_vectorized(Xt, mid, pos, neg, chunk=4096):
    t = Xt.shape[0]
    w_pos = np.empty(t)
    w_neg = np.empty(t)
    for start in range(0, t, chunk):
        x = Xt[start:start + chunk]
        sq = _sq_to(x, mid)
        sp = _sq_to(x, pos)
        sn = _sq_to(x, neg)
        vote = np.where(sp < sn, 1.0, np.where(sn < sp, 0.0, 0.5))
        zero = sq == 0.0
        has_zero = zero.any(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            expo = sq.max(axis=1, keepdims=True) / np.sqrt(sq)
        expo[has_zero] = np.where(zero[has_zero], 0.0, -np.inf)
        expo -= expo.max(axis=1, keepdims=True)
        c = np.exp(expo)
        w_pos[start:start + chunk] = (c * vote).sum(axis=1)
        w_neg[start:start + chunk] = (c * (1.0 - vote)).sum(axis=1)
    return w_pos, w_neg


if NUMBA_AVAILABLE:
    pairwise_sq_dists = pairwise_sq_dists_loops
    gabriel_adjacency = gabriel_adjacency_loops
    nearest_hit_miss = nearest_hit_miss_loops
    chipclass_votes = chipclass_votes_loops
else:
    pairwise_sq_dists = pairwise_sq_dists_vectorized
    gabriel_adjacency = gabriel_adjacency_vectorized
    nearest_hit_miss = nearest_hit_miss_vectorized
    chipclass_votes = chipclass_votes_vectorized
