"""Sequential model-based maximization (TPE-style) of a scalar objective.

The first trial evaluates the anchor point (the fixed-threshold multipliers
``h = (1, 1)`` for Chipclass), the next ``n_startup - 1`` trials are random
draws, and every later trial picks, among ``n_candidates`` draws from a Parzen
density fitted to the best ``gamma`` fraction of the history, the one that
maximizes the ratio of "good" to "bad" density.

Everything is driven by one seeded ``numpy.random.Generator``, so a run is a
pure function of the objective, the space and the seed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union

import numpy as np
from scipy.special import ndtr, ndtri

from .quality import EmptyClassError

__all__ = [
    "TuningError",
    "FloatParam",
    "ChoiceParam",
    "SearchSpace",
    "TrialRecord",
    "TuneResult",
    "h_search_space",
    "tune",
    "cv_objective",
]


class TuningError(RuntimeError):
    pass


@dataclass(frozen=True)
class FloatParam:
    name: str
    low: float
    high: float
    log: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.low) and np.isfinite(self.high)) or self.low > self.high:
            raise ValueError(f"{self.name}: empty range [{self.low}, {self.high}]")
        if self.log and self.low <= 0:
            raise ValueError(f"{self.name}: log scale needs a positive lower bound")

    @property
    def cardinality(self):
        return 1 if self.low == self.high else math.inf

    def _lo_hi(self):
        if self.log:
            return math.log(self.low), math.log(self.high)
        return self.low, self.high

    def to_unit(self, v: float) -> float:
        lo, hi = self._lo_hi()
        if hi == lo:
            return 0.5
        return ((math.log(v) if self.log else v) - lo) / (hi - lo)

    def from_unit(self, u: float) -> float:
        lo, hi = self._lo_hi()
        v = lo + min(max(u, 0.0), 1.0) * (hi - lo)
        v = math.exp(v) if self.log else v
        return min(max(v, self.low), self.high)

    def contains(self, v) -> bool:
        return self.low <= v <= self.high


@dataclass(frozen=True)
class ChoiceParam:
    name: str
    choices: tuple

    def __post_init__(self):
        if len(self.choices) == 0:
            raise ValueError(f"{self.name}: no choices")

    @property
    def cardinality(self):
        return len(self.choices)

    def contains(self, v) -> bool:
        return v in self.choices


Param = Union[FloatParam, ChoiceParam]


@dataclass(frozen=True)
class SearchSpace:
    params: tuple
    budget: int = 50
    seed: int = 0
    anchor: Optional[dict] = None
    n_startup: int = 10
    gamma: float = 0.25
    n_candidates: int = 24
    bandwidth: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        names = [p.name for p in self.params]
        if not names or len(set(names)) != len(names):
            raise ValueError(f"parameter names must be non-empty and unique: {names}")
        if self.anchor is not None:
            for p in self.params:
                if p.name not in self.anchor or not p.contains(self.anchor[p.name]):
                    raise ValueError(f"anchor value for {p.name!r} missing or out of range")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")

    @property
    def cardinality(self):
        c = 1
        for p in self.params:
            c *= p.cardinality
        return c


def h_search_space(low: float = 0.1, high: float = 10.0, budget: int = 50, seed: int = 0,
                   **kw) -> SearchSpace:
    """Log-scaled box over ``(h_pos, h_neg)`` anchored at ``(1, 1)``."""
    return SearchSpace(
        (FloatParam("h_pos", low, high, log=True), FloatParam("h_neg", low, high, log=True)),
        budget=budget, seed=seed, anchor={"h_pos": 1.0, "h_neg": 1.0}, **kw,
    )


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    params: dict
    score: Optional[float]  # None marks an invalid trial (worst possible score)

    @property
    def valid(self) -> bool:
        return self.score is not None

    def to_dict(self) -> dict:
        return {"trial_index": self.trial_index, "params": self.params,
                "score": self.score, "valid": self.valid}


@dataclass(frozen=True)
class TuneResult:
    best: TrialRecord
    history: list = field(repr=False)


# ---------------------------------------------------------------------------
# Parzen estimator
# ---------------------------------------------------------------------------


class _Parzen:
    """Mixture of a uniform prior and one kernel per observation.

    Float parameters live in unit coordinates with truncated Gaussian kernels;
    choice parameters use smoothed one-hot kernels.
    """

    def __init__(self, space: SearchSpace, obs: list):
        self.space = space
        n = len(obs)
        self.n = n
        self.log_w = np.log(np.full(n + 1, 1.0 / (n + 1)))
        self.centres = {}
        self.sigmas = {}
        for p in space.params:
            if isinstance(p, FloatParam):
                c = np.array([p.to_unit(o[p.name]) for o in obs])
                self.centres[p.name] = c
                self.sigmas[p.name] = _neighbour_bandwidths(c, space.bandwidth)
            else:
                self.centres[p.name] = np.array([p.choices.index(o[p.name]) for o in obs], dtype=int)
        self.eps = 1.0 / (n + 1)

    def sample(self, rng: np.random.Generator, size: int) -> list:
        comp = rng.choice(self.n + 1, size=size, p=np.exp(self.log_w))
        out = []
        for c in comp:
            pt = {}
            for p in self.space.params:
                if isinstance(p, FloatParam):
                    if c == self.n:
                        u = rng.random()
                    else:
                        mu = self.centres[p.name][c]
                        s = self.sigmas[p.name][c]
                        a, b = ndtr(-mu / s), ndtr((1.0 - mu) / s)
                        u = mu + s * ndtri(a + rng.random() * (b - a))
                    pt[p.name] = p.from_unit(float(u))
                else:
                    k = len(p.choices)
                    if c == self.n:
                        idx = rng.integers(k)
                    else:
                        probs = np.full(k, self.eps / k)
                        probs[self.centres[p.name][c]] += 1.0 - self.eps
                        idx = rng.choice(k, p=probs)
                    pt[p.name] = p.choices[int(idx)]
            out.append(pt)
        return out

    def log_pdf(self, pts: list) -> np.ndarray:
        m = len(pts)
        comp = np.zeros((m, self.n + 1))  # column n is the prior
        for p in self.space.params:
            if isinstance(p, FloatParam):
                if p.cardinality == 1:
                    continue
                u = np.array([p.to_unit(pt[p.name]) for pt in pts])[:, None]
                mu = self.centres[p.name][None, :]
                s = self.sigmas[p.name][None, :]
                z = (u - mu) / s
                log_norm = np.log(ndtr((1.0 - mu) / s) - ndtr(-mu / s))
                comp[:, :self.n] += -0.5 * z * z - np.log(s * math.sqrt(2 * math.pi)) - log_norm
            else:
                k = len(p.choices)
                idx = np.array([p.choices.index(pt[p.name]) for pt in pts])[:, None]
                hit = idx == self.centres[p.name][None, :]
                comp[:, :self.n] += np.log(np.where(hit, 1.0 - self.eps + self.eps / k, self.eps / k))
                comp[:, self.n] += -math.log(k)
        a = comp + self.log_w[None, :]
        top = a.max(axis=1, keepdims=True)
        return (top + np.log(np.exp(a - top).sum(axis=1, keepdims=True)))[:, 0]


def _neighbour_bandwidths(c: np.ndarray, scale: float) -> np.ndarray:
    """Kernel width per centre: the larger gap to its sorted neighbours (or the box edge)."""
    n = len(c)
    if n == 0:
        return np.empty(0)
    order = np.argsort(c, kind="stable")
    srt = np.concatenate([[0.0], c[order], [1.0]])
    gaps = np.maximum(srt[1:-1] - srt[:-2], srt[2:] - srt[1:-1])
    sig = np.empty(n)
    sig[order] = gaps
    return np.clip(scale * sig, 1.0 / min(100, n + 1), 1.0)


def _random_point(space: SearchSpace, rng) -> dict:
    pt = {}
    for p in space.params:
        if isinstance(p, FloatParam):
            pt[p.name] = p.from_unit(float(rng.random()))
        else:
            pt[p.name] = p.choices[int(rng.integers(len(p.choices)))]
    return pt


def _key(pt: dict, space: SearchSpace):
    return tuple(pt[p.name] for p in space.params)


def _ranked(history):
    """Trials from best to worst; invalid last; earlier trial wins ties."""
    return sorted(history, key=lambda t: (not t.valid, -(t.score if t.valid else 0.0), t.trial_index))


def _propose(space: SearchSpace, history: list, rng, seen: Optional[set]) -> dict:
    ranked = _ranked(history)
    n_good = max(1, math.ceil(space.gamma * len(ranked)))
    good = [t.params for t in ranked[:n_good]]
    bad = [t.params for t in ranked[n_good:]]
    l_est = _Parzen(space, good)
    g_est = _Parzen(space, bad)
    cands = l_est.sample(rng, space.n_candidates)
    if seen is not None:
        cands = [c for c in cands if _key(c, space) not in seen]
        if not cands:
            return None
    ratio = l_est.log_pdf(cands) - g_est.log_pdf(cands)
    return cands[int(np.argmax(ratio))]


def _enumerate(space: SearchSpace):
    axes = [(p.low,) if isinstance(p, FloatParam) else p.choices for p in space.params]
    for combo in itertools.product(*axes):
        yield {p.name: v for p, v in zip(space.params, combo)}


def _evaluate(objective, params):
    try:
        score = objective(dict(params))
    except EmptyClassError:
        return None
    if score is None:
        return None
    score = float(score)
    return score if np.isfinite(score) else None


def tune(objective: Callable[[dict], Optional[float]], space: SearchSpace,
         callback: Optional[Callable[[TrialRecord], Any]] = None) -> TuneResult:
    """Maximize ``objective`` over ``space`` within ``space.budget`` evaluations.

    The objective returns a score, or ``None`` (or raises
    :class:`~ggflex.quality.EmptyClassError`) for an invalid trial, which is
    recorded with no score and ranked below every valid one.  The best trial
    is the highest-scoring valid one, the earliest on ties.  Finite spaces are
    never evaluated twice at the same point.
    """
    if space.budget < 1:
        raise TuningError("budget must be at least 1")
    rng = np.random.default_rng(space.seed)
    finite = math.isfinite(space.cardinality)
    n_trials = min(space.budget, space.cardinality) if finite else space.budget
    seen = set() if finite else None
    history = []

    if finite and space.cardinality <= space.budget:
        points = list(_enumerate(space))
        if space.anchor is not None:
            a = _key(space.anchor, space)
            points.sort(key=lambda pt: _key(pt, space) != a)
        plan = iter(points)
    else:
        plan = None

    for t in range(int(n_trials)):
        if plan is not None:
            params = next(plan)
        elif t == 0 and space.anchor is not None:
            params = {p.name: space.anchor[p.name] for p in space.params}
        elif t < space.n_startup:
            params = _random_point(space, rng)
        else:
            params = _propose(space, history, rng, seen)
        if seen is not None:
            while params is None or _key(params, space) in seen:
                params = _random_point(space, rng)
            seen.add(_key(params, space))
        rec = TrialRecord(t, params, _evaluate(objective, params))
        history.append(rec)
        if callback is not None:
            callback(rec)

    valid = [r for r in history if r.valid]
    if not valid:
        raise TuningError(f"all {len(history)} trials were invalid")
    return TuneResult(_ranked(valid)[0], history)


def cv_objective(data, k_inner: int = 5, seed: int = 0, normalize: bool = True,
                 enable_filter: bool = True) -> Callable[[dict], Optional[float]]:
    """Objective ``params -> mean validation AUC`` over a fixed stratified split.

    ``params`` holds ``h_pos`` and ``h_neg``.  Every call uses the same folds.
    A trial whose filtering empties a class in any fold returns ``None``.
    """
    from .chipclass import predict_proba, train
    from .dataset import stratified_kfold
    from .metrics import auc

    plan = stratified_kfold(data, k_inner, seed)
    splits = [(data.subset(tr), data.subset(te)) for tr, te in plan.splits()]

    def objective(params: dict) -> Optional[float]:
        h = (float(params["h_pos"]), float(params["h_neg"]))
        scores = []
        for tr, te in splits:
            try:
                model = train(tr, h, enable_filter=enable_filter, normalize=normalize)
            except EmptyClassError:
                return None
            scores.append(auc(predict_proba(te.X, model), te.y))
        return float(np.mean(scores))

    return objective
