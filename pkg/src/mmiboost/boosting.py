"""AdaBoost and arc-gv over fixed-depth trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .dataset import Dataset, NormParams
from .errors import BoostingError, DataError
from .weak_learner import DecisionTree, ThresholdGrid, train_tree_binned

EPS_CLIP = 1e-12


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted vote of trees.

    ``raw_alphas`` are the weights as the training algorithm produced them;
    ``weights`` is the same vector normalized onto the simplex.
    """

    trees: Tuple[DecisionTree, ...]
    raw_alphas: np.ndarray
    weights: np.ndarray = None
    algorithm: str = "ADA"
    provenance: dict = field(default_factory=dict)
    normalization: Optional[NormParams] = None

    def __post_init__(self):
        trees = tuple(self.trees)
        raw = _frozen(self.raw_alphas)
        if not trees:
            raise DataError("an ensemble needs at least one tree")
        if raw.shape != (len(trees),):
            raise DataError(f"{len(trees)} trees but {raw.shape[0]} weights")
        if np.any(raw < 0) or not np.all(np.isfinite(raw)):
            raise DataError("ensemble weights must be finite and non-negative")
        if len({(t.depth, t.grid) for t in trees}) != 1:
            raise DataError("all trees of an ensemble must share depth and grid")
        if self.weights is None:
            total = raw.sum()
            if not total > 0:
                raise DataError("ensemble weights sum to zero")
            weights = raw / total
        else:
            weights = _frozen(self.weights)
            if weights.shape != raw.shape:
                raise DataError("weights and raw_alphas differ in length")
            if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
                raise DataError("normalized weights must lie on the simplex")
        object.__setattr__(self, "trees", trees)
        object.__setattr__(self, "raw_alphas", raw)
        object.__setattr__(self, "weights", _frozen(weights))
        object.__setattr__(self, "provenance", dict(self.provenance))

    @property
    def T(self) -> int:
        return len(self.trees)

    @property
    def depth(self) -> int:
        return self.trees[0].depth

    @property
    def grid(self) -> ThresholdGrid:
        return self.trees[0].grid

    def prediction_matrix(self, X: np.ndarray) -> np.ndarray:
        """``int8`` matrix of shape (n, T) with ``h_t(x_i)``."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        B = self.grid.bin(X)
        out = np.empty((X.shape[0], self.T), dtype=np.int8)
        for t, tree in enumerate(self.trees):
            out[:, t] = tree.predict_bins(B)
        return out

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return self.prediction_matrix(X) @ self.weights

    def predict(self, X: np.ndarray) -> np.ndarray:
        # sign(0) = +1
        return np.where(self.decision_function(X) < 0, -1, 1).astype(np.int8)

    def truncate(self, t: int) -> "Ensemble":
        """First ``t`` trees with their weights renormalized."""
        if not 1 <= t <= self.T:
            raise DataError(f"cannot truncate a {self.T}-tree ensemble to {t}")
        return Ensemble(self.trees[:t], self.raw_alphas[:t], algorithm=self.algorithm,
                        provenance={**self.provenance, "T": t},
                        normalization=self.normalization)

    def reweighted(self, weights, algorithm: str = "MMI") -> "Ensemble":
        w = np.clip(np.asarray(weights, dtype=np.float64), 0.0, None)
        return Ensemble(self.trees, w, algorithm=algorithm,
                        provenance={**self.provenance, "algorithm": algorithm},
                        normalization=self.normalization)


@dataclass(frozen=True)
class RoundLog:
    t: int
    eps: float
    gamma: float
    alpha: float
    rho: Optional[float]
    Z: float
    completed: bool = True


def predict_ensemble(e: Ensemble, x) -> int:
    return int(e.predict(np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


def error_rate(e: Ensemble, ds: Dataset) -> float:
    if ds.n == 0:
        raise DataError("error rate of an empty dataset is undefined")
    return float(np.mean(e.predict(ds.features) != ds.labels))


def _half_log_ratio(v: float) -> float:
    return 0.5 * math.log((1.0 + v) / (1.0 - v))


def arcgv_alpha(gamma: float, rho: float) -> float:
    """Arc-gv round weight ``max(0, atanh(gamma) - atanh(rho))``.

    Both arguments are clamped to ``[-1 + 1e-12, 1 - 1e-12]``.  The clamp
    matters in practice: after one imperfect round the minimum margin is
    exactly -1 and the unclamped weight would be infinite.
    """
    g = min(max(gamma, -1.0 + EPS_CLIP), 1.0 - EPS_CLIP)
    r = min(max(rho, -1.0 + EPS_CLIP), 1.0 - EPS_CLIP)
    return max(0.0, _half_log_ratio(g) - _half_log_ratio(r))


def _boost(train: Dataset, T: int, depth: int, grid: ThresholdGrid, arc: bool):
    if T < 1:
        raise DataError("T must be at least 1")
    if train.raw:
        raise DataError("boosting expects a dataset normalized to [0, 1]")
    if not train.has_both_classes():
        raise DataError("the training set must contain both classes")
    n = train.n
    y = train.labels.astype(np.float64)
    bins = grid.bin(train.features)
    D = np.full(n, 1.0 / n)
    trees: List[DecisionTree] = []
    alphas: List[float] = []
    logs: List[RoundLog] = []
    votes = np.zeros(n)  # y_i * sum_s alpha_s h_s(x_i)

    for t in range(1, T + 1):
        tree = train_tree_binned(bins, train.labels, D, depth, grid)
        h = tree.predict_bins(bins).astype(np.float64)
        miss = h != y
        eps = float(np.sum(D[miss]))
        gamma = float(np.dot(D, y * h))
        rho = None
        if arc:
            total = float(np.sum(alphas))
            rho = float(votes.min() / total) if total > 0 else 0.0
        if eps == 0.0 or eps >= 0.5:
            logs.append(RoundLog(t, eps, gamma, math.nan, rho, math.nan, completed=False))
            break
        eps_c = min(max(eps, EPS_CLIP), 1.0 - EPS_CLIP)
        if arc:
            alpha = arcgv_alpha(gamma, rho)
        else:
            alpha = 0.5 * math.log((1.0 - eps_c) / eps_c)
        w = D * np.exp(-alpha * y * h)
        Z = float(w.sum())
        D = w / Z
        trees.append(tree)
        alphas.append(alpha)
        votes += alpha * y * h
        logs.append(RoundLog(t, eps, gamma, alpha, rho, Z))

    if not trees:
        raise BoostingError(
            f"boosting stopped in round 1 (weighted error {logs[0].eps:.6g})", log=logs[0]
        )
    if not sum(alphas) > 0:
        raise BoostingError("every round received zero weight", log=logs[-1])
    algorithm = "ARCGV" if arc else "ADA"
    prov = {"dataset": train.name, "T": len(trees), "algorithm": algorithm,
            "n_features": train.p}
    return Ensemble(tuple(trees), np.array(alphas), algorithm=algorithm, provenance=prov), logs


def adaboost(train: Dataset, T: int, depth: int, grid: ThresholdGrid):
    """Run AdaBoost with weighted (not resampled) tree training.

    Stops early when a tree has weighted error 0 or at least 1/2; the
    returned ensemble keeps the completed rounds and the last log entry is
    flagged ``completed=False``.  Returns ``(ensemble, logs)``.
    """
    return _boost(train, T, depth, grid, arc=False)


def arcgv(train: Dataset, T: int, depth: int, grid: ThresholdGrid):
    """Breiman's arc-gv.

    The round weight is the AdaBoost weight written in terms of the edge,
    minus the same transform of the current minimum margin ``rho`` (taken
    from the normalized combination of the previous rounds, 0 in round 1),
    floored at 0.
    """
    return _boost(train, T, depth, grid, arc=True)


def write_round_log(logs: Sequence[RoundLog], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,eps,gamma,alpha,rho,Z\n")
        for r in logs:
            rho = "" if r.rho is None else repr(r.rho)
            fh.write(f"{r.t},{r.eps!r},{r.gamma!r},{r.alpha!r},{rho},{r.Z!r}\n")
