"""Fixed-depth decision trees over a shared per-feature threshold grid.

Every internal node splits on ``x[feature] <= grid[threshold]`` and every
tree of a given depth has exactly ``2**depth`` leaves, so the weak learners
of one experiment all have the same complexity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np

from . import kernels
from .dataset import Dataset
from .errors import DataError


@dataclass(frozen=True)
class ThresholdGrid:
    """``m`` thresholds at the bin midpoints ``(j - 0.5) / m``, j = 1..m."""

    m: int = 100

    def __post_init__(self):
        if self.m < 1:
            raise DataError("the grid needs at least one threshold")
        if self.m > np.iinfo(np.uint16).max - 1:
            raise DataError(f"grid size {self.m} too large")

    @cached_property
    def values(self) -> np.ndarray:
        v = (np.arange(1, self.m + 1) - 0.5) / self.m
        v.setflags(write=False)
        return v

    def bin(self, X: np.ndarray) -> np.ndarray:
        """Number of thresholds strictly below each value (0..m)."""
        X = np.asarray(X, dtype=np.float64)
        return np.ascontiguousarray(
            np.searchsorted(self.values, X, side="left").astype(np.uint16)
        )


def build_grid(m: int = 100) -> ThresholdGrid:
    return ThresholdGrid(m)


@dataclass(frozen=True)
class DecisionTree:
    """A complete binary tree stored in heap order.

    Internal node ``i`` has children ``2i+1`` (left, taken when
    ``x[feature] <= threshold``) and ``2i+2``.  ``leaf_labels[k]`` is the
    label of the k-th leaf from the left.
    """

    depth: int
    features: Tuple[int, ...]
    thresholds: Tuple[int, ...]
    leaf_labels: Tuple[int, ...]
    grid: ThresholdGrid

    def __post_init__(self):
        internal = 2 ** self.depth - 1
        if self.depth < 1:
            raise DataError("tree depth must be at least 1")
        if len(self.features) != internal or len(self.thresholds) != internal:
            raise DataError(f"a depth-{self.depth} tree needs {internal} split records")
        if len(self.leaf_labels) != internal + 1:
            raise DataError(f"a depth-{self.depth} tree needs {internal + 1} leaves")
        if any(t < 0 or t >= self.grid.m for t in self.thresholds):
            raise DataError("threshold index outside the grid")
        if any(f < 0 for f in self.features):
            raise DataError("negative feature index")
        if any(v not in (-1, 1) for v in self.leaf_labels):
            raise DataError("leaf labels must be -1 or +1")

    @property
    def terminal_count(self) -> int:
        return 2 ** self.depth

    def _route(self, n, goes_left) -> np.ndarray:
        # goes_left(node) -> boolean array over the n rows
        node = np.zeros(n, dtype=np.intp)
        for _ in range(self.depth):
            left = goes_left(node)
            node = 2 * node + np.where(left, 1, 2)
        leaves = node - (2 ** self.depth - 1)
        return np.asarray(self.leaf_labels, dtype=np.int8)[leaves]

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Labels for the rows of ``X`` (values expected in [0, 1])."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        feats = np.asarray(self.features, dtype=np.intp)
        thr = self.grid.values[np.asarray(self.thresholds, dtype=np.intp)]
        rows = np.arange(X.shape[0])

        def goes_left(node):
            return X[rows, feats[node]] <= thr[node]

        return self._route(X.shape[0], goes_left)

    def predict_bins(self, B: np.ndarray) -> np.ndarray:
        """Same as :meth:`predict` on data already binned by ``grid.bin``."""
        feats = np.asarray(self.features, dtype=np.intp)
        thr = np.asarray(self.thresholds, dtype=np.intp)
        rows = np.arange(B.shape[0])

        def goes_left(node):
            return B[rows, feats[node]] <= thr[node]

        return self._route(B.shape[0], goes_left)

    def predict_one(self, x) -> int:
        x = np.asarray(x, dtype=np.float64)
        node = 0
        for _ in range(self.depth):
            left = x[self.features[node]] <= self.grid.values[self.thresholds[node]]
            node = 2 * node + (1 if left else 2)
        return int(self.leaf_labels[node - (2 ** self.depth - 1)])


def _label(pos: float, neg: float) -> int:
    return 1 if pos >= neg else -1


def train_tree_binned(bins: np.ndarray, y: np.ndarray, D: np.ndarray, depth: int,
                      grid: ThresholdGrid) -> DecisionTree:
    """Grow a depth-``depth`` tree greedily on pre-binned features.

    Each node takes the (feature, threshold) minimising the weighted error
    of its two majority-labelled children.  Pure or empty nodes are still
    split so the leaf count stays ``2**depth``; an empty child inherits its
    parent's label and leaf ties go to +1.
    """
    n = bins.shape[0]
    if n == 0:
        raise DataError("cannot train a tree on an empty dataset")
    if depth < 1:
        raise DataError("tree depth must be at least 1")
    D = np.ascontiguousarray(D, dtype=np.float64)
    wpos = np.where(y == 1, D, 0.0)
    wneg = np.where(y == -1, D, 0.0)
    m = grid.m

    # one entry per node of the current level: (sample index, inherited label)
    level = [(np.arange(n, dtype=np.intp), None)]
    features, thresholds, leaves = [], [], []
    for d in range(depth):
        nxt = []
        for idx, inherited in level:
            if idx.size == 0:
                features.append(0)
                thresholds.append(0)
                children = [(idx, inherited, None), (idx, inherited, None)]
            else:
                f, j, _, lp, ln, rp, rn = kernels.best_split(bins, wpos, wneg, idx, m)
                features.append(f)
                thresholds.append(j)
                here = _label(lp + rp, ln + rn)
                goes_left = bins[idx, f] <= j
                children = [(idx[goes_left], here, (lp, ln)), (idx[~goes_left], here, (rp, rn))]
            for cidx, lab, mass in children:
                if d == depth - 1:
                    leaves.append(lab if cidx.size == 0 else _label(*mass))
                else:
                    nxt.append((cidx, lab))
        level = nxt
    return DecisionTree(depth, tuple(features), tuple(thresholds), tuple(leaves), grid)


def train_tree(ds: Dataset, D, depth: int, grid: ThresholdGrid) -> DecisionTree:
    """Train a tree on a normalized dataset under sample weights ``D``."""
    if ds.n == 0:
        raise DataError("cannot train a tree on an empty dataset")
    D = np.asarray(D, dtype=np.float64)
    if D.shape != (ds.n,):
        raise DataError(f"weight vector has shape {D.shape}, expected ({ds.n},)")
    return train_tree_binned(grid.bin(ds.features), ds.labels, D, depth, grid)


def weighted_error(pred: np.ndarray, y: np.ndarray, D: np.ndarray) -> float:
    return float(np.sum(D[pred != y]))


def log_hypothesis_count(p: int, m: int, depth: int) -> float:
    """``ln |H|`` for stumps (2mp) and depth-2 trees ((2mp)^3)."""
    if depth == 1:
        return math.log(2 * m * p)
    if depth == 2:
        return 3 * math.log(2 * m * p)
    raise DataError(f"hypothesis-space size is only defined for depth 1 or 2, not {depth}")
