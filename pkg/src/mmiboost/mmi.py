"""Reweighting a frozen ensemble to maximise the minimum margin improvement.

Given predictions ``y_i h_t(x_i)`` and baseline margins ``m_i``, solve

    max xi  s.t.  sum_t a'_t y_i h_t(x_i) >= m_i + xi   (every i)
                  sum_t a'_t = 1,  a' >= 0,  xi >= 0

The original weights with ``xi = 0`` are always feasible, so every
training margin of the result is at least as large as before.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boosting import Ensemble
from .dataset import Dataset
from .errors import DataError, LPError
from .margins import MarginProfile, margins_from_matrix
from .simplex import OPTIMAL, LinearProgram, LPSolution, solve_lp

SUPPORT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class MMIResult:
    new_weights: np.ndarray
    xi_star: float
    support: np.ndarray
    new_margins: np.ndarray
    old_margins: np.ndarray
    solution: LPSolution

    @property
    def support_fraction(self) -> float:
        return self.support.size / self.new_weights.size

    def as_block(self) -> str:
        return (f"xi_star={self.xi_star!r}\n"
                f"support_count={self.support.size}\n"
                f"support_fraction={self.support_fraction!r}\n"
                f"min_improvement={float(np.min(self.new_margins - self.old_margins))!r}\n"
                f"avg_improvement={float(np.mean(self.new_margins - self.old_margins))!r}\n"
                f"lp_iterations={self.solution.iterations}\n")


def signed_predictions(H: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``y_i h_t(x_i)`` as an ``int8`` matrix."""
    return (H.astype(np.int8) * y.astype(np.int8)[:, None]).astype(np.int8)


def build_mmi_lp(prediction_matrix, baseline_margins) -> LinearProgram:
    """Variables ``(a'_1..a'_T, xi)``; objective ``xi``."""
    P = np.asarray(prediction_matrix, dtype=np.float64)
    m = np.asarray(baseline_margins, dtype=np.float64).ravel()
    if P.ndim != 2 or P.size == 0:
        raise DataError("empty prediction matrix")
    n, T = P.shape
    if m.shape[0] != n:
        raise DataError(f"{n} prediction rows but {m.shape[0]} baseline margins")
    if not np.all(np.abs(P) == 1.0):
        raise DataError("prediction entries must be -1 or +1")
    A = np.zeros((n + 1, T + 1))
    A[:n, :T] = P
    A[:n, T] = -1.0
    A[n, :T] = 1.0
    c = np.zeros(T + 1)
    c[T] = 1.0
    rel = (">=",) * n + ("=",)
    return LinearProgram(c, A, rel, np.concatenate([m, [1.0]]))


def support(weights, tol: float = SUPPORT_TOL) -> np.ndarray:
    if tol <= 0:
        raise DataError("support tolerance must be positive")
    return np.flatnonzero(np.asarray(weights) > tol)


def solve_mmi(P: np.ndarray, baseline: np.ndarray) -> MMIResult:
    """MMI on an explicit signed prediction matrix."""
    lp = build_mmi_lp(P, baseline)
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        # (original weights, xi = 0) is feasible and xi <= 2, so this is a solver fault
        raise LPError(f"MMI program reported {sol.status}; it must always be solvable")
    T = P.shape[1]
    w = np.clip(sol.x[:T], 0.0, None)
    w = w / w.sum()
    new = np.asarray(P, dtype=np.float64) @ w
    return MMIResult(w, float(sol.x[T]), support(w), new, np.asarray(baseline, float), sol)


def mmi_reweight(e: Ensemble, train: Dataset) -> MMIResult:
    """Reweight ``e`` on the data it was trained on."""
    H = e.prediction_matrix(train.features)
    P = signed_predictions(H, train.labels)
    old = margins_from_matrix(H, train.labels, e.weights).margins
    return solve_mmi(P, old)


def reweighted_ensemble(e: Ensemble, result: MMIResult) -> Ensemble:
    return e.reweighted(result.new_weights, algorithm="MMI")


def profiles(result: MMIResult):
    return MarginProfile(result.old_margins), MarginProfile(np.clip(result.new_margins, -1, 1))
