"""Margins of a voting classifier and the margin-based generalization bounds.

Implemented bounds (big-O constants fixed at 1 where the original result
only states an order):

* Freund-Schapire:  train_error + sqrt(T d / n)
* Schapire et al.:  P[m <= theta] + sqrt((ln n ln|H| / theta^2 + ln(1/delta)) / n)
* equilibrium-margin bound:
      ln|H| / n + min_q KL^-1(q; u(theta_hat(q)))
  with q on {0, 1/n, ..., 1} and
      u(theta) = (8 ln|H| / theta^2 * ln(2 n^2 / ln|H|) + ln|H| + ln(1/delta)) / n
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .boosting import Ensemble
from .dataset import Dataset
from .errors import DataError, NumericalError

KL_CAP = 1.0 - 1e-12
DEFAULT_DELTA = 0.05
DOMINANCE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MarginProfile:
    margins: np.ndarray

    def __post_init__(self):
        m = np.array(self.margins, dtype=np.float64, copy=True).ravel()
        if np.any(np.abs(m) > 1.0 + 1e-12):
            raise DataError("margins must lie in [-1, 1]")
        m.setflags(write=False)
        object.__setattr__(self, "margins", m)

    @property
    def n(self) -> int:
        return self.margins.shape[0]

    def fraction_at_most(self, theta) -> np.ndarray:
        """Empirical ``P[m <= theta]``, vectorized over ``theta``."""
        s = np.sort(self.margins)
        return np.searchsorted(s, theta, side="right") / self.n


def margins(e: Ensemble, ds: Dataset) -> MarginProfile:
    """``m_i = y_i * sum_t w_t h_t(x_i)`` with the normalized weights."""
    if ds.p == 0 or ds.features.shape[1] <= max(f for t in e.trees for f in t.features):
        raise DataError(
            f"dataset has {ds.p} features, fewer than the ensemble's trees reference"
        )
    return margins_from_matrix(e.prediction_matrix(ds.features), ds.labels, e.weights)


def margins_from_matrix(H: np.ndarray, y: np.ndarray, weights: np.ndarray) -> MarginProfile:
    m = y.astype(np.float64) * (H.astype(np.float64) @ np.asarray(weights, dtype=np.float64))
    return MarginProfile(np.clip(m, -1.0, 1.0))


def cmd(profile: MarginProfile) -> List[Tuple[float, float]]:
    """Cumulative margin distribution as (theta, P[m <= theta]) steps."""
    if profile.n == 0:
        raise DataError("empty margin profile")
    values, counts = np.unique(profile.margins, return_counts=True)
    frac = np.cumsum(counts) / profile.n
    frac[-1] = 1.0
    return [(float(v), float(f)) for v, f in zip(values, frac)]


@dataclass(frozen=True)
class MarginStats:
    min: float
    mean: float
    median: float
    q1: float
    q3: float
    max: float


def margin_stats(profile: MarginProfile) -> MarginStats:
    m = profile.margins
    if m.size == 0:
        raise DataError("empty margin profile")
    q1, med, q3 = np.quantile(m, [0.25, 0.5, 0.75])
    return MarginStats(float(m.min()), float(m.mean()), float(np.median(m)),
                       float(q1), float(q3), float(m.max()))


# ---------------------------------------------------------------------------
# Bernoulli KL


def _xlogy_ratio(a, b):
    # a * ln(a / b) with 0 ln 0 = 0
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a * (np.log(a) - np.log(b))
    return np.where(a == 0.0, 0.0, out)


def kl_bernoulli(q, p):
    """``q ln(q/p) + (1-q) ln((1-q)/(1-p))``; works elementwise on arrays."""
    q = np.asarray(q, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if np.any((q < 0) | (q > 1)):
        raise DataError("q must lie in [0, 1]")
    if np.any((p <= 0) | (p >= 1)):
        raise DataError("p must lie strictly between 0 and 1")
    val = _xlogy_ratio(q, p) + _xlogy_ratio(1.0 - q, 1.0 - p)
    val = np.maximum(val, 0.0)
    return float(val) if val.ndim == 0 else val


def kl_inverse(q, u, max_iter: int = 200):
    """Largest-branch inverse: the ``p`` in ``[q, 1)`` with ``kl(q, p) = u``.

    Bisection on ``[q, 1 - 1e-12]``; values beyond the cap return the cap.
    Vectorized over broadcastable ``q`` and ``u``.
    """
    q, u = np.broadcast_arrays(np.asarray(q, dtype=np.float64),
                               np.asarray(u, dtype=np.float64))
    if np.any((q < 0) | (q > 1)):
        raise DataError("q must lie in [0, 1]")
    if np.any(u < 0):
        raise DataError("u must be non-negative")
    scalar = q.ndim == 0
    q = np.atleast_1d(q).astype(np.float64)
    u = np.atleast_1d(u).astype(np.float64)
    qc = np.minimum(q, KL_CAP)
    lo = qc.copy()
    hi = np.full_like(q, KL_CAP)
    at_cap = kl_bernoulli(qc, hi) <= u
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        # stop once the bracket can no longer shrink in floating point
        if np.all((mid <= lo) | (mid >= hi)):
            break
        above = kl_bernoulli(qc, mid) > u
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    res = np.where(u == 0, qc, 0.5 * (lo + hi))
    res = np.where(at_cap, KL_CAP, res)
    return float(res[0]) if scalar else res


# ---------------------------------------------------------------------------
# equilibrium margin


def theta_hat(profile: MarginProfile, q: float, ln_H: float,
              extra_candidates: Sequence[float] = ()) -> Optional[float]:
    """Largest candidate theta in ``(sqrt(8/|H|), 1]`` with ``P[m <= theta] <= q``.

    Candidates are the distinct margin values, the point 1, and any
    ``extra_candidates``.  Returns None when none qualifies.
    """
    lower = math.sqrt(8.0) * math.exp(-0.5 * ln_H)
    cand = np.unique(np.concatenate([profile.margins, [1.0], np.asarray(extra_candidates, float)]))
    cand = cand[(cand > lower) & (cand <= 1.0)]
    if cand.size == 0:
        return None
    ok = cand[profile.fraction_at_most(cand) <= q + 1e-12]
    return float(ok.max()) if ok.size else None


def _theta_hat_grid(profile: MarginProfile, qs: np.ndarray, ln_H: float) -> np.ndarray:
    # theta_hat for every q at once; NaN where absent
    lower = math.sqrt(8.0) * math.exp(-0.5 * ln_H)
    cand = np.unique(np.concatenate([profile.margins, [1.0]]))
    cand = cand[(cand > lower) & (cand <= 1.0)]
    out = np.full(qs.shape, np.nan)
    if cand.size == 0:
        return out
    frac = profile.fraction_at_most(cand)  # nondecreasing in cand
    k = np.searchsorted(frac, qs + 1e-12, side="right")  # number of qualifying candidates
    has = k > 0
    out[has] = cand[k[has] - 1]
    return out


def u_term(theta: np.ndarray, ln_H: float, n: int, delta: float) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    return (8.0 * ln_H / theta ** 2 * math.log(2.0 * n * n / ln_H)
            + ln_H + math.log(1.0 / delta)) / n


@dataclass(frozen=True)
class EMarginResult:
    q_star: float
    theta_star: float
    bound_value: float
    per_q_table: List[Tuple[float, float, float, float]] = field(repr=False)

    def as_block(self, prefix: str = "") -> str:
        return (f"{prefix}emargin={self.theta_star!r}\n"
                f"{prefix}emargin_error={self.q_star!r}\n"
                f"{prefix}emargin_bound={self.bound_value!r}\n")


def emargin_bound(profile: MarginProfile, ln_H: float, n: int,
                  delta: float = DEFAULT_DELTA) -> EMarginResult:
    """Minimise the equilibrium-margin bound over ``q = 0, 1/n, ..., 1``.

    ``q_star`` is the minimiser (smallest on ties) and ``theta_star`` is
    ``theta_hat(q_star)``, the EMargin.
    """
    if not 0.0 < delta < 1.0:
        raise DataError("delta must lie in (0, 1)")
    if n < 1:
        raise DataError("n must be positive")
    if ln_H <= math.log(8.0):
        raise DataError("ln|H| must exceed ln 8")
    qs = np.arange(n + 1) / n
    th = _theta_hat_grid(profile, qs, ln_H)
    keep = ~np.isnan(th)
    if not np.any(keep):
        raise NumericalError("margins below resolution limit: no q admits a theta_hat")
    qs, th = qs[keep], th[keep]
    u = u_term(th, ln_H, n, delta)
    kinv = kl_inverse(qs, u)
    best = int(np.argmin(kinv))
    table = [(float(a), float(b), float(c), float(d)) for a, b, c, d in zip(qs, th, u, kinv)]
    return EMarginResult(q_star=float(qs[best]), theta_star=float(th[best]),
                         bound_value=ln_H / n + float(kinv[best]), per_q_table=table)


# ---------------------------------------------------------------------------
# VC-type bounds


def schapire_bound(profile: MarginProfile, ln_H: float, n: int, delta: float,
                   thetas: Sequence[float]) -> List[Tuple[float, float, float, float]]:
    """(theta, empirical, capacity, total) for each theta."""
    if not 0.0 < delta < 1.0:
        raise DataError("delta must lie in (0, 1)")
    thetas = np.asarray(thetas, dtype=np.float64)
    if np.any(thetas <= 0):
        raise DataError("theta must be positive")
    emp = profile.fraction_at_most(thetas)
    cap = np.sqrt((math.log(n) * ln_H / thetas ** 2 + math.log(1.0 / delta)) / n)
    return [(float(t), float(e), float(c), float(e + c)) for t, e, c in zip(thetas, emp, cap)]


def freund_schapire_bound(train_error: float, T: int, d: float, n: int) -> float:
    if T < 1:
        raise DataError("T must be at least 1")
    if d <= 0 or n <= 0:
        raise DataError("d and n must be positive")
    if not 0.0 <= train_error <= 1.0:
        raise DataError("train_error must lie in [0, 1]")
    return train_error + math.sqrt(T * d / n)


@dataclass(frozen=True)
class BoundReport:
    schapire_curve: List[Tuple[float, float, float, float]]
    freund_schapire: float
    emargin: Optional[EMarginResult]
    delta: float


def bound_report(profile: MarginProfile, ln_H: float, train_error: float, T: int,
                 delta: float = DEFAULT_DELTA, thetas: Optional[Sequence[float]] = None
                 ) -> BoundReport:
    """All three bounds for one ensemble.

    The VC dimension in the Freund-Schapire term is taken as ``log2 |H|``,
    the finite-class bound.
    """
    n = profile.n
    if thetas is None:
        thetas = np.linspace(0.01, 1.0, 100)
    try:
        em = emargin_bound(profile, ln_H, n, delta)
    except NumericalError:
        em = None
    return BoundReport(
        schapire_curve=schapire_bound(profile, ln_H, n, delta, thetas),
        freund_schapire=freund_schapire_bound(train_error, T, ln_H / math.log(2.0), n),
        emargin=em,
        delta=delta,
    )


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dominance:
    min_improvement: float
    avg_improvement: float
    dominates: bool


def compare_profiles(a: MarginProfile, b: MarginProfile) -> Dominance:
    """Improvement of ``b`` over ``a``, observation by observation."""
    if a.n != b.n:
        raise DataError(f"profiles differ in length ({a.n} vs {b.n})")
    if a.n == 0:
        raise DataError("empty margin profiles")
    diff = b.margins - a.margins
    return Dominance(float(diff.min()), float(diff.mean()),
                     bool(np.all(diff >= -DOMINANCE_TOL)))
