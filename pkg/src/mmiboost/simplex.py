"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves ``max c.x`` subject to row constraints ``a_i.x (>=|=|<=) b_i`` and
``x >= 0``.  Intended for the small, heavily degenerate programs produced
by ensemble reweighting, so it favours guaranteed termination over speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import DataError, LPIterationLimitError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

PIVOT_TOL = 1e-10
MAX_ITER = 10 ** 6

_REL_ALIASES = {">=": ">=", "≥": ">=", "=": "=", "==": "=", "<=": "<=", "≤": "<="}


@dataclass(frozen=True, eq=False)
class LinearProgram:
    objective: np.ndarray
    A: np.ndarray
    relations: Tuple[str, ...]
    rhs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=np.float64).ravel()
        A = np.asarray(self.A, dtype=np.float64)
        b = np.asarray(self.rhs, dtype=np.float64).ravel()
        if A.ndim != 2:
            A = A.reshape(len(b), c.shape[0])
        rel = tuple(self.relations)
        if A.shape != (b.shape[0], c.shape[0]) or len(rel) != b.shape[0]:
            raise DataError(
                f"inconsistent LP dimensions: A {A.shape}, c {c.shape}, b {b.shape}, "
                f"{len(rel)} relations"
            )
        try:
            rel = tuple(_REL_ALIASES[r] for r in rel)
        except KeyError as exc:
            raise DataError(f"unknown relation {exc.args[0]!r}") from None
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise DataError("LP data must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "relations", rel)

    @property
    def shape(self):
        return self.A.shape

    def dump(self) -> str:
        """Plain-text form: ``v r``, the objective row, then ``coeffs rel rhs``."""
        r, v = self.A.shape
        lines = [f"{v} {r}", " ".join(repr(float(x)) for x in self.objective)]
        for row, rel, rhs in zip(self.A, self.relations, self.rhs):
            lines.append(" ".join(repr(float(x)) for x in row) + f" {rel} {float(rhs)!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class LPSolution:
    status: str
    x: Optional[np.ndarray]
    objective_value: float
    iterations: int
    basis: Tuple[int, ...] = ()


class _Tableau:
    """Row ``k`` of ``M`` holds basic variable ``basis[k]``; the last row
    holds reduced costs with ``-z`` in the corner.

    ``orig``/``rhs`` keep the untransformed constraint data so the tableau
    can be rebuilt from the current basis, which bounds the round-off that
    long degenerate pivot sequences accumulate.
    """

    def __init__(self, orig, rhs, basis, max_iter, counter):
        r, ncols = orig.shape
        self.orig = orig
        self.rhs = rhs
        self.M = np.zeros((r + 1, ncols + 1))
        self.M[:r, :ncols] = orig
        self.M[:r, -1] = rhs
        self.basis = list(basis)
        self.c = np.zeros(ncols)
        self.max_iter = max_iter
        self.counter = counter

    def set_objective(self, c):
        self.c = np.zeros(self.orig.shape[1])
        self.c[: c.shape[0]] = c
        M = self.M
        M[-1, :-1] = self.c
        M[-1, -1] = 0.0
        for k, j in enumerate(self.basis):
            if M[-1, j] != 0.0:
                M[-1, :] -= M[-1, j] * M[k, :]

    def refactor(self):
        B = self.orig[:, self.basis]
        try:
            body = np.linalg.solve(B, np.hstack([self.orig, self.rhs[:, None]]))
        except np.linalg.LinAlgError:
            return
        if not np.all(np.isfinite(body)):
            return
        body[:, self.basis] = np.eye(len(self.basis))
        rhs = body[:, -1]
        rhs[(rhs < 0) & (rhs > -1e-9)] = 0.0
        self.M[:-1] = body
        self.set_objective(self.c)

    def drop(self, keep_rows, ncols):
        """Keep the given constraint rows and the first ``ncols`` columns."""
        rows = list(keep_rows) + [self.M.shape[0] - 1]
        self.M = np.ascontiguousarray(np.hstack([self.M[rows, :ncols], self.M[rows, -1:]]))
        self.orig = np.ascontiguousarray(self.orig[keep_rows][:, :ncols])
        self.rhs = self.rhs[keep_rows]
        self.basis = [self.basis[k] for k in keep_rows]
        self.c = self.c[:ncols]

    def pivot(self, r, e):
        kernels.pivot(self.M, r, e)
        rhs = self.M[:-1, -1]
        rhs[(rhs < 0) & (rhs > -1e-9)] = 0.0
        self.basis[r] = e

    def run(self, allowed: int, refactor_every: int = 500):
        """Iterate to optimality over columns ``< allowed``.

        Returns False when the program is unbounded.
        """
        since = 0
        while True:
            M = self.M
            d = M[-1, :allowed]
            cand = np.flatnonzero(d > PIVOT_TOL)
            if cand.size == 0:
                if since == 0:
                    return True
                # confirm optimality on a freshly rebuilt tableau
                self.refactor()
                since = 0
                continue
            e = int(cand[0])  # Bland: lowest index
            col = M[:-1, e]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return False
            ratios = np.maximum(M[rows, -1], 0.0) / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * (1.0 + best)]
            r = int(min(tied, key=lambda k: self.basis[k]))
            self.counter[0] += 1
            if self.counter[0] > self.max_iter:
                raise LPIterationLimitError(
                    f"simplex exceeded {self.max_iter} iterations"
                )
            self.pivot(r, e)
            since += 1
            if since % refactor_every == 0:
                self.refactor()


def solve_lp(lp: LinearProgram, max_iter: int = MAX_ITER) -> LPSolution:
    """Two-phase primal simplex; Bland's rule for both entering and leaving."""
    A, b, c = lp.A.copy(), lp.rhs.copy(), lp.objective
    r, v = A.shape
    rel = list(lp.relations)

    # standard form: one slack/surplus per inequality row, then rhs >= 0
    n_slack = sum(1 for s in rel if s != "=")
    S = np.zeros((r, n_slack))
    k = 0
    for i, s in enumerate(rel):
        if s == ">=":
            S[i, k] = -1.0
            k += 1
        elif s == "<=":
            S[i, k] = 1.0
            k += 1
    std = np.hstack([A, S])
    neg = b < 0
    std[neg] *= -1.0
    b[neg] *= -1.0
    n_std = v + n_slack

    # rows whose slack has coefficient +1 start with that slack in the basis
    basis = [-1] * r
    for j in range(v, n_std):
        i = int(np.flatnonzero(std[:, j])[0])
        if std[i, j] == 1.0:
            basis[i] = j
    art_rows = [i for i in range(r) if basis[i] < 0]
    n_art = len(art_rows)
    orig = np.zeros((r, n_std + n_art))
    orig[:, :n_std] = std
    for k, i in enumerate(art_rows):
        orig[i, n_std + k] = 1.0
        basis[i] = n_std + k

    counter = [0]
    tab = _Tableau(orig, b, basis, max_iter, counter)

    if n_art:
        c1 = np.zeros(n_std + n_art)
        c1[n_std:] = -1.0
        tab.set_objective(c1)
        tab.run(n_std + n_art)
        infeas = tab.M[-1, -1]  # corner holds -z = sum of artificials
        if infeas > 1e-9 * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LPSolution(INFEASIBLE, None, float("nan"), counter[0])
        # drive artificial variables out of the basis, dropping redundant rows
        keep = []
        for k in range(r):
            if tab.basis[k] < n_std:
                keep.append(k)
                continue
            row = tab.M[k, :n_std]
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > PIVOT_TOL:
                tab.pivot(k, j)
                keep.append(k)
        tab.drop(keep, n_std)

    c2 = np.zeros(n_std)
    c2[:v] = c
    tab.set_objective(c2)
    tab.refactor()
    if not tab.run(n_std):
        return LPSolution(UNBOUNDED, None, float("inf"), counter[0], tuple(tab.basis))

    xs = np.zeros(n_std)
    xs[tab.basis] = np.maximum(tab.M[:-1, -1], 0.0)
    x = xs[:v]
    return LPSolution(OPTIMAL, x, float(c @ x), counter[0], tuple(tab.basis))


def make_lp(c: Sequence[float], A, relations: Sequence[str], b) -> LinearProgram:
    return LinearProgram(np.asarray(c, float), np.asarray(A, float), tuple(relations),
                         np.asarray(b, float))
