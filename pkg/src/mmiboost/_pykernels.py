"""Pure numpy implementations of the hot kernels.

Must stay arithmetically identical to ``_ckernels.pyx``: per-cell sums are
accumulated in sample order and left masses by a sequential running sum.
"""

import numpy as np


def best_split(bins, wpos, wneg, idx, m):
    """Best (feature, threshold) split of the samples ``idx``.

    ``bins[i, f]`` is the number of grid thresholds strictly below
    ``x[i, f]``; sample ``i`` goes left at threshold ``j`` iff
    ``bins[i, f] <= j``.  The score of a split is the weighted error of its
    two majority-labelled leaves.  Returns
    ``(feature, threshold, error, left_pos, left_neg, right_pos, right_neg)``;
    ties go to the lowest feature, then the lowest threshold.
    """
    p = bins.shape[1]
    width = m + 1
    sub = bins[idx].astype(np.intp)
    cells = (sub + np.arange(p, dtype=np.intp) * width).ravel()
    hp = np.bincount(cells, weights=np.repeat(wpos[idx], p), minlength=p * width)
    hn = np.bincount(cells, weights=np.repeat(wneg[idx], p), minlength=p * width)
    cp = np.cumsum(hp.reshape(p, width), axis=1)
    cn = np.cumsum(hn.reshape(p, width), axis=1)
    lp, ln = cp[:, :m], cn[:, :m]
    rp, rn = cp[:, m:] - lp, cn[:, m:] - ln
    err = np.minimum(lp, ln) + np.minimum(rp, rn)
    k = int(np.argmin(err))
    f, j = divmod(k, m)
    return (f, j, float(err[f, j]), float(lp[f, j]), float(ln[f, j]),
            float(rp[f, j]), float(rn[f, j]))


def pivot(M, r, e):
    """In-place Gauss-Jordan pivot of tableau ``M`` on element ``(r, e)``."""
    M[r, :] /= M[r, e]
    col = M[:, e].copy()
    col[r] = 0.0
    M -= np.outer(col, M[r, :])
    M[:, e] = 0.0
    M[r, e] = 1.0
