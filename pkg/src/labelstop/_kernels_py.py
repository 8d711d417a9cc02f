"""Pure numpy implementation of the hot kernels.

Mirrors ``_kernels.pyx`` operation for operation so both backends return
bit-identical results.
"""

import numpy as np


def best_stump(X, order, y, w):
    """Weighted 0-1 error minimising decision stump.

    ``X`` is ``(n, d)`` float64, ``order`` its column-wise stable argsort,
    ``y`` holds +1/-1 labels and ``w`` nonnegative example weights.
    Candidates are scanned by feature, then ascending midpoint threshold,
    then polarity +1 before -1; the first strict minimum wins.

    Returns ``(feature, threshold, polarity, error)`` with ``feature == -1``
    when no feature has two distinct values.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        return -1, 0.0, 1, np.inf
    xs = np.take_along_axis(X, order, axis=0)
    wp = np.where(y > 0, w, 0.0)[order]
    wn = np.where(y > 0, 0.0, w)[order]
    lp = np.cumsum(wp, axis=0)
    ln = np.cumsum(wn, axis=0)
    tp = lp[-1]
    tn = ln[-1]
    lp = lp[:-1]
    ln = ln[:-1]
    err = np.empty((d, n - 1, 2))
    err[:, :, 0] = (lp + (tn - ln)).T
    err[:, :, 1] = (ln + (tp - lp)).T
    valid = (xs[:-1] < xs[1:]).T
    err[~valid] = np.inf
    flat = int(np.argmin(err))
    best = float(err.flat[flat])
    if not np.isfinite(best):
        return -1, 0.0, 1, np.inf
    f, j, p = np.unravel_index(flat, err.shape)
    thr = 0.5 * (xs[j, f] + xs[j + 1, f])
    return int(f), float(thr), 1 if p == 0 else -1, best
