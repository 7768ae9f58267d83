"""Log-log slope fits and deterministic reductions."""

import numpy as np


def fit_slope(x, y):
    """Least-squares slope of log|y| against log x.

    Returns ``nan`` when fewer than two positive samples are available.
    """
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def fit_power(x, y):
    """(slope, prefactor) of y ~ C x^slope."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    s, c = np.polyfit(np.log(x), np.log(y), 1)
    return float(s), float(np.exp(c))


def pairwise_sum(items):
    """Sum a sequence by a balanced binary tree (order independent of threads)."""
    items = list(items)
    if not items:
        return 0.0
    while len(items) > 1:
        nxt = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]
