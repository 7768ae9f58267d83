"""Hot loops with a compiled and a pure-numpy implementation.

Each public function dispatches on :func:`semiweyl._accel.use_numba` at call
time, so setting ``SEMIWEYL_NUMBA=0`` switches the whole package onto the
numpy path without re-importing anything.
"""

import numpy as np

from ._accel import njit, use_numba

# ---------------------------------------------------------------- Sturm counts


def pivot_floor(e2):
    """Smallest admissible |pivot| for the LDL^T recurrence."""
    scale = 1.0
    if e2.size:
        scale = max(1.0, float(np.max(e2)))
    return np.finfo(float).tiny * scale * 1e4


@njit(cache=True)
def _sturm_counts_nb(d, e2, energies, pivmin):
    n = d.shape[0]
    out = np.empty(energies.shape[0], dtype=np.int64)
    for k in range(energies.shape[0]):
        E = energies[k]
        c = 0
        q = d[0] - E
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            c += 1
        for i in range(1, n):
            q = d[i] - E - e2[i - 1] / q
            if abs(q) < pivmin:
                q = -pivmin
            if q < 0.0:
                c += 1
        out[k] = c
    return out


def _sturm_counts_np(d, e2, energies, pivmin):
    q = d[0] - energies
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    c = (q < 0).astype(np.int64)
    for i in range(1, d.shape[0]):
        q = d[i] - energies - e2[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        c += q < 0
    return c


def sturm_counts(d, e2, energies):
    """Number of eigenvalues ``<= E`` of a symmetric tridiagonal matrix.

    Parameters
    ----------
    d : ndarray, shape (n,)
        Diagonal.
    e2 : ndarray, shape (n-1,)
        Squared off-diagonal entries.
    energies : array_like
        Thresholds.

    Returns
    -------
    ndarray of int64
    """
    d = np.ascontiguousarray(d, dtype=float)
    e2 = np.ascontiguousarray(e2, dtype=float)
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    if d.size == 0:
        return np.zeros(energies.shape, dtype=np.int64)
    pivmin = pivot_floor(e2)
    if use_numba():
        return _sturm_counts_nb(d, e2, np.ascontiguousarray(energies), pivmin)
    return _sturm_counts_np(d, e2, energies, pivmin)


# ------------------------------------------------------------------ bisection


@njit(cache=True)
def _bisect_nb(d, e2, indices, lo, hi, tol, pivmin):
    # all brackets advance together so the row recurrence is interleaved
    # across indices instead of forming one long division chain
    n = d.shape[0]
    m = indices.shape[0]
    a = np.full(m, lo)
    b = np.full(m, hi)
    mid = np.empty(m)
    q = np.empty(m)
    c = np.zeros(m, dtype=np.int64)
    active = np.ones(m, dtype=np.bool_)
    while True:
        any_active = False
        for t in range(m):
            if active[t]:
                if b[t] - a[t] <= tol * max(1.0, abs(a[t]) + abs(b[t])):
                    active[t] = False
                else:
                    mid[t] = 0.5 * (a[t] + b[t])
                    if mid[t] == a[t] or mid[t] == b[t]:
                        active[t] = False
            if active[t]:
                any_active = True
        if not any_active:
            break
        for t in range(m):
            q[t] = d[0] - mid[t]
            if abs(q[t]) < pivmin:
                q[t] = -pivmin
            c[t] = 1 if q[t] < 0.0 else 0
        for i in range(1, n):
            di = d[i]
            ei = e2[i - 1]
            for t in range(m):
                v = di - mid[t] - ei / q[t]
                if abs(v) < pivmin:
                    v = -pivmin
                q[t] = v
                if v < 0.0:
                    c[t] += 1
        for t in range(m):
            if active[t]:
                if c[t] >= indices[t] + 1:
                    b[t] = mid[t]
                else:
                    a[t] = mid[t]
    return 0.5 * (a + b)


def _bisect_np(d, e2, indices, lo, hi, tol, pivmin):
    a = np.full(indices.shape, lo, dtype=float)
    b = np.full(indices.shape, hi, dtype=float)
    while True:
        width = b - a
        active = width > tol * np.maximum(1.0, np.abs(a) + np.abs(b))
        if not active.any():
            break
        mid = 0.5 * (a + b)
        active &= (mid != a) & (mid != b)
        if not active.any():
            break
        c = _sturm_counts_np(d, e2, mid, pivmin)
        go_left = c >= indices + 1
        b = np.where(active & go_left, mid, b)
        a = np.where(active & ~go_left, mid, a)
    return 0.5 * (a + b)


def gershgorin(d, e2):
    e = np.sqrt(e2)
    r = np.zeros_like(d)
    r[:-1] += e
    r[1:] += e
    return float(np.min(d - r)), float(np.max(d + r))


def bisect_eigenvalues(d, e2, indices, tol=1e-12):
    """Eigenvalues with the given 0-based ascending indices, by bisection."""
    d = np.ascontiguousarray(d, dtype=float)
    e2 = np.ascontiguousarray(e2, dtype=float)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    if indices.size == 0:
        return np.empty(0)
    lo, hi = gershgorin(d, e2)
    span = max(hi - lo, 1.0)
    lo -= 1e-9 * span
    hi += 1e-9 * span
    pivmin = pivot_floor(e2)
    if use_numba():
        return _bisect_nb(d, e2, indices, lo, hi, tol, pivmin)
    return _bisect_np(d, e2, indices, lo, hi, tol, pivmin)


# ---------------------------------------------------------------- trig series


@njit(cache=True)
def _trig_eval_nb(freqs, acos, bsin, x, order):
    out = np.zeros(x.shape[0])
    shift = 0.5 * np.pi * order
    for m in range(freqs.shape[0]):
        w = freqs[m]
        s = w**order
        am = acos[m] * s
        bm = bsin[m] * s
        if am == 0.0 and bm == 0.0:
            continue
        for i in range(x.shape[0]):
            ph = w * x[i] + shift
            out[i] += am * np.cos(ph) + bm * np.sin(ph)
    return out


def _trig_eval_np(freqs, acos, bsin, x, order, chunk=2048):
    out = np.zeros(x.shape[0])
    scale = freqs**order
    am = acos * scale
    bm = bsin * scale
    shift = 0.5 * np.pi * order
    for start in range(0, x.shape[0], chunk):
        ph = np.outer(x[start : start + chunk], freqs) + shift
        out[start : start + chunk] = np.cos(ph) @ am + np.sin(ph) @ bm
    return out


def trig_eval(freqs, acos, bsin, x, order=0):
    """Evaluate the ``order``-th derivative of sum a cos(w x) + b sin(w x)."""
    x = np.asarray(x, dtype=float)
    shape = x.shape
    flat = np.ascontiguousarray(x.ravel())
    freqs = np.ascontiguousarray(freqs, dtype=float)
    acos = np.ascontiguousarray(acos, dtype=float)
    bsin = np.ascontiguousarray(bsin, dtype=float)
    if use_numba():
        out = _trig_eval_nb(freqs, acos, bsin, flat, int(order))
    else:
        out = _trig_eval_np(freqs, acos, bsin, flat, int(order))
    return out.reshape(shape)


# ---------------------------------------------------------------- Weyl gather

ROW_LEFT, ROW_RIGHT, ROW_MID = 0, 1, 2


@njit(cache=True)
def _gather_nb(G, mode):
    n = G.shape[1]
    M = np.empty((n, n), dtype=np.complex128)
    for j in range(n):
        for l in range(n):
            if mode == 0:
                r = j
            elif mode == 1:
                r = l
            else:
                r = j + l
            M[j, l] = G[r, (j - l) % n] / n
    return M


def _gather_np(G, mode):
    n = G.shape[1]
    j = np.arange(n)[:, None]
    l = np.arange(n)[None, :]
    if mode == ROW_LEFT:
        r = np.broadcast_to(j, (n, n))
    elif mode == ROW_RIGHT:
        r = np.broadcast_to(l, (n, n))
    else:
        r = j + l
    return G[r, (j - l) % n] / n


def weyl_gather(G, mode):
    """Assemble M[j, l] = G[row(j, l), (j - l) mod n] / n.

    ``row`` is ``j`` (left quantization), ``l`` (right) or ``j + l``
    (midpoint rows sampled on the half-step grid).
    """
    G = np.ascontiguousarray(G, dtype=np.complex128)
    if use_numba():
        return _gather_nb(G, int(mode))
    return _gather_np(G, int(mode))
