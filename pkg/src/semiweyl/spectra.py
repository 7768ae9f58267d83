"""Exact spectral side: counting, eigenvalues, Riesz means, smoothed densities."""

from dataclasses import dataclass, field as dc_field
import math

import numpy as np

from .kernels import bisect_eigenvalues, sturm_counts

ZERO_BAND = 1e-12


def _tridiagonal(T):
    """(d, e2) from a FormOperator1D, a (d, e) pair or a dense tridiagonal matrix."""
    if hasattr(T, "real_tridiagonal"):
        d, e = T.real_tridiagonal()
        return np.asarray(d, float), np.asarray(e, float) ** 2
    if isinstance(T, tuple):
        d, e = T
        return np.asarray(d, float), np.abs(np.asarray(e)) ** 2
    M = np.asarray(T)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square tridiagonal matrix")
    if np.any(np.triu(M, 2)) or np.any(np.tril(M, -2)):
        raise ValueError("matrix is not tridiagonal")
    return np.real(np.diag(M)).astype(float), np.abs(np.diag(M, 1)) ** 2


def sturm_count_below(T, E, zero_band=ZERO_BAND):
    """Number of eigenvalues <= E (eigenvalues within ``zero_band`` of E count).

    Parameters
    ----------
    T : FormOperator1D, (d, e) tuple or dense tridiagonal matrix
    E : float
    """
    d, e2 = _tridiagonal(T)
    return int(sturm_counts(d, e2, [E + zero_band])[0])


def count_many(T, energies, zero_band=ZERO_BAND):
    d, e2 = _tridiagonal(T)
    return sturm_counts(d, e2, np.asarray(energies, float) + zero_band)


def eigenvalues_below(T, E, tol=1e-12, zero_band=ZERO_BAND):
    """All eigenvalues <= E, ascending, refined by bisection to ``tol``."""
    d, e2 = _tridiagonal(T)
    k = int(sturm_counts(d, e2, [E + zero_band])[0])
    return bisect_eigenvalues(d, e2, np.arange(k), tol)


def riesz_mean(eigs, gamma):
    """sum over e <= 0 of (-e)^gamma, gamma in (0, 1]."""
    if not (0.0 < gamma <= 1.0):
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    e = np.asarray(eigs, float)
    neg = -e[e <= 0.0]
    return float(np.sum(neg**gamma))


@dataclass
class SpectralSample:
    """Spectral data of one operator at one hbar."""

    hbar: float
    eigenvalues_below: np.ndarray
    riesz: dict = dc_field(default_factory=dict)

    @property
    def count(self):
        return int(np.sum(self.eigenvalues_below <= ZERO_BAND))

    @classmethod
    def from_eigenvalues(cls, hbar, eigs, gammas=(0.5, 1.0)):
        eigs = np.sort(np.asarray(eigs, float))
        s = cls(hbar, eigs)
        s.riesz[0.0] = float(s.count)
        for g in gammas:
            s.riesz[float(g)] = riesz_mean(eigs, g)
        return s


@dataclass
class CountingFunction:
    """Samples (E, N(E)) of the eigenvalue counting function at one hbar."""

    hbar: float
    energies: np.ndarray
    counts: np.ndarray
    eigenvalues: np.ndarray = None

    @classmethod
    def from_operator(cls, T, energies, hbar, with_eigenvalues_up_to=None):
        energies = np.sort(np.asarray(energies, float))
        counts = count_many(T, energies)
        eigs = None
        if with_eigenvalues_up_to is not None:
            eigs = eigenvalues_below(T, with_eigenvalues_up_to)
        return cls(hbar, energies, counts, eigs)

    @classmethod
    def from_eigenvalues(cls, eigs, energies, hbar):
        eigs = np.sort(np.asarray(eigs, float))
        energies = np.sort(np.asarray(energies, float))
        counts = np.searchsorted(eigs, energies + ZERO_BAND, side="right")
        return cls(hbar, energies, counts, eigs)

    def is_monotone(self):
        return bool(np.all(np.diff(self.counts) >= 0))

    def __call__(self, E):
        if self.eigenvalues is None:
            raise ValueError("counting function has no eigenvalue list")
        return np.searchsorted(self.eigenvalues, np.asarray(E) + ZERO_BAND, side="right")


def riesz_from_counting(counting, gamma):
    """gamma * int_{-inf}^0 (-s)^{gamma-1} N(s) ds over the sampled step function.

    Samples are read as left endpoints of constant pieces; the last piece ends
    at 0.  Exact when every jump below 0 is a sample point.
    """
    E = np.asarray(counting.energies, float)
    N = np.asarray(counting.counts, float)
    keep = E <= 0.0
    E, N = E[keep], N[keep]
    right = np.append(E[1:], 0.0)
    return float(np.sum(N * ((-E) ** gamma - (-right) ** gamma)))


# ----------------------------------------------------------- smoothing


def _bump(u):
    u = np.asarray(u, float)
    out = np.zeros(u.shape)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


class SmoothingKernel:
    """chi = psi * psi / ||psi||^2, supported in (-T0, T0), chi(0) = 1.

    ``hat(s)`` is chi-hat_hbar(s) = (1/(2 pi hbar)) int chi(t) e^{i t s / hbar} dt,
    non-negative because it equals |psi-hat|^2 up to a positive factor.
    """

    def __init__(self, hbar, T0=1.0, nodes=2048):
        self.hbar, self.T0 = float(hbar), float(T0)
        g, w = np.polynomial.legendre.leggauss(64)
        panels = max(1, nodes // 64)
        edges = np.linspace(0.0, self.T0, panels + 1)
        half = 0.5 * np.diff(edges)
        self.t = (0.5 * (edges[1:] + edges[:-1])[:, None] + half[:, None] * g[None, :]).ravel()
        self.wt = (half[:, None] * w[None, :]).ravel()
        self.chi_t = self.chi(self.t)

    def psi(self, t):
        return _bump(2.0 * np.asarray(t, float) / self.T0)

    def chi(self, t):
        t = np.atleast_1d(np.asarray(t, float))
        g, w = np.polynomial.legendre.leggauss(128)
        a = self.T0 / 2
        norm = float(np.sum(a * w * self.psi(a * g) ** 2))
        out = np.zeros(t.shape)
        for i, ti in enumerate(np.abs(t).ravel()):
            lo, hi = ti - a, a
            if lo >= hi:
                continue
            tau = 0.5 * (hi + lo) + 0.5 * (hi - lo) * g
            out.ravel()[i] = 0.5 * (hi - lo) * np.sum(w * self.psi(tau) * self.psi(ti - tau))
        return out / norm

    def hat1(self, u):
        """chi-hat at hbar = 1."""
        u = np.asarray(u, float)
        flat = u.ravel()
        out = np.empty(flat.size)
        wc = self.wt * self.chi_t / math.pi
        for s in range(0, flat.size, 1024):
            out[s : s + 1024] = np.cos(np.outer(flat[s : s + 1024], self.t)) @ wc
        return out.reshape(u.shape)

    def hat(self, s):
        return self.hat1(np.asarray(s, float) / self.hbar) / self.hbar

    def cdf1(self, u):
        """int_{-inf}^u chi-hat_1 = 1/2 + (1/pi) int_0^T0 chi(t) sin(t u)/t dt."""
        u = np.asarray(u, float)
        flat = u.ravel()
        out = np.empty(flat.size)
        wc = self.wt * self.chi_t / (math.pi * self.t)
        for s in range(0, flat.size, 1024):
            out[s : s + 1024] = 0.5 + np.sin(np.outer(flat[s : s + 1024], self.t)) @ wc
        return out.reshape(u.shape)


def smoothed_counting_density(eigs, kernel, s, weight=None):
    """sum_j f(e_j) chi-hat_hbar(s - e_j)."""
    e = np.asarray(eigs, float)
    f = np.ones_like(e) if weight is None else np.asarray(weight(e), float)
    keep = f != 0
    e, f = e[keep], f[keep]
    s = np.atleast_1d(np.asarray(s, float))
    if e.size == 0:
        return np.zeros(s.shape)
    out = np.array([np.sum(f * kernel.hat(si - e)) for si in s.ravel()])
    return out.reshape(s.shape)


def smoothed_counting(eigs, kernel, E=0.0):
    """(N * chi-hat_hbar)(E) = sum_j Phi((E - e_j)/hbar)."""
    e = np.asarray(eigs, float)
    return float(np.sum(kernel.cdf1((E - e) / kernel.hbar)))


def tauberian_gap(counting, kernel, E=0.0):
    """|N(E) - (N * chi-hat_hbar)(E)|.

    ``counting`` must carry the eigenvalue list up to well above E (the
    kernel tail beyond the list is neglected).
    """
    eigs = counting.eigenvalues if isinstance(counting, CountingFunction) else np.asarray(counting)
    if eigs is None:
        raise ValueError("tauberian_gap needs the eigenvalues")
    N = int(np.sum(np.asarray(eigs) <= E + ZERO_BAND))
    return abs(N - smoothed_counting(eigs, kernel, E))
