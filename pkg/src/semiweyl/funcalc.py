"""Resolvent symbols, functional calculus and Helffer-Sjöstrand evaluation.

The resolvent parametrix of ``Op_W(a) - z`` is built order by order,

    b_0 = (a_0 - z)^{-1} = B,
    b_{j+1} = -B sum C(alpha, beta) (d_p^alpha D_x^beta a_k)(d_p^beta D_x^alpha b_l),

the sum running over l + k + |alpha| + |beta| = j + 1 with l <= j and
C(alpha, beta) = (1/alpha! beta!) (1/2)^{|alpha|} (-1/2)^{|beta|}.  Each b_j is
normalized to sum_k d_{j,k} B^{k+1}, and the functional calculus symbols
follow as a^f_j = sum_k ((-1)^k / k!) d_{j,k} f^{(k)}(a_0).
"""

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from .coeffs import FieldError
from .fitting import pairwise_sum
from .jets import smooth_step_derivs
from .symcalc import (
    GQ,
    MultiIndex,
    PolySymbol,
    SymbolExpr,
    atom_is_identically_zero,
    multi_indices,
)

J_MAX = 3


class HSQuadratureError(RuntimeError):
    """Helffer-Sjöstrand quadrature did not reach its tolerance."""

    def __init__(self, msg, estimate):
        super().__init__(msg)
        self.estimate = estimate


# --------------------------------------------------------------- resolvent


@lru_cache(maxsize=None)
def universal_resolvent(J, dim=1):
    """b_0..b_J as SymbolExpr in the atoms of a generic series (no pruning)."""
    return tuple(_recursion(J, dim, None))


def _recursion(J, dim, is_zero):
    def atom(k, eta, gamma):
        return SymbolExpr.atom(k, eta, gamma, dim=dim)

    B = SymbolExpr.outer(1, dim=dim)
    bs = [B]
    for j in range(J):
        acc = SymbolExpr({}, dim=dim)
        for l in range(j + 1):
            rest = j + 1 - l
            bl = bs[l]
            if bl.is_zero():
                continue
            for k in range(rest + 1):
                r = rest - k
                for ra in range(r + 1):
                    for al in multi_indices(dim, ra):
                        for be in multi_indices(dim, r - ra):
                            a_at = atom(k, be, al)  # d_p^al d_x^be a_k
                            if is_zero is not None and any(is_zero(x) for x in a_at.atoms()):
                                continue
                            c = GQ(
                                Fraction(1, al.factorial() * be.factorial())
                                * Fraction(1, 2) ** ra
                                * Fraction(-1, 2) ** (r - ra)
                            )
                            c = c * _ipow(-be.order)
                            right = bl.D_multi(al, be)  # (-i d_x)^al d_p^be b_l
                            if is_zero is not None:
                                right = right.prune(is_zero)
                            if right.is_zero():
                                continue
                            acc = acc + (a_at * right).scale(c)
        nxt = (B * acc).scale(-1)
        if is_zero is not None:
            nxt = nxt.prune(is_zero)
        bs.append(nxt)
    return bs


def _ipow(n):
    return [GQ(1), GQ(0, 1), GQ(-1), GQ(0, -1)][n % 4]


@dataclass
class ResolventSymbolSeries:
    """Resolvent parametrix symbols of a base series.

    Attributes
    ----------
    base : list of PolySymbol
        a_0, a_1, ...
    b : list of SymbolExpr
        b_{z,j} in terms of B = (a_0 - z)^{-1}.
    table : dict
        (j, k) -> d_{j,k}, with b_j = sum_k d_{j,k} B^{k+1}.
    """

    base: list
    J: int
    b: list
    table: dict = dc_field(default_factory=dict)

    def d(self, j, k):
        return self.table.get((j, k), SymbolExpr({}, dim=self.base[0].dim))

    def evaluate(self, j, z, x, p):
        """Numeric b_{z,j}(x, p)."""
        a0 = self.base[0].eval(x, p)
        Bv = 1.0 / (a0 - z)
        out = self.b[j].evaluate(x, p, {"a": self.base}, lambda n: Bv**n)
        return np.broadcast_to(out, np.broadcast_shapes(np.shape(a0), np.shape(out)))

    def symbol(self, j, z):
        """Callable (x, p) -> b_{z,j}(x, p), suitable for quantization."""
        return lambda x, p: self.evaluate(j, z, x, p)

    def parametrix(self, z, order):
        """Callable for sum_{j <= order} hbar^j b_{z,j} is hbar dependent; use
        :func:`semiweyl.quantize.quantize_series` with :meth:`symbol`."""
        return [self.symbol(j, z) for j in range(order + 1)]


def resolvent_symbols(base, J=J_MAX, prune=True):
    """Resolvent symbols b_{z,0..J} and the table d_{j,k}.

    Parameters
    ----------
    base : list of PolySymbol
        a_0, a_1, ... (missing orders are zero).
    J : int
        Highest order, at most ``J_MAX``.
    prune : bool
        Drop atoms that vanish identically for this base (derivatives beyond
        the p-degree, x-derivatives of x-constant members, absent members).

    Raises
    ------
    ValueError
        If J exceeds J_MAX.
    FieldError
        If a surviving atom needs more x-derivatives than a rough
        coefficient provides.
    """
    if isinstance(base, PolySymbol):
        base = [base]
    base = list(base)
    if J > J_MAX or J < 0:
        raise ValueError(f"J must lie in [0, {J_MAX}]")
    dim = base[0].dim
    if prune:
        pred = atom_is_identically_zero({"a": base}, "a")
        bs = [b.prune(pred) for b in universal_resolvent(J, dim)]
        _check_smoothness(bs, base)
    else:
        bs = list(universal_resolvent(J, dim))
    table = {}
    for j in range(1, J + 1):
        for n, expr in bs[j].by_outer().items():
            if n is None or n < 2:
                raise AssertionError("unexpected outer power in resolvent term")
            table[(j, n - 1)] = expr
    return ResolventSymbolSeries(base, J, bs, table)


def _check_smoothness(bs, base):
    for b in bs:
        for lab, j, eta, gam in b.atoms():
            if j >= len(base):
                continue
            for c in base[j].terms.values():
                for key, e0 in c.atoms():
                    from .symcalc import field_of

                    f = field_of(key)
                    if e0.order + eta.order > f.max_order():
                        raise FieldError(
                            f"resolvent atom d_x^{tuple(eta)} d_p^{tuple(gam)} a_{j} needs "
                            f"{e0.order + eta.order} derivatives of {f.name} (C^{f.k},{f.mu})"
                        )


# --------------------------------------------------------------- profiles


@dataclass
class FunctionProfile:
    """Scalar function with a derivative oracle.

    Attributes
    ----------
    derivs : callable
        ``derivs(t, K)`` returns an array of shape (K+1,) + t.shape with
        f, f', ..., f^{(K)}.
    support : (float, float) or None
        Compact support, or None for non-compact profiles.
    n_max : int
    """

    derivs: callable
    support: tuple = None
    n_max: int = 12
    name: str = "f"

    def eval(self, t):
        return self.derivs(np.asarray(t, dtype=float), 0)[0]

    def __call__(self, t):
        return self.eval(t)

    def deriv(self, r, t):
        if r > self.n_max:
            raise ValueError(f"{self.name}: derivative order {r} above n_max={self.n_max}")
        return self.derivs(np.asarray(t, dtype=float), r)[r]

    @classmethod
    def bump(cls, plateau, outer, n_max=12):
        """Smooth f equal to 1 on ``plateau`` and 0 outside ``outer``."""
        lo, hi = outer
        a, b = plateau
        if not (lo < a <= b < hi):
            raise ValueError("plateau must sit strictly inside the outer interval")

        def derivs(t, K):
            t = np.asarray(t, dtype=float)
            up = smooth_step_derivs((t - lo) / (a - lo), K)
            dn = smooth_step_derivs((hi - t) / (hi - b), K)
            for k in range(K + 1):
                up[k] /= (a - lo) ** k
                dn[k] *= (-1.0 / (hi - b)) ** k
            out = np.zeros_like(up)
            for k in range(K + 1):
                for i in range(k + 1):
                    out[k] += math.comb(k, i) * up[i] * dn[k - i]
            return out

        return cls(derivs, (lo, hi), n_max, f"bump[{lo:g},{hi:g}]")

    @classmethod
    def polynomial(cls, coeffs, window=None):
        c = np.asarray(coeffs, dtype=float)

        def derivs(t, K):
            t = np.asarray(t, dtype=float)
            out = np.zeros((K + 1,) + t.shape)
            for k in range(K + 1):
                if k < c.size:
                    out[k] = np.polynomial.polynomial.polyval(t, np.polynomial.polynomial.polyder(c, k))
            return out

        return cls(derivs, window, 10**6, "poly")

    @classmethod
    def exponential(cls, rate=1.0):
        def derivs(t, K):
            t = np.asarray(t, dtype=float)
            e = np.exp(rate * t)
            return np.stack([rate**k * e for k in range(K + 1)])

        return cls(derivs, None, 10**6, "exp")

    @classmethod
    def gaussian(cls, center=0.0, width=1.0):
        from numpy.polynomial import hermite_e

        def derivs(t, K):
            u = (np.asarray(t, dtype=float) - center) / width
            g = np.exp(-0.5 * u * u)
            out = []
            for k in range(K + 1):
                he = hermite_e.hermeval(u, [0] * k + [1])
                out.append((-1) ** k * he * g / width**k)
            return np.stack(out)

        return cls(derivs, None, 10**6, "gauss")


def cutoff_derivs(t, K):
    """omega(t) = 1 on |t| <= 1, 0 on |t| >= 2, with derivatives."""
    t = np.asarray(t, dtype=float)
    s = smooth_step_derivs(np.abs(t) - 1.0, K)
    out = -s
    out[0] = 1.0 - s[0]
    sg = np.sign(t)
    for k in range(1, K + 1):
        out[k] = out[k] * sg**k
    return out


# ------------------------------------------------------- almost analytic


@dataclass
class AlmostAnalyticExtension:
    """f~(x + iy) = (sum_{r <= n} f^{(r)}(x) (iy)^r / r!) omega(y / lambda(x))."""

    f: FunctionProfile
    n: int

    @staticmethod
    def lam(x):
        return np.sqrt(1.0 + np.asarray(x, dtype=float) ** 2)

    def _taylor(self, x, y, upto):
        d = self.f.derivs(np.asarray(x, dtype=float), upto)
        iy = 1j * np.asarray(y, dtype=float)
        s = np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y)), dtype=complex)
        for r in range(self.n + 1):
            s = s + d[r] * iy**r / math.factorial(r)
        return s, d

    def value(self, x, y):
        s, _ = self._taylor(x, y, self.n)
        return s * cutoff_derivs(np.asarray(y) / self.lam(x), 0)[0]

    def dbar(self, x, y):
        """d-bar of the extension, by the closed formula."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        s, d = self._taylor(x, y, self.n + 1)
        lam = self.lam(x)
        w = cutoff_derivs(y / lam, 1)
        sig, dsig = w[0], w[1]
        sig_x = dsig * (-y * x / lam**3)
        sig_y = dsig / lam
        rem = 0.5 * d[self.n + 1] * (1j * y) ** self.n / math.factorial(self.n) * sig
        return 0.5 * s * (sig_x + 1j * sig_y) + rem


def almost_analytic_extend(f, n):
    """Almost-analytic extension of order n."""
    if n > f.n_max - 1:
        raise ValueError(f"profile provides {f.n_max} derivatives, need {n + 1}")
    return AlmostAnalyticExtension(f, n)


# --------------------------------------------------- Helffer-Sjöstrand


@dataclass(frozen=True)
class HSQuadrature:
    """Tensor Gauss-Legendre layout for the HS integral.

    The y-range (0, 2 lambda] is split into dyadic bands down to
    ``floor * lambda``; each band uses x-panels of width comparable to the
    band height, clipped to [min_width, max_width] so that the profile's own
    transition scale is resolved.
    """

    nodes: int = 8
    floor: float = 1e-6
    min_width: float = 0.02
    max_width: float = 0.0125
    max_height: float = 0.1
    tol: float = 1e-4
    band_tol: float = 1e-12


def _matrix(H):
    from .quantize import OperatorMatrix

    if isinstance(H, OperatorMatrix):
        return H.entries, H
    return np.asarray(H), None


def _hs_integral(M, ext, quad, refine):
    lo, hi = ext.f.support
    n = M.shape[0]
    lam_max = float(AlmostAnalyticExtension.lam(max(abs(lo), abs(hi))))
    g, w = np.polynomial.legendre.leggauss(quad.nodes)
    I = np.eye(n)
    pieces = []
    top = 2.0 * lam_max
    k = 0
    while True:
        y1 = top * 2.0**-k
        y0 = top * 2.0 ** -(k + 1)
        if y1 <= quad.floor * lam_max:
            break
        if y1**ext.n < quad.band_tol and y1 < quad.min_width:
            break
        ny = max(1, int(math.ceil((y1 - y0) * refine / quad.max_height)))
        ey = np.linspace(y0, y1, ny + 1)
        hy = 0.5 * np.diff(ey)
        ys = (0.5 * (ey[1:] + ey[:-1])[:, None] + hy[:, None] * g[None, :]).ravel()
        wy = (hy[:, None] * w[None, :]).ravel()
        width = min(max(y1, quad.min_width), quad.max_width) / refine
        npan = max(1, int(math.ceil((hi - lo) / width)))
        edges = np.linspace(lo, hi, npan + 1)
        half = 0.5 * np.diff(edges)
        xs = (0.5 * (edges[1:] + edges[:-1])[:, None] + half[:, None] * g[None, :]).ravel()
        wx = (half[:, None] * w[None, :]).ravel()
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        W = wx[:, None] * wy[None, :]
        db = ext.dbar(X, Y) * W
        mask = np.abs(db) > 0
        if mask.any():
            zs = (X + 1j * Y)[mask]
            cs = db[mask]
            acc = np.zeros((n, n), dtype=complex)
            for s in range(0, zs.size, 512):
                R = np.linalg.inv(zs[s : s + 512, None, None] * I[None] - M[None])
                acc += np.tensordot(cs[s : s + 512], R, axes=1)
            pieces.append(acc)
        k += 1
    U = -pairwise_sum(pieces) / math.pi if pieces else np.zeros((n, n), dtype=complex)
    return U + U.conj().T


def hs_apply(H, f, n=4, quad=None):
    """f(H) via the Helffer-Sjöstrand formula.

    Parameters
    ----------
    H : OperatorMatrix or ndarray
        Self-adjoint matrix.
    f : FunctionProfile
        Compactly supported.
    n : int
        Number of Taylor terms in the almost-analytic extension (>= 2).
    quad : HSQuadrature

    Returns
    -------
    ndarray or OperatorMatrix (matching the input)

    Raises
    ------
    HSQuadratureError
        When the two-resolution estimate exceeds ``quad.tol`` (relative).
    """
    quad = quad or HSQuadrature()
    if n < 2:
        raise ValueError("Helffer-Sjöstrand evaluation needs n >= 2")
    M, wrapper = _matrix(H)
    if np.max(np.abs(M - M.conj().T), initial=0.0) > 1e-10:
        raise ValueError("matrix is not self-adjoint")
    if f.support is None:
        raise ValueError("hs_apply needs a compactly supported profile")
    ext = almost_analytic_extend(f, n)
    F1 = _hs_integral(M, ext, quad, 1)
    F2 = _hs_integral(M, ext, quad, 2)
    est = float(np.linalg.norm(F2 - F1, 2)) if F1.size else 0.0
    scale = max(1.0, float(np.linalg.norm(F2, 2)) if F2.size else 1.0)
    if est > quad.tol * scale:
        raise HSQuadratureError(f"HS quadrature estimate {est:.2e} above tolerance", est)
    out = F2.real if np.isrealobj(M) else F2
    if wrapper is not None:
        from .quantize import OperatorMatrix

        return OperatorMatrix(wrapper.grid, out)
    return out


def f_eig(H, f):
    """Oracle f(H) by eigendecomposition."""
    M, _ = _matrix(H)
    e, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    return (V * f.eval(e)) @ V.conj().T


# ------------------------------------------------------ functional calculus


@dataclass
class FunctionalSymbol:
    """a^f_j as an expression plus its numeric evaluation."""

    j: int
    expr: SymbolExpr
    base: list
    f: FunctionProfile

    def __call__(self, x, p):
        a0 = self.base[0].eval(x, p).real
        val = self.expr.evaluate(x, p, {"a": self.base}, lambda k: self.f.deriv(k, a0))
        return np.broadcast_to(val, np.broadcast_shapes(np.shape(a0), np.shape(val)))


def funcalc_expressions(series, J):
    """a^f_0..a^f_J as kind-'F' expressions (outer f^{(k)}(a_0))."""
    dim = series.base[0].dim
    out = [SymbolExpr.outer(0, kind="F", dim=dim)]
    for j in range(1, J + 1):
        acc = SymbolExpr({}, kind="F", dim=dim)
        for (jj, k), d in series.table.items():
            if jj != j:
                continue
            c = GQ(Fraction((-1) ** k, math.factorial(k)))
            for (atoms, _), v in d.terms.items():
                acc = acc + SymbolExpr({(atoms, k): v * c}, kind="F", dim=dim)
        out.append(acc)
    return out


def funcalc_symbols(series, f, J):
    """Functional-calculus symbols a^f_0..a^f_J as callables (x, p) -> value."""
    if J > series.J:
        raise ValueError("series computed to lower order than requested")
    return [FunctionalSymbol(j, e, series.base, f) for j, e in enumerate(funcalc_expressions(series, J))]


def phase_space_box(a0, level, start=1.0, grow=1.5, max_size=1e3, samples=401):
    """Box [-X, X] x [-P, P] with a0 > level on its boundary (sampled)."""
    X = P = start
    for _ in range(200):
        xs = np.linspace(-X, X, samples)
        ps = np.linspace(-P, P, samples)
        bx = np.real(a0.eval(xs[:, None], np.array([-P, P])[None, :]))
        bp = np.real(a0.eval(np.array([-X, X])[:, None], ps[None, :]))
        okx = np.all(bx > level)
        okp = np.all(bp > level)
        if okx and okp:
            return (-X, X), (-P, P)
        if not okp:
            X *= grow
        if not okx:
            P *= grow
        if max(X, P) > max_size:
            break
    raise ValueError(f"sublevel set {{a0 <= {level:g}}} is not compact within |x|, |p| <= {max_size:g}")


def trace_expansion_terms(series, f, J, quad=None, x_range=None):
    """T_j = integral of a^f_j over phase space (j = 0..J).

    ``quad`` is (panels, nodes) for the tensor Gauss-Legendre rule
    (default (96, 8)).  ``x_range`` fixes the x interval, e.g. one period
    of a torus; the momentum range is still found from f's support.

    Raises
    ------
    ValueError
        If f(a_0) is not compactly supported in phase space.
    """
    if f.support is None:
        raise ValueError("trace expansion needs a compactly supported profile")
    a0 = series.base[0]
    if a0.dim != 1:
        raise ValueError("phase-space quadrature implemented for d = 1")
    if x_range is None:
        xr, pr = phase_space_box(a0, f.support[1])
    else:
        xr = tuple(x_range)
        xs = np.linspace(xr[0], xr[1], 401)
        P = 1.0
        while np.any(np.real(a0.eval(xs[:, None], np.array([-P, P])[None, :])) <= f.support[1]):
            P *= 1.5
            if P > 1e3:
                raise ValueError("momentum range of the support is not bounded")
        pr = (-P, P)
    panels, nodes = quad or (96, 8)
    from .quantize import _gl_panels

    xs, wx = _gl_panels(xr, panels * nodes, nodes)
    ps, wp = _gl_panels(pr, panels * nodes, nodes)
    out = []
    for sym in funcalc_symbols(series, f, J):
        v = np.real(sym(xs[:, None], ps[None, :]))
        out.append(float(wx @ v @ wp))
    return out
