"""Rough coefficient fields, mollification and framing symbol pairs.

A field is a real function of ``x`` with a derivative oracle up to its
declared Hölder order ``k`` and a Hölder exponent ``mu``.  Mollified fields
are smooth and expose derivatives of every order.

Three evaluation routes are used for mollification:

* polynomials and finite trigonometric sums are handled in closed form
  (the kernel reproduces polynomials, and acts on a Fourier mode by
  multiplication with its Fourier profile);
* periodic rough fields are sampled on a fine periodic grid, filtered by an
  FFT, and become a finite trigonometric sum;
* everything else uses direct quadrature of the convolution integral with an
  explicit tail bound.
"""

from dataclasses import dataclass, field as dc_field
from functools import lru_cache
import math

import numpy as np

from .kernels import trig_eval


class FieldError(ValueError):
    """Invalid field construction or derivative request."""


class MollificationError(RuntimeError):
    """The mollification quadrature could not meet its error budget."""


class FramingError(ValueError):
    """Framing symbols could not be built for the requested eps."""


def _order(eta):
    if isinstance(eta, (int, np.integer)):
        return int(eta)
    return int(sum(eta))


def falling(a, r):
    out = 1.0
    for i in range(r):
        out *= a - i
    return out


def bell_table(derivs, n):
    """Partial Bell polynomials B[m][k] evaluated on derivative arrays.

    ``derivs[i]`` holds g^{(i+1)} on the sample points.  Returns a nested list
    with ``B[m][k]`` for 0 <= k <= m <= n.
    """
    shape = np.shape(derivs[0])
    B = [[None] * (n + 1) for _ in range(n + 1)]
    B[0][0] = np.ones(shape)
    for m in range(1, n + 1):
        B[m][0] = np.zeros(shape)
        for k in range(1, m + 1):
            acc = np.zeros(shape)
            for i in range(1, m - k + 2):
                prev = B[m - i][k - 1]
                if prev is None:
                    continue
                acc = acc + math.comb(m - 1, i - 1) * derivs[i - 1] * prev
            B[m][k] = acc
    return B


# ------------------------------------------------------------------- fields


class HoelderField:
    """Base class for coefficient fields.

    Attributes
    ----------
    dim : int
    k : int
        Highest derivative order available from the oracle.
    mu : float
        Hölder exponent of the ``k``-th derivatives.
    smooth : bool
        True when derivatives of every order are exact (``k`` is then only a
        nominal class label).
    period : float or None
        Period in ``x`` for one-dimensional periodic fields.
    """

    dim = 1
    k = 0
    mu = 0.0
    smooth = False
    period = None
    name = "field"

    @property
    def tau(self):
        return math.inf if self.smooth else self.k + self.mu

    def eval(self, x):
        return self.deriv(0, x)

    def __call__(self, x):
        return self.eval(x)

    def deriv(self, eta, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def max_order(self):
        return 10**6 if self.smooth else self.k

    def _check_order(self, eta):
        r = _order(eta)
        if r > self.max_order():
            raise FieldError(
                f"{self.name}: derivative of order {r} requested but field is only C^{self.k},{self.mu}"
            )
        return r

    def hoelder_const(self):
        return getattr(self, "_hoelder_const", 1.0)

    def growth_bound(self):
        return getattr(self, "_growth", (1.0, 0.0))

    def lower_bound(self):
        return getattr(self, "_lower", -math.inf)


class PolynomialField(HoelderField):
    """Polynomial coefficient.  In one dimension ``coeffs`` is ascending;
    in two dimensions it maps exponent pairs to coefficients."""

    smooth = True

    def __init__(self, coeffs, dim=1, name="poly"):
        self.dim = dim
        self.name = name
        if dim == 1:
            if isinstance(coeffs, dict):
                c = np.zeros(max(e[0] if isinstance(e, tuple) else e for e in coeffs) + 1)
                for e, v in coeffs.items():
                    c[e[0] if isinstance(e, tuple) else e] += v
                coeffs = c
            self.coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
            if self.coeffs.size == 0:
                self.coeffs = np.zeros(1)
            self.k = max(self.coeffs.size - 1, 0)
        else:
            self.terms = {tuple(int(v) for v in e): float(c) for e, c in coeffs.items() if c != 0}
            self.k = max((sum(e) for e in self.terms), default=0)
        self.mu = 1.0
        self._hoelder_const = 0.0
        self._growth = (1.0, float(self.k))

    @property
    def degree(self):
        return self.k

    def deriv(self, eta, x):
        x = np.asarray(x, dtype=float)
        if self.dim == 1:
            r = _order(eta)
            c = self.coeffs
            if r >= c.size:
                return np.zeros(x.shape)
            return np.polynomial.polynomial.polyval(x, np.polynomial.polynomial.polyder(c, r)) + 0.0 * x
        eta = tuple(eta)
        out = np.zeros(x.shape[:-1])
        for e, c in self.terms.items():
            if any(ei < ni for ei, ni in zip(e, eta)):
                continue
            coef = c
            term = np.ones(x.shape[:-1])
            for i, (ei, ni) in enumerate(zip(e, eta)):
                coef *= falling(ei, ni)
                if ei - ni:
                    term = term * x[..., i] ** (ei - ni)
            out = out + coef * term
        return out

    def is_constant(self):
        if self.dim == 1:
            return self.coeffs.size == 1
        return all(sum(e) == 0 for e in self.terms)


def ConstantField(c, dim=1):
    if dim == 1:
        return PolynomialField([c], name=f"const({c:g})")
    return PolynomialField({(0,) * dim: c}, dim=dim, name=f"const({c:g})")


class TrigField(HoelderField):
    """Finite sum ``c0 + sum_m a_m cos(w_m x) + b_m sin(w_m x)``.

    With ``declared=(k, mu)`` the field behaves as a rough exemplar: the
    oracle refuses derivatives above ``k`` even though the finite sum could
    supply them.
    """

    def __init__(self, freqs, acos, bsin, const=0.0, period=None, declared=None, name="trig"):
        self.freqs = np.asarray(freqs, dtype=float)
        self.acos = np.asarray(acos, dtype=float)
        self.bsin = np.asarray(bsin, dtype=float)
        self.const = float(const)
        self.period = period
        self.name = name
        if declared is None:
            self.smooth = True
            self.k, self.mu = 8, 1.0
        else:
            self.smooth = False
            self.k, self.mu = int(declared[0]), float(declared[1])
        amp = np.abs(self.acos) + np.abs(self.bsin)
        self._lower = self.const - float(amp.sum())
        self._growth = (1.0, 0.0)

    def deriv(self, eta, x):
        r = self._check_order(eta)
        out = trig_eval(self.freqs, self.acos, self.bsin, x, r)
        if r == 0:
            out = out + self.const
        return out

    def filtered(self, profile, eps, name=None):
        """Multiply every mode by ``profile(eps * w)``, dropping zeros."""
        g = profile(eps * self.freqs)
        keep = g != 0
        return TrigField(
            self.freqs[keep],
            self.acos[keep] * g[keep],
            self.bsin[keep] * g[keep],
            const=self.const,
            period=self.period,
            name=name or f"{self.name}_eps",
        )


class AbsPowerField(HoelderField):
    """``scale * |g(x)|**tau + offset`` with g(x) = x - center or sin(omega (x - center)).

    ``tau = k + mu`` fixes the declared class.
    """

    def __init__(self, k, mu, scale=1.0, offset=0.0, base="identity", omega=1.0, center=0.0, name=None):
        _validate_class(k, mu)
        if base not in ("identity", "sin"):
            raise FieldError(f"unknown base {base!r}")
        self.k, self.mu = int(k), float(mu)
        self.tau_ = self.k + self.mu
        self.scale, self.offset = float(scale), float(offset)
        self.base, self.omega, self.center = base, float(omega), float(center)
        self.name = name or f"abs_{base}^{self.tau_:g}"
        if base == "sin":
            self.period = math.pi / self.omega
            self._lower = min(self.offset, self.offset + self.scale)
            self._growth = (1.0, 0.0)
            w = self.omega
        else:
            self._lower = self.offset if self.scale >= 0 else -math.inf
            self._growth = (2.0**self.tau_, self.tau_)
            w = 1.0
        # Hölder constant of the k-th derivative of |g|^tau on the sampled range
        self._hoelder_const = abs(self.scale) * max(1.0, falling(self.tau_, self.k)) * 2.0 * w**self.tau_ * (
            1.0 + self.k
        )

    def singular_points(self):
        if self.base == "identity":
            return np.array([self.center])
        return None

    def deriv(self, eta, x):
        r = self._check_order(eta)
        x = np.asarray(x, dtype=float)
        tau = self.tau_
        if self.base == "identity":
            u = x - self.center
            val = falling(tau, r) * np.abs(u) ** (tau - r) * np.sign(u) ** r
            if r == 0:
                return self.scale * val + self.offset
            return self.scale * val
        w = self.omega
        y = x - self.center
        u = np.sin(w * y)
        if r == 0:
            return self.scale * np.abs(u) ** tau + self.offset
        gd = [w**i * np.sin(w * y + 0.5 * math.pi * i) for i in range(1, r + 1)]
        B = bell_table(gd, r)
        out = np.zeros(x.shape)
        au = np.abs(u)
        su = np.sign(u)
        for j in range(1, r + 1):
            hj = falling(tau, j) * au ** (tau - j) * su**j
            out = out + hj * B[r][j]
        return self.scale * out


class WeierstrassField(TrigField):
    """``scale * sum_{n=1}^{N} b^{-n tau} cos(omega b^n x) + offset``."""

    def __init__(self, k, mu, b=2, n_terms=24, scale=1.0, offset=0.0, omega=1.0, name=None):
        _validate_class(k, mu)
        if b < 2 or int(b) != b:
            raise FieldError("weierstrass base b must be an integer >= 2")
        tau = k + mu
        n = np.arange(1, n_terms + 1)
        freqs = omega * float(b) ** n
        super().__init__(
            freqs,
            scale * float(b) ** (-n * tau),
            np.zeros(n_terms),
            const=offset,
            period=2 * math.pi / omega,
            declared=(k, mu),
            name=name or f"weierstrass_b{b}^{tau:g}",
        )
        self.b, self.n_terms = int(b), int(n_terms)
        self._hoelder_const = abs(scale) * 4.0 * omega**tau / (1.0 - float(b) ** (-mu) if mu > 0 else 1.0)


class SumField(HoelderField):
    """Sum of fields; the class is that of the roughest part."""

    def __init__(self, parts, name="sum"):
        self.parts = list(parts)
        self.dim = self.parts[0].dim
        self.name = name
        rough = [p for p in self.parts if not p.smooth]
        self.smooth = not rough
        if rough:
            worst = min(rough, key=lambda p: p.tau)
            self.k, self.mu = worst.k, worst.mu
        else:
            self.k, self.mu = min(p.k for p in self.parts), 1.0
        periods = {p.period for p in self.parts if not (isinstance(p, PolynomialField) and p.is_constant())}
        self.period = periods.pop() if len(periods) == 1 else None
        self._lower = sum(p.lower_bound() for p in self.parts)
        self._hoelder_const = sum(p.hoelder_const() for p in self.parts)
        c0 = 1.0
        n0 = 0.0
        for p in self.parts:
            c, nn = p.growth_bound()
            c0 = max(c0, c)
            n0 = max(n0, nn)
        self._growth = (c0, n0)

    def max_order(self):
        return min(p.max_order() for p in self.parts)

    def deriv(self, eta, x):
        self._check_order(eta)
        return sum(p.deriv(eta, x) for p in self.parts)


def _validate_class(k, mu):
    if int(k) != k or k < 0:
        raise FieldError(f"k must be a non-negative integer, got {k}")
    if not (0.0 <= mu <= 1.0):
        raise FieldError(f"mu must lie in [0, 1], got {mu}")


def make_test_field(family, params=None):
    """Build an exemplar coefficient field.

    Parameters
    ----------
    family : {'smooth', 'abs_power', 'weierstrass'}
    params : dict
        ``k``, ``mu`` (class), ``scale``, ``offset`` (lower bound shift) and
        family specific keys: ``poly`` (ascending coefficients), ``base`` and
        ``omega`` for ``abs_power``, ``b``, ``n_terms`` and ``omega`` for
        ``weierstrass``.  Non-smooth families accept an extra smooth part via
        ``poly``.
    """
    p = dict(params or {})
    k = p.pop("k", 0)
    mu = p.pop("mu", 0.0)
    _validate_class(k, mu)
    poly = p.pop("poly", None)
    name = p.pop("name", None)
    if family == "smooth":
        cos = p.pop("cos", None)
        sin = p.pop("sin", None)
        parts = [PolynomialField(poly if poly is not None else [p.pop("offset", 0.0)])]
        if cos or sin:
            cos = dict(cos or {})
            sin = dict(sin or {})
            ws = sorted(set(cos) | set(sin))
            tf = TrigField(ws, [cos.get(w, 0.0) for w in ws], [sin.get(w, 0.0) for w in ws], name="trig")
            if len(ws):
                base = min(ws)
                tf.period = 2 * math.pi / base if all(abs(w / base - round(w / base)) < 1e-12 for w in ws) else None
            parts.append(tf)
        f = parts[0] if len(parts) == 1 else SumField(parts, name=name or "smooth")
    elif family == "abs_power":
        f = AbsPowerField(k, mu, **p)
        if poly is not None:
            f = SumField([f, PolynomialField(poly)], name=name or f.name)
    elif family == "weierstrass":
        f = WeierstrassField(k, mu, **p)
        if poly is not None:
            f = SumField([f, PolynomialField(poly)], name=name or f.name)
    else:
        raise FieldError(f"unknown field family {family!r}")
    if name:
        f.name = name
    return f


# ------------------------------------------------------------------- kernel


def _psi(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    a = _psi(t)
    b = _psi(1.0 - np.asarray(t, dtype=float))
    return a / (a + b)


@dataclass(frozen=True)
class MollifierKernel:
    """Even Schwartz kernel whose Fourier profile is 1 on [-1, 1] and 0
    outside [-2, 2].

    Every moment of positive order vanishes, so ``moment_order`` is reported
    as a large sentinel.  ``radius`` bounds the quadrature window in ``y``.
    """

    n_nodes: int = 400
    radius: float = 200.0
    panel: float = 0.25
    panel_nodes: int = 12
    moment_order: int = 64
    tail_tol: float = 1e-5

    def fourier_profile(self, xi):
        return 1.0 - smooth_step(np.abs(np.asarray(xi, dtype=float)) - 1.0)

    @property
    def _xi(self):
        return _xi_nodes(self.n_nodes)

    def profile_deriv(self, r, y):
        """r-th derivative of the profile, phi(y) = (1/pi) int_0^2 hat(xi) cos(y xi)."""
        xi, w = self._xi
        wt = w * self.fourier_profile(xi) * xi**r / math.pi
        y = np.asarray(y, dtype=float)
        shift = 0.5 * math.pi * r
        out = np.empty(y.size)
        flat = y.ravel()
        for s in range(0, flat.size, 4096):
            out[s : s + 4096] = np.cos(np.outer(flat[s : s + 4096], xi) + shift) @ wt
        return out.reshape(y.shape)

    def profile(self, y):
        return self.profile_deriv(0, y)

    def nodes(self, r):
        """Composite Gauss-Legendre nodes and weighted kernel values in y."""
        return _kernel_nodes(self, r)

    def tail_mass(self, r):
        """Estimate of int_{|y| > R} |phi^{(r)}| from samples just inside R."""
        R = self.radius
        y = np.linspace(0.75 * R, R, 64)
        v = np.abs(self.profile_deriv(r, y))
        return float(2.0 * v.max() * R)


@lru_cache(maxsize=8)
def _xi_nodes(n):
    g, w = np.polynomial.legendre.leggauss(n)
    xa = 0.5 * (g + 1.0)
    xb = 1.0 + 0.5 * (g + 1.0)
    return np.concatenate([xa, xb]), np.concatenate([0.5 * w, 0.5 * w])


_NODE_CACHE = {}


def _kernel_nodes(kernel, r):
    key = (kernel, r)
    if key not in _NODE_CACHE:
        npan = int(round(2 * kernel.radius / kernel.panel))
        g, w = np.polynomial.legendre.leggauss(kernel.panel_nodes)
        edges = -kernel.radius + kernel.panel * np.arange(npan)
        y = (edges[:, None] + 0.5 * kernel.panel * (g[None, :] + 1.0)).ravel()
        wy = np.tile(0.5 * kernel.panel * w, npan)
        _NODE_CACHE[key] = (y, wy * kernel.profile_deriv(r, y))
    return _NODE_CACHE[key]


DEFAULT_KERNEL = MollifierKernel()


# --------------------------------------------------------------- mollified


class MollifiedField(HoelderField):
    """Smooth approximation ``f_eps = f * phi_eps`` of a rough field.

    Derivatives of every order are available.  ``route`` records how values
    are produced: ``exact`` (closed form), ``spectral`` (periodic FFT filter)
    or ``quadrature`` (direct convolution with tail bound).
    """

    smooth = True

    def __init__(self, base, eps, kernel=DEFAULT_KERNEL, route=None, samples=2**16):
        if not (0.0 < eps <= 1.0):
            raise FieldError(f"eps must lie in (0, 1], got {eps}")
        self.base, self.eps, self.kernel = base, float(eps), kernel
        self.dim = base.dim
        self.k, self.mu = base.k, base.mu
        self.period = base.period
        self.name = f"{base.name}_eps"
        self._lower = base.lower_bound()
        self._growth = base.growth_bound()
        self._parts = []
        self._quad = []
        parts = base.parts if isinstance(base, SumField) else [base]
        for part in parts:
            if isinstance(part, PolynomialField):
                self._parts.append(part)
            elif isinstance(part, TrigField):
                self._parts.append(part.filtered(kernel.fourier_profile, self.eps))
            elif route != "quadrature" and part.period is not None:
                self._parts.append(spectral_mollify(part, self.eps, kernel, samples))
            else:
                self._quad.append(part)
        if route is None:
            route = "quadrature" if self._quad else ("spectral" if self._spectral_used(parts) else "exact")
        self.route = route

    def _spectral_used(self, parts):
        return any(not isinstance(p, (PolynomialField, TrigField)) for p in parts)

    def max_order(self):
        return 10**6

    def deriv(self, eta, x):
        r = _order(eta)
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for part in self._parts:
            out = out + part.deriv(r, x)
        for part in self._quad:
            if x.size > self.dense_threshold:
                out = out + self._tabulated(part, r, float(x.min()), float(x.max()))(x)
            else:
                out = out + quadrature_mollify(part, self.eps, self.kernel, r, x)
        return out

    dense_threshold = 4096

    def _tabulated(self, part, r, lo, hi):
        """Cubic spline of a quadrature part at spacing eps/16.

        f_eps varies on the scale eps, so the interpolation error is of
        relative size 1e-6 against the mollification error itself.
        """
        from scipy.interpolate import CubicSpline

        key = (id(part), r, lo, hi)
        cache = self.__dict__.setdefault("_spline_cache", {})
        if key not in cache:
            h = self.eps / 16
            m = int(math.ceil((hi - lo) / h)) + 1
            xs = np.linspace(lo - 2 * h, hi + 2 * h, m + 4)
            cache[key] = CubicSpline(xs, quadrature_mollify(part, self.eps, self.kernel, r, xs))
        return cache[key]


def spectral_mollify(f, eps, kernel=DEFAULT_KERNEL, samples=2**16):
    """Filter a periodic field through the kernel's Fourier profile."""
    P = f.period
    x = P * np.arange(samples) / samples
    c = np.fft.rfft(f.eval(x)) / samples
    m = np.arange(c.size)
    w = 2 * math.pi * m / P
    g = kernel.fourier_profile(eps * w)
    keep = (g > 0) & (m > 0) & (m < samples // 2)
    # real form: c_m e^{i w x} + conj  ->  2 Re c_m cos - 2 Im c_m sin
    return TrigField(
        w[keep],
        2.0 * c.real[keep] * g[keep],
        -2.0 * c.imag[keep] * g[keep],
        const=float(c.real[0]),
        period=P,
        name=f"{f.name}_eps",
    )


def quadrature_mollify(f, eps, kernel=DEFAULT_KERNEL, r=0, x=0.0, tol=None):
    """Evaluate the r-th derivative of ``f * phi_eps`` by direct quadrature.

    Orders up to ``f.k`` move onto the field (d^r f_eps = (d^r f)_eps); the
    remainder is carried by the kernel with a factor ``eps**-(r - k)``.

    Raises
    ------
    MollificationError
        If the kernel tail outside the quadrature window exceeds ``tol``
        relative to the field's size on the window.
    """
    tol = kernel.tail_tol if tol is None else tol
    x = np.asarray(x, dtype=float)
    on_field = min(r, f.max_order())
    on_kernel = r - on_field
    y, wphi = kernel.nodes(on_kernel)
    tail = kernel.tail_mass(on_kernel)
    flat = x.ravel()
    span = np.max(np.abs(flat)) + eps * kernel.radius if flat.size else 0.0
    c0, n0 = f.growth_bound()
    size = max(1.0, abs(f.deriv(on_field, np.array([span]))[0]))
    if tail * size > tol * max(1.0, c0 * (1 + span) ** n0):
        raise MollificationError(
            f"kernel tail {tail:.2e} beyond |y| <= {kernel.radius} exceeds tolerance {tol:.1e}"
        )
    out = np.empty(flat.size)
    step = max(1, 2**22 // y.size)
    for s in range(0, flat.size, step):
        xs = flat[s : s + step]
        vals = f.deriv(on_field, xs[:, None] - eps * y[None, :])
        out[s : s + step] = vals @ wphi
    return (out * eps ** (-on_kernel)).reshape(x.shape)


def mollify(f, kernel=DEFAULT_KERNEL, eps=0.1, route=None):
    """Smooth a field at scale ``eps``.

    Parameters
    ----------
    f : HoelderField
    kernel : MollifierKernel
    eps : float
        Scale in (0, 1].
    route : {None, 'quadrature'}
        Force direct quadrature for rough parts even when a period is known.

    Returns
    -------
    MollifiedField
    """
    if kernel.moment_order < f.k:
        raise FieldError("kernel moment order below field regularity")
    return MollifiedField(f, eps, kernel, route=route)


def export_mollified_csv(path, mf, x):
    """Write columns x, f, f_eps, abs_err."""
    x = np.asarray(x, dtype=float)
    f = mf.base.eval(x)
    fe = mf.eval(x)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,f,f_eps,abs_err\n")
        for row in zip(x, f, fe, np.abs(f - fe)):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def sup_error(mf, x, order=0):
    """Sampled sup of |d^r f_eps - d^r f| for r <= k."""
    return float(np.max(np.abs(mf.deriv(order, x) - mf.base.deriv(order, x))))


def sup_deriv(mf, x, order):
    return float(np.max(np.abs(mf.deriv(order, x))))


# ------------------------------------------------------------------ framing


@dataclass(frozen=True)
class FormTerm:
    """One coefficient ``scale * field(x)`` of the pair (alpha, beta)."""

    alpha: tuple
    beta: tuple
    field: HoelderField
    scale: complex = 1.0


def as_form(form):
    out = []
    for t in form:
        if isinstance(t, FormTerm):
            out.append(t)
            continue
        alpha, beta, f, *rest = t
        alpha = (alpha,) if isinstance(alpha, (int, np.integer)) else tuple(alpha)
        beta = (beta,) if isinstance(beta, (int, np.integer)) else tuple(beta)
        if isinstance(f, (int, float, complex, np.number)):
            rest = [complex(f) * (rest[0] if rest else 1.0)]
            f = ConstantField(1.0, dim=len(alpha))
        out.append(FormTerm(alpha, beta, f, rest[0] if rest else 1.0))
    return out


@dataclass
class FramingSymbolPair:
    """Lower and upper symbols sandwiching a rough form symbol."""

    plus: object
    minus: object
    eps: float
    c1: float
    tau: float
    mollified: list = dc_field(default_factory=list)
    plus_form: list = dc_field(default_factory=list)
    minus_form: list = dc_field(default_factory=list)

    @property
    def gap(self):
        return self.c1 * self.eps**self.tau


def build_framing_symbols(form, eps, kernel=DEFAULT_KERNEL, window=None, safety=1.25, ellipticity=None):
    """Mollify a form and widen it into a framing pair.

    Parameters
    ----------
    form : list of FormTerm or (alpha, beta, field[, scale]) tuples
        Order m = 1 forms in one or two dimensions.
    eps : float
    kernel : MollifierKernel
    window : (float, float), optional
        Sampling window for the measured mollification constant.  Periodic
        fields are sampled over one period by default.
    safety : float
        Factor applied to the measured constant.
    ellipticity : float, optional
        Lower bound of the top-order coefficient; estimated when omitted.

    Returns
    -------
    FramingSymbolPair
        ``plus`` and ``minus`` are PolySymbols; ``c1`` is the framing constant
        such that plus - minus = 2 c1 eps^tau (1 + |p|^2).
    """
    from .symcalc import PolySymbol, form_principal

    terms = as_form(form)
    d = len(terms[0].alpha)
    if max(sum(t.alpha) for t in terms) > 1 or max(sum(t.beta) for t in terms) > 1:
        raise FramingError("framing pairs are implemented for order m = 1 forms")
    moll = []
    worst = 0.0
    taus = []
    for t in terms:
        if t.field.smooth or d != 1:
            moll.append(FormTerm(t.alpha, t.beta, t.field if t.field.smooth else mollify(t.field, kernel, eps), t.scale))
            continue
        mf = mollify(t.field, kernel, eps)
        moll.append(FormTerm(t.alpha, t.beta, mf, t.scale))
        xs = _sample_window(t.field, window)
        err = abs(t.scale) * sup_error(mf, xs, 0)
        taus.append(t.field.tau)
        worst = max(worst, err)
    tau = min(taus) if taus else 1.0
    c1 = safety * len(terms) * worst / eps**tau if worst > 0 else 0.0
    gap = c1 * eps**tau

    top = [t for t in moll if sum(t.alpha) == 1 and sum(t.beta) == 1 and t.alpha == t.beta]
    if ellipticity is None and d == 1:
        ellipticity = min(float(np.min(np.real(t.scale) * t.field.eval(_sample_window(t.field, window)))) for t in top)
    if ellipticity is not None and gap >= 0.5 * ellipticity:
        thr = (0.5 * ellipticity / max(c1, 1e-300)) ** (1.0 / tau)
        raise FramingError(
            f"eps={eps:g} above the ellipticity-preservation threshold eps < {thr:.4g} "
            f"(framing gap {gap:.3g} vs top-order lower bound {ellipticity:.3g})"
        )
    one = ConstantField(1.0, dim=d)
    extra_plus = [FormTerm((0,) * d, (0,) * d, one, gap)]
    extra_minus = [FormTerm((0,) * d, (0,) * d, one, -gap)]
    for i in range(d):
        e = tuple(1 if j == i else 0 for j in range(d))
        extra_plus.append(FormTerm(e, e, one, gap))
        extra_minus.append(FormTerm(e, e, one, -gap))
    plus_form = moll + extra_plus
    minus_form = moll + extra_minus
    plus = form_principal(plus_form)
    minus = form_principal(minus_form)
    assert isinstance(plus, PolySymbol)
    return FramingSymbolPair(plus, minus, eps, c1, tau, moll, plus_form, minus_form)


def _sample_window(f, window, n=4001):
    if window is not None:
        return np.linspace(window[0], window[1], n)
    if f.period is not None:
        return np.linspace(-f.period, f.period, n)
    return np.linspace(-4.0, 4.0, n)
