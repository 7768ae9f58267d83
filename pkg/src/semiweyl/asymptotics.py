"""Phase-space side: Weyl volumes, coarea densities, Riesz phase terms and
stationary phase."""

from dataclasses import dataclass, field as dc_field
import math

import numpy as np

from .coeffs import FieldError
from .fitting import pairwise_sum


class CertificationError(RuntimeError):
    """Compactness or non-criticality could not be certified."""


class CoareaError(RuntimeError):
    """Finite-difference coarea density failed its Richardson check."""


# ----------------------------------------------------------- evaluation


def _values(a0, pts, D):
    """a0 on points of shape (m, D) (x components first, then p)."""
    d = D // 2
    if d == 1:
        return np.real(a0(pts[:, 0], pts[:, 1]))
    return np.real(a0(pts[:, :d], pts[:, d:]))


def _gradient(a0, pts, D):
    """|grad a0| on points; exact derivatives, falling back to differences."""
    d = D // 2
    g = []
    try:
        for i in range(d):
            dxs = a0.dx(i)
            g.append(_values(dxs, pts, D))
    except (FieldError, AttributeError):
        g = []
        h = 1e-6
        for i in range(d):
            e = np.zeros(D)
            e[i] = h
            g.append((_values(a0, pts + e, D) - _values(a0, pts - e, D)) / (2 * h))
    for i in range(d):
        if hasattr(a0, "dp"):
            g.append(_values(a0.dp(i), pts, D))
        else:
            e = np.zeros(D)
            e[d + i] = 1e-6
            g.append((_values(a0, pts + e, D) - _values(a0, pts - e, D)) / 2e-6)
    return np.stack(g, axis=-1)


def sublevel_box(a0, level, start=1.0, grow=1.5, max_size=1e3, samples=257):
    """Half-widths (X, P) of a box with a0 > level on its boundary (sampled)."""
    d = a0.dim if hasattr(a0, "dim") else 1
    if d != 1:
        return _sublevel_box_nd(a0, level, d, start, grow, max_size)
    X = P = start
    for _ in range(400):
        xs = np.linspace(-X, X, samples)
        ps = np.linspace(-P, P, samples)
        bx = np.real(a0(xs[:, None], np.array([-P, P])[None, :]))
        bp = np.real(a0(np.array([-X, X])[:, None], ps[None, :]))
        okx, okp = bool(np.all(bx > level)), bool(np.all(bp > level))
        if okx and okp:
            return (X, P)
        if not okp:
            X *= grow
        if not okx:
            P *= grow
        if max(X, P) > max_size:
            break
    raise CertificationError(f"sublevel set {{a0 <= {level:g}}} not certified compact within {max_size:g}")


def _sublevel_box_nd(a0, level, d, start, grow, max_size, samples=9):
    R = start
    D = 2 * d
    while R <= max_size:
        g = np.linspace(-R, R, samples)
        mesh = np.stack(np.meshgrid(*([g] * D), indexing="ij"), -1).reshape(-1, D)
        on_face = np.any(np.abs(np.abs(mesh) - R) < 1e-12, axis=1)
        if np.all(_values(a0, mesh[on_face], D) > level):
            return (R,) * 2
        R *= grow
    raise CertificationError(f"sublevel set {{a0 <= {level:g}}} not certified compact within {max_size:g}")


@dataclass
class PhaseSpaceRegion:
    """Certified bounding box of the sublevel set {a0 <= level}."""

    a0: object
    level: float
    half_widths: tuple
    depth: int = 8

    @classmethod
    def certify(cls, a0, level, depth=8):
        return cls(a0, level, sublevel_box(a0, level), depth)

    @property
    def dim(self):
        return self.a0.dim if hasattr(self.a0, "dim") else 1


# ------------------------------------------------------ box subdivision


def _tri_fraction(v0, v1, v2, E):
    """Area fraction of {linear interpolant <= E} on a triangle."""
    v = np.sort(np.stack([v0, v1, v2], -1), axis=-1)
    a, b, c = v[..., 0], v[..., 1], v[..., 2]
    out = np.zeros(a.shape)
    full = c <= E
    out[full] = 1.0
    m1 = (a < E) & (E <= b) & ~full
    with np.errstate(divide="ignore", invalid="ignore"):
        f1 = (E - a) ** 2 / ((b - a) * (c - a))
        f2 = 1.0 - (c - E) ** 2 / ((c - a) * (c - b))
    out[m1] = np.where(np.isfinite(f1[m1]), f1[m1], 0.0)
    m2 = (b < E) & (E < c)
    out[m2] = np.where(np.isfinite(f2[m2]), f2[m2], 1.0)
    return np.clip(out, 0.0, 1.0)


@dataclass
class VolumeResult:
    value: float
    error_estimate: float
    error_bound: float
    mixed_cells: int
    depth: int
    leaf_centers: np.ndarray = dc_field(default=None, repr=False)


_GL6 = np.polynomial.legendre.leggauss(6)


def weighted_volume(a0, E, weight=None, depth=8, base=16, region=None, keep_leaves=False):
    """int over {a0 <= E} of weight (1 when None) by dyadic box subdivision.

    Cells are classified from the center value and a Lipschitz bound built
    from gradient samples at the center and corners (inflated by 1.5).
    Fully inside cells integrate the weight with a 6-point tensor rule;
    mixed cells at the depth cap use the exact sublevel area of the linear
    interpolant on two triangles (D = 2) or a 3^D sub-sample fraction.
    """
    d = a0.dim if hasattr(a0, "dim") else 1
    D = 2 * d
    if region is None:
        X, P = sublevel_box(a0, E)
    else:
        X, P = region
    lo = np.array([-X] * d + [-P] * d, float)
    hi = -lo
    if D > 2:
        base = min(base, 4)
    axes = [np.linspace(lo[i], hi[i], base + 1) for i in range(D)]
    width = (hi - lo) / base
    cen = np.stack(np.meshgrid(*[0.5 * (a[1:] + a[:-1]) for a in axes], indexing="ij"), -1).reshape(-1, D)
    corners = np.array(list(np.ndindex(*([2] * D))), float) * 2 - 1  # (2^D, D) in {-1, 1}
    g6, w6 = _GL6
    total_full = []
    prev_total = None
    mixed_area_bound = 0.0
    est = 0.0
    level = 0
    while True:
        hw = 0.5 * width
        r = float(np.linalg.norm(hw))
        vc = _values(a0, cen, D)
        pts = (cen[:, None, :] + corners[None, :, :] * hw).reshape(-1, D)
        vk = _values(a0, pts, D).reshape(cen.shape[0], -1)
        grads = np.concatenate([_grad_norm(a0, cen, D)[:, None], _grad_norm(a0, pts, D).reshape(cen.shape[0], -1)], 1)
        lip = 1.5 * grads.max(axis=1)
        vmin = np.minimum(vc, vk.min(axis=1))
        vmax = np.maximum(vc, vk.max(axis=1))
        full = (vmax + lip * r * 0.5 < E) & (vc + lip * r < E)
        empty = (vmin - lip * r * 0.5 > E) & (vc - lip * r > E)
        mixed = ~(full | empty)
        vol_cell = float(np.prod(width))
        if full.any():
            total_full.append(_cell_integral(cen[full], hw, weight, a0, D, g6, w6))
        if level == depth or not mixed.any():
            mc = cen[mixed]
            frac = _leaf_fraction(a0, mc, hw, E, D, vk[mixed] if D == 2 else None)
            wv = np.ones(mc.shape[0]) if weight is None else np.real(_weight_values(weight, mc, D))
            mixed_val = float(np.sum(frac * wv) * vol_cell)
            wmax = 1.0 if weight is None else float(np.max(np.abs(wv), initial=0.0))
            mixed_area_bound = float(np.sum(np.minimum(frac, 1 - frac)) * vol_cell * wmax)
            value = pairwise_sum(total_full) + mixed_val
            # O(h^2) leaf rule: Richardson estimate from the previous level
            est = abs(value - prev_total) / 3 if prev_total is not None else mixed_area_bound
            return VolumeResult(
                float(value), float(est), mixed_area_bound, int(mixed.sum()), level, mc if keep_leaves else None
            )
        # coarse-level estimate of the mixed contribution, for the error estimate
        mc = cen[mixed]
        wv = np.ones(mc.shape[0]) if weight is None else np.real(_weight_values(weight, mc, D))
        frac = _leaf_fraction(a0, mc, hw, E, D, vk[mixed] if D == 2 else None)
        prev_total = pairwise_sum(total_full) + float(np.sum(frac * wv) * vol_cell)
        # split mixed cells
        offs = corners * 0.5 * hw
        cen = (mc[:, None, :] + offs[None, :, :]).reshape(-1, D)
        width = hw
        level += 1


def _grad_norm(a0, pts, D):
    return np.linalg.norm(_gradient(a0, pts, D), axis=-1)


def _weight_values(w, pts, D):
    d = D // 2
    if d == 1:
        return w(pts[:, 0], pts[:, 1])
    return w(pts[:, :d], pts[:, d:])


def _cell_integral(cen, hw, weight, a0, D, g, w):
    vol = float(np.prod(2 * hw))
    if weight is None:
        return vol * cen.shape[0]
    nodes = np.array(list(np.ndindex(*([len(g)] * D))))
    off = g[nodes] * hw
    ww = np.prod(w[nodes], axis=1) * np.prod(hw)
    total = 0.0
    for s in range(0, cen.shape[0], 4096):
        pts = (cen[s : s + 4096, None, :] + off[None, :, :]).reshape(-1, D)
        v = np.real(_weight_values(weight, pts, D)).reshape(-1, off.shape[0])
        total += float(np.sum(v @ ww))
    return total


def _leaf_fraction(a0, mc, hw, E, D, vk):
    if mc.shape[0] == 0:
        return np.zeros(0)
    if D == 2:
        # corners in ndindex order: (-,-), (-,+), (+,-), (+,+)
        v00, v01, v10, v11 = vk[:, 0], vk[:, 1], vk[:, 2], vk[:, 3]
        return 0.5 * (_tri_fraction(v00, v10, v11, E) + _tri_fraction(v00, v01, v11, E))
    q = np.array(list(np.ndindex(*([3] * D))), float) / 3.0 * 2 - 1 + 1.0 / 3.0
    pts = (mc[:, None, :] + q[None, :, :] * hw).reshape(-1, D)
    v = _values(a0, pts, D).reshape(mc.shape[0], -1)
    return np.mean(v <= E, axis=1)


def weyl_volume(a0, E=0.0, depth=8, detailed=False):
    """Phase-space volume of {a0 <= E}.

    Raises
    ------
    CertificationError
        If the sublevel set cannot be certified compact.
    """
    if _global_min(a0) > E:
        res = VolumeResult(0.0, 0.0, 0.0, 0, 0)
        return res if detailed else 0.0
    res = weighted_volume(a0, E, None, depth)
    return res if detailed else res.value


def _global_min(a0, samples=201):
    from scipy.optimize import minimize

    d = a0.dim if hasattr(a0, "dim") else 1
    if d != 1:
        return -math.inf
    try:
        X, P = sublevel_box(a0, 0.0)
    except CertificationError:
        X = P = 10.0
    xs = np.linspace(-X, X, samples)
    ps = np.linspace(-P, P, samples)
    v = np.real(a0(xs[:, None], ps[None, :]))
    i, j = np.unravel_index(np.argmin(v), v.shape)
    res = minimize(lambda z: float(np.real(a0(np.array(z[0]), np.array(z[1])))), [xs[i], ps[j]], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-13})
    return float(min(res.fun, v[i, j]))


def symbol_minimum(a0):
    """Global minimum of a one-dimensional symbol (sampled + polished)."""
    return _global_min(a0)


def level_set_gradient(a0, s, component="full", depth=10):
    """Smallest |grad a0| (or |grad_p a0|) over cells straddling {a0 = s}."""
    res = weighted_volume(a0, s, None, depth, keep_leaves=True)
    pts = res.leaf_centers
    D = 2 * (a0.dim if hasattr(a0, "dim") else 1)
    g = _gradient(a0, pts, D)
    if component == "p":
        g = g[:, D // 2 :]
    return float(np.min(np.linalg.norm(g, axis=-1))) if pts.shape[0] else math.inf


def certify_noncritical(a0, s=0.0, floor=1e-3, component="full", depth=10):
    m = level_set_gradient(a0, s, component, depth)
    if m < floor:
        raise CertificationError(f"|grad a0| drops to {m:.3g} < {floor:g} on the level set a0 = {s:g}")
    return m


# ---------------------------------------------------------------- coarea


def coarea_density(a0, weight=None, s=0.0, step=0.05, depth=8, rtol=1e-2, atol=1e-6):
    """int_{a0 = s} w / |grad a0| dS, as d/ds of the weighted volume.

    Centered differences with steps ``step`` and ``step/2`` are combined by
    Richardson extrapolation.

    Raises
    ------
    CoareaError
        If the two step sizes disagree by more than rtol (relative) + atol.
    """

    def W(e):
        return weighted_volume(a0, e, weight, depth).value if _global_min(a0) <= e else 0.0

    d1 = (W(s + step) - W(s - step)) / (2 * step)
    h = step / 2
    d2 = (W(s + h) - W(s - h)) / (2 * h)
    rich = (4 * d2 - d1) / 3
    if abs(d2 - d1) > rtol * abs(rich) + atol:
        raise CoareaError(f"coarea differences disagree: {d1:.6g} vs {d2:.6g} at step {step:g}")
    return float(rich)


@dataclass
class RieszTerms:
    psi0: float
    psi1: float
    psi0_error: float
    psi1_error: float
    gamma: float


def riesz_phase_terms(a0, a1=None, gamma=1.0, nodes=16, depth=8, floor=1e-3, certify=True):
    """Psi0 = int (a0)_-^gamma and Psi1 = -gamma int a1 (a0)_-^{gamma-1}.

    Psi1 is the first-order term of int (a0 + hbar a1)_-^gamma, so the
    two-term sum tracks Tr(A)_-^gamma.  With u = (-s)^gamma both become
    regular integrals over u in [0, U], U = (-min a0)^gamma:

        Psi0 = int_0^U Vol{a0 <= -u^{1/gamma}} du,
        Psi1 = -int_0^U rho_1(-u^{1/gamma}) du,

    where rho_1(s) is the coarea density of the weight a1.  For gamma = 1,
    Psi1 is minus the weighted volume of {a0 <= 0}.

    Returns
    -------
    RieszTerms
        Values with error estimates from a half-resolution rule.
    """
    if not (0.0 < gamma <= 1.0):
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    if certify:
        certify_noncritical(a0, 0.0, floor)
    smin = _global_min(a0)
    if smin >= 0:
        return RieszTerms(0.0, 0.0, 0.0, 0.0, gamma)
    U = (-smin) ** gamma

    def rule(n):
        g, w = np.polynomial.legendre.leggauss(n)
        u = 0.5 * U * (g + 1)
        return u, 0.5 * U * w

    def psi0(n):
        u, w = rule(n)
        return float(sum(wi * weighted_volume(a0, -(ui ** (1 / gamma)), None, depth).value for ui, wi in zip(u, w)))

    p0 = psi0(nodes)
    p0e = abs(p0 - psi0(nodes // 2))
    if a1 is None or (hasattr(a1, "is_zero") and a1.is_zero()):
        return RieszTerms(p0, 0.0, p0e, 0.0, gamma)
    if gamma == 1.0:
        r = weighted_volume(a0, 0.0, a1, depth)
        return RieszTerms(p0, -r.value, p0e, r.error_estimate, gamma)

    def psi1(n):
        u, w = rule(n)
        acc = 0.0
        for ui, wi in zip(u, w):
            s = -(ui ** (1 / gamma))
            st = min(0.05, 0.4 * (s - smin))
            try:
                rho = coarea_density(a0, a1, s, st, depth, rtol=5e-2, atol=1e-4)
            except CoareaError:
                rho = coarea_density(a0, a1, s, st / 2, depth, rtol=1.0, atol=1.0)
            acc += wi * rho
        return float(acc)

    p1 = -psi1(nodes)
    p1e = abs(p1 + psi1(nodes // 2))
    return RieszTerms(p0, p1, p0e, p1e, gamma)


# --------------------------------------------------------- stationary phase


@dataclass
class ExpansionResult:
    """Ordered (hbar power, coefficient) list with remainder metadata."""

    terms: list
    hbar: float
    remainder_estimate: float = None
    method: str = ""

    @property
    def value(self):
        return sum(self.hbar**j * v for j, v in self.terms)

    def partial(self, N):
        return sum(self.hbar**j * v for j, v in self.terms if j <= N)


class GaussianAmplitude:
    """a(v) = prod_i v_i^{k_i} exp(-|v|^2 / 2) with derivatives at any point."""

    def __init__(self, n=1, powers=None):
        self.n = n
        self.powers = tuple(powers) if powers is not None else (0,) * n

    def __call__(self, v):
        v = np.asarray(v, float).reshape(-1, self.n) if self.n > 1 else np.asarray(v, float)
        if self.n == 1:
            return v ** self.powers[0] * np.exp(-0.5 * v * v)
        out = np.exp(-0.5 * np.sum(v * v, axis=-1))
        for i, k in enumerate(self.powers):
            out = out * v[..., i] ** k
        return out

    def deriv(self, gamma, v=0.0):
        from numpy.polynomial import hermite_e, polynomial as P

        scalar = np.ndim(v) == 0 or (self.n > 1 and np.ndim(v) == 1)
        v = np.atleast_1d(np.asarray(v, float))
        out = 1.0
        for i, (k, g) in enumerate(zip(self.powers, gamma)):
            vi = v[..., i] if self.n > 1 else v
            # d^g [v^k e^{-v^2/2}] = e^{-v^2/2} * q(v); build q by the recurrence q' - v q
            q = np.zeros(k + 1)
            q[k] = 1.0
            for _ in range(g):
                q = P.polysub(P.polyder(q), P.polymulx(q)) if q.size > 1 else P.polysub(np.zeros(1), P.polymulx(q))
            out = out * P.polyval(vi, q) * np.exp(-0.5 * vi * vi)
        out = np.asarray(out, float)
        return float(out.reshape(-1)[0]) if scalar else out


def _quadratic_power(Binv, j):
    """Coefficients of (sum_kl Binv_kl xi_k xi_l)^j as {multi-index: value}."""
    n = Binv.shape[0]
    base = {}
    for k in range(n):
        for l in range(n):
            e = [0] * n
            e[k] += 1
            e[l] += 1
            base[tuple(e)] = base.get(tuple(e), 0.0) + Binv[k, l]
    out = {(0,) * n: 1.0}
    for _ in range(j):
        nxt = {}
        for e1, c1 in out.items():
            for e2, c2 in base.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                nxt[e] = nxt.get(e, 0.0) + c1 * c2
        out = nxt
    return out


def stationary_phase_expand(B, amplitude, hbar, N):
    """Terms of int e^{i <Bv, v>/(2 hbar)} a(v) dv through hbar^N (times the prefactor).

    term_j = (2 pi hbar)^{n/2} e^{i pi sgn(B)/4} |det B|^{-1/2} (1/j!) (<B^{-1} D, D>/(2i))^j a(0)

    Raises
    ------
    ValueError
        If B is singular.
    """
    B = np.atleast_2d(np.asarray(B, float))
    n = B.shape[0]
    ev = np.linalg.eigvalsh(0.5 * (B + B.T))
    if np.min(np.abs(ev)) < 1e-12 * max(1.0, np.max(np.abs(ev))):
        raise ValueError("stationary phase needs an invertible B")
    sgn = int(np.sum(ev > 0) - np.sum(ev < 0))
    pref = (2 * math.pi * hbar) ** (n / 2) * np.exp(1j * math.pi * sgn / 4) / math.sqrt(abs(np.prod(ev)))
    Binv = np.linalg.inv(B)
    terms = []
    for j in range(N + 1):
        acc = 0.0
        for gamma, c in _quadratic_power(Binv, j).items():
            acc += c * amplitude.deriv(gamma, np.zeros(n) if n > 1 else 0.0)
        # D = -i d: <B^{-1}D, D>^j = (-1)^j (sum Binv d d)^j; divided by (2i)^j
        terms.append((j, pref * (-1) ** j * acc / ((2j) ** j * math.factorial(j))))
    return ExpansionResult(terms, hbar, None, "stationary-phase")


def gaussian_fresnel_exact(B, hbar):
    """int e^{i <Bv, v>/(2 hbar)} e^{-|v|^2/2} dv = (2 pi)^{n/2} det(I - i B/hbar)^{-1/2}."""
    B = np.atleast_2d(np.asarray(B, float))
    ev = np.linalg.eigvalsh(0.5 * (B + B.T))
    out = (2 * math.pi) ** (B.shape[0] / 2) + 0j
    for e in ev:
        out *= np.sqrt(1.0 / (1.0 - 1j * e / hbar))
    return complex(out)


def oscillatory_integral_1d(b, amplitude, hbar, R=12.0, per_wave=8):
    """Direct quadrature of int e^{i b v^2/(2 hbar)} a(v) dv over [-R, R]."""
    waves = abs(b) * R * R / (2 * math.pi * hbar)
    panels = int(max(64, per_wave * waves))
    g, w = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(-R, R, panels + 1)
    half = 0.5 * np.diff(edges)
    v = (0.5 * (edges[1:] + edges[:-1])[:, None] + half[:, None] * g[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return complex(np.sum(wt * np.exp(1j * b * v * v / (2 * hbar)) * amplitude(v)))
