"""Matrices realizing symbols.

Two discretizations are provided.

* The discrete torus ``x_j = -L + j h``, ``h = 2L/n``, with momenta
  ``p_m = (pi hbar / L) m``, ``m = -n/2 .. n/2 - 1``.  Weyl and
  t-quantizations become exact finite formulas evaluated with one FFT per
  sample row.
* Dirichlet finite differences of order-one forms on an interval, giving a
  Hermitian tridiagonal matrix that is reduced to a real symmetric one by a
  diagonal phase gauge (so Sturm counting applies).
"""

from dataclasses import dataclass, field as dc_field
import math
import struct
import warnings

import numpy as np

from .kernels import ROW_LEFT, ROW_MID, ROW_RIGHT, weyl_gather


class QuantizeError(ValueError):
    """Invalid grid, symmetry or sampling condition."""


class NyquistWarning(UserWarning):
    pass


class MidpointWarning(UserWarning):
    """A coefficient's period does not divide L.

    On the discrete torus the midpoint (x_j + x_l)/2 is defined only modulo
    L, so Weyl quantization is faithful only for coefficients of period L.
    """


def _check_midpoint_period(a, L):
    fields = getattr(a, "fields", None)
    if fields is None:
        return
    for f in fields():
        P = getattr(f, "period", None)
        if P is not None and abs(L / P - round(L / P)) > 1e-9:
            warnings.warn(
                f"coefficient {f.name} has period {P:.6g}, which does not divide L = {L:.6g}; "
                "midpoint samples are ambiguous on the torus",
                MidpointWarning,
                stacklevel=3,
            )
            return


# ----------------------------------------------------------------- grids


@dataclass(frozen=True)
class PhaseGrid:
    """Discrete torus in one dimension."""

    n: int
    L: float
    hbar: float
    d: int = 1

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise QuantizeError(f"grid size must be a power of two >= 2, got {self.n}")
        if self.L <= 0 or self.hbar <= 0:
            raise QuantizeError("L and hbar must be positive")
        if self.d != 1:
            raise QuantizeError("torus quantization is implemented for d = 1")

    @property
    def h(self):
        return 2.0 * self.L / self.n

    @property
    def x(self):
        return -self.L + self.h * np.arange(self.n)

    @property
    def m(self):
        return np.arange(-self.n // 2, self.n // 2)

    @property
    def p(self):
        return math.pi * self.hbar / self.L * self.m

    @property
    def p_max(self):
        return math.pi * self.hbar / self.L * (self.n // 2)

    @classmethod
    def covering(cls, L, hbar, p_classical, factor=2.0):
        """Smallest power-of-two grid whose momenta reach factor * p_classical."""
        need = factor * p_classical * L / (math.pi * hbar)
        n = 2
        while n // 2 < need:
            n *= 2
        return cls(n, L, hbar)

    def check_nyquist(self, p_classical, strict=False, factor=2.0):
        if self.p_max < factor * p_classical:
            msg = (
                f"grid momenta reach {self.p_max:.3g} < {factor:g} x classical momentum {p_classical:.3g}"
            )
            if strict:
                raise QuantizeError(msg)
            warnings.warn(msg, NyquistWarning, stacklevel=2)
            return False
        return True


@dataclass
class OperatorMatrix:
    """Dense matrix with its grid."""

    grid: PhaseGrid
    entries: np.ndarray
    hermitian_residual: float = dc_field(default=None)

    def __post_init__(self):
        if self.hermitian_residual is None:
            self.hermitian_residual = hermitian_residual(self.entries)

    @property
    def n(self):
        return self.entries.shape[0]

    def eigvalsh(self):
        return np.linalg.eigvalsh(0.5 * (self.entries + self.entries.conj().T))

    def __matmul__(self, o):
        o = o.entries if isinstance(o, OperatorMatrix) else o
        return OperatorMatrix(self.grid, self.entries @ o)

    def to_binary(self, path):
        write_matrix_binary(path, self.entries, self.grid.hbar, self.grid.L)

    def to_text(self, path=None, fmt="%.17g"):
        return write_matrix_text(path, self.entries, self.grid.hbar, self.grid.L, fmt)


def hermitian_residual(M):
    return float(np.max(np.abs(M - M.conj().T))) if M.size else 0.0


# ----------------------------------------------------------- quantization


def _symbol_values(a, x, p):
    return np.asarray(a(x, p), dtype=complex)


def _row_samples(a, grid, rows):
    """A[s, q] = a(rows[s], p_q), evaluated in row blocks."""
    p = grid.p
    out = np.empty((rows.size, grid.n), dtype=complex)
    step = max(1, 2**21 // grid.n)
    for s in range(0, rows.size, step):
        v = _symbol_values(a, rows[s : s + step, None], p[None, :])
        out[s : s + step] = np.broadcast_to(v, (min(step, rows.size - s), grid.n))
    return out


def _fourier_rows(A):
    n = A.shape[1]
    G = np.fft.ifft(A, axis=1) * n
    return G * np.exp(-1j * math.pi * np.arange(n))[None, :]


def t_quantize_on_torus(a, t, grid, strict=False, p_classical=None):
    """Matrix of Op_t(a) on the discrete torus.

    ``M[j, l] = (1/n) sum_m exp(i (x_j - x_l) p_m / hbar) a((1 - t) x_j + t x_l, p_m)``

    Parameters
    ----------
    a : PolySymbol or callable
        Symbol; callables receive broadcast (x, p) arrays.
    t : float in [0, 1]
    grid : PhaseGrid
    strict : bool
        Escalate the Nyquist check to an error.
    p_classical : float, optional
        Largest classically relevant momentum, for the Nyquist check.

    Returns
    -------
    OperatorMatrix
    """
    if not (0.0 <= t <= 1.0):
        raise QuantizeError(f"t must lie in [0, 1], got {t}")
    if p_classical is not None:
        grid.check_nyquist(p_classical, strict)
    n, h, L = grid.n, grid.h, grid.L
    if t == 0.5:
        _check_midpoint_period(a, L)
        rows = -L + 0.5 * h * np.arange(2 * n - 1)
        M = weyl_gather(_fourier_rows(_row_samples(a, grid, rows)), ROW_MID)
    elif t in (0.0, 1.0):
        M = weyl_gather(_fourier_rows(_row_samples(a, grid, grid.x)), ROW_LEFT if t == 0 else ROW_RIGHT)
    else:
        M = _generic_t(a, t, grid)
    return OperatorMatrix(grid, M)


def _generic_t(a, t, grid):
    n = grid.n
    x, p = grid.x, grid.p
    phase = np.exp(2j * math.pi * np.outer(np.arange(n), grid.m) / n)  # (j - l) -> rows
    M = np.empty((n, n), dtype=complex)
    for j in range(n):
        pos = (1 - t) * x[j] + t * x
        A = _symbol_values(a, pos[:, None], p[None, :])
        A = np.broadcast_to(A, (n, n))
        ph = phase[(j - np.arange(n)) % n]
        M[j] = np.sum(ph * A, axis=1) / n
    return M


def weyl_quantize_on_torus(a, grid, strict=False, p_classical=None):
    """Weyl quantization (t = 1/2) on the discrete torus."""
    return t_quantize_on_torus(a, 0.5, grid, strict, p_classical)


def quantize_series(series, grid, t=0.5):
    """sum_j hbar^j Op_t(series[j])."""
    out = np.zeros((grid.n, grid.n), dtype=complex)
    for j, s in enumerate(series):
        if s is None or (hasattr(s, "is_zero") and s.is_zero()):
            continue
        out += grid.hbar**j * t_quantize_on_torus(s, t, grid).entries
    return OperatorMatrix(grid, out)


def operator_norm(M):
    """Spectral norm; the top singular value comes from ARPACK for large matrices."""
    M = M.entries if isinstance(M, OperatorMatrix) else np.asarray(M)
    if M.shape[0] <= 512:
        return float(np.linalg.norm(M, 2))
    from scipy.sparse.linalg import svds

    return float(svds(M, k=1, return_singular_vectors=False, tol=1e-8, random_state=0)[0])


def low_momentum_norm(M, grid, frac=0.5):
    """Spectral norm of the compression of M to momenta |p| <= frac * p_max.

    Unbounded symbols are cut off by the grid's momentum range; compressing
    to the lower part of the band removes the wrap-around seam so that
    residual norms reflect the symbol calculus rather than aliasing.
    """
    M = M.entries if isinstance(M, OperatorMatrix) else np.asarray(M)
    n = M.shape[0]
    Mh = np.fft.ifft(np.fft.fft(M, axis=0), axis=1)
    k = np.fft.fftfreq(n) * n
    sel = np.nonzero(np.abs(k) <= frac * n / 2)[0]
    return operator_norm(Mh[np.ix_(sel, sel)])


def trace_of_quantization(a, grid):
    """Trace of Op_W(a) on the torus: (1/n) sum_j sum_m a(x_j, p_m)."""
    A = _row_samples(a, grid, grid.x)
    return complex(np.sum(A) / grid.n)


def phase_space_integral(a, x_range, p_range, nx=2048, np_=2048):
    """Tensor Gauss-Legendre integral of a symbol over a box (oracle)."""
    gx, wx = _gl_panels(x_range, nx)
    gp, wp = _gl_panels(p_range, np_)
    total = 0.0
    step = max(1, 2**21 // gp.size)
    for s in range(0, gx.size, step):
        v = _symbol_values(a, gx[s : s + step, None], gp[None, :])
        total += np.real(wx[s : s + step] @ v @ wp)
    return float(total)


def _gl_panels(rng, n, order=16):
    panels = max(1, n // order)
    g, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(rng[0], rng[1], panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * g[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return x, wt


# ------------------------------------------------------------------ dilation


def dilated_grid(grid, eps, delta):
    """Grid for hbar' = hbar^delta on the dilated torus [-L/eps, L/eps)."""
    return PhaseGrid(grid.n, grid.L / eps, grid.hbar**delta)


def dilate_symbol(a, eps, hbar, delta):
    """Symbol a(eps x, hbar^{1 - delta} p / eps) seen at semiclassical scale hbar^delta."""
    s = hbar ** (1.0 - delta) / eps

    def dilated(x, p):
        return _symbol_values(a, eps * np.asarray(x), s * np.asarray(p))

    return dilated


# ---------------------------------------------------------------- forms


@dataclass
class FormOperator1D:
    """Dirichlet finite-difference realization of an order-one form.

    Attributes
    ----------
    x : ndarray
        Interior nodes.
    diag : ndarray (real)
    off : ndarray (complex)
        Upper off-diagonal of the Hermitian tridiagonal matrix.
    hbar : float
    """

    x: np.ndarray
    diag: np.ndarray
    off: np.ndarray
    hbar: float
    x_lo: float
    x_hi: float

    @property
    def n(self):
        return self.diag.size

    @property
    def h(self):
        return (self.x_hi - self.x_lo) / (self.n + 1)

    def real_tridiagonal(self):
        """(d, e) of a real symmetric matrix unitarily equivalent to this one."""
        return self.diag.copy(), np.abs(self.off)

    def to_dense(self):
        M = np.diag(self.diag.astype(complex))
        M += np.diag(self.off, 1) + np.diag(self.off.conj(), -1)
        return M

    @property
    def is_real(self):
        return not np.any(np.imag(self.off))


def assemble_form_operator(form, x_lo, x_hi, n, hbar):
    """Three-point flux discretization of sum (hD)^alpha a_{alpha beta} (hD)^beta.

    Parameters
    ----------
    form : list of FormTerm or tuples
        Pairs with |alpha|, |beta| <= 1 in one dimension.
    x_lo, x_hi : float
        Dirichlet interval.
    n : int
        Number of interior nodes.
    hbar : float

    Returns
    -------
    FormOperator1D
    """
    from .coeffs import as_form

    terms = as_form(form)
    h = (x_hi - x_lo) / (n + 1)
    x = x_lo + h * np.arange(1, n + 1)
    xm = x_lo + h * (np.arange(n + 1) + 0.5)  # x_{j - 1/2}, j = 0..n
    diag = np.zeros(n)
    off = np.zeros(n - 1, dtype=complex)
    c01 = np.zeros(n, dtype=complex)
    c10 = np.zeros(n, dtype=complex)
    for t in terms:
        a, b = t.alpha[0], t.beta[0]
        if len(t.alpha) != 1 or a > 1 or b > 1:
            raise QuantizeError("form operators are assembled for m = 1, d = 1")
        s = complex(t.scale)
        if a == 1 and b == 1:
            if s.imag:
                raise QuantizeError("top-order coefficient must be real")
            w = s.real * t.field.eval(xm) * hbar**2 / h**2
            diag += w[:-1] + w[1:]
            off -= w[1:-1]
        elif a == 0 and b == 0:
            if s.imag:
                raise QuantizeError("zeroth-order coefficient must be real")
            diag += s.real * t.field.eval(x)
        elif a == 0:
            c01 += s * t.field.eval(x)
        else:
            c10 += s * t.field.eval(x)
    k = -1j * hbar / (2 * h)
    up = k * (c01[:-1] + c10[1:])
    low = -k * (c01[1:] + c10[:-1])
    resid = float(np.max(np.abs(low - up.conj()))) if n > 1 else 0.0
    if resid > 1e-12 * max(1.0, float(np.max(np.abs(up))) if n > 1 else 1.0):
        raise QuantizeError(f"form is not Hermitian: assembly residual {resid:.3e}")
    off = off + up
    return FormOperator1D(x, diag, off, hbar, x_lo, x_hi)


def form_operator_on_torus(form, grid):
    """Spectral realization of sum (hD)^alpha a_{alpha beta} (hD)^beta on the torus.

    ``hD`` acts as the Fourier multiplier p_m; coefficients must be periodic
    with a period dividing 2 L.

    Returns
    -------
    OperatorMatrix
    """
    from .coeffs import as_form

    n, x = grid.n, grid.x
    k = np.fft.fftfreq(n) * n
    pk = math.pi * grid.hbar * k / grid.L
    D = np.fft.ifft(pk[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0)
    H = np.zeros((n, n), dtype=complex)
    for t in as_form(form):
        if len(t.alpha) != 1 or t.alpha[0] > 1 or t.beta[0] > 1:
            raise QuantizeError("torus form operators are built for m = 1, d = 1")
        c = complex(t.scale) * t.field.eval(x)
        a, b = t.alpha[0], t.beta[0]
        if a and b:
            H += D @ (c[:, None] * D)
        elif a:
            H += D @ np.diag(c)
        elif b:
            H += c[:, None] * D
        else:
            H += np.diag(c)
    res = hermitian_residual(H)
    if res > 1e-10 * max(1.0, float(np.max(np.abs(H)))):
        raise QuantizeError(f"form is not Hermitian: residual {res:.3e}")
    return OperatorMatrix(grid, 0.5 * (H + H.conj().T))


# -------------------------------------------------------------- Garding


def garding_check(a, hbars, L=2 * math.pi, p_classical=4.0, frac=None):
    """Lowest eigenvalue of Op_W(a) across an hbar sweep.

    Returns
    -------
    dict
        ``hbar``, ``min_eig``, ``neg_part`` lists and the fitted exponents of
        |min_eig| and of the negative part (``None`` when it vanishes).
    """
    from .fitting import fit_slope

    mins = []
    for hb in hbars:
        grid = PhaseGrid.covering(L, hb, p_classical)
        M = weyl_quantize_on_torus(a, grid)
        from scipy.linalg import eigh

        mins.append(float(eigh(M.entries, eigvals_only=True, subset_by_index=[0, 0], driver="evr")[0]))
    neg = [max(0.0, -m) for m in mins]
    absmin = [abs(m) for m in mins]
    rep = {"hbar": list(hbars), "min_eig": mins, "neg_part": neg}
    rep["abs_min_slope"] = fit_slope(hbars, absmin) if all(v > 0 for v in absmin) else None
    rep["neg_part_slope"] = fit_slope(hbars, neg) if all(v > 0 for v in neg) else None
    return rep


# ---------------------------------------------------------------- export

_HEADER = struct.Struct("<qdd")


def write_matrix_binary(path, M, hbar, L):
    """Little-endian layout: int64 n, float64 hbar, float64 L, then the real
    parts row-major, then (complex matrices only) the imaginary parts."""
    M = np.asarray(M)
    n = M.shape[0]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(n, float(hbar), float(L)))
        fh.write(np.ascontiguousarray(M.real, dtype="<f8").tobytes())
        if np.iscomplexobj(M) and np.any(M.imag):
            fh.write(np.ascontiguousarray(M.imag, dtype="<f8").tobytes())


def read_matrix_binary(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    n, hbar, L = _HEADER.unpack_from(raw)
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size == n * n:
        M = body.reshape(n, n).copy()
    elif body.size == 2 * n * n:
        M = body[: n * n].reshape(n, n) + 1j * body[n * n :].reshape(n, n)
    else:
        raise QuantizeError(f"corrupt matrix file {path}: {body.size} values for n={n}")
    return M, hbar, L


def write_matrix_text(path, M, hbar, L, fmt="%.17g"):
    M = np.asarray(M)
    lines = [f"# n={M.shape[0]} hbar={hbar!r} L={L!r}"]
    cplx = np.iscomplexobj(M) and np.any(M.imag)
    for row in M:
        if cplx:
            lines.append(
                " ".join(f"{fmt % v.real}{'-' if v.imag < 0 else '+'}{fmt % abs(v.imag)}j" for v in row)
            )
        else:
            lines.append(" ".join(fmt % float(np.real(v)) for v in row))
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text
