"""Polynomial-in-p symbol algebra with exact constants.

Symbols are finite sums ``sum_alpha c_alpha(x) p^alpha``.  Each coefficient
``c_alpha`` is a polynomial in *coefficient atoms* ``d_x^eta f`` (a field
``f`` differentiated ``eta`` times) with exact Gaussian-rational constants,
so symbolic identities can be decided by comparing normal forms.

:class:`SymbolExpr` is the second layer: polynomials in derivative atoms
``d_x^eta d_p^gamma a_j`` of a whole symbol series, multiplied by at most one
*outer* factor, either a resolvent power ``B^n = (a_0 - z)^{-n}`` or a
derivative ``f^{(k)}(g)`` of a scalar function composed with a symbol.
"""

from fractions import Fraction
from itertools import product
import math

import numpy as np

# ----------------------------------------------------------- exact constants


def _frac(v):
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    return Fraction(float(v))


class GQ:
    """Exact complex rational ``re + i im``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    @classmethod
    def of(cls, v):
        if isinstance(v, GQ):
            return v
        if isinstance(v, (complex, np.complexfloating)):
            return cls(v.real, v.imag)
        return cls(v, 0)

    def __add__(self, o):
        o = GQ.of(o)
        return GQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = GQ.of(o)
        return GQ(self.re - o.re, self.im - o.im)

    def __neg__(self):
        return GQ(-self.re, -self.im)

    def __mul__(self, o):
        o = GQ.of(o)
        return GQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = GQ.of(o)
        den = o.re * o.re + o.im * o.im
        return GQ((self.re * o.re + self.im * o.im) / den, (self.im * o.re - self.re * o.im) / den)

    def conj(self):
        return GQ(self.re, -self.im)

    def __eq__(self, o):
        if not isinstance(o, (GQ, int, float, complex, Fraction)):
            return NotImplemented
        o = GQ.of(o)
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GQ({self})"

    def __str__(self):
        if not self.im:
            return _fstr(self.re)
        if abs(self.im) == 1:
            im = "i" if self.im > 0 else "-i"
        else:
            im = f"{_fstr(self.im)}*i"
        if not self.re:
            return im
        if self.im > 0:
            return f"{_fstr(self.re)}+{im}"
        return f"{_fstr(self.re)}{im}"


def _fstr(f):
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


ONE = GQ(1)
I = GQ(0, 1)
MINUS_I = GQ(0, -1)


def i_power(n):
    return [GQ(1), GQ(0, 1), GQ(-1), GQ(0, -1)][n % 4]


# -------------------------------------------------------------- multi-index


class MultiIndex(tuple):
    """Non-negative integer tuple with elementwise arithmetic."""

    def __new__(cls, entries):
        if isinstance(entries, (int, np.integer)):
            entries = (int(entries),)
        entries = tuple(int(e) for e in entries)
        if any(e < 0 for e in entries):
            raise ValueError(f"negative multi-index entry in {entries}")
        return super().__new__(cls, entries)

    @property
    def order(self):
        return sum(self)

    def __abs__(self):
        return sum(self)

    def factorial(self):
        out = 1
        for e in self:
            out *= math.factorial(e)
        return out

    def binom(self, other):
        out = 1
        for a, b in zip(self, other):
            if b > a:
                return 0
            out *= math.comb(a, b)
        return out

    def __add__(self, other):
        return MultiIndex(a + b for a, b in zip(self, other))

    def __sub__(self, other):
        return MultiIndex(a - b for a, b in zip(self, other))

    def le(self, other):
        return all(a <= b for a, b in zip(self, other))

    @classmethod
    def unit(cls, d, i):
        return cls(1 if j == i else 0 for j in range(d))

    @classmethod
    def zero(cls, d):
        return cls((0,) * d)


def multi_indices(d, r):
    """All multi-indices of dimension d and order r, in lexicographic order."""
    if d == 1:
        return [MultiIndex((r,))]
    out = []
    for head in range(r, -1, -1):
        for tail in multi_indices(d - 1, r - head):
            out.append(MultiIndex((head,) + tuple(tail)))
    return out


# ------------------------------------------------------- coefficient atoms

_FIELDS = []
_FIELD_INDEX = {}


def intern_field(f):
    """Stable integer key for a field object (kept alive by the registry)."""
    key = id(f)
    if key not in _FIELD_INDEX:
        _FIELD_INDEX[key] = len(_FIELDS)
        _FIELDS.append(f)
    return _FIELD_INDEX[key]


def field_of(key):
    return _FIELDS[key]


class CoefPoly:
    """Polynomial in coefficient atoms ``(field_key, eta)``.

    ``terms`` maps a sorted tuple of atoms (repetition = power) to a
    :class:`GQ` constant.  The empty tuple is the constant monomial.
    """

    __slots__ = ("terms", "dim")

    def __init__(self, terms=None, dim=1):
        self.dim = dim
        self.terms = {}
        for k, v in (terms or {}).items():
            v = GQ.of(v)
            if v:
                self.terms[k] = self.terms.get(k, GQ()) + v
        self.terms = {k: v for k, v in self.terms.items() if v}

    @classmethod
    def const(cls, c, dim=1):
        return cls({(): c}, dim)

    @classmethod
    def field(cls, f, scale=1, dim=None):
        dim = f.dim if dim is None else dim
        if getattr(f, "is_constant", lambda: False)():
            return cls.const(GQ.of(scale) * GQ.of(float(np.asarray(f.eval(_origin(dim))))), dim)
        return cls({((intern_field(f), MultiIndex.zero(dim)),): scale}, dim)

    def is_zero(self):
        return not self.terms

    def __add__(self, o):
        if not isinstance(o, CoefPoly):
            o = CoefPoly.const(o, self.dim)
        t = dict(self.terms)
        for k, v in o.terms.items():
            t[k] = t.get(k, GQ()) + v
        return CoefPoly(t, self.dim)

    __radd__ = __add__

    def __neg__(self):
        return CoefPoly({k: -v for k, v in self.terms.items()}, self.dim)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c):
        c = GQ.of(c)
        if not c:
            return CoefPoly({}, self.dim)
        return CoefPoly({k: v * c for k, v in self.terms.items()}, self.dim)

    def __mul__(self, o):
        if not isinstance(o, CoefPoly):
            return self.scale(o)
        t = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in o.terms.items():
                k = tuple(sorted(k1 + k2))
                t[k] = t.get(k, GQ()) + v1 * v2
        return CoefPoly(t, self.dim)

    __rmul__ = __mul__

    def conj(self):
        return CoefPoly({k: v.conj() for k, v in self.terms.items()}, self.dim)

    def dx(self, i=0):
        """Partial derivative in x_i by the product rule on atoms."""
        t = {}
        unit = MultiIndex.unit(self.dim, i)
        for mono, c in self.terms.items():
            for pos, (key, eta) in enumerate(mono):
                new = eta + unit
                f = field_of(key)
                if new.order > f.max_order():
                    from .coeffs import FieldError

                    raise FieldError(
                        f"atom d_x^{tuple(new)} {f.name}: derivative order {new.order} exceeds the field's "
                        f"C^{f.k},{f.mu} class"
                    )
                m = tuple(sorted(mono[:pos] + ((key, new),) + mono[pos + 1 :]))
                t[m] = t.get(m, GQ()) + c
        return CoefPoly(t, self.dim)

    def dx_multi(self, eta):
        out = self
        for i, e in enumerate(eta):
            for _ in range(e):
                out = out.dx(i)
        return out

    def eval(self, x, cache=None):
        x = np.asarray(x, dtype=float)
        shape = x.shape if self.dim == 1 else x.shape[:-1]
        out = np.zeros(shape, dtype=complex)
        cache = {} if cache is None else cache
        for mono, c in self.terms.items():
            val = np.full(shape, complex(c))
            for key, eta in mono:
                ck = (key, eta)
                if ck not in cache:
                    f = field_of(key)
                    cache[ck] = np.asarray(f.deriv(eta if self.dim > 1 else eta[0], x), dtype=float)
                val = val * cache[ck]
            out = out + val
        return out

    def atoms(self):
        return {a for mono in self.terms for a in mono}

    def max_derivative(self):
        return max((eta.order for mono in self.terms for _, eta in mono), default=0)

    def is_constant(self):
        return all(not mono for mono in self.terms)

    def constant_value(self):
        return self.terms.get((), GQ())

    def __eq__(self, o):
        if not isinstance(o, CoefPoly):
            o = CoefPoly.const(o, self.dim)
        return self.terms == o.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=_mono_key):
            c = self.terms[mono]
            body = "*".join(_atom_str(a) for a in mono)
            if not body:
                parts.append(f"({c})")
            elif c == 1:
                parts.append(body)
            else:
                parts.append(f"({c})*{body}")
        return " + ".join(parts)


def _origin(dim):
    return np.zeros(()) if dim == 1 else np.zeros(dim)


def _mono_key(mono):
    return (len(mono), tuple((k, tuple(e)) for k, e in mono))


def _atom_str(atom):
    key, eta = atom
    name = field_of(key).name
    if eta.order == 0:
        return name
    return f"d{''.join(map(str, eta))}[{name}]"


# ------------------------------------------------------------ poly symbols


class PolySymbol:
    """Symbol ``sum_alpha c_alpha(x) p^alpha`` multiplying ``hbar**hbar_order``.

    Parameters
    ----------
    terms : dict
        Maps p-power multi-indices to :class:`CoefPoly` (or to fields,
        numbers, or ``(scale, field)`` pairs, converted on entry).
    dim : int
    hbar_order : int
    """

    __slots__ = ("terms", "dim", "hbar_order")

    def __init__(self, terms=None, dim=1, hbar_order=0):
        self.dim = dim
        self.hbar_order = hbar_order
        t = {}
        for alpha, c in (terms or {}).items():
            alpha = MultiIndex(alpha)
            if len(alpha) != dim:
                raise ValueError(f"p-power {tuple(alpha)} does not match dimension {dim}")
            c = _to_coef(c, dim)
            t[alpha] = t.get(alpha, CoefPoly({}, dim)) + c
        self.terms = {a: c for a, c in t.items() if not c.is_zero()}

    # construction helpers
    @classmethod
    def zero(cls, dim=1):
        return cls({}, dim)

    @classmethod
    def constant(cls, c, dim=1):
        return cls({MultiIndex.zero(dim): CoefPoly.const(c, dim)}, dim)

    @classmethod
    def monomial(cls, alpha, coef=1, dim=None):
        alpha = MultiIndex(alpha)
        dim = len(alpha) if dim is None else dim
        return cls({alpha: coef}, dim)

    # algebra
    def __add__(self, o):
        if not isinstance(o, PolySymbol):
            o = PolySymbol.constant(o, self.dim)
        t = dict(self.terms)
        for a, c in o.terms.items():
            t[a] = t[a] + c if a in t else c
        return PolySymbol(t, self.dim, self.hbar_order)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, o):
        return self + (-o)

    def __rsub__(self, o):
        return (-self) + o

    def scale(self, c):
        return PolySymbol({a: v.scale(c) for a, v in self.terms.items()}, self.dim, self.hbar_order)

    def __mul__(self, o):
        if not isinstance(o, PolySymbol):
            return self.scale(o)
        t = {}
        for a1, c1 in self.terms.items():
            for a2, c2 in o.terms.items():
                a = a1 + a2
                c = c1 * c2
                t[a] = t[a] + c if a in t else c
        return PolySymbol(t, self.dim, self.hbar_order)

    __rmul__ = __mul__

    def conj(self):
        return PolySymbol({a: c.conj() for a, c in self.terms.items()}, self.dim, self.hbar_order)

    # differentiation
    def dp(self, i=0, times=1):
        out = self
        for _ in range(times):
            t = {}
            for a, c in out.terms.items():
                if a[i] == 0:
                    continue
                b = MultiIndex(tuple(a[j] - (1 if j == i else 0) for j in range(self.dim)))
                t[b] = c.scale(a[i])
            out = PolySymbol(t, self.dim, self.hbar_order)
        return out

    def dx(self, i=0, times=1):
        out = self
        for _ in range(times):
            out = PolySymbol({a: c.dx(i) for a, c in out.terms.items()}, self.dim, self.hbar_order)
        return out

    def dp_multi(self, gamma):
        out = self
        for i, g in enumerate(gamma):
            if g:
                out = out.dp(i, g)
        return out

    def dx_multi(self, eta):
        out = self
        for i, e in enumerate(eta):
            if e:
                out = out.dx(i, e)
        return out

    def Dx_multi(self, eta):
        """(-i d_x)^eta."""
        return self.dx_multi(eta).scale(i_power(-sum(eta)))

    def Dp_multi(self, gamma):
        return self.dp_multi(gamma).scale(i_power(-sum(gamma)))

    # inspection
    @property
    def order(self):
        return max((a.order for a in self.terms), default=0)

    def p_degree(self, i=0):
        return max((a[i] for a in self.terms), default=0)

    def is_zero(self):
        return not self.terms

    def is_x_constant(self):
        return all(c.is_constant() for c in self.terms.values())

    def coefficient(self, alpha):
        return self.terms.get(MultiIndex(alpha), CoefPoly({}, self.dim))

    def __eq__(self, o):
        if isinstance(o, (int, float, complex)):
            o = PolySymbol.constant(o, self.dim) if o else PolySymbol.zero(self.dim)
        if not isinstance(o, PolySymbol):
            return NotImplemented
        return self.dim == o.dim and self.terms == o.terms

    def __hash__(self):
        return hash(frozenset((a, hash(c)) for a, c in self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for a in sorted(self.terms):
            c = self.terms[a]
            pw = _ppow_str(a)
            cs = str(c)
            if len(c.terms) > 1:
                cs = f"[{cs}]"
            parts.append(cs if not pw else (pw if cs == "1" else f"{cs}*{pw}"))
        return " + ".join(parts)

    __repr__ = __str__

    # evaluation
    def eval(self, x, p, cache=None):
        """Evaluate on broadcastable x, p arrays.

        In one dimension ``x`` and ``p`` are plain arrays.  In two dimensions
        the trailing axis of each holds the components.
        """
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        if self.dim == 1:
            out = np.zeros(np.broadcast_shapes(x.shape, p.shape), dtype=complex)
        else:
            out = np.zeros(np.broadcast_shapes(x.shape[:-1], p.shape[:-1]), dtype=complex)
        cache = {} if cache is None else cache
        for a, c in self.terms.items():
            cv = c.eval(x, cache)
            if self.dim == 1:
                pv = p ** a[0] if a[0] else 1.0
            else:
                pv = 1.0
                for i, e in enumerate(a):
                    if e:
                        pv = pv * p[..., i] ** e
            out = out + cv * pv
        return out

    def __call__(self, x, p):
        return self.eval(x, p)

    def fields(self):
        return {field_of(k) for c in self.terms.values() for k, _ in c.atoms()}


def _ppow_str(a):
    if a.order == 0:
        return ""
    if len(a) == 1:
        return "p" if a[0] == 1 else f"p^{a[0]}"
    return "*".join(f"p{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(a) if e)


def _to_coef(c, dim):
    if isinstance(c, CoefPoly):
        return c
    if isinstance(c, tuple) and len(c) == 2:
        s, f = c
        return CoefPoly.field(f, s, dim)
    if hasattr(c, "deriv"):
        return CoefPoly.field(c, 1, dim)
    return CoefPoly.const(c, dim)


def eval_symbol(a, x, p):
    """Value of a PolySymbol at a point (or broadcast arrays)."""
    v = a.eval(x, p)
    if np.ndim(v) == 0:
        v = complex(v)
        return v.real if v.imag == 0 else v
    return v


def symbol(spec, dim=1):
    """Shorthand: ``symbol({2: 1, 0: V})`` for p^2 + V(x) in one dimension."""
    return PolySymbol({(k,) if isinstance(k, int) else k: v for k, v in spec.items()}, dim)


# ------------------------------------------------------------- composition


def moyal_terms(a, b, t=0.5, N=2):
    """Composition coefficients ``c_0..c_N`` of Op_t(a) Op_t(b).

    Parameters
    ----------
    a, b : PolySymbol
    t : {0, 1/2, 1}
    N : int

    Returns
    -------
    list of PolySymbol
        ``c_j`` multiplies ``hbar**j``; for polynomial symbols the series
        terminates and later entries are zero.
    """
    t = Fraction(t).limit_denominator(64) if not isinstance(t, Fraction) else t
    if t not in (Fraction(0), Fraction(1, 2), Fraction(1)):
        raise ValueError(f"composition implemented for t in {{0, 1/2, 1}}, got {float(t)}")
    if N < 0:
        raise ValueError("N must be non-negative")
    d = a.dim
    out = []
    for j in range(N + 1):
        c = PolySymbol.zero(d)
        if t == Fraction(1, 2):
            for ra in range(j + 1):
                for al in multi_indices(d, ra):
                    for be in multi_indices(d, j - ra):
                        k = GQ(Fraction(1, al.factorial() * be.factorial()) * Fraction(1, 2) ** ra * Fraction(-1, 2) ** (j - ra))
                        left = a.dp_multi(al).Dx_multi(be)
                        if left.is_zero():
                            continue
                        right = b.dp_multi(be).Dx_multi(al)
                        if right.is_zero():
                            continue
                        c = c + (left * right).scale(k)
        else:
            for al in multi_indices(d, j):
                k = GQ(Fraction(1, al.factorial()))
                if t == 0:
                    term = a.dp_multi(al) * b.Dx_multi(al)
                else:
                    term = a.Dx_multi(al) * b.dp_multi(al)
                    k = k * (-1) ** j
                c = c + term.scale(k)
        c.hbar_order = j
        out.append(c)
    return out


def requantize(series, t1, t2, N):
    """Convert an Op_{t1} symbol series to the Op_{t2} series through order N.

    Order j of the result is sum_{i + r = j} (t1 - t2)^r sum_{|alpha| = r}
    (1/alpha!) d_x^alpha D_p^alpha b_i.
    """
    if isinstance(series, PolySymbol):
        series = [series]
    series = list(series)
    d = series[0].dim
    dt = _frac(t1) - _frac(t2)
    out = []
    for j in range(N + 1):
        c = PolySymbol.zero(d)
        for i in range(min(j, len(series) - 1) + 1):
            r = j - i
            for al in multi_indices(d, r):
                k = GQ(dt**r / al.factorial())
                if not k:
                    continue
                c = c + series[i].Dp_multi(al).dx_multi(al).scale(k)
        c.hbar_order = j
        out.append(c)
    return out


def form_principal(form):
    """Principal symbol a_0 = sum a_{alpha beta}(x) p^{alpha + beta}."""
    from .coeffs import as_form

    terms = as_form(form)
    d = len(terms[0].alpha)
    out = PolySymbol.zero(d)
    for t in terms:
        out = out + PolySymbol({MultiIndex(t.alpha) + MultiIndex(t.beta): CoefPoly.field(t.field, t.scale, d)}, d)
    return out


def subprincipal_from_form(form):
    """Weyl subprincipal symbol of the operator sum (hD)^alpha a_{alpha beta} (hD)^beta.

    a_1 = i sum_{alpha, beta} sum_j ((beta_j - alpha_j)/2) d_{x_j} a_{alpha beta}(x) p^{alpha + beta - e_j}
    """
    from .coeffs import as_form

    terms = as_form(form)
    d = len(terms[0].alpha)
    out = PolySymbol.zero(d)
    for t in terms:
        al, be = MultiIndex(t.alpha), MultiIndex(t.beta)
        s = al + be
        coef = CoefPoly.field(t.field, t.scale, d)
        for j in range(d):
            w = be[j] - al[j]
            if w == 0 or s[j] == 0:
                continue
            k = I * GQ(Fraction(w, 2))
            pw = MultiIndex(tuple(s[i] - (1 if i == j else 0) for i in range(d)))
            out = out + PolySymbol({pw: coef.dx(j).scale(k)}, d)
    out.hbar_order = 1
    return out


# ------------------------------------------------------------- expressions


class SymbolExpr:
    """Polynomial in derivative atoms with at most one outer factor.

    Atoms are ``(label, j, eta, gamma)`` standing for d_x^eta d_p^gamma of
    the j-th member of the series called ``label``.  The outer factor is
    ``B^n`` (kind ``'B'``, B = (a_0 - z)^{-1} with a_0 the label's 0-th
    member) or ``f^{(n)}(g)`` (kind ``'F'``, g the label's 0-th member).
    ``None`` means no outer factor.
    """

    __slots__ = ("terms", "kind", "label", "dim")

    def __init__(self, terms=None, kind="B", label="a", dim=1):
        self.kind, self.label, self.dim = kind, label, dim
        t = {}
        for k, v in (terms or {}).items():
            v = GQ.of(v)
            if v:
                t[k] = t.get(k, GQ()) + v
        self.terms = {k: v for k, v in t.items() if v}

    def _new(self, terms):
        return SymbolExpr(terms, self.kind, self.label, self.dim)

    @classmethod
    def atom(cls, j, eta=None, gamma=None, kind="B", label="a", dim=1, coef=1):
        eta = MultiIndex.zero(dim) if eta is None else MultiIndex(eta)
        gamma = MultiIndex.zero(dim) if gamma is None else MultiIndex(gamma)
        return cls({(((label, j, eta, gamma),), None): coef}, kind, label, dim)

    @classmethod
    def outer(cls, n, kind="B", label="a", dim=1, coef=1):
        return cls({((), n): coef}, kind, label, dim)

    @classmethod
    def const(cls, c, kind="B", label="a", dim=1):
        return cls({((), None): c}, kind, label, dim)

    def is_zero(self):
        return not self.terms

    def __add__(self, o):
        t = dict(self.terms)
        for k, v in o.terms.items():
            t[k] = t.get(k, GQ()) + v
        return self._new(t)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c):
        c = GQ.of(c)
        return self._new({k: v * c for k, v in self.terms.items()})

    def _merge_outer(self, o1, o2):
        if o1 is None:
            return o2
        if o2 is None:
            return o1
        if self.kind == "B":
            return o1 + o2
        raise ValueError("products of two f^{(k)}(g) factors are outside the expression class")

    def __mul__(self, o):
        if not isinstance(o, SymbolExpr):
            return self.scale(o)
        t = {}
        for (a1, n1), v1 in self.terms.items():
            for (a2, n2), v2 in o.terms.items():
                k = (tuple(sorted(a1 + a2, key=_satom_key)), self._merge_outer(n1, n2))
                t[k] = t.get(k, GQ()) + v1 * v2
        return self._new(t)

    def d(self, var, i=0):
        """Partial derivative in x_i (var='x') or p_i (var='p')."""
        unit = MultiIndex.unit(self.dim, i)
        t = {}

        def add(k, v):
            t[k] = t.get(k, GQ()) + v

        base_atom = (self.label, 0, unit if var == "x" else MultiIndex.zero(self.dim), unit if var == "p" else MultiIndex.zero(self.dim))
        for (atoms, n), v in self.terms.items():
            for pos, (lab, j, eta, gam) in enumerate(atoms):
                new = (lab, j, eta + unit, gam) if var == "x" else (lab, j, eta, gam + unit)
                k = (tuple(sorted(atoms[:pos] + (new,) + atoms[pos + 1 :], key=_satom_key)), n)
                add(k, v)
            if n is None:
                continue
            if self.kind == "B":
                if n == 0:
                    continue
                k = (tuple(sorted(atoms + (base_atom,), key=_satom_key)), n + 1)
                add(k, v * (-n))
            else:
                k = (tuple(sorted(atoms + (base_atom,), key=_satom_key)), n + 1)
                add(k, v)
        return self._new(t)

    def d_multi(self, eta, gamma):
        out = self
        for i, e in enumerate(eta):
            for _ in range(e):
                out = out.d("x", i)
        for i, g in enumerate(gamma):
            for _ in range(g):
                out = out.d("p", i)
        return out

    def D_multi(self, eta, gamma):
        """(-i d_x)^eta d_p^gamma."""
        return self.d_multi(eta, gamma).scale(i_power(-sum(eta)))

    # structure
    def by_outer(self):
        """Group into {outer power: expression without outer factor}."""
        out = {}
        for (atoms, n), v in self.terms.items():
            out.setdefault(n, {})[(atoms, None)] = v
        return {n: self._new(t) for n, t in out.items()}

    def atoms(self):
        return {a for (atoms, _), _v in self.terms.items() for a in atoms}

    def outer_powers(self):
        return {n for (_, n) in self.terms}

    def max_weight(self):
        """max over atoms of |eta| + |gamma| + j."""
        return max((e.order + g.order + j for (_, j, e, g) in self.atoms()), default=0)

    def eps_exponent(self, tau):
        """Worst eps-power carried by any monomial when a_j is of class tau - j."""
        worst = 0.0
        for (atoms, _), _v in self.terms.items():
            s = sum(min(0.0, tau - j - e.order) for (_, j, e, _g) in atoms)
            worst = min(worst, s)
        return worst

    def x_derivative_total(self):
        return {sum(e.order for (_, _, e, _) in atoms) for (atoms, _) in self.terms}

    def p_derivative_total(self):
        return {sum(g.order for (_, _, _, g) in atoms) for (atoms, _) in self.terms}

    def prune(self, is_zero_atom):
        return self._new({k: v for k, v in self.terms.items() if not any(is_zero_atom(a) for a in k[0])})

    def __eq__(self, o):
        if not isinstance(o, SymbolExpr):
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for key in sorted(self.terms, key=_sterm_key):
            atoms, n = key
            v = self.terms[key]
            fac = [self._outer_str(n)] if n is not None else []
            fac += [_satom_str(a, self.dim) for a in atoms]
            body = "*".join(fac)
            if not body:
                parts.append(f"({v})")
            elif v == 1:
                parts.append(body)
            elif v == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"({v})*{body}")
        return " + ".join(parts)

    __repr__ = __str__

    def _outer_str(self, n):
        if self.kind == "B":
            return "B" if n == 1 else f"B^{n}"
        return f"f^({n})({self.label}0)" if self.label != "g" else f"f^({n})(g)"

    # numerics
    def evaluate(self, x, p, series, outer_value, cache=None):
        """Evaluate with a symbol series and an outer-factor callback.

        Parameters
        ----------
        x, p : arrays (broadcastable)
        series : dict or list
            ``series[label][j]`` (or ``series[j]`` when a list) is a
            PolySymbol; missing members count as zero.
        outer_value : callable
            ``outer_value(n)`` returns the array of B^n or f^{(n)}(g).
        """
        cache = {} if cache is None else cache
        out = 0.0
        ocache = {}
        for (atoms, n), v in self.terms.items():
            val = complex(v)
            for a in atoms:
                if a not in cache:
                    cache[a] = _atom_value(a, x, p, series)
                val = val * cache[a]
            if n is not None:
                if n not in ocache:
                    ocache[n] = outer_value(n)
                val = val * ocache[n]
            out = out + val
        return out


def _satom_key(a):
    lab, j, e, g = a
    return (lab, j, tuple(e), tuple(g))


def _sterm_key(k):
    atoms, n = k
    return (-1 if n is None else n, len(atoms), tuple(_satom_key(a) for a in atoms))


def _satom_str(a, dim):
    lab, j, e, g = a
    name = f"{lab}{j}" if lab != "g" else "g"
    ds = ""
    if e.order:
        ds += "x" + ("".join(map(str, e)) if dim > 1 else (str(e[0]) if e[0] > 1 else ""))
    if g.order:
        ds += "p" + ("".join(map(str, g)) if dim > 1 else (str(g[0]) if g[0] > 1 else ""))
    return f"{name}_{ds}" if ds else name


def _series_member(series, lab, j):
    s = series[lab] if isinstance(series, dict) else series
    if isinstance(s, PolySymbol):
        s = [s]
    if j >= len(s) or s[j] is None:
        return None
    return s[j]


def _atom_value(a, x, p, series):
    lab, j, e, g = a
    sym = _series_member(series, lab, j)
    if sym is None:
        return 0.0
    return sym.dp_multi(g).dx_multi(e).eval(x, p)


def atom_is_identically_zero(series, label="a"):
    """Predicate flagging atoms that vanish for a concrete symbol series."""

    def pred(a):
        lab, j, e, g = a
        sym = _series_member(series, lab, j) if lab == label else None
        if lab != label:
            return False
        if sym is None or sym.is_zero():
            return True
        for i in range(sym.dim):
            if g[i] > sym.p_degree(i):
                return True
        if e.order and sym.is_x_constant():
            return True
        return False

    return pred


def faa_di_bruno_expand(f_order, g="g", alpha=(1,), beta=(0,), dim=None):
    """d_p^beta d_x^alpha of f^{(f_order)}(g) as a sum of f^{(k)}(g) times atoms of g.

    Parameters
    ----------
    f_order : int
        Derivative order of the outer function that is being differentiated.
    g : str
        Label of the inner symbol (atoms print as ``g_x``, ``g_p`` ...).
    alpha, beta : multi-indices
        x- and p-derivative orders; ``|alpha| + |beta| >= 1``.

    Returns
    -------
    SymbolExpr
        Kind ``'F'``; the constants come from repeated single-variable
        chain and product rules with canonical merging.
    """
    alpha = MultiIndex(alpha)
    beta = MultiIndex(beta)
    dim = len(alpha) if dim is None else dim
    if alpha.order + beta.order < 1:
        raise ValueError("need at least one derivative")
    e = SymbolExpr.outer(f_order, kind="F", label=g, dim=dim)
    return e.d_multi(alpha, beta)
