from fractions import Fraction
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from semiweyl.coeffs import ConstantField, FormTerm, PolynomialField, make_test_field
from semiweyl.funcalc import resolvent_symbols
from semiweyl.symcalc import (
    GQ,
    MultiIndex,
    PolySymbol,
    eval_symbol,
    faa_di_bruno_expand,
    form_principal,
    i_power,
    moyal_terms,
    multi_indices,
    requantize,
    subprincipal_from_form,
    symbol,
)

GOLDEN = Path(__file__).parent / "golden" / "symbolexpr.txt"

XS = np.array([-1.3, -0.4, 0.0, 0.7, 2.1])
PS = np.array([-2.0, -0.5, 0.3, 1.1, 1.7])


def V():
    return make_test_field("smooth", {"cos": {2: 1.0}, "sin": {1: 0.3}})


def _values(s):
    return np.asarray(s.eval(XS, PS), dtype=complex)


# ------------------------------------------------------------ small types


def test_exact_constants():
    assert GQ(1, 2) * GQ(0, 1) == GQ(-2, 1)
    assert GQ(1) / GQ(0, 1) == GQ(0, -1)
    assert [str(i_power(n)) for n in range(4)] == ["1", "i", "-1", "-i"]
    assert str(GQ(Fraction(1, 2), Fraction(-3, 4))) == "1/2-3/4*i"


def test_multi_index_helpers():
    a = MultiIndex((2, 1))
    assert abs(a) == 3 and a.factorial() == 2
    assert a.binom(MultiIndex((1, 1))) == 2
    assert multi_indices(2, 2) == [(2, 0), (1, 1), (0, 2)]
    with pytest.raises(ValueError):
        MultiIndex((1, -1))


# ------------------------------------------------------------- evaluation


def test_eval_examples():
    assert eval_symbol(symbol({2: 1.0}), 0.3, 2.0) == pytest.approx(4.0)
    assert eval_symbol(symbol({2: PolynomialField([1, 0, 1])}), 1.0, 1.0) == pytest.approx(2.0)
    sinx = make_test_field("smooth", {"sin": {1: 1.0}})
    a = symbol({2: 1.0, 1: sinx}).__add__(symbol({1: sinx})) + symbol({0: 1.0})
    assert eval_symbol(a, math.pi / 2, -1.0) == pytest.approx(0.0, abs=1e-14)


def test_dp_is_exact():
    a = symbol({3: V(), 1: 2.0})
    d = a.dp()
    assert np.allclose(_values(d), 3 * V().eval(XS) * PS**2 + 2)
    assert a.dp(times=4).is_zero()


# ------------------------------------------------------------- composition


def test_canonical_commutator():
    p, x = symbol({1: 1.0}), symbol({0: PolynomialField([0, 1])})
    c = moyal_terms(p, x, 0.5, 3)
    assert np.allclose(_values(c[0]), PS * XS)
    assert np.allclose(_values(c[1]), -0.5j)
    assert all(t.is_zero() for t in c[2:])
    d = moyal_terms(x, p, 0.5, 3)
    # a#b - b#a = -i hbar
    assert np.allclose(_values(c[1]) - _values(d[1]), -1j)


@pytest.mark.parametrize("t", [0, 0.5, 1])
def test_x_independent_symbols_commute(t):
    a = symbol({2: 1.0})
    c = moyal_terms(a, a, t, 3)
    assert np.allclose(_values(c[0]), PS**4)
    assert all(s.is_zero() for s in c[1:])


def test_potential_times_kinetic():
    v = V()
    c = moyal_terms(symbol({0: v}), symbol({2: 1.0}), 0.5, 2)
    assert np.allclose(_values(c[0]), v.eval(XS) * PS**2)
    # c_1 = (1/2i) {V, p^2} is odd; c_2 = -V''/4
    assert np.allclose(_values(c[1]), 1j * v.deriv(1, XS) * PS)
    assert np.allclose(_values(c[2]), -0.25 * v.deriv(2, XS))


def test_left_quantization_formula():
    v = V()
    a, b = symbol({2: 1.0}), symbol({0: v})
    c = moyal_terms(a, b, 0, 2)
    # c_1 = d_p a * D_x b = 2p * (-i) V', c_2 = (1/2) d_p^2 a * D_x^2 b = -V''
    assert np.allclose(_values(c[1]), -2j * PS * v.deriv(1, XS))
    assert np.allclose(_values(c[2]), -v.deriv(2, XS))


def test_unsupported_t():
    with pytest.raises(ValueError):
        moyal_terms(symbol({1: 1.0}), symbol({1: 1.0}), 0.25, 1)


def _random_symbol(draw_coeffs):
    return PolySymbol({(k,): PolynomialField(c) for k, c in draw_coeffs})


coef_lists = st.lists(st.floats(-2, 2, allow_subnormal=False), min_size=1, max_size=3)
symbols = st.lists(st.tuples(st.integers(0, 2), coef_lists), min_size=1, max_size=3)


@given(symbols, symbols, symbols)
def test_moyal_associativity(sa, sb, sc):
    a, b, c = (_random_symbol(s) for s in (sa, sb, sc))
    N = 3
    ab = moyal_terms(a, b, 0.5, N)
    bc = moyal_terms(b, c, 0.5, N)
    for j in range(N + 1):
        left = sum(_values(s) for i in range(j + 1) for s in [moyal_terms(ab[i], c, 0.5, j - i)[j - i]])
        right = sum(_values(s) for i in range(j + 1) for s in [moyal_terms(a, bc[i], 0.5, j - i)[j - i]])
        assert np.allclose(left, right, atol=1e-9 * (1 + np.max(np.abs(left))))


@given(symbols, symbols)
def test_weyl_symmetry(sa, sb):
    a, b = _random_symbol(sa), _random_symbol(sb)
    ab, ba = moyal_terms(a, b, 0.5, 3), moyal_terms(b, a, 0.5, 3)
    for j in range(4):
        va, vb = _values(ab[j]), _values(ba[j])
        assert np.allclose(va, (-1) ** j * vb, atol=1e-9 * (1 + np.max(np.abs(va))))
        # real symbols: even orders real, odd orders imaginary
        part = va.imag if j % 2 == 0 else va.real
        assert np.allclose(part, 0.0, atol=1e-9 * (1 + np.max(np.abs(va))))


# -------------------------------------------------------------- requantize


def test_requantize_first_order_term():
    c = make_test_field("smooth", {"sin": {1: 1.0}})
    out = requantize(symbol({1: c}), 0, 0.5, 2)
    # (t1 - t2) d_x D_p (c p) = (-1/2)(-i) c'
    assert np.allclose(_values(out[1]), 0.5j * c.deriv(1, XS))
    assert out[2].is_zero()


def test_requantize_p_independent():
    out = requantize(symbol({0: V()}), 0, 1, 3)
    assert np.allclose(_values(out[0]), V().eval(XS))
    assert all(s.is_zero() for s in out[1:])


@given(symbols, st.sampled_from([(0, 0.5), (0.5, 1), (0, 1), (1, 0)]))
def test_requantize_round_trip(sa, ts):
    a = _random_symbol(sa)
    N = 3
    back = requantize(requantize(a, ts[0], ts[1], N), ts[1], ts[0], N)
    assert np.allclose(_values(back[0]), _values(a))
    for s in back[1:]:
        assert np.allclose(_values(s), 0.0, atol=1e-10)


# ------------------------------------------------------------- form symbols


def test_subprincipal_divergence_form_vanishes():
    a = make_test_field("smooth", {"poly": [2.0, 0.3]})
    assert subprincipal_from_form([FormTerm((1,), (1,), a)]).is_zero()


def test_subprincipal_mixed_term():
    g = make_test_field("smooth", {"sin": {1: 1.0}, "poly": [0.0, 0.2]})
    form = [FormTerm((0,), (1,), g, 1j), FormTerm((1,), (0,), g, -1j)]
    a1 = subprincipal_from_form(form)
    assert np.allclose(_values(a1), -g.deriv(1, XS))
    assert np.allclose(_values(form_principal(form)), 0.0)
    # cross-check with the Weyl symbol of (i g) o p + p o (-i g) through requantize
    left = requantize(symbol({1: g}).scale(1j), 0, 0.5, 1)
    right = requantize(symbol({1: g}).scale(-1j), 1, 0.5, 1)
    assert np.allclose(_values(left[1]) + _values(right[1]), _values(a1))


def test_subprincipal_constant_coefficients():
    form = [(1, 1, 2.0), (0, 1, 1j), (1, 0, -1j), (0, 0, 3.0)]
    assert subprincipal_from_form(form).is_zero()


# ------------------------------------------------------------ Faa di Bruno


def test_faa_di_bruno_low_orders():
    assert str(faa_di_bruno_expand(0, alpha=(1,))) == "f^(1)(g)*g_x"
    assert str(faa_di_bruno_expand(0, alpha=(2,))) == "f^(1)(g)*g_x2 + f^(2)(g)*g_x*g_x"
    assert str(faa_di_bruno_expand(0, alpha=(1,), beta=(1,))) == "f^(1)(g)*g_xp + f^(2)(g)*g_p*g_x"
    with pytest.raises(ValueError):
        faa_di_bruno_expand(0, alpha=(0,), beta=(0,))


def _g_series():
    sinx = make_test_field("smooth", {"sin": {1: 1.0}})
    return {"g": [symbol({2: 1.0, 0: sinx})]}


@pytest.mark.parametrize("alpha, beta", [((1,), (1,)), ((2,), (1,)), ((1,), (2,)), ((3,), (0,))])
def test_faa_di_bruno_against_finite_differences(alpha, beta, rng):
    expr = faa_di_bruno_expand(0, alpha=alpha, beta=beta)
    x, p = rng.uniform(-2, 2, 20), rng.uniform(-1, 1, 20)
    g = lambda x, p: p**2 + np.sin(x)
    got = np.real(expr.evaluate(x, p, _g_series(), lambda n: np.exp(g(x, p))))
    # central differences of exp(g) with step h, order 2 accurate
    h = 1e-3
    F = lambda x, p: np.exp(g(x, p))

    def dx(fn, k):
        for _ in range(k):
            fn = (lambda f: lambda x, p: (f(x + h, p) - f(x - h, p)) / (2 * h))(fn)
        return fn

    def dp(fn, k):
        for _ in range(k):
            fn = (lambda f: lambda x, p: (f(x, p + h) - f(x, p - h)) / (2 * h))(fn)
        return fn

    ref = dp(dx(F, alpha[0]), beta[0])(x, p)
    assert np.allclose(got, ref, rtol=1e-5, atol=1e-5)


@given(st.integers(0, 3), st.integers(0, 2), st.integers(0, 2), st.integers(0, 1), st.integers(0, 1))
def test_faa_di_bruno_degree_bookkeeping(f_order, a1, a2, b1, b2):
    alpha, beta = (a1, a2), (b1, b2)
    if a1 + a2 + b1 + b2 == 0:
        return
    expr = faa_di_bruno_expand(f_order, alpha=alpha, beta=beta)
    for (atoms, n), v in expr.terms.items():
        assert n >= f_order + 1
        assert tuple(map(sum, zip(*[a[2] for a in atoms]))) == alpha
        assert tuple(map(sum, zip(*[a[3] for a in atoms]))) == beta
        assert len(atoms) == n - f_order


# ----------------------------------------------------------- golden output


def _golden_text():
    generic = resolvent_symbols([symbol({0: 1.0})], 3, prune=False)
    lines = []
    for j in range(1, 4):
        for k in range(1, 2 * j):
            lines.append(f"d[{j},{k}] = {generic.d(j, k)}")
    lines.append(f"dxx dp f(g) = {faa_di_bruno_expand(0, alpha=(2,), beta=(1,))}")
    lines.append(f"dx1 dx2 f'(g) = {faa_di_bruno_expand(1, alpha=(1, 1), beta=(0, 0))}")
    return "\n".join(lines) + "\n"


def test_golden_pretty_print():
    assert _golden_text() == GOLDEN.read_text(encoding="utf-8")


def test_pretty_print_is_deterministic():
    v = V()
    series = [symbol({2: 1.0, 0: v}), symbol({0: v})]
    assert str(resolvent_symbols(series, 3).d(2, 3)) == str(resolvent_symbols(series, 3).d(2, 3))
