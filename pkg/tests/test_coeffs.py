import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from semiweyl.coeffs import (
    DEFAULT_KERNEL,
    ConstantField,
    FieldError,
    FormTerm,
    FramingError,
    PolynomialField,
    build_framing_symbols,
    export_mollified_csv,
    make_test_field,
    mollify,
    sup_deriv,
    sup_error,
)
from semiweyl.fitting import fit_slope


def _pairs(rng, lo=-2.0, hi=2.0, n=400):
    x = rng.uniform(lo, hi, n)
    y = rng.uniform(lo, hi, n)
    keep = np.abs(x - y) > 1e-6
    return x[keep], y[keep]


# ------------------------------------------------------------------ fields


def test_smooth_field_is_polynomial():
    f = make_test_field("smooth", {"poly": [1.0, 0.0, 1.0]})
    x = np.linspace(-3, 3, 13)
    assert np.allclose(f.eval(x), 1 + x**2)
    assert np.allclose(f.deriv(1, x), 2 * x)
    assert np.allclose(f.deriv(2, x), 2.0)
    assert np.allclose(f.deriv(3, x), 0.0)
    assert f.smooth


def test_deriv_zero_is_eval(rng):
    x = rng.uniform(-3, 3, 50)
    for fam, p in [
        ("smooth", {"cos": {2: 1.0}, "poly": [0.5, 1.0]}),
        ("abs_power", {"k": 1, "mu": 0.5, "poly": [1.0]}),
        ("weierstrass", {"k": 1, "mu": 0.5, "b": 2, "n_terms": 16}),
    ]:
        f = make_test_field(fam, p)
        assert np.array_equal(f.deriv(0, x), f.eval(x))


def test_abs_power_hoelder_seminorm(rng):
    # |x|^1.5 + 1: derivative 1.5 sgn(x)|x|^0.5, Hoelder-1/2 constant 1.5 * sqrt(2)
    f = make_test_field("abs_power", {"k": 1, "mu": 0.5, "poly": [1.0]})
    assert (f.k, f.mu) == (1, 0.5)
    x = np.linspace(-2, 2, 9)
    assert np.allclose(f.eval(x), np.abs(x) ** 1.5 + 1)
    assert np.allclose(f.deriv(1, x), 1.5 * np.sign(x) * np.abs(x) ** 0.5)
    x, y = _pairs(rng)
    q = np.abs(f.deriv(1, x) - f.deriv(1, y)) / np.abs(x - y) ** 0.5
    assert q.max() <= 1.5 * math.sqrt(2) + 1e-12


def test_abs_power_rejects_orders_above_k():
    f = make_test_field("abs_power", {"k": 1, "mu": 0.5})
    with pytest.raises(FieldError):
        f.deriv(2, np.array([0.1]))


def test_weierstrass_seminorm_saturates(rng):
    x, y = _pairs(rng, -1, 1, 2000)
    norms = []
    for n in (4, 8, 12, 16, 20):
        f = make_test_field("weierstrass", {"k": 1, "mu": 0.5, "b": 2, "n_terms": n})
        norms.append(np.max(np.abs(f.deriv(1, x) - f.deriv(1, y)) / np.abs(x - y) ** 0.5))
    # sampled seminorm of the partial sums stays bounded and settles
    assert max(norms) < 10.0
    assert np.ptp(norms[2:]) < 0.05 * norms[-1]


@pytest.mark.parametrize("k, mu", [(-1, 0.5), (1, 1.5), (1, -0.1), (0.5, 0.5)])
def test_make_test_field_rejects_bad_class(k, mu):
    with pytest.raises(FieldError):
        make_test_field("abs_power", {"k": k, "mu": mu})


def test_unknown_family():
    with pytest.raises(FieldError):
        make_test_field("fractal", {})


def test_tempered_weight(rng):
    f = make_test_field("smooth", {"poly": [1.0, 0.0, 1.0]})
    x, y = _pairs(rng, -5, 5)
    # 1 + x^2 <= 2 (1 + y^2)(1 + |x - y|)^2
    assert np.all(f.eval(x) <= 2 * f.eval(y) * (1 + np.abs(x - y)) ** 2)


# ------------------------------------------------------------------ kernel


def test_kernel_mass_and_moments():
    y, w = DEFAULT_KERNEL.nodes(0)
    assert abs(np.sum(w) - 1.0) < 1e-6
    # orders used by the bundled classes (k <= 3); the truncation at the
    # quadrature radius limits how far the vanishing persists numerically
    for a in range(1, 4):
        assert abs(np.sum(w * y**a)) < 1e-5


def test_kernel_fourier_profile_flat_near_zero():
    xi = np.array([0.0, 0.5, 1.0, 2.0, 3.0])
    assert np.allclose(DEFAULT_KERNEL.fourier_profile(xi), [1, 1, 1, 0, 0])


# ------------------------------------------------------------- mollification


def test_mollify_reproduces_cubic():
    f = PolynomialField([0.0, 0.0, 0.0, 1.0])
    x = np.linspace(-2, 2, 11)
    for eps in (1.0, 0.3, 0.01):
        assert np.allclose(mollify(f, eps=eps).eval(x), x**3, rtol=0, atol=1e-12)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=11), st.floats(0.01, 1.0))
def test_polynomial_reproduction(coeffs, eps):
    f = PolynomialField(coeffs)
    x = np.linspace(-1.5, 1.5, 7)
    ref = f.eval(x)
    got = mollify(f, eps=eps).eval(x)
    assert np.allclose(got, ref, rtol=1e-10, atol=1e-10 * max(1.0, np.max(np.abs(ref))))


def test_mollify_rejects_bad_eps():
    f = make_test_field("abs_power", {"k": 1, "mu": 0.5})
    for eps in (0.0, -0.1, 1.5):
        with pytest.raises(FieldError):
            mollify(f, eps=eps)


def test_abs_rate_and_second_derivative_blowup():
    x = np.linspace(-0.5, 0.5, 801)
    f1 = make_test_field("abs_power", {"k": 0, "mu": 1.0})
    f15 = make_test_field("abs_power", {"k": 1, "mu": 0.5, "poly": [1.0]})
    eps = 2.0 ** -np.arange(3, 8)
    e0 = [sup_error(mollify(f1, eps=e), x, 0) for e in eps]
    d2 = [sup_deriv(mollify(f15, eps=e), x, 2) for e in eps]
    assert 0.9 <= fit_slope(eps, e0) <= 1.1
    assert -0.6 <= fit_slope(eps, d2) <= -0.4


def test_spectral_and_quadrature_routes_agree():
    f = make_test_field("abs_power", {"k": 1, "mu": 0.5, "base": "sin"})
    x = np.linspace(-1, 1, 21)
    a = mollify(f, eps=0.1)
    b = mollify(f, eps=0.1, route="quadrature")
    assert a.route == "spectral" and b.route == "quadrature"
    assert np.allclose(a.eval(x), b.eval(x), atol=1e-6)


def test_export_csv(tmp_path):
    f = make_test_field("abs_power", {"k": 0, "mu": 1.0})
    p = tmp_path / "m.csv"
    export_mollified_csv(p, mollify(f, eps=0.2), np.linspace(-1, 1, 5))
    lines = p.read_text().splitlines()
    assert lines[0] == "x,f,f_eps,abs_err"
    assert len(lines) == 6


# ------------------------------------------------------------------ framing


def test_framing_constant_coefficient():
    pair = build_framing_symbols([FormTerm((1,), (1,), ConstantField(1.0))], eps=0.1)
    assert pair.c1 == 0.0
    for x, p in [(0.0, 0.0), (1.0, 2.0), (-0.3, -1.5)]:
        assert pair.plus(x, p) == pytest.approx(p**2)
        assert pair.minus(x, p) == pytest.approx(p**2)


def test_framing_sandwich_and_gap():
    a11 = make_test_field("abs_power", {"k": 1, "mu": 0.5, "base": "sin", "poly": [2.0]})
    pair = build_framing_symbols([FormTerm((1,), (1,), a11)], eps=0.05)
    x = np.linspace(-math.pi, math.pi, 101)
    p = np.linspace(-3, 3, 101)
    X, P = np.meshgrid(x, p, indexing="ij")
    exact = a11.eval(X) * P**2
    plus = np.real(pair.plus(X, P))
    minus = np.real(pair.minus(X, P))
    assert np.all(minus <= exact) and np.all(exact <= plus)
    assert np.allclose(plus - minus, 2 * pair.gap * (1 + P**2), rtol=1e-10)


def test_framing_threshold_error():
    a11 = make_test_field("abs_power", {"k": 0, "mu": 0.5, "base": "sin", "poly": [0.05]})
    with pytest.raises(FramingError, match="threshold"):
        build_framing_symbols([FormTerm((1,), (1,), a11)], eps=0.9)


def test_framing_preserves_noncritical_gradient():
    # a0 = (2 + |sin x|^1.5) p^2 + x^2 - 1 has |d_p a0| >= c on a0 = 0 away from x = +-1
    a11 = make_test_field("abs_power", {"k": 1, "mu": 0.5, "base": "sin", "poly": [2.0]})
    v = PolynomialField([-1.0, 0.0, 1.0])
    form = [FormTerm((1,), (1,), a11), FormTerm((0,), (0,), v)]
    pair = build_framing_symbols(form, eps=0.02, window=(-2, 2))
    x = np.linspace(-0.8, 0.8, 81)
    for sym in (pair.plus, pair.minus):
        c2 = np.real(sym.coefficient((2,)).eval(x))
        c0 = np.real(sym.coefficient((0,)).eval(x))
        p0 = np.sqrt(-c0 / c2)
        grad_p = 2 * c2 * p0
        ref = 2 * a11.eval(x) * np.sqrt((1 - x**2) / a11.eval(x))
        assert np.all(grad_p >= ref.min() / 4)
