import math
import warnings

import numpy as np
import pytest

from semiweyl.coeffs import FormTerm, PolynomialField, build_framing_symbols, make_test_field
from semiweyl.quantize import (
    MidpointWarning,
    NyquistWarning,
    PhaseGrid,
    QuantizeError,
    assemble_form_operator,
    dilate_symbol,
    dilated_grid,
    form_operator_on_torus,
    garding_check,
    low_momentum_norm,
    phase_space_integral,
    quantize_series,
    read_matrix_binary,
    t_quantize_on_torus,
    trace_of_quantization,
    weyl_quantize_on_torus,
    write_matrix_binary,
)
from semiweyl.spectra import eigenvalues_below
from semiweyl.symcalc import requantize, symbol


def cosx():
    # period pi, so midpoints on the [-pi, pi) torus are unambiguous
    return make_test_field("smooth", {"cos": {2: 1.0}, "sin": {4: 0.4}})


# -------------------------------------------------------------------- grid


def test_grid_layout():
    g = PhaseGrid(8, math.pi, 0.1)
    assert g.h == pytest.approx(math.pi / 4)
    assert g.x[0] == -math.pi and g.x[-1] < math.pi
    assert g.p[0] == pytest.approx(-0.4) and g.p_max == pytest.approx(0.4)


@pytest.mark.parametrize("n", [0, 1, 3, 12])
def test_grid_rejects_non_power_of_two(n):
    with pytest.raises(QuantizeError):
        PhaseGrid(n, 1.0, 0.1)


def test_covering_grid_reaches_twice_classical_momentum():
    for hb in (0.1, 0.02, 0.005):
        g = PhaseGrid.covering(math.pi, hb, 2.0)
        assert g.p_max >= 4.0 and PhaseGrid(g.n // 2, math.pi, hb).p_max < 4.0


def test_nyquist_warning_and_strict():
    g = PhaseGrid(16, math.pi, 0.05)
    with pytest.warns(NyquistWarning):
        weyl_quantize_on_torus(symbol({2: 1.0}), g, p_classical=3.0)
    with pytest.raises(QuantizeError):
        weyl_quantize_on_torus(symbol({2: 1.0}), g, strict=True, p_classical=3.0)


# ------------------------------------------------------------ quantization


def test_identity():
    g = PhaseGrid(32, math.pi, 0.1)
    M = weyl_quantize_on_torus(symbol({0: 1.0}), g).entries
    assert np.allclose(M, np.eye(32), atol=1e-13)


def test_canonical_commutator_on_smooth_states():
    g = PhaseGrid(256, math.pi, 0.05)
    P = weyl_quantize_on_torus(symbol({1: 1.0}), g).entries
    X = weyl_quantize_on_torus(lambda x, p: x + 0 * p, g).entries
    assert np.allclose(X, np.diag(g.x))
    u = np.exp(-8 * g.x**2)
    assert np.max(np.abs((P @ X - X @ P) @ u + 1j * g.hbar * u)) < 1e-8


def test_harmonic_spectrum():
    g = PhaseGrid(1024, 8.0, 0.05)
    x2 = PolynomialField([0, 0, 1])
    e = np.linalg.eigvalsh(weyl_quantize_on_torus(symbol({2: 1.0, 0: x2}), g).entries)[:10]
    assert np.allclose(e, 0.05 * (2 * np.arange(10) + 1), atol=1e-4)


def test_x_constant_symbols_are_t_independent():
    g = PhaseGrid(64, math.pi, 0.1)
    a = symbol({2: 1.0})
    m = [t_quantize_on_torus(a, t, g).entries for t in (0, 0.5, 1)]
    assert np.allclose(m[0], m[1], atol=1e-12) and np.allclose(m[1], m[2], atol=1e-12)


def test_left_right_duality():
    g = PhaseGrid(64, math.pi, 0.1)
    a = symbol({2: 1.0, 1: cosx(), 0: cosx()})
    assert np.allclose(t_quantize_on_torus(a, 0, g).entries, t_quantize_on_torus(a, 1, g).entries.conj().T)


def test_generic_t_matches_weyl_route():
    g = PhaseGrid(32, math.pi, 0.1)
    a = symbol({1: cosx()})
    # the midpoint branch and the direct sum agree where both apply
    from semiweyl.quantize import _generic_t

    assert np.allclose(_generic_t(a, 0.5, g), t_quantize_on_torus(a, 0.5, g).entries, atol=1e-12)


def test_left_quantization_matches_requantized_series():
    c = cosx()
    b = symbol({1: c})
    res_plain, res_corr = [], []
    for hb in (0.04, 0.02):
        g = PhaseGrid.covering(math.pi, hb, 2.0)
        left = t_quantize_on_torus(b, 0, g).entries
        plain = weyl_quantize_on_torus(b, g).entries
        corr = quantize_series(requantize(b, 0, 0.5, 1), g).entries
        res_plain.append(low_momentum_norm(left - plain, g))
        res_corr.append(low_momentum_norm(left - corr, g))
    assert min(res_plain) > 1e-3
    assert max(res_corr) < 1e-9


def test_hermitian_residual():
    g = PhaseGrid(128, math.pi, 0.05)
    a = symbol({2: 1.0, 1: cosx(), 0: cosx()})
    assert weyl_quantize_on_torus(a, g).hermitian_residual <= 1e-10


def test_dilation_consistency():
    g = PhaseGrid(128, math.pi, 0.02)
    a = symbol({2: 1.0, 0: cosx()})
    eps, delta = 0.5, 0.6
    gd = dilated_grid(g, eps, delta)
    A = weyl_quantize_on_torus(a, g).entries
    Ad = weyl_quantize_on_torus(dilate_symbol(a, eps, g.hbar, delta), gd).entries
    assert np.max(np.abs(A - Ad)) <= 1e-6


# ------------------------------------------------------------------- trace


def test_trace_of_identity():
    g = PhaseGrid(64, 2.0, 0.03)
    assert trace_of_quantization(symbol({0: 1.0}), g) == pytest.approx(64)


def test_trace_matches_phase_space_integral():
    g = PhaseGrid(1024, 6.0, 0.05)
    a = lambda x, p: np.exp(-(x**2) - p**2)
    tr = np.trace(weyl_quantize_on_torus(a, g).entries).real
    ref = phase_space_integral(a, (-6, 6), (-8, 8), 512, 512) / (2 * math.pi * g.hbar)
    assert abs(tr - ref) <= 1e-6 * ref
    assert abs(ref - 1 / (2 * g.hbar)) < 1e-9


def test_trace_odd_symbol_vanishes():
    g = PhaseGrid(128, math.pi, 0.05)
    a = symbol({1: cosx()})
    assert abs(trace_of_quantization(a, g)) < 1e-10


def test_trace_identity_is_exact():
    g = PhaseGrid(64, math.pi, 0.1)
    a = symbol({2: 1.0, 1: cosx(), 0: cosx()})
    direct = np.sum(a(g.x[:, None], g.p[None, :])) / g.n
    assert abs(np.trace(weyl_quantize_on_torus(a, g).entries) - direct) < 1e-10


# ------------------------------------------------------------------- forms


def test_dirichlet_laplacian():
    T = assemble_form_operator([(1, 1, 1.0)], 0.0, math.pi, 999, 1.0)
    e = eigenvalues_below(T, 30.0)
    assert np.allclose(e[:5], np.arange(1, 6) ** 2, rtol=1e-4)


def test_potential_structure():
    n, hb = 50, 0.1
    V = make_test_field("smooth", {"poly": [0.0, 0.0, 1.0]})
    T = assemble_form_operator([(1, 1, 1.0), FormTerm((0,), (0,), V)], -1.0, 1.0, n, hb)
    h = 2.0 / (n + 1)
    K = (2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)) / h**2
    assert np.allclose(T.to_dense(), hb**2 * K + np.diag(V.eval(T.x)))
    assert T.is_real


def test_mixed_term_is_hermitian():
    g = make_test_field("smooth", {"sin": {1: 1.0}})
    form = [(1, 1, 1.0), FormTerm((0,), (1,), g, 1j), FormTerm((1,), (0,), g, -1j)]
    T = assemble_form_operator(form, -2, 2, 64, 0.1)
    M = T.to_dense()
    assert np.allclose(M, M.conj().T)


def test_non_hermitian_form_rejected():
    g = make_test_field("smooth", {"sin": {1: 1.0}})
    with pytest.raises(QuantizeError):
        assemble_form_operator([(1, 1, 1.0), FormTerm((0,), (1,), g, 1j)], -2, 2, 64, 0.1)
    with pytest.raises(QuantizeError):
        form_operator_on_torus([(1, 1, 1.0), FormTerm((0,), (1,), g, 1j)], PhaseGrid(64, math.pi, 0.1))


def test_framing_interlacing_on_matrices():
    a11 = make_test_field("abs_power", {"k": 1, "mu": 0.5, "base": "sin", "poly": [2.0]})
    V = make_test_field("smooth", {"poly": [-1.0, 0.0, 1.0]})
    form = [FormTerm((1,), (1,), a11), FormTerm((0,), (0,), V)]
    pair = build_framing_symbols(form, eps=0.1, window=(-2.5, 2.5))
    args = (-2.5, 2.5, 2000, 0.05)
    e = [np.linalg.eigvalsh(assemble_form_operator(f, *args).to_dense())[:40] for f in (pair.minus_form, form, pair.plus_form)]
    assert np.all(e[0] <= e[1]) and np.all(e[1] <= e[2])


def test_torus_form_matches_weyl_symbol_for_divergence_form():
    grid = PhaseGrid(64, math.pi, 0.1)
    a = make_test_field("smooth", {"cos": {2: 0.3}, "poly": [1.0]})
    H = form_operator_on_torus([FormTerm((1,), (1,), a)], grid).entries
    # p a p has Weyl symbol a p^2 + (hbar^2/4) a''
    W = weyl_quantize_on_torus(symbol({2: a}), grid).entries + 0.25 * grid.hbar**2 * np.diag(a.deriv(2, grid.x))
    # identical away from the momentum cutoff, where products of multipliers alias
    assert low_momentum_norm(H - W, grid) < 1e-10


def test_midpoint_period_warning():
    g = PhaseGrid(32, math.pi, 0.1)
    odd = make_test_field("smooth", {"cos": {1: 1.0}})
    with pytest.warns(MidpointWarning):
        weyl_quantize_on_torus(symbol({0: odd}), g)


# ----------------------------------------------------------------- Garding


def test_garding_trivial_cases():
    rep = garding_check(symbol({2: 1.0}), [0.1, 0.05], L=math.pi, p_classical=2.0)
    assert min(rep["min_eig"]) >= -1e-12
    rep = garding_check(symbol({0: 0.0}), [0.1], L=math.pi, p_classical=1.0)
    assert rep["min_eig"][0] == pytest.approx(0.0, abs=1e-14)


# ------------------------------------------------------------------ export


def test_binary_round_trip(tmp_path):
    g = PhaseGrid(16, math.pi, 0.1)
    M = weyl_quantize_on_torus(symbol({1: cosx()}), g)
    p = tmp_path / "m.bin"
    M.to_binary(p)
    back, hb, L = read_matrix_binary(p)
    assert np.array_equal(back, M.entries) and hb == 0.1 and L == math.pi
    assert p.stat().st_size == 24 + 2 * 8 * 16 * 16
    write_matrix_binary(p, np.eye(3), 0.5, 1.0)
    assert p.read_bytes()[:8] == (3).to_bytes(8, "little")
    assert read_matrix_binary(p)[0].dtype == float


def test_text_export():
    g = PhaseGrid(2, 1.0, 0.1)
    text = weyl_quantize_on_torus(symbol({0: 2.0}), g).to_text()
    assert text.splitlines()[0] == "# n=2 hbar=0.1 L=1.0"
    assert text.splitlines()[1] == "2 0"


def test_no_warning_when_covered():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        g = PhaseGrid.covering(math.pi, 0.05, 2.0)
        weyl_quantize_on_torus(symbol({2: 1.0}), g, p_classical=2.0)
