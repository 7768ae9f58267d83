import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from semiweyl.asymptotics import (
    CertificationError,
    GaussianAmplitude,
    certify_noncritical,
    coarea_density,
    gaussian_fresnel_exact,
    oscillatory_integral_1d,
    riesz_phase_terms,
    stationary_phase_expand,
    sublevel_box,
    weighted_volume,
    weyl_volume,
)
from semiweyl.coeffs import PolynomialField
from semiweyl.symcalc import symbol


def disk(E0=1.0):
    return symbol({2: 1.0, 0: PolynomialField([-E0, 0.0, 1.0])})


def quartic():
    return symbol({2: 1.0, 0: PolynomialField([-1.0, 0.0, 0.0, 0.0, 1.0])})


# ---------------------------------------------------------------- volumes


def test_disk_area():
    assert weyl_volume(disk(), 0.0) == pytest.approx(math.pi, rel=1e-6)


def test_quartic_area():
    ref = 4 * quad(lambda x: math.sqrt(1 - x**4), 0, 1, epsabs=1e-13)[0]
    assert weyl_volume(quartic(), 0.0) == pytest.approx(ref, rel=1e-5)


def test_below_minimum_is_empty():
    assert weyl_volume(disk(), -1.5) == 0.0


def test_unbounded_sublevel_set_is_refused():
    with pytest.raises(CertificationError):
        sublevel_box(symbol({2: 1.0, 0: -1.0}), 0.0)


@settings(max_examples=10)
@given(st.floats(0.3, 3.0), st.floats(0.5, 4.0))
def test_volume_scaling(E, lam):
    # {lam a <= lam E} = {a <= E}; for the disk the area is pi (1 + E)
    a = disk()
    v = weyl_volume(a, E)
    assert v == pytest.approx(math.pi * (1 + E), rel=1e-5)
    assert weyl_volume(lam * a, lam * E) == pytest.approx(v, rel=1e-5)


def test_weighted_volume_layer_cake():
    # int_{r <= 1} (1 - r^2) = pi / 2 = int_0^1 Vol{a <= -u} du
    a = disk()
    w = lambda x, p: 1 - x**2 - p**2
    direct = weighted_volume(a, 0.0, w).value
    g, wt = np.polynomial.legendre.leggauss(12)
    u = 0.5 * (g + 1)
    layers = sum(0.5 * wi * weyl_volume(a, -ui) for ui, wi in zip(u, wt))
    assert direct == pytest.approx(math.pi / 2, rel=1e-4)
    assert layers == pytest.approx(direct, rel=1e-4)


# ---------------------------------------------------------------- coarea


def test_coarea_disk():
    # d/ds pi (1 + s) = pi
    assert coarea_density(disk(), s=0.0) == pytest.approx(math.pi, rel=1e-4)


def test_coarea_weight_consistency():
    # with weight |grad a0| = 2 r the coarea integral is the circumference 2 pi r
    a = disk()
    w = lambda x, p: 2 * np.sqrt(x**2 + p**2)
    s = 0.44
    assert coarea_density(a, w, s=s, step=0.02) == pytest.approx(2 * math.pi * math.sqrt(1 + s), rel=1e-3)


def test_noncritical_certificate():
    assert certify_noncritical(disk(), 0.0) == pytest.approx(2.0, rel=0.05)
    with pytest.raises(CertificationError):
        certify_noncritical(disk(), -1.0 + 1e-8, floor=1e-2)


# ------------------------------------------------------------------ Riesz


def test_riesz_zeroth_term_disk():
    r = riesz_phase_terms(disk(), gamma=1.0)
    assert r.psi0 == pytest.approx(math.pi / 2, rel=1e-5)
    assert r.psi1 == 0.0


def test_riesz_subprincipal_constant():
    # a1 = c: Psi1 = -gamma c int (a0)_-^{gamma - 1}
    a1 = symbol({0: 0.3})
    r = riesz_phase_terms(disk(), a1, gamma=1.0)
    assert r.psi1 == pytest.approx(-0.3 * math.pi, rel=1e-5)
    r = riesz_phase_terms(disk(), a1, gamma=0.5, nodes=8)
    # int (1 - r^2)^{-1/2} over the unit disk = 2 pi
    assert r.psi1 == pytest.approx(-0.5 * 0.3 * 2 * math.pi, rel=2e-2)


def test_riesz_psi0_monotone_in_energy_shift():
    vals = [riesz_phase_terms(disk(E0), gamma=1.0, nodes=8).psi0 for E0 in (0.5, 1.0, 1.5)]
    assert vals == sorted(vals)
    assert vals == pytest.approx([math.pi / 2 * E0**2 for E0 in (0.5, 1.0, 1.5)], rel=1e-4)


def test_riesz_gamma_range():
    for g in (0.0, 1.5):
        with pytest.raises(ValueError):
            riesz_phase_terms(disk(), gamma=g)


def test_riesz_empty_when_positive():
    r = riesz_phase_terms(symbol({2: 1.0, 0: 1.0}), gamma=1.0, certify=False)
    assert (r.psi0, r.psi1) == (0.0, 0.0)


# ------------------------------------------------------- stationary phase


def test_stationary_phase_gaussian_examples():
    hb = 0.05
    for b in (1.0, -2.0):
        exp = stationary_phase_expand([[b]], GaussianAmplitude(), hb, 4)
        exact = gaussian_fresnel_exact([[b]], hb)
        assert abs(exp.value - exact) <= 1e-5 * abs(exact)
        assert exp.terms[0][1] == pytest.approx(math.sqrt(2 * math.pi * hb / abs(b)) * np.exp(1j * math.pi * np.sign(b) / 4))


def test_stationary_phase_two_dimensional():
    B = np.array([[2.0, 0.5], [0.5, -1.0]])
    hb = 0.02
    exp = stationary_phase_expand(B, GaussianAmplitude(2), hb, 3)
    exact = gaussian_fresnel_exact(B, hb)
    assert abs(exp.value - exact) <= 1e-5 * abs(exact)


def test_stationary_phase_matches_quadrature():
    hb = 0.1
    a = GaussianAmplitude(1, (2,))
    exp = stationary_phase_expand([[1.5]], a, hb, 5)
    direct = oscillatory_integral_1d(1.5, a, hb)
    assert abs(exp.value - direct) <= 1e-4 * abs(direct)


def test_odd_amplitude_vanishes():
    exp = stationary_phase_expand([[1.0]], GaussianAmplitude(1, (1,)), 0.1, 4)
    assert all(abs(c) < 1e-14 for _, c in exp.terms)


def test_singular_phase_refused():
    with pytest.raises(ValueError):
        stationary_phase_expand([[1.0, 0.0], [0.0, 0.0]], GaussianAmplitude(2), 0.1, 2)


def test_amplitude_derivatives():
    a = GaussianAmplitude(1, (3,))
    v, h = 0.37, 1e-5
    for g in range(4):
        fd = (a.deriv((g,), v + h) - a.deriv((g,), v - h)) / (2 * h)
        assert fd == pytest.approx(a.deriv((g + 1,), v), rel=1e-6, abs=1e-8)
