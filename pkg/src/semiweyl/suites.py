"""Validation suites: each runs one family of checks on a scenario and
returns a table plus fitted exponents and pass/fail flags."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
import math

import numpy as np

from .fitting import fit_slope
from .scenario import ScenarioError, parse_field

SWEEP_HEADER = ["hbar", "E", "count", "riesz_gamma", "smoothed_density", "weyl_term", "two_term", "err_count", "err_riesz"]


@dataclass
class SuiteResult:
    name: str
    header: list
    rows: list = dc_field(default_factory=list)
    slopes: dict = dc_field(default_factory=dict)
    tolerances: dict = dc_field(default_factory=dict)
    checks: list = dc_field(default_factory=list)  # (label, passed, detail)

    @property
    def passed(self):
        return all(ok for _, ok, _ in self.checks)

    def check(self, label, ok, detail=""):
        self.checks.append((label, bool(ok), detail))
        return bool(ok)

    @property
    def failures(self):
        return [f"{lab}: {det}" for lab, ok, det in self.checks if not ok]


def _pmap(fn, items, threads=1):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _slope(x, y):
    s = fit_slope(x, y)
    return None if s is None or not math.isfinite(s) else float(s)


def _profile(text):
    """'bump lo a b hi' | 'gaussian center width' | 'exponential rate'."""
    from .funcalc import FunctionProfile

    parts = text.split()
    kind, vals = parts[0], [float(v) for v in parts[1:]]
    if kind == "bump":
        lo, a, b, hi = vals
        return FunctionProfile.bump((a, b), (lo, hi))
    if kind == "gaussian":
        return FunctionProfile.gaussian(*vals)
    if kind == "exponential":
        return FunctionProfile.exponential(*vals)
    raise ScenarioError(f"unknown function profile {kind!r}")


def _interval(sc):
    d = sc.domain
    if d.get("kind", "interval") != "interval":
        raise ScenarioError(f"suite needs an interval domain, scenario {sc.name!r} has {d.get('kind')!r}")
    return float(d.get("x_lo", -3.0)), float(d.get("x_hi", 3.0)), int(d.get("n", 2**15))


def _torus(sc):
    d = sc.domain
    if d.get("kind") != "torus":
        raise ScenarioError(f"suite needs a torus domain, scenario {sc.name!r} has {d.get('kind')!r}")
    return float(d.get("L", math.pi)), float(d.get("p_classical", 3.0))


# ----------------------------------------------------------- mollification


def suite_mollify_rates(sc, threads=1):
    from .coeffs import mollify, sup_deriv, sup_error

    f = parse_field(sc.params["field"]).build()
    eps = [float(v) for v in sc.params.get("eps", "0.2, 0.1, 0.05, 0.025, 0.0125").split(",")]
    lo, hi = (float(v) for v in sc.params.get("window", "-1, 1").split(","))
    x = np.linspace(lo, hi, int(sc.params.get("samples", "2001")))
    k, tau = f.k, f.k + f.mu
    band = sc.tol("mollify_band", 0.15)
    res = SuiteResult("mollify-rates", ["eps"] + [f"err_{r}" for r in range(k + 1)] + [f"bound_{k + 1}"])
    res.tolerances["mollify_band"] = band

    def one(e):
        mf = mollify(f, eps=e)
        return [e] + [sup_error(mf, x, r) for r in range(k + 1)] + [sup_deriv(mf, x, k + 1)]

    res.rows = _pmap(one, eps, threads)
    cols = np.array(res.rows)
    for r in range(k + 2):
        name = f"err_{r}" if r <= k else f"bound_{k + 1}"
        s = _slope(cols[:, 0], cols[:, r + 1])
        want = tau - r
        res.slopes[name] = s
        res.check(f"{name} slope", s is not None and abs(s - want) <= band, f"fitted {s} vs {want} +/- {band}")
    return res


# ------------------------------------------------------------ composition


def _pairs(sc):
    out = []
    i = 1
    while sc.has_symbol(f"pair{i}_a"):
        out.append((f"pair{i}", f"pair{i}_a", f"pair{i}_b"))
        i += 1
    if not out:
        raise ScenarioError("compose-residuals needs symbols pair1_a, pair1_b, ...")
    return out


def suite_compose_residuals(sc, threads=1):
    from .quantize import PhaseGrid, low_momentum_norm, quantize_series, weyl_quantize_on_torus
    from .symcalc import moyal_terms

    L, pc = _torus(sc)
    Ns = [int(v) for v in sc.params.get("orders", "0, 1, 2").split(",")]
    margin = sc.tol("compose_margin", 0.8)
    res = SuiteResult("compose-residuals", ["pair", "hbar", "n", "N", "residual"])
    res.tolerances["compose_margin"] = margin
    for label, na, nb in _pairs(sc):

        def one(hb):
            a, b = sc.symbol(na, hb), sc.symbol(nb, hb)
            c = moyal_terms(a, b, 0.5, max(Ns))
            grid = PhaseGrid.covering(L, hb, pc)
            P = weyl_quantize_on_torus(a, grid).entries @ weyl_quantize_on_torus(b, grid).entries
            rows = []
            for N in Ns:
                S = quantize_series(c[: N + 1], grid).entries
                rows.append([label, hb, grid.n, N, low_momentum_norm(P - S, grid)])
            return rows

        rows = [r for chunk in _pmap(one, sc.hbars, threads) for r in chunk]
        res.rows += rows
        for N in Ns:
            sel = [r for r in rows if r[3] == N]
            s = _slope([r[1] for r in sel], [r[4] for r in sel])
            res.slopes[f"{label}_N{N}"] = s
            # roundoff-level residuals relative to the N=0 residual mean the
            # expansion terminates and there is no slope to fit
            base = {r[1]: r[4] for r in rows if r[3] == Ns[0]}
            exact = all(r[4] <= 1e-8 * base[r[1]] for r in sel) and N > Ns[0]
            res.check(
                f"{label} N={N}",
                exact or (s is not None and s >= N + margin),
                f"slope {s} (need >= {N + margin})" + (" [terminates exactly]" if exact else ""),
            )
    return res


# --------------------------------------------------------------- resolvent


def suite_resolvent_residuals(sc, threads=1):
    from .funcalc import resolvent_symbols
    from .quantize import PhaseGrid, low_momentum_norm, quantize_series, weyl_quantize_on_torus

    L, pc = _torus(sc)
    z = complex(sc.params.get("z", "-1+1j"))
    J = int(sc.params.get("order", "2"))
    need = sc.tol("resolvent_slope", 2.7)
    a = sc.symbol("a")
    ser = resolvent_symbols([a], J=J)
    res = SuiteResult("resolvent-residuals", ["hbar", "n", "residual"])
    res.tolerances["resolvent_slope"] = need

    def one(hb):
        grid = PhaseGrid.covering(L, hb, pc)
        A = weyl_quantize_on_torus(a, grid).entries
        B = quantize_series([ser.symbol(j, z) for j in range(J + 1)], grid).entries
        R = (A - z * np.eye(grid.n)) @ B - np.eye(grid.n)
        return [hb, grid.n, low_momentum_norm(R, grid)]

    res.rows = _pmap(one, sc.hbars, threads)
    s = _slope([r[0] for r in res.rows], [r[2] for r in res.rows])
    res.slopes["residual"] = s
    res.check("parametrix residual", s is not None and s >= need, f"slope {s} (need >= {need})")
    return res


# ------------------------------------------------------ functional calculus


def suite_funcalc(sc, threads=1):
    from .funcalc import funcalc_expressions, funcalc_symbols, resolvent_symbols, universal_resolvent
    from .quantize import PhaseGrid, operator_norm, quantize_series
    from .symcalc import SymbolExpr

    L, pc = _torus(sc)
    f = _profile(sc.params.get("f", "gaussian -0.2 0.8"))
    need = sc.tol("funcalc_slope", 1.8)
    a0 = sc.symbol("a0")
    a1 = sc.symbol("a1") if sc.has_symbol("a1") else None
    base = [a0, a1] if a1 is not None else [a0]
    ser = resolvent_symbols(base, J=1)
    res = SuiteResult("funcalc", ["hbar", "n", "residual"])
    res.tolerances["funcalc_slope"] = need

    # symbolic identity on the unpruned universal table: a^f_1 = f'(a_0) a_1
    from .funcalc import ResolventSymbolSeries

    uni = universal_resolvent(1, 1)
    table = {(1, n - 1): e for n, e in uni[1].by_outer().items()}
    af1 = funcalc_expressions(ResolventSymbolSeries(base, 1, list(uni), table), 1)[1]
    target = SymbolExpr.atom(1, kind="F") * SymbolExpr.outer(1, kind="F")
    res.check("a^f_1 = f'(a_0) a_1", str(af1) == str(target), f"{af1} vs {target}")

    def one(hb):
        grid = PhaseGrid.covering(L, hb, pc)
        H = quantize_series(base, grid).entries
        e, U = np.linalg.eigh(0.5 * (H + H.conj().T))
        fH = (U * f(e)) @ U.conj().T
        Q = quantize_series(funcalc_symbols(ser, f, 1), grid).entries
        return [hb, grid.n, operator_norm(fH - Q)]

    hbars = [float(v) for v in sc.params["funcalc_hbar"].split(",")] if "funcalc_hbar" in sc.params else sc.hbars
    res.rows = _pmap(one, hbars, threads)
    s = _slope([r[0] for r in res.rows], [r[2] for r in res.rows])
    res.slopes["residual"] = s
    res.check("f(H) two-term residual", s is not None and s >= need, f"slope {s} (need >= {need})")
    return res


# ------------------------------------------------------ Helffer-Sjostrand


def hs_test_matrices(seed=0):
    """Named self-adjoint test matrices for the Helffer-Sjostrand oracle."""
    from .coeffs import make_test_field
    from .quantize import PhaseGrid, assemble_form_operator, weyl_quantize_on_torus
    from .symcalc import symbol

    rng = np.random.default_rng(seed)
    X = rng.standard_normal((12, 12))
    mats = {"diag3": np.diag([-1.0, 0.0, 1.0]), "random12": 0.25 * (X + X.T)}
    V = make_test_field("smooth", {"poly": [-1.0, 0.0, 1.0]})
    T = assemble_form_operator([((1,), (1,), 1.0), ((0,), (0,), V)], -2.0, 2.0, 10, 0.3)
    mats["harmonic_fd10"] = T.to_dense()
    a = symbol({2: 1, 0: make_test_field("smooth", {"cos": {2: 1.0}, "offset": -0.5})})
    mats["torus_weyl16"] = weyl_quantize_on_torus(a, PhaseGrid(16, math.pi, 0.25)).entries
    return mats


def suite_hs_oracle(sc, threads=1):
    from .funcalc import f_eig, hs_apply

    f = _profile(sc.params.get("hs_f", "bump -1.5 -0.5 0.5 1.5"))
    n = int(sc.params.get("hs_terms", "4"))
    tol = sc.tol("hs_tol", 1e-3)
    res = SuiteResult("hs-oracle", ["matrix", "size", "error"])
    res.tolerances["hs_tol"] = tol
    mats = hs_test_matrices(sc.seed)

    def one(name):
        H = mats[name]
        return [name, H.shape[0], float(np.linalg.norm(hs_apply(H, f, n) - f_eig(H, f), 2))]

    res.rows = _pmap(one, sorted(mats), threads)
    for name, _, err in res.rows:
        res.check(f"hs {name}", err <= tol, f"error {err:.3e} (tol {tol:g})")
    res.slopes["max_error"] = max(r[2] for r in res.rows)
    return res


# ------------------------------------------------------------------- trace


def suite_trace(sc, threads=1):
    from .funcalc import resolvent_symbols, trace_expansion_terms
    from .quantize import PhaseGrid, form_operator_on_torus
    from .symcalc import form_principal, subprincipal_from_form

    L, pc = _torus(sc)
    f = _profile(sc.params.get("f", "bump -0.9 -0.5 0.5 1.2"))
    need = sc.tol("trace_slope", 1.8)
    without_max = sc.tol("trace_without_max", 1.2)
    form = sc.form()
    a0, a1 = form_principal(form), subprincipal_from_form(form)
    T0, T1 = trace_expansion_terms(resolvent_symbols([a0, a1], J=1), f, 1, x_range=(-L, L))
    res = SuiteResult("trace", ["hbar", "n", "trace", "T0", "T1", "err_two_term", "err_one_term"])
    res.tolerances.update(trace_slope=need, trace_without_max=without_max)

    def one(hb):
        grid = PhaseGrid.covering(L, hb, pc)
        ev = np.linalg.eigvalsh(form_operator_on_torus(form, grid).entries)
        tr = float(np.sum(f(ev)))
        w = 2 * math.pi * hb * tr
        return [hb, grid.n, tr, T0, T1, abs(w - T0 - hb * T1), abs(w - T0)]

    res.rows = _pmap(one, sc.hbars, threads)
    hb = [r[0] for r in res.rows]
    s2 = _slope(hb, [r[5] for r in res.rows])
    s1 = _slope(hb, [r[6] for r in res.rows])
    res.slopes.update(two_term=s2, one_term=s1)
    res.check("two-term trace", s2 is not None and s2 >= need, f"slope {s2} (need >= {need})")
    res.check("T1 needed", s1 is not None and s1 < without_max, f"one-term slope {s1} (must stay < {without_max})")
    return res


# ------------------------------------------------------------------ Garding


def suite_garding(sc, threads=1):
    from .quantize import garding_check

    L, pc = _torus(sc)
    need = sc.tol("garding_slope", 0.9)
    rep = garding_check(sc.symbol("a"), sc.hbars, L=L, p_classical=pc)
    res = SuiteResult("garding", ["hbar", "min_eig", "neg_part"])
    res.tolerances["garding_slope"] = need
    res.rows = [list(r) for r in zip(rep["hbar"], rep["min_eig"], rep["neg_part"])]
    res.slopes.update(neg_part=rep["neg_part_slope"], abs_min=rep["abs_min_slope"])
    s = rep["neg_part_slope"] if rep["neg_part_slope"] is not None else rep["abs_min_slope"]
    which = "negative part" if rep["neg_part_slope"] is not None else "|min eig| (no negative part)"
    res.check("sharp Garding", s is not None and s >= need, f"{which} slope {s} (need >= {need})")
    return res


# ----------------------------------------------------------- spectral sweeps


def _interval_symbols(sc):
    from .symcalc import form_principal, subprincipal_from_form

    form = sc.form()
    return form, form_principal(form), subprincipal_from_form(form)


def _row(**kw):
    return [kw.get(k, "") for k in SWEEP_HEADER]


def suite_weyl_sweep(sc, threads=1):
    from .asymptotics import weyl_volume
    from .quantize import assemble_form_operator
    from .spectra import sturm_count_below

    lo, hi, n = _interval(sc)
    form, a0, _ = _interval_symbols(sc)
    vol = weyl_volume(a0, 0.0)
    bound = sc.tol("weyl_bound", 3.0)
    rel = sc.tolerances.get("weyl_rel")
    res = SuiteResult("weyl-sweep", SWEEP_HEADER)
    res.tolerances["weyl_bound"] = bound
    if rel is not None:
        res.tolerances["weyl_rel"] = rel

    def one(hb):
        N = sturm_count_below(assemble_form_operator(form, lo, hi, n, hb), 0.0)
        W = vol / (2 * math.pi * hb)
        return _row(hbar=hb, E=0.0, count=N, weyl_term=W, err_count=N - W)

    res.rows = _pmap(one, sc.hbars, threads)
    if not res.rows:
        res.slopes["err_count"] = None
        return res
    hb = [r[0] for r in res.rows]
    err = [abs(r[7]) for r in res.rows]
    res.slopes["err_count"] = _slope(hb, err)
    res.slopes["count"] = _slope(hb, [r[2] for r in res.rows])
    res.check("Weyl remainder bounded", max(err) <= bound, f"max |N - W| = {max(err):.4g} (bound {bound:g})")
    if rel is not None:
        worst = max(abs(r[7]) - (1 + rel * r[5]) for r in res.rows)
        res.check("Weyl agreement", worst <= 0, f"excess over 1 + {rel:g} W: {worst:.4g}")
    return res


def suite_riesz_sweep(sc, threads=1):
    from .asymptotics import riesz_phase_terms
    from .quantize import assemble_form_operator
    from .spectra import eigenvalues_below, riesz_mean

    lo, hi, n = _interval(sc)
    form, a0, a1 = _interval_symbols(sc)
    margin = sc.tol("riesz_margin", 0.2)
    res = SuiteResult("riesz-sweep", SWEEP_HEADER)
    res.tolerances["riesz_margin"] = margin
    eigs = dict(zip(sc.hbars, _pmap(lambda hb: eigenvalues_below(assemble_form_operator(form, lo, hi, n, hb), 0.0), sc.hbars, threads)))
    for g in sc.gammas:
        terms = riesz_phase_terms(a0, a1, g)
        res.slopes[f"psi0_gamma{g:g}"] = terms.psi0
        res.slopes[f"psi1_gamma{g:g}"] = terms.psi1
        rows = []
        for hb in sc.hbars:
            r = riesz_mean(eigs[hb], g)
            two = (terms.psi0 + hb * terms.psi1) / (2 * math.pi * hb)
            rows.append(_row(hbar=hb, E=0.0, count=len(eigs[hb]), riesz_gamma=r, weyl_term=terms.psi0 / (2 * math.pi * hb),
                             two_term=two, err_riesz=r - two))
        res.rows += rows
        if rows:
            s = _slope([r[0] for r in rows], [abs(r[8]) * r[0] for r in rows])
            res.slopes[f"err_riesz_times_hbar_gamma{g:g}"] = s
            res.check(f"Riesz gamma={g:g}", s is not None and s >= g - margin, f"error*hbar slope {s} (need >= {g - margin:g})")
    return res


def suite_dos(sc, threads=1):
    from .asymptotics import coarea_density
    from .quantize import assemble_form_operator
    from .spectra import SmoothingKernel, eigenvalues_below, smoothed_counting_density

    lo, hi, n = _interval(sc)
    form, a0, _ = _interval_symbols(sc)
    hb = float(sc.params.get("dos_hbar", "0.01"))
    f = _profile(sc.params.get("dos_f", "bump -0.9 -0.3 0.3 0.9"))
    s_lo, s_hi = (float(v) for v in sc.params.get("dos_window", "-0.8, 0.8").split(","))
    s = np.linspace(s_lo, s_hi, int(sc.params.get("dos_points", "17")))
    rel = sc.tol("dos_rel", 0.1)
    res = SuiteResult("dos", SWEEP_HEADER)
    res.tolerances["dos_rel"] = rel
    eigs = eigenvalues_below(assemble_form_operator(form, lo, hi, n, hb), f.support[1] + 1.0)
    xi0 = np.array(_pmap(lambda si: float(f(np.array([si]))[0]) * coarea_density(a0, None, float(si)), s, threads))
    ref = xi0 / (2 * math.pi * hb)
    for T0 in (1.0, 0.5):
        dens = smoothed_counting_density(eigs, SmoothingKernel(hb, T0=T0), s, f)
        worst = float(np.max(np.abs(dens - ref)))
        ratio = worst / float(np.max(ref))
        res.slopes[f"sup_rel_T0_{T0:g}"] = ratio
        res.check(f"smoothed density T0={T0:g}", ratio <= rel, f"sup error / max = {ratio:.4g} (tol {rel:g})")
        if T0 == 1.0:
            res.rows = [_row(hbar=hb, E=float(si), smoothed_density=float(d), weyl_term=float(r), err_count=float(d - r))
                        for si, d, r in zip(s, dens, ref)]
    return res


def suite_tauberian(sc, threads=1):
    from .quantize import assemble_form_operator
    from .spectra import SmoothingKernel, eigenvalues_below, tauberian_gap

    lo, hi, n = _interval(sc)
    form, _, _ = _interval_symbols(sc)
    bound = sc.tol("tauberian_bound", 2.0)
    res = SuiteResult("tauberian", SWEEP_HEADER)
    res.tolerances["tauberian_bound"] = bound

    def one(hb):
        e = eigenvalues_below(assemble_form_operator(form, lo, hi, n, hb), 1.0)
        k = SmoothingKernel(hb)
        gap = tauberian_gap(e, k, 0.0)
        shift = abs(tauberian_gap(e + 0.3, k, 0.3) - gap)
        return _row(hbar=hb, E=0.0, count=int(np.sum(e <= 0)), err_count=gap), shift

    out = _pmap(one, sc.hbars, threads)
    res.rows = [r for r, _ in out]
    if res.rows:
        gaps = [r[7] for r in res.rows]
        res.slopes["gap"] = _slope([r[0] for r in res.rows], gaps) if min(gaps) > 0 else None
        res.check("Tauberian gap bounded", max(gaps) <= bound, f"max gap {max(gaps):.4g} (bound {bound:g})")
        res.check("translation equivariance", max(sh for _, sh in out) < 1e-8, f"max shift defect {max(sh for _, sh in out):.2e}")
    return res


def suite_framing(sc, threads=1):
    from .coeffs import build_framing_symbols
    from .quantize import assemble_form_operator
    from .spectra import eigenvalues_below

    lo, hi, n = _interval(sc)
    form = sc.form()
    at = float(sc.params.get("framing_hbar", "0.01"))
    max_gap = sc.tol("framing_gap", 3.0)
    res = SuiteResult("framing", ["hbar", "eps", "c1", "count_plus", "count", "count_minus"])
    res.tolerances["framing_gap"] = max_gap
    hbars = sorted(set(sc.hbars) | {at}, reverse=True)

    def one(hb):
        eps = sc.eps_for(hb, "framing")
        fr = build_framing_symbols(form, eps, window=(lo, hi))
        e = [eigenvalues_below(assemble_form_operator(fm, lo, hi, n, hb), 0.0) for fm in (fr.plus_form, form, fr.minus_form)]
        k = len(e[0])
        inter = bool(np.all(e[2][:k] <= e[1][:k] + 1e-10) and np.all(e[1][:k] <= e[0][:k] + 1e-10)) and len(e[1]) <= len(e[2])
        return [hb, eps, fr.c1, len(e[0]), len(e[1]), len(e[2])], inter

    out = _pmap(one, hbars, threads)
    res.rows = [r for r, _ in out]
    ok = all(r[3] <= r[4] <= r[5] and inter for r, inter in out)
    res.check("framing sandwich", ok, "N+ <= N <= N- with index-wise interlacing at every hbar")
    row = [r for r in res.rows if r[0] == at][0]
    res.slopes["gap_at_hbar"] = row[5] - row[3]
    res.check(f"framing gap at hbar={at:g}", row[5] - row[3] <= max_gap, f"N- - N+ = {row[5] - row[3]} (max {max_gap:g})")
    return res


# --------------------------------------------------------- stationary phase


def suite_stationary_phase(sc, threads=1):
    from .asymptotics import GaussianAmplitude, gaussian_fresnel_exact, oscillatory_integral_1d, stationary_phase_expand

    b = float(sc.params.get("b", "1.0"))
    Ns = [int(v) for v in sc.params.get("orders", "0, 1, 2").split(",")]
    margin = sc.tol("stationary_margin", 0.8)
    amp = GaussianAmplitude(1)
    res = SuiteResult("stationary-phase", ["hbar", "N", "remainder", "quadrature_check"])
    res.tolerances["stationary_margin"] = margin
    for hb in sc.hbars:
        exact = gaussian_fresnel_exact(b, hb)
        direct = oscillatory_integral_1d(b, amp, hb)
        ex = stationary_phase_expand(b, amp, hb, max(Ns))
        for N in Ns:
            res.rows.append([hb, N, abs(exact - ex.partial(N)), abs(direct - exact)])
    for N in Ns:
        sel = [r for r in res.rows if r[1] == N]
        s = _slope([r[0] for r in sel], [r[2] for r in sel])
        res.slopes[f"N{N}"] = s
        res.check(f"stationary phase N={N}", s is not None and s >= N + margin, f"slope {s} (need >= {N + margin})")
    return res


SUITE_FUNCS = {
    "mollify-rates": suite_mollify_rates,
    "compose-residuals": suite_compose_residuals,
    "resolvent-residuals": suite_resolvent_residuals,
    "funcalc": suite_funcalc,
    "hs-oracle": suite_hs_oracle,
    "trace": suite_trace,
    "garding": suite_garding,
    "weyl-sweep": suite_weyl_sweep,
    "riesz-sweep": suite_riesz_sweep,
    "dos": suite_dos,
    "tauberian": suite_tauberian,
    "framing": suite_framing,
    "stationary-phase": suite_stationary_phase,
}


def run_suite(sc, name, threads=1):
    if name not in SUITE_FUNCS:
        raise ScenarioError(f"unknown suite {name!r}")
    return SUITE_FUNCS[name](sc, threads)
