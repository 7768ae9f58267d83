"""Scenario files: INI sections describing an operator, a grid and suites.

Field specs are one line, ``family key=value ...``::

    abs_power k=1 mu=0.5 scale=0.25 base=sin poly=1.0
    smooth poly=-1,0,1 cos=2:1.0
    weierstrass k=0 mu=0.5 b=2 n_terms=20

``factor=<complex>`` multiplies a form coefficient and ``mollify=<e>``
replaces the field by its mollification at eps = hbar**e.  Symbols are sums
of ``p^k * [field spec]`` terms.
"""

import configparser
from dataclasses import dataclass, field as dc_field
import math
import re

from .coeffs import FormTerm, make_test_field, mollify

SUITES = (
    "mollify-rates",
    "compose-residuals",
    "resolvent-residuals",
    "funcalc",
    "hs-oracle",
    "trace",
    "garding",
    "weyl-sweep",
    "riesz-sweep",
    "dos",
    "tauberian",
    "framing",
    "stationary-phase",
)


class ScenarioError(ValueError):
    """The configuration cannot be parsed or is inconsistent."""


def _number(s):
    s = s.strip()
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    try:
        return complex(s)
    except ValueError:
        return s


def _floats(s):
    return [float(v) for v in s.replace(";", ",").split(",") if v.strip()]


@dataclass
class FieldSpec:
    family: str
    params: dict
    factor: complex = 1.0
    mollify_exp: float = None
    text: str = ""

    def build(self, hbar=None):
        f = make_test_field(self.family, dict(self.params))
        if self.mollify_exp is not None:
            if hbar is None:
                raise ScenarioError(f"field {self.text!r} is mollified at eps = hbar^e and needs hbar")
            f = mollify(f, eps=min(1.0, hbar**self.mollify_exp))
        return f


def parse_field(text):
    """Parse ``family key=value ...`` into a FieldSpec."""
    parts = text.split()
    if not parts:
        raise ScenarioError("empty field spec")
    family, params = parts[0], {}
    factor, mexp = 1.0, None
    for tok in parts[1:]:
        if "=" not in tok:
            raise ScenarioError(f"expected key=value in field spec, got {tok!r}")
        k, v = tok.split("=", 1)
        if k == "factor":
            factor = complex(v)
        elif k == "mollify":
            mexp = float(v)
        elif k in ("cos", "sin"):
            d = {}
            for item in v.split(","):
                w, a = item.split(":")
                d[float(w) if "." in w else int(w)] = float(a)
            params[k] = d
        elif k == "poly":
            params[k] = _floats(v)
        else:
            params[k] = _number(v)
    if family not in ("smooth", "abs_power", "weierstrass"):
        raise ScenarioError(f"unknown field family {family!r}")
    return FieldSpec(family, params, factor, mexp, text)


_TERM = re.compile(r"\s*p\^(\d+)\s*\*\s*\[([^\]]*)\]\s*")


def parse_symbol(text):
    """``p^2 * [smooth poly=1] + p^0 * [...]`` -> list of (power, FieldSpec)."""
    out = []
    for chunk in re.split(r"\+(?![^\[]*\])", text):
        if not chunk.strip():
            continue
        m = _TERM.fullmatch(chunk)
        if not m:
            raise ScenarioError(f"cannot parse symbol term {chunk.strip()!r}")
        out.append((int(m.group(1)), parse_field(m.group(2))))
    if not out:
        raise ScenarioError("empty symbol")
    return out


def build_symbol(terms, hbar=None):
    from .symcalc import PolySymbol, symbol

    acc = {}
    for k, spec in terms:
        f = spec.build(hbar)
        s = symbol({k: f})
        if spec.factor != 1.0:
            s = s.scale(spec.factor)
        acc[k] = s if k not in acc else acc[k] + s
    total = None
    for s in acc.values():
        total = s if total is None else total + s
    assert isinstance(total, PolySymbol)
    return total


_FORM_KEYS = {"a11": ((1,), (1,)), "a00": ((0,), (0,)), "a01": ((0,), (1,)), "a10": ((1,), (0,))}


@dataclass
class Scenario:
    name: str
    suites: list
    hbars: list
    gammas: list = dc_field(default_factory=lambda: [0.5, 1.0])
    delta: float = None
    seed: int = 0
    domain: dict = dc_field(default_factory=dict)
    form_specs: dict = dc_field(default_factory=dict)
    symbol_specs: dict = dc_field(default_factory=dict)
    params: dict = dc_field(default_factory=dict)
    tolerances: dict = dc_field(default_factory=dict)
    source: str = ""

    # ---------------------------------------------------------- builders

    def form(self, hbar=None):
        """Form terms, with mollified fields resolved at ``hbar``."""
        out = []
        for key, spec in self.form_specs.items():
            a, b = _FORM_KEYS[key]
            out.append(FormTerm(a, b, spec.build(hbar), spec.factor))
        return out

    def symbol(self, name, hbar=None):
        if name not in self.symbol_specs:
            raise ScenarioError(f"scenario {self.name!r} defines no symbol {name!r}")
        return build_symbol(self.symbol_specs[name], hbar)

    def has_symbol(self, name):
        return name in self.symbol_specs

    def tol(self, key, default):
        return float(self.tolerances.get(key, default))

    def param(self, key, default=None, cast=float):
        if key not in self.params:
            return default
        return cast(self.params[key])

    def form_class(self):
        """(k, mu) of the roughest form coefficient."""
        worst = None
        for spec in self.form_specs.values():
            f = spec.build(0.01)
            if f.smooth:
                continue
            if worst is None or f.k + f.mu < worst[0] + worst[1]:
                worst = (f.k, f.mu)
        return worst

    def delta_for(self, suite, gamma=None):
        """delta for eps = hbar^(1 - delta); explicit value or the suite default."""
        if self.delta is not None:
            return self.delta
        cls = self.form_class()
        mu = cls[1] if cls else 1.0
        if suite == "riesz-sweep":
            return 1.0 - (1.0 + (gamma if gamma is not None else 1.0)) / (2.0 + mu)
        return mu / (1.0 + mu) if mu > 0 else 0.5

    def eps_for(self, hbar, suite, gamma=None):
        return hbar ** (1.0 - self.delta_for(suite, gamma))


def _suite_list(s):
    return [v.strip() for v in s.replace(";", ",").split(",") if v.strip()]


def load_scenario(path_or_text, name=None):
    """Parse an INI scenario from a path or a string.

    Raises
    ------
    ScenarioError
        On syntax errors, unknown suites or families, an empty suite list or
        delta outside (0, 1).
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    text = str(path_or_text)
    try:
        if "\n" in text or "[" in text:
            cp.read_string(text)
            source = "<string>"
        else:
            with open(text, encoding="utf-8") as fh:
                cp.read_file(fh)
            source = text
    except (configparser.Error, OSError) as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    if not cp.has_section("scenario"):
        raise ScenarioError("missing [scenario] section")
    sc = cp["scenario"]
    suites = _suite_list(sc.get("suites", ""))
    if not suites:
        raise ScenarioError("empty suite list")
    bad = [s for s in suites if s not in SUITES]
    if bad:
        raise ScenarioError(f"unknown suite(s): {', '.join(bad)}")
    delta = sc.get("delta", "auto").strip()
    delta = None if delta == "auto" else float(delta)
    if delta is not None and not (0.0 < delta < 1.0):
        raise ScenarioError(f"delta must lie in (0, 1), got {delta}")
    try:
        hbars = _floats(sc.get("hbar", ""))
        gammas = _floats(sc.get("gamma", "0.5, 1.0"))
        scen = Scenario(
            name=name or sc.get("name", "scenario"),
            suites=suites,
            hbars=hbars,
            gammas=gammas,
            delta=delta,
            seed=int(sc.get("seed", "0")),
            source=source,
        )
        if cp.has_section("domain"):
            scen.domain = {k: _number(v) for k, v in cp["domain"].items()}
        if cp.has_section("form"):
            for k, v in cp["form"].items():
                if k not in _FORM_KEYS:
                    raise ScenarioError(f"unknown form key {k!r} (use a11, a00, a01, a10)")
                scen.form_specs[k] = parse_field(v)
        if cp.has_section("symbols"):
            scen.symbol_specs = {k: parse_symbol(v) for k, v in cp["symbols"].items()}
        if cp.has_section("params"):
            scen.params = dict(cp["params"].items())
        if cp.has_section("tolerances"):
            scen.tolerances = {k: float(v) for k, v in cp["tolerances"].items()}
    except ScenarioError:
        raise
    except (ValueError, KeyError) as exc:
        raise ScenarioError(f"bad value in scenario: {exc}") from exc
    if any(h <= 0 or h >= 1 or not math.isfinite(h) for h in scen.hbars):
        raise ScenarioError("hbar values must lie in (0, 1)")
    if any(not (0 < g <= 1) for g in scen.gammas):
        raise ScenarioError("gamma values must lie in (0, 1]")
    return scen


def bundled_scenarios():
    """Names of the scenarios shipped with the package."""
    from importlib import resources

    return sorted(p.name[:-4] for p in resources.files("semiweyl.scenarios").iterdir() if p.name.endswith(".ini"))


def bundled_path(name):
    from importlib import resources

    p = resources.files("semiweyl.scenarios") / f"{name}.ini"
    if not p.is_file():
        raise ScenarioError(f"no bundled scenario {name!r}")
    return str(p)
