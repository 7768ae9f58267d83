"""Command line driver: ``semiweyl run <config> [--suite NAME] [--out DIR] [--strict] [--threads N]``.

Exit codes: 0 when every requested suite passes, 1 when a suite fails
(the failing checks are named on stderr), 2 on configuration errors.
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
import warnings

from .scenario import SUITES, ScenarioError, bundled_path, bundled_scenarios, load_scenario
from .suites import run_suite

log = logging.getLogger("semiweyl")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _clean(v):
    """JSON-safe value with deterministic float text."""
    if isinstance(v, float):
        return v if math.isfinite(v) else None
    if isinstance(v, complex):
        return [_clean(v.real), _clean(v.imag)]
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "item"):
        return _clean(v.item())
    return v


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if hasattr(v, "item"):
        return _cell(v.item())
    return str(v)


def write_csv(path, result):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(result.header)
        for row in result.rows:
            w.writerow([_cell(v) for v in row])


def build_report(scenario, results):
    return {
        "scenario": scenario.name,
        "suite": [r.name for r in results],
        "slopes": {r.name: _clean(r.slopes) for r in results},
        "tolerances": {r.name: _clean(r.tolerances) for r in results},
        "pass": all(r.passed for r in results),
        "checks": {r.name: [{"check": c, "pass": ok, "detail": d} for c, ok, d in r.checks] for r in results},
    }


def resolve_threads(arg):
    if arg is not None:
        return max(1, int(arg))
    env = os.environ.get("SEMIWEYL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer SEMIWEYL_THREADS=%r", env)
    return 1


def run_scenario(config, suite=None, out=".", strict=False, threads=None):
    """Run a scenario's suites and write CSV tables plus ``<name>_report.json``.

    Returns
    -------
    (int, dict)
        Exit code and the report.
    """
    path = config
    if not os.path.exists(config) and config in bundled_scenarios():
        path = bundled_path(config)
    sc = load_scenario(path)
    if suite is not None and suite not in SUITES:
        raise ScenarioError(f"unknown suite {suite!r}")
    names = [suite] if suite else sc.suites
    threads = resolve_threads(threads)
    os.makedirs(out, exist_ok=True)
    results = []
    with warnings.catch_warnings():
        if strict:
            from .quantize import NyquistWarning

            warnings.simplefilter("error", NyquistWarning)
        for n in names:
            log.info("scenario %s: running %s", sc.name, n)
            res = run_suite(sc, n, threads)
            write_csv(os.path.join(out, f"{sc.name}_{n}.csv"), res)
            results.append(res)
    report = build_report(sc, results)
    with open(os.path.join(out, f"{sc.name}_report.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return (EXIT_OK if report["pass"] else EXIT_FAIL), report


def main(argv=None):
    ap = argparse.ArgumentParser(prog="semiweyl", description="Semiclassical validation suites.")
    sub = ap.add_subparsers(dest="cmd")
    run = sub.add_parser("run", help="run a scenario file (or a bundled scenario name)")
    run.add_argument("config")
    run.add_argument("--suite", default=None, help="run only this suite")
    run.add_argument("--out", default=".", help="output directory")
    run.add_argument("--strict", action="store_true", help="treat Nyquist warnings as failures")
    run.add_argument("--threads", type=int, default=None, help="worker threads (default: SEMIWEYL_THREADS or 1)")
    run.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("list", help="list bundled scenarios")
    args = ap.parse_args(argv)
    if args.cmd is None:
        ap.print_usage(sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.cmd == "list":
        print("\n".join(bundled_scenarios()))
        return EXIT_OK
    try:
        code, report = run_scenario(args.config, args.suite, args.out, args.strict, args.threads)
    except ScenarioError as exc:
        print(f"semiweyl: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Warning as exc:
        print(f"semiweyl: strict mode: {exc}", file=sys.stderr)
        return EXIT_FAIL
    for name, checks in report["checks"].items():
        for c in checks:
            status = "PASS" if c["pass"] else "FAIL"
            line = f"{status} {report['scenario']}/{name}: {c['check']} ({c['detail']})"
            print(line, file=sys.stdout if c["pass"] else sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
