"""Command-line front end: ``bounds``, ``spectrum`` and ``verify``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

import numpy as np

from . import catalog, expr, spectrum
from .confgrid import ConformalGrid, WeightedField
from .verification import SUITES, run_suite

log = logging.getLogger("yamabe_lab")


class ConfigError(ValueError):
    pass


def _dump_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _dump_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (";".join(v) if isinstance(v, list) else v) for k, v in row.items()})
    return buf.getvalue()


# ---------------------------------------------------------------- bounds


def bounds_rows(args) -> list[dict]:
    if args.name:
        entries = catalog.lookup(args.name)
    else:
        ks = args.k or [1]
        ms = args.m or [0]
        entries = [catalog.theorem_B_bounds(k, m) for k in ks for m in ms]
    return [e.to_dict() for e in entries]


def cmd_bounds(args) -> int:
    try:
        rows = bounds_rows(args)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.format == "csv":
        sys.stdout.write(_dump_csv(rows, ["name", "lower", "upper", "exact", "lower_exact", "upper_exact",
                                          "provenance"]))
    else:
        sys.stdout.write(_dump_json({"rows": rows}))
    return 0


# ---------------------------------------------------------------- spectrum

SPECTRUM_KEYS = {"N", "u", "f", "tol", "scheme", "solver", "compare_u_inverse"}


def load_spectrum_config(text: str, source: str = "<config>") -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}: top level must be a JSON object")
    unknown = set(doc) - SPECTRUM_KEYS
    if unknown:
        raise ConfigError(f"{source}: unknown field(s) {sorted(unknown)}")
    n = doc.get("N")
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ConfigError(f"{source}: field 'N' must be an integer >= 2, got {n!r}")
    tol = doc.get("tol", 1e-10)
    if not isinstance(tol, (int, float)) or tol <= 0:
        raise ConfigError(f"{source}: field 'tol' must be a positive number, got {tol!r}")
    scheme = doc.get("scheme", "covariant")
    if scheme not in spectrum.SCHEMES:
        raise ConfigError(f"{source}: field 'scheme' must be one of {list(spectrum.SCHEMES)}")
    fields = {}
    for key, default in (("u", "1"), ("f", "0")):
        src = doc.get(key, default)
        if not isinstance(src, (str, int, float)) or isinstance(src, bool):
            raise ConfigError(f"{source}: field {key!r} must be an expression string or number")
        try:
            fields[key] = expr.evaluate(src, n)
        except expr.ExpressionError as exc:
            raise ConfigError(f"{source}: field {key!r}: {exc}") from None
    try:
        solver = spectrum.SolverConfig.from_dict(doc.get("solver", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: field 'solver': {exc}") from None
    if np.any(fields["u"] <= 0):
        raise ConfigError(f"{source}: field 'u' must be positive at every node")
    return {"N": n, "u": fields["u"], "f": fields["f"], "tol": float(tol), "scheme": scheme,
            "solver": solver, "compare_u_inverse": bool(doc.get("compare_u_inverse", False))}


def run_spectrum(cfg: dict) -> dict:
    grid = ConformalGrid(cfg["N"], cfg["u"])
    f = WeightedField(cfg["f"], -2)
    norm = spectrum.conformal_normalize(grid, f, cfg["tol"], cfg["solver"], cfg["scheme"])
    out = norm.spectral.to_dict(norm.sign)
    if cfg["compare_u_inverse"]:
        out["u_inverse_deviation"] = float(f"{spectrum.ground_state_deviation(norm.spectral, grid):.12g}")
    return out


def cmd_spectrum(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = load_spectrum_config(fh.read(), args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        out = run_spectrum(cfg)
    except spectrum.SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.format == "csv":
        sys.stdout.write(_dump_csv([out], sorted(out)))
    else:
        sys.stdout.write(_dump_json(out))
    return 0


# ---------------------------------------------------------------- verify


def default_jobs() -> int:
    raw = os.environ.get("YAMABE_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def cmd_verify(args) -> int:
    try:
        checks = run_suite(args.suite, args.jobs)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    passed = all(c.passed for c in checks)
    summary = {
        "suite": args.suite,
        "passed": passed,
        "n_checks": len(checks),
        "n_failed": sum(not c.passed for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
    if args.format == "csv":
        sys.stdout.write(_dump_csv([{"name": c.name, "passed": c.passed} for c in checks], ["name", "passed"]))
    else:
        sys.stdout.write(_dump_json(summary))
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}", file=sys.stderr)
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="yamabe-lab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="Yamabe invariant bounds for kCP2 # m(S1xS3) or a named manifold")
    p.add_argument("--k", type=int, action="append", help="number of CP2 summands (1..3); repeatable")
    p.add_argument("--m", type=int, action="append", help="number of S1xS3 summands; repeatable")
    p.add_argument("--name", help=f"catalog entry: {', '.join(catalog.catalog_names())}")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("spectrum", help="lowest eigenpair of the perturbed Yamabe operator")
    p.add_argument("config", help="JSON config with N, u, f, tol, scheme, solver")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("verify", help="run a verification bundle")
    p.add_argument("suite", help=f"one of {', '.join(sorted(SUITES))}, or all")
    p.add_argument("--jobs", type=int, default=default_jobs())
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
