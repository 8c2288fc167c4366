"""Command-line surface.

Subcommands: compute, scan, balanced, bp, faltings, validate.
Exit codes: 0 ok, 2 validation error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

import numpy as np

from .errors import HeightsError, NumericError, ValidationError
from .families import (BrieskornPhamSpec, EllipticCurveData,
                       brieskorn_pham_analyze, build_p1_fs,
                       build_p2_blowup_family, curve_from_label,
                       curve_periods, elliptic_faltings_height,
                       faltings_to_hk)
from .functionals import (arakelov_calabi, arakelov_energy, aubin_I_rel,
                          aubin_J_rel, entropy_rel, modular_height,
                          na_scalar_curvature, normalized_df,
                          relative_modular_height, ricci_energy_rel,
                          slope_semistability_test)
from .geometry import SphereGeometry
from .heightvalue import HeightValue
from .intersection import IntersectionModel
from .quantize import (balanced_iterate, dequantization_scan,
                       hilbert_samuel_residual, l2_gram)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3


def _parse_primes(s: str):
    return tuple(int(p) for p in s.split(",") if p.strip())


def _load_family(args):
    if getattr(args, "model", None):
        return IntersectionModel.load(args.model), None
    fam = getattr(args, "family", None)
    if fam in ("p1-fs", "p1"):
        return build_p1_fs(), None
    if fam == "p2-blowup":
        primes = _parse_primes(args.primes) if args.primes else (2, 3, 5)
        pair = build_p2_blowup_family(primes)
        return pair.model, pair
    raise ValidationError(f"unknown family {fam!r}; pass --family or --model")


def _height_report(name: str, v) -> dict:
    if isinstance(v, HeightValue):
        return {"functional": name, "symbolic": str(v),
                "value": v.evaluate()}
    if isinstance(v, Fraction):
        return {"functional": name, "symbolic": str(v), "value": float(v)}
    return {"functional": name, "symbolic": "", "value": v}


def _emit(rows, emit: str, stream=None):
    stream = stream or sys.stdout
    if emit == "json":
        json.dump(rows, stream, indent=1)
        stream.write("\n")
        return
    cols = list(rows[0].keys())
    if emit == "csv":
        w = csv.DictWriter(stream, fieldnames=cols, lineterminator="\r\n")
        w.writeheader()
        w.writerows(rows)
        return
    widths = {c: max(len(str(c)), *(len(str(r[c])) for r in rows))
              for c in cols}
    stream.write("  ".join(str(c).ljust(widths[c]) for c in cols) + "\n")
    for r in rows:
        stream.write("  ".join(str(r[c]).ljust(widths[c]) for c in cols)
                     + "\n")


def run_compute(args) -> int:
    model, pair = _load_family(args)
    if args.relative_to and pair is None:
        raise ValidationError(
            "--relative-to needs a family with a reference model")
    rows = []
    for fn in args.functional.split(","):
        fn = fn.strip()
        if fn == "hk":
            if args.relative_to:
                rows.append(_height_report(
                    "hk(rel)", relative_modular_height(model, pair.ref)))
            else:
                rows.append(_height_report("hk", modular_height(model)))
        elif fn == "energy":
            rows.append(_height_report("energy", arakelov_energy(model)))
        elif fn in ("ricci", "entropy", "I", "J"):
            if pair is None:
                raise ValidationError(f"{fn} needs a model-pair family")
            op = {"ricci": ricci_energy_rel, "entropy": entropy_rel,
                  "I": aubin_I_rel, "J": aubin_J_rel}[fn]
            rows.append(_height_report(fn, op(pair)))
        elif fn == "snA":
            if args.prime is None:
                raise ValidationError("snA needs --prime")
            for comp, v in na_scalar_curvature(model, args.prime).items():
                rows.append(_height_report(f"snA[{comp}]", v))
        elif fn == "ndf":
            rows.append(_height_report(
                "ndf", normalized_df(model, args.cover_degree)))
        elif fn == "calabi":
            primes = _parse_primes(args.primes) if args.primes \
                else sorted({f.prime for f in model.fibers})
            rows.append(_height_report(
                "calabi", arakelov_calabi(model, primes, args.arch_term)))
        elif fn == "slope":
            rows.append({"functional": "slope",
                         "symbolic": slope_semistability_test(model),
                         "value": ""})
        else:
            raise ValidationError(f"unknown functional {fn!r}")
    _emit(rows, args.emit)
    return EXIT_OK


def run_scan(args) -> int:
    if args.m_max < 1:
        raise ValidationError("--m-max must be >= 1")
    model, _ = _load_family(args)
    if args.kind == "dequantization":
        res = dequantization_scan(model, args.m_max)
        rows = [dict(zip(res.columns, r)) for r in res.table]
        fit = {"fitted_constant": res.fitted_constant,
               "fitted_log_slope": res.fitted_log_slope}
    else:
        table = hilbert_samuel_residual(model, args.m_max)
        rows = [{"m": m, "residual": r, "residual_over_m": r / m}
                for m, r in table]
        fit = {"last_residual_over_m": rows[-1]["residual_over_m"]}
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()),
                               lineterminator="\r\n")
            w.writeheader()
            w.writerows(rows)
        with open(args.out + ".fit.json", "w") as fh:
            json.dump(fit, fh, indent=1)
    _emit([fit], args.emit)
    return EXIT_OK


def run_balanced(args) -> int:
    if args.tol <= 0:
        raise ValidationError("--tol must be > 0")
    model, _ = _load_family(args)
    geometry = SphereGeometry(args.grid)
    g0 = l2_gram("p1-fs", args.m, "fs", "m-omega")
    if args.gram:
        with open(args.gram) as fh:
            raw = np.array(json.load(fh), float)
        from .quantize import SectionGram
        g0 = SectionGram(g0.m, g0.basis, raw, g0.volume_convention)
    elif args.perturb:
        rng = np.random.default_rng(args.seed)
        r = g0.rank
        sym = rng.standard_normal((r, r))
        sym = (sym + sym.T) / 2.0
        sym -= np.trace(sym) / r * np.eye(r)
        from .quantize import SectionGram
        g0 = SectionGram(g0.m, g0.basis,
                         g0.gram * np.exp(args.perturb * sym),
                         g0.volume_convention)
    g, iters, converged, trace = balanced_iterate(
        g0, geometry, tol=args.tol, max_iter=args.max_iter, model=model)
    rows = [{"iteration": it, "distance": d, "htilde_C": h}
            for it, d, h in trace]
    rows.append({"iteration": "converged", "distance": converged,
                 "htilde_C": iters})
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["iteration", "distance",
                                               "htilde_C"],
                               lineterminator="\r\n")
            w.writeheader()
            w.writerows(rows)
    _emit(rows if args.emit != "table" else rows[-3:], args.emit)
    return EXIT_OK


def run_bp(args) -> int:
    weights = tuple(int(x) for x in args.weights.split(","))
    spec = BrieskornPhamSpec(weights, args.prime)
    rep = brieskorn_pham_analyze(spec, j_max=args.degree_bound)
    out = {k: (str(v) if isinstance(v, Fraction) else v)
           for k, v in rep.items()}
    out["log_discrepancies"] = {k: str(v)
                                for k, v in rep["log_discrepancies"].items()}
    json.dump(out, sys.stdout, indent=1)
    sys.stdout.write("\n")
    return EXIT_OK


def run_faltings(args) -> int:
    if args.curve:
        E = curve_from_label(args.curve)
    elif args.a_invariants:
        a = tuple(int(x) for x in args.a_invariants.split(","))
        if args.delta_min is None:
            raise ValidationError("--a-invariants needs --delta-min")
        E = EllipticCurveData(a, args.delta_min)
    else:
        raise ValidationError("pass --curve or --a-invariants")
    per = curve_periods(E)
    rows = []
    methods = ("qexp", "agm") if args.method == "both" else (args.method,)
    for meth in methods:
        h = elliptic_faltings_height(E, meth)
        row = {"method": meth, "h_faltings": h}
        if args.polarization:
            row["h_K"] = faltings_to_hk(h, args.polarization)
        rows.append(row)
    rows.append({"method": "tau", "h_faltings": str(per["tau"]),
                 **({"h_K": ""} if args.polarization else {})})
    _emit(rows, args.emit)
    return EXIT_OK


def run_validate(args) -> int:
    model = IntersectionModel.load(args.model)
    rows = [{
        "check": "ok", "n": model.n, "classes": len(model.classes),
        "deg_Ln": str(model.deg_Ln), "deg_LK": str(model.deg_LK),
        "Sbar": str(model.Sbar()),
    }]
    _emit(rows, args.emit)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="heights",
        description="height functionals on polarized integral models")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--family", default=None)
        sp.add_argument("--model", default=None)
        sp.add_argument("--emit", choices=("json", "csv", "table"),
                        default="table")

    c = sub.add_parser("compute", help="evaluate functionals")
    add_common(c)
    c.add_argument("--functional", default="hk")
    c.add_argument("--primes", default=None)
    c.add_argument("--prime", type=int, default=None)
    c.add_argument("--relative-to", default=None)
    c.add_argument("--cover-degree", type=int, default=1)
    c.add_argument("--arch-term", type=float, default=0.0)
    c.set_defaults(func=run_compute)

    s = sub.add_parser("scan", help="dequantization / Hilbert-Samuel scans")
    add_common(s)
    s.add_argument("--kind", choices=("dequantization", "hilbert-samuel"),
                   default="dequantization")
    s.add_argument("--m-max", type=int, required=True)
    s.add_argument("--primes", default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=run_scan)

    b = sub.add_parser("balanced", help="balanced-metric iteration")
    add_common(b)
    b.add_argument("--m", type=int, default=5)
    b.add_argument("--gram", default=None,
                   help="JSON file with a starting Gram matrix")
    b.add_argument("--perturb", type=float, default=0.1)
    b.add_argument("--tol", type=float, default=1e-10)
    b.add_argument("--max-iter", type=int, default=200)
    b.add_argument("--grid", type=int, default=128)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--primes", default=None)
    b.add_argument("--out", default=None)
    b.set_defaults(func=run_balanced)

    q = sub.add_parser("bp", help="quotient-point multiplicity analyzer")
    q.add_argument("--weights", required=True)
    q.add_argument("--prime", type=int, required=True)
    q.add_argument("--degree-bound", type=int, default=12)
    q.set_defaults(func=run_bp)

    f = sub.add_parser("faltings", help="elliptic Faltings heights")
    f.add_argument("--curve", default=None)
    f.add_argument("--a-invariants", default=None)
    f.add_argument("--delta-min", type=int, default=None)
    f.add_argument("--method", choices=("qexp", "agm", "both"),
                   default="both")
    f.add_argument("--polarization", type=int, default=None)
    f.add_argument("--emit", choices=("json", "csv", "table"),
                   default="table")
    f.set_defaults(func=run_faltings)

    v = sub.add_parser("validate", help="load a model file and check invariants")
    v.add_argument("--model", required=True)
    v.add_argument("--emit", choices=("json", "csv", "table"),
                   default="table")
    v.set_defaults(func=run_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_NUMERIC
    except (ValidationError, HeightsError, OSError,
            json.JSONDecodeError) as exc:
        print(f"validation error: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
