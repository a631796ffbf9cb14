"""Command-line front end and JSON documents.

Exit codes: 0 success, 1 oracle failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .algebra import CPoly, Frac, MPoly, QSeries, as_rational, default_order, fmt_rational, is_rational

KNOWN_FORMS = ("E2", "E4", "E6", "Delta", "Delta0", "J")
DEFAULT_GRID = "-0.3,0.3,0.9,1.5,41"
AUTOMORPHY_SAMPLES = (0.1 + 1.1j, -0.2 + 1.3j, 0.25 + 0.95j, 0.05 + 1.45j, -0.3 + 1.0j)


class InputError(ValueError):
    pass


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# --------------------------------------------------------------------------
# rationals and coefficients


def emit_rational(x) -> str:
    return fmt_rational(x)


def parse_rational(x) -> Fraction:
    if isinstance(x, bool):
        raise InputError(f"not a rational: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {x!r}") from exc
    raise InputError(f"rationals are written as strings \"p/q\", got {x!r}")


def emit_coeff(x):
    if isinstance(x, CPoly):
        return {str(p): emit_rational(v) for p, v in sorted(x.terms.items())}
    if is_rational(x):
        return emit_rational(x)
    raise InputError(f"cannot serialize coefficient {x!r}")


def parse_coeff(x):
    if isinstance(x, dict):
        try:
            return CPoly({int(p): parse_rational(v) for p, v in x.items()})
        except ValueError as exc:
            raise InputError(f"bad c-power map {x!r}") from exc
    return parse_rational(x)


# --------------------------------------------------------------------------
# SeriesDocument


def emit_series(s: QSeries) -> dict:
    terms = []
    for k, x in enumerate(s.coeffs):
        if x != 0:
            terms.append([s.start + k, emit_coeff(x)])
    doc = {"denom": s.N, "terms": terms, "order": s.prec}
    if s.var != "q":
        doc["var"] = s.var
    return doc


def parse_series(doc) -> QSeries:
    if not isinstance(doc, dict):
        raise InputError("series document must be an object")
    unknown = set(doc) - {"denom", "terms", "order", "var"}
    if unknown:
        raise InputError(f"unknown series fields {sorted(unknown)}")
    N = doc.get("denom", 1)
    if not isinstance(N, int) or isinstance(N, bool) or N <= 0:
        raise InputError("denom must be a positive integer")
    prec = doc.get("order")
    if prec is not None and (not isinstance(prec, int) or isinstance(prec, bool)):
        raise InputError("order must be an integer numerator or null")
    raw = doc.get("terms", [])
    if not isinstance(raw, list):
        raise InputError("terms must be a list")
    coeffs = {}
    for item in raw:
        if not (isinstance(item, list) and len(item) == 2 and isinstance(item[0], int)):
            raise InputError(f"bad term {item!r}")
        if item[0] in coeffs:
            raise InputError(f"repeated exponent {item[0]}/{N}")
        coeffs[item[0]] = parse_coeff(item[1])
    var = doc.get("var", "q")
    if not coeffs:
        return QSeries([], 0 if prec is None else min(0, prec), N, prec, var)
    start = min(coeffs)
    top = max(coeffs) if prec is None else prec
    if prec is not None and max(coeffs) > prec:
        raise InputError("term beyond the stated order")
    return QSeries([coeffs.get(k, 0) for k in range(start, top + 1)], start, N, prec, var)


# --------------------------------------------------------------------------
# SpecDocument


def emit_spec(spec) -> dict:
    def ks(k):
        return [emit_rational(x) for x in k.as_tuple()]
    doc = {"inf": ks(spec.inf), "i": ks(spec.i), "rho": ks(spec.rho)}
    doc["points"] = [{"t": t if isinstance(t, str) else emit_rational(t), "exponents": ks(k)} for t, k in spec.points]
    return doc


def parse_spec(doc, strict: bool = True):
    from .existence import REGULAR, ExponentSpec

    if not isinstance(doc, dict):
        raise InputError("spec document must be an object")
    unknown = set(doc) - {"inf", "i", "rho", "points", "name"}
    if unknown:
        raise InputError(f"unknown spec fields {sorted(unknown)}")
    if "inf" not in doc:
        raise InputError("spec needs cusp exponents under 'inf'")

    def triple(x, where):
        if not isinstance(x, list) or len(x) != 3:
            raise InputError(f"exponents at {where} must be a list of three rationals")
        return [parse_rational(v) for v in x]

    pts = []
    for j, p in enumerate(doc.get("points", []), 1):
        if not isinstance(p, dict) or set(p) != {"t", "exponents"}:
            raise InputError(f"point {j} needs exactly 't' and 'exponents'")
        t = parse_rational(p["t"])
        if t in (0, 1):
            raise InputError("t = 0 and t = 1 are rho and i")
        pts.append((t, triple(p["exponents"], f"t={p['t']}")))
    spec = ExponentSpec(triple(doc["inf"], "inf"),
                        triple(doc["i"], "i") if "i" in doc else REGULAR,
                        triple(doc["rho"], "rho") if "rho" in doc else REGULAR,
                        tuple(pts))
    errs = spec.structural_errors() if not strict else spec.violations()
    if errs:
        raise InputError("invalid spec: " + "; ".join(errs))
    return spec


# --------------------------------------------------------------------------
# polynomials


def _mono_doc(m) -> dict:
    return {x: e for x, e in m}


def emit_poly(p) -> dict:
    if is_rational(p):
        return {"terms": [[{}, emit_rational(p)]] if p != 0 else []}
    if isinstance(p, Frac):
        return {"numerator": emit_poly(p.num)["terms"], "denominator": emit_poly(p.den)["terms"]}
    if isinstance(p, MPoly):
        return {"terms": [[_mono_doc(m), emit_rational(v)] for m, v in p.sorted_terms()]}
    raise InputError(f"cannot serialize {p!r}")


# --------------------------------------------------------------------------
# form expressions

_RATIONAL_HEAD = re.compile(r"^-\d")
_FACTOR = re.compile(r"^(?P<name>[A-Za-z][A-Za-z0-9]*)(\^(?P<exp>\d+))?$")


def _split_terms(expr: str) -> list[str]:
    """Split at top-level + and -; a sign right after *, / or ^ belongs to the factor."""
    terms, cur = [], ""
    for ch in expr:
        prev = cur.rstrip()[-1:] if cur.strip() else ""
        if ch in "+-" and prev and prev not in "*/^+-":
            terms.append(cur)
            cur = "-" if ch == "-" else ""
        else:
            cur += ch
    terms.append(cur)
    return terms


def eval_form(expr: str, order: int) -> QSeries:
    """Sums of products like '2*E4^3*Delta - 1/3*Delta^2'."""
    from . import modforms

    total = None
    for term in _split_terms(expr):
        term = term.strip()
        if term in ("", "-"):
            raise InputError(f"empty term in {expr!r}")
        if term.startswith("-") and not _RATIONAL_HEAD.match(term):
            term = "-1*" + term[1:].strip()
        value = QSeries.constant(1).truncate(order)
        scale = Fraction(1)
        for factor in term.split("*"):
            factor = factor.strip()
            m = _FACTOR.match(factor)
            if m and m.group("name") in KNOWN_FORMS:
                base = getattr(modforms, m.group("name"))(order + 1)
                value = value * (base ** int(m.group("exp") or 1))
            else:
                if m:
                    raise InputError(f"unknown form {factor!r} (known: {', '.join(KNOWN_FORMS)})")
                scale *= parse_rational(factor)
        value = value.scale(scale).truncate(order)
        total = value if total is None else total + value
    return total


@dataclass
class TripleDocument:
    weight: int
    forms: list
    names: list
    expect: dict = field(default_factory=dict)


def load_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc.msg} (line {exc.lineno})") from exc


def parse_triple(doc, order: int) -> TripleDocument:
    if not isinstance(doc, dict) or "weight" not in doc or "forms" not in doc:
        raise InputError("triple document needs 'weight' and 'forms'")
    k = doc["weight"]
    if not isinstance(k, int) or isinstance(k, bool) or k < 0 or k % 2:
        raise InputError("weight must be a non-negative even integer")
    forms = doc["forms"]
    if not isinstance(forms, list) or len(forms) != 3:
        raise InputError("a triple needs exactly three forms")
    series, names = [], []
    for f in forms:
        if isinstance(f, str):
            series.append(eval_form(f, order))
            names.append(f)
        else:
            series.append(parse_series(f))
            names.append("series")
    return TripleDocument(k, series, names, doc.get("expect", {}))


# --------------------------------------------------------------------------
# report helpers


def _exps_text(k) -> str:
    return "{" + ", ".join(emit_rational(x) for x in k.as_tuple()) + "}"


def _matrix_text(m) -> str:
    return "[" + "; ".join(" ".join(str(x) for x in row) for row in m) + "]"


class Checks:
    def __init__(self):
        self.items = []

    def add(self, name: str, ok: bool, detail: str = ""):
        self.items.append((name, bool(ok), detail))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.items)

    def lines(self) -> list[str]:
        out = []
        for name, ok, detail in self.items:
            out.append(f"check {name}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail and not ok else ""))
        out.append("PASS" if self.ok else "FAIL")
        return out

    def as_doc(self) -> list:
        return [{"name": n, "ok": ok, "detail": d} for n, ok, d in self.items]


def _set_order(args) -> int:
    if getattr(args, "order", None) is not None:
        if args.order < 0:
            raise InputError("--order must be non-negative")
        os.environ["MODEFORGE_ORDER"] = str(args.order)
        return args.order
    try:
        return default_order()
    except ValueError as exc:
        raise InputError(str(exc)) from exc


# --------------------------------------------------------------------------
# expand


def cmd_expand(args, out) -> int:
    from . import modforms

    order = _set_order(args)
    if args.name not in KNOWN_FORMS:
        raise InputError(f"unknown form {args.name!r} (known: {', '.join(KNOWN_FORMS)})")
    s = getattr(modforms, args.name)(order)
    if args.name in ("Delta0", "J"):
        s = s.truncate(order)
    if args.format == "json":
        out.write(dumps(emit_series(s)))
    else:
        out.write(s.to_text() + "\n")
    return 0


# --------------------------------------------------------------------------
# mode


def _mode_analysis(mode):
    from .bol import canonical_matrices, classify_bol, multiplier_from_mode
    from .mode import exponents_everywhere

    report = exponents_everywhere(mode)
    bol = None
    bol_error = None
    if "i" in report and "rho" in report:
        try:
            mult = multiplier_from_mode(mode, report, order=8)
            tag = classify_bol(report["i"].exponents)
            bol = canonical_matrices(tag, mult.ell, report["i"].exponents, report["rho"].exponents)
        except ValueError as exc:
            bol_error = str(exc)
    return report, bol, bol_error


def _mode_doc(mode, report, bol, seed: str, checks: Checks | None) -> dict:
    doc = {
        "seed": seed,
        "Q": emit_series(mode.Q),
        "R": emit_series(mode.R),
        "closed_form": None if mode.closed is None else
        {k: emit_rational(v) for k, v in sorted(mode.closed.nonzero().items())},
        "exponents": {name: {"exponents": [emit_rational(x) for x in r.exponents.as_tuple()],
                             "tag": r.tag, "branch": r.branch} for name, r in report.items()},
    }
    if bol is not None:
        doc["bol"] = {"ell": bol.ell, "tag": bol.tag, "S": [list(r) for r in bol.S_hat],
                      "R": [list(r) for r in bol.R_hat], "T": [list(r) for r in bol.T_hat]}
    if checks is not None:
        doc["checks"] = checks.as_doc()
        doc["status"] = "PASS" if checks.ok else "FAIL"
    return doc


def _mode_text(mode, report, bol, bol_error, seed: str) -> list[str]:
    lines = [f"seed: {seed}", f"valid through q^{fmt_rational(mode.valid)}",
             f"Q = {mode.Q.to_text(6)}", f"R = {mode.R.to_text(6)}"]
    if mode.closed is not None:
        vals = mode.closed.nonzero()
        lines.append("closed form: " + (", ".join(f"{k} = {emit_rational(v)}" for k, v in sorted(vals.items()))
                                        or "Q = R = 0"))
    else:
        lines.append("closed form: not determined")
    if mode.W is not None and mode.W_weight is not None:
        from .modforms import factor_form
        ex = factor_form(mode.W, mode.W_weight).expanded()
        pj = "" if len(ex.P) == 1 else " P(j), P = [" + ", ".join(fmt_rational(x) for x in ex.P) + "]"
        lines.append(f"W = c^{mode.W_cpow} * {ex.scale} * E4^{ex.a} E6^{ex.b} Delta^{ex.d}{pj}")
    lines.append("exponents:")
    for name, r in report.items():
        lines.append(f"  {name:8s} {_exps_text(r.exponents):18s} {r.tag or '-':22s} {r.branch or ''}")
    if bol is not None:
        lines.append(f"Bol: l = {bol.ell}, {bol.tag}")
        lines.append(f"  S = {_matrix_text(bol.S_hat)}, R = {_matrix_text(bol.R_hat)}, T = {_matrix_text(bol.T_hat)}")
    elif bol_error:
        lines.append(f"Bol: unavailable ({bol_error})")
    return lines


def _extremal_checks(k: int, mode, report, bol) -> Checks:
    from .frobenius import APPARENT, COMPLETELY_NOT_APPARENT
    from .mode import CLOSED_FORM_CHECK, closed_form_mismatches, extremal_closed_form, is_rational_mode
    from .modforms import factor_form

    ch = Checks()
    through = min(CLOSED_FORM_CHECK, int(mode.valid))
    bad = closed_form_mismatches(mode, extremal_closed_form(k), through)
    ch.add(f"closed form through q^{through}", not bad, "mismatch in " + ", ".join(bad))
    ex = factor_form(mode.W, 3 * k).expanded()
    want = (0, 0, k // 4) if k % 4 == 0 else (0, 1, (k - 2) // 4)
    ch.add("W factorization", (ex.a, ex.b, ex.d) == want and ex.P == (1,) and mode.W_cpow == 3,
           f"got E4^{ex.a} E6^{ex.b} Delta^{ex.d} P={ex.P}")
    ch.add("c-free Q and R", is_rational_mode(mode))
    ch.add("cusp completely not apparent", report["inf"].tag == COMPLETELY_NOT_APPARENT, str(report["inf"].tag))
    interior = [n for n in report if n != "inf"]
    ch.add("interior points apparent", all(report[n].tag == APPARENT for n in interior),
           ", ".join(f"{n}:{report[n].tag}" for n in interior))
    ch.add("Bol relations and spectra", bol is not None and bol.relations_hold())
    return ch


def _triple_checks(doc: TripleDocument, mode, report, bol) -> Checks:
    from .existence import obstruction_polynomials, spec_from_mode, univariate_roots
    from .frobenius import APPARENT
    from .mode import ClosedForm, closed_form_mismatches
    from .modforms import factor_form

    ch = Checks()
    ch.add("cusp apparent", report["inf"].tag == APPARENT, str(report["inf"].tag))
    exp = doc.expect
    if "wronskian" in exp:
        w = exp["wronskian"]
        ex = factor_form(mode.W, mode.W_weight).expanded()
        got = (ex.a, ex.b, ex.d)
        ch.add("W factorization", got == (w.get("E4", 0), w.get("E6", 0), w.get("Delta", 0)) and ex.P == (1,),
               f"got E4^{ex.a} E6^{ex.b} Delta^{ex.d}")
    if "closed_form" in exp:
        vals = {k: parse_rational(v) for k, v in exp["closed_form"].items()}
        bad = closed_form_mismatches(mode, ClosedForm((), vals), min(40, int(mode.valid)))
        ch.add("closed form", not bad, "mismatch in " + ", ".join(bad))
    for name, ks in exp.get("exponents", {}).items():
        want = [parse_rational(x) for x in ks]
        got = list(report[name].exponents.as_tuple()) if name in report else None
        ch.add(f"exponents at {name}", got == want, f"got {got}")
    if "bol" in exp:
        ch.add("Bol tag", bol is not None and bol.tag == exp["bol"], bol.tag if bol else "none")
    if "ell_divisible_by" in exp:
        ch.add("l divisibility", bol is not None and bol.ell % exp["ell_divisible_by"] == 0,
               str(bol.ell if bol else None))
    if "apparentness_forces" in exp:
        sysm = obstruction_polynomials(spec_from_mode(mode, report), strict=False)
        for var, val in exp["apparentness_forces"].items():
            roots = set()
            for e in sysm.nonzero():
                if not is_rational(e.poly):
                    roots |= {r for r, _ in univariate_roots(e.poly, var)}
            ch.add(f"apparentness forces {var}", roots == {parse_rational(val)}, f"roots {sorted(roots)}")
    return ch


def cmd_mode(args, out) -> int:
    from .mode import mode_from_quasi, mode_from_triple
    from .quasi import extremal

    order = _set_order(args)
    if args.from_extremal is not None:
        k = args.from_extremal
        if k < 6 or k % 2:
            raise InputError(f"extremal weight must be even and at least 6, got {k}")
        mode = mode_from_quasi(extremal(k, order))
        seed = f"extremal k={k}"
    else:
        doc = parse_triple(load_json(args.from_triple), order)
        try:
            mode = mode_from_triple(*doc.forms, doc.weight)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        seed = f"triple weight {doc.weight}: " + ", ".join(doc.names)
    report, bol, bol_error = _mode_analysis(mode)
    checks = None
    if args.check:
        checks = _extremal_checks(args.from_extremal, mode, report, bol) if args.from_extremal is not None \
            else _triple_checks(doc, mode, report, bol)
    if args.format == "json":
        out.write(dumps(_mode_doc(mode, report, bol, seed, checks)))
    else:
        lines = _mode_text(mode, report, bol, bol_error, seed)
        if checks is not None:
            lines += checks.lines()
        out.write("\n".join(lines) + "\n")
    return 0 if checks is None or checks.ok else 1


# --------------------------------------------------------------------------
# existence


def _parse_assignment(raw: str) -> dict:
    if os.path.exists(raw):
        data = load_json(raw)
    else:
        try:
            data = json.loads(raw)
        except json.JSONDecodeError:
            data = {}
            for part in raw.split(","):
                if "=" not in part:
                    raise InputError(f"assignment {raw!r} is neither a file, JSON nor name=value pairs")
                k, v = part.split("=", 1)
                data[k.strip()] = v.strip()
    if not isinstance(data, dict):
        raise InputError("assignment must map names to rationals")
    return {k: parse_rational(v) for k, v in data.items()}


def cmd_existence(args, out) -> int:
    from .existence import degree_report, obstruction_polynomials, univariate_roots, verify_candidate

    _set_order(args)
    spec = parse_spec(load_json(args.spec), strict=not args.allow_violations)
    try:
        system = obstruction_polynomials(spec, strict=not args.allow_violations)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    degrees = degree_report(system)
    if args.verify is not None:
        assignment = _parse_assignment(args.verify)
        try:
            ver = verify_candidate(system, assignment)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        if args.format == "json":
            out.write(dumps({"ok": ver.ok, "residuals": [
                {"point": p, "pair": list(pr), "value": emit_rational(v)} for p, pr, v in ver.residuals]}))
        else:
            for p, pr, v in ver.residuals:
                out.write(f"P_{p}{pr} = {emit_rational(v)}\n")
            out.write("PASS\n" if ver.ok else "FAIL\n")
        return 0 if ver.ok else 1
    if args.emit_system or args.format == "json":
        doc = {
            "spec": emit_spec(spec),
            "variables": list(system.params.free),
            "fixed": {k: (emit_rational(v) if is_rational(v) else emit_poly(v))
                      for k, v in sorted(system.params.fixed.items())},
            "flags": dict(sorted(system.params.flags.items())),
            "equations": [{"point": e.point, "pair": list(e.pair), "difference": e.difference,
                           "zero": e.is_zero, "poly": emit_poly(e.poly)} for e in system.entries],
            "degrees": [{"point": d.point, "pair": list(d.pair), "degree": d.degree,
                         "expected": d.expected, "ok": d.ok} for d in degrees],
        }
        out.write(dumps(doc))
        return 0
    lines = [f"free parameters: {', '.join(system.params.free)}"]
    for name, ok in sorted(system.params.flags.items()):
        if not ok:
            lines.append(f"warning: {name} fails")
    by_key = {(d.point, d.pair): d for d in degrees}
    points = []
    for e in system.entries:
        if e.point not in points:
            points.append(e.point)
    for pt in points:
        entries = system.at(pt)
        if all(e.is_zero for e in entries):
            lines.append(f"{pt}: no constraints")
            continue
        for e in entries:
            d = by_key[(e.point, e.pair)]
            exp = "any" if d.expected is None else d.expected
            lines.append(f"P_{pt}{e.pair} = {e.poly}   [degree {d.degree}, expected {exp}]")
            if not e.is_zero and not is_rational(e.poly):
                num = e.poly.num if isinstance(e.poly, Frac) else e.poly
                vs = num.variables()
                if len(vs) == 1:
                    roots = univariate_roots(e.poly, vs[0])
                    lines.append(f"  roots in {vs[0]}: " + (", ".join(emit_rational(r) for r, _ in roots) or "none rational"))
    out.write("\n".join(lines) + "\n")
    return 0


# --------------------------------------------------------------------------
# toda


def _parse_grid(raw: str):
    from .toda import Grid

    parts = raw.split(",")
    if len(parts) != 5:
        raise InputError("--grid expects x0,x1,y0,y1,n")
    try:
        x0, x1, y0, y1 = (float(p) for p in parts[:4])
        n = int(parts[4])
    except ValueError as exc:
        raise InputError(f"bad grid {raw!r}") from exc
    if n < 5 or x1 <= x0 or y1 <= y0 or y0 <= 0:
        raise InputError("grid needs n >= 5, x0 < x1 and 0 < y0 < y1")
    if not math.isclose((x1 - x0), (y1 - y0), rel_tol=1e-9):
        raise InputError("the 5-point stencil needs a square grid (equal spacing in x and y)")
    return Grid(x0, x1, y0, y1, n)


def _seed_from_args(args, order: int):
    from .toda import TripleSeed, weight24_seed

    if args.seed == "weight24":
        return weight24_seed(order), {}
    doc = parse_triple(load_json(args.seed), order)
    try:
        return TripleSeed(doc.weight, tuple(doc.forms), tuple(doc.names)), doc.expect
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_toda(args, out) -> int:
    from .toda import (SingularGrid, TodaData, automorphy_defect, locate_singular_points, plot_rows,
                       refinement_ratio, toda_fields)

    order = _set_order(args)
    if not (args.lam > 0 and args.mu > 0):
        raise InputError("lambda and mu must be positive")
    grid = _parse_grid(args.grid)
    seed, _ = _seed_from_args(args, order)
    data = TodaData.build(seed)
    box = (grid.x0, grid.x1, grid.y0, grid.y1)
    sing = locate_singular_points(data, box, args.margin)
    try:
        fld = toda_fields(data, args.lam, args.mu, grid, args.margin, sing)
        r1, r2 = fld.max_residual()
        ratio = refinement_ratio(data, args.lam, args.mu, grid, args.margin, sing)
    except SingularGrid as exc:
        raise InputError(str(exc)) from exc
    defects = [automorphy_defect(data, z, args.lam, args.mu) for z in AUTOMORPHY_SAMPLES]
    rows = plot_rows(fld)
    if args.out:
        fmt = args.format or ("json" if args.out.endswith(".json") else "csv")
        Path(args.out).write_text(_plot_text(rows, fmt), encoding="utf-8")
    ok_res = max(r1, r2) < args.tolerance
    ok_ratio = all(3 <= r <= 5 for r in ratio)
    ok_auto = max(abs(d) for pair in defects for d in pair) < 1e-6
    lines = [
        f"seed: {', '.join(seed.names)} (weight {seed.weight}), lambda = {args.lam}, mu = {args.mu}",
        f"grid: [{grid.x0}, {grid.x1}] x [{grid.y0}, {grid.y1}], n = {grid.n}, h = {grid.h:.6g}, margin = {args.margin}",
        f"singular points near the grid: " + (", ".join(f"{z.real:.6f}{z.imag:+.6f}i" for z in sing) or "none"),
        f"max residual U1: {r1:.6e}",
        f"max residual U2: {r2:.6e}",
        f"refinement ratio (h -> h/2): {ratio[0]:.4f}, {ratio[1]:.4f}",
        "automorphy defects under S: " + ", ".join(f"{max(abs(a), abs(b)):.2e}" for a, b in defects),
        f"residual below {args.tolerance:g}: {'PASS' if ok_res else 'FAIL'}",
        f"ratio in [3, 5]: {'PASS' if ok_ratio else 'FAIL'}",
        f"automorphy below 1e-06: {'PASS' if ok_auto else 'FAIL'}",
    ]
    if args.out:
        lines.append(f"wrote {len(rows)} rows to {args.out}")
    out.write("\n".join(lines) + "\n")
    if args.check and not (ok_res and ok_ratio and ok_auto):
        return 1
    return 0


def _plot_text(rows, fmt: str) -> str:
    header = ["x", "y", "U1", "U2", "u1", "u2", "residual1", "residual2"]
    if fmt == "json":
        clean = [[None if isinstance(v, float) and math.isnan(v) else v for v in r] for r in rows]
        return json.dumps({"columns": header, "rows": clean}) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["nan" if math.isnan(v) else repr(v) for v in r])
    return buf.getvalue()


# --------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modeforge", description="Modular ODEs of order three: construction and checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("expand", help="q-expansion of a classical form")
    e.add_argument("name")
    e.add_argument("--order", type=int)
    e.add_argument("--format", choices=("text", "json"), default="text")

    m = sub.add_parser("mode", help="build and analyze a MODE")
    g = m.add_mutually_exclusive_group(required=True)
    g.add_argument("--from-extremal", type=int, metavar="K")
    g.add_argument("--from-triple", metavar="FILE")
    m.add_argument("--check", action="store_true")
    m.add_argument("--order", type=int)
    m.add_argument("--format", choices=("text", "json"), default="text")

    x = sub.add_parser("existence", help="apparentness obstruction systems")
    x.add_argument("--spec", required=True, metavar="FILE")
    h = x.add_mutually_exclusive_group()
    h.add_argument("--emit-system", action="store_true")
    h.add_argument("--verify", metavar="ASSIGNMENT")
    x.add_argument("--allow-violations", action="store_true",
                   help="accept specs that break the i/rho congruences")
    x.add_argument("--order", type=int)
    x.add_argument("--format", choices=("text", "json"), default="text")

    t = sub.add_parser("toda", help="evaluate SU(3) Toda fields")
    t.add_argument("--seed", default="weight24")
    t.add_argument("--lambda", dest="lam", type=float, default=1.0)
    t.add_argument("--mu", type=float, default=1.0)
    t.add_argument("--grid", default=DEFAULT_GRID)
    t.add_argument("--margin", type=float, default=0.05)
    t.add_argument("--tolerance", type=float, default=1e-5)
    t.add_argument("--out")
    t.add_argument("--format", choices=("csv", "json"))
    t.add_argument("--check", action="store_true")
    t.add_argument("--order", type=int)
    return p


COMMANDS = {"expand": cmd_expand, "mode": cmd_mode, "existence": cmd_existence, "toda": cmd_toda}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    saved = os.environ.get("MODEFORGE_ORDER")
    try:
        return COMMANDS[args.command](args, out)
    except InputError as exc:
        print(f"modeforge: error: {exc}", file=sys.stderr)
        return 2
    finally:
        # --order is per invocation; do not leak it into the caller's process
        if saved is None:
            os.environ.pop("MODEFORGE_ORDER", None)
        else:
            os.environ["MODEFORGE_ORDER"] = saved


if __name__ == "__main__":
    sys.exit(main())
