"""Command-line front end: ``nahmsearch {series,characters,search,tba,dual,verify}``.

Exit codes: 0 success, 1 computation failure (or a failed golden check in
``verify``), 2 malformed input.  Rationals are read and written as "p/q".
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from . import characters as ch
from .liealg import A1, DynkinSpec, MatrixQ, coset_family_matrix, effective_central_charge, minimal_family_matrix
from .nahmsum import NahmDatum, nahm_sum
from .qseries import SeriesError, as_fraction, fraction_str
from .search import (
    SearchAborted,
    SearchConfig,
    dual_transform,
    infinite_family_identity,
    known_B_coset,
    known_B_minimal,
    match_series,
    records_to_csv,
    records_to_json,
    run_search,
    screen_candidate,
    cached_solution,
)
from .tba import NoConvergenceError, PrecisionConfig, asymptotic_C, dilog_ceff

log = logging.getLogger("nahmsearch")

# Options whose values may legitimately start with "-" (e.g. "--C -1/60").
_VALUE_OPTIONS = ("--A", "--B", "--C", "--range")


class InputError(ValueError):
    """Malformed user input (exit code 2)."""


# -- argument types -------------------------------------------------------------


def _rational(text: str) -> Fraction:
    try:
        return as_fraction(text.strip())
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r} ({exc})") from exc


def _rational_list(text: str) -> tuple[Fraction, ...]:
    text = text.strip()
    if text.startswith("["):
        try:
            items = json.loads(text)
        except json.JSONDecodeError as exc:
            raise argparse.ArgumentTypeError(f"bad JSON list {text!r}") from exc
        return tuple(_rational(str(v)) for v in items)
    return tuple(_rational(v) for v in text.split(",") if v.strip())


def _matrix(text: str) -> MatrixQ:
    try:
        return MatrixQ.from_json(json.loads(text))
    except (json.JSONDecodeError, ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad matrix {text!r}: {exc}") from exc


def _range(text: str) -> tuple[Fraction, Fraction]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError("range must look like LO:HI")
    a, b = _rational(lo), _rational(hi)
    if a > b:
        raise argparse.ArgumentTypeError("range is empty")
    return a, b


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from exc
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("denominators must be positive integers")
    return values


def _target(text: str) -> ch.TargetCombination:
    """``"2*coset:k=2,l=1,m=1 + coset:k=2,l=0,m=0"``."""
    counts: dict = {}
    try:
        for part in text.split("+"):
            mult, star, label = part.strip().partition("*")
            if not star:
                mult, label = "1", mult
            lab = ch.parse_label(label)
            counts[lab] = counts.get(lab, 0) + int(mult)
        return ch.TargetCombination.from_counts(counts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad target {text!r}: {exc}") from exc


# -- output ------------------------------------------------------------------------


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _precision(args) -> PrecisionConfig:
    try:
        return PrecisionConfig(working_digits=args.digits)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _family_matrix(args) -> tuple[MatrixQ, Fraction | None]:
    if args.family == "minimal":
        if args.n is None or args.n < 1:
            raise InputError("--family minimal needs --n >= 1")
        return minimal_family_matrix(args.n), effective_central_charge(A1, DynkinSpec("T", args.n))
    if args.family == "coset":
        if args.k is None or args.k < 2:
            raise InputError("--family coset needs --k >= 2")
        return coset_family_matrix(args.k), effective_central_charge(A1, DynkinSpec("A", args.k - 1))
    if args.A is None:
        raise InputError("--family explicit needs --A")
    return args.A, None


# -- subcommands -------------------------------------------------------------------


def _datum(args) -> NahmDatum:
    if args.input:
        try:
            with open(args.input, encoding="utf-8") as fh:
                return NahmDatum.from_json(json.load(fh))
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc}") from exc
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise InputError(f"malformed datum in {args.input}: {exc}") from exc
    if args.A is None or args.B is None or args.C is None:
        raise InputError("give --A, --B and --C, or --input FILE")
    try:
        return NahmDatum(args.A, args.B, args.C)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_series(args) -> int:
    datum = _datum(args)
    series = nahm_sum(datum, args.order)
    if args.json or args.out:
        _emit(_dump_json(series.to_json()), args.out)
    else:
        _emit(series.to_text() + "\n", None)
    return 0


def _labels_for_model(args) -> list:
    if args.label:
        return [ch.parse_label(text) for text in args.label]
    if args.model == "minimal":
        if args.p is None:
            raise InputError("--model minimal needs --p")
        return [ch.MinimalLabel(args.p, s) for s in range(1, (args.p - 1) // 2 + 1)]
    if args.model == "coset":
        if args.k is None:
            raise InputError("--model coset needs --k")
        if args.l is not None or args.m is not None:
            return [ch.CosetLabel(args.k, args.l or 0, args.m or 0)]
        seen = []
        for l in range(args.k + 1):
            for m in range(-args.k + 1, args.k + 1):
                if (l + m) % 2 == 0:
                    lab = ch.CosetLabel(args.k, l, m).canonical()
                    if lab not in seen:
                        seen.append(lab)
        return sorted(seen)
    raise InputError("give --model or --label")


def cmd_characters(args) -> int:
    try:
        labels = _labels_for_model(args)
    except ch.LabelError as exc:
        raise InputError(str(exc)) from exc
    if args.json or args.out:
        _emit(_dump_json([ch.dump_label(lab, args.order) for lab in labels]), args.out)
    else:
        blocks = [f"{lab}\n{ch.label_series(lab, args.order).to_text()}" for lab in labels]
        _emit("\n\n".join(blocks) + "\n", None)
    return 0


def cmd_search(args) -> int:
    prec = _precision(args)
    try:
        cfg = SearchConfig(
            family=args.family,
            n=args.n,
            k=args.k,
            A=args.A,
            targets=tuple(args.target) if args.target else None,
            range=args.range,
            denominators=args.denoms,
            order=args.order,
            precision=prec,
            jobs=args.jobs,
            prefilter=not args.no_prefilter,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    try:
        records = run_search(cfg)
    except SearchAborted as exc:
        _emit(records_to_json(exc.partial), args.out)
        raise
    _emit(records_to_json(records), args.out)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(records_to_csv(records))
    return 0


def cmd_tba(args) -> int:
    A, ceff = _family_matrix(args)
    prec = _precision(args)
    sol = cached_solution(A, prec)
    report = sol.report()
    if ceff is not None:
        report["ceff_formula"] = fraction_str(ceff)
    if args.F:
        with mpmath.workdps(sol.digits):
            report["F"] = [[mpmath.nstr(sol.F[i, j], 30) for j in range(sol.rank)] for i in range(sol.rank)]
    _emit(_dump_json(report), args.out)
    return 0


def cmd_dual(args) -> int:
    datum = _datum(args)
    try:
        A, B, C = dual_transform(datum.A, datum.B, datum.C)
    except ArithmeticError as exc:
        raise InputError(str(exc)) from exc
    _emit(_dump_json({"A": A.to_json(), "B": [fraction_str(b) for b in B], "C": fraction_str(C)}), args.out)
    return 0


# -- verify ------------------------------------------------------------------------------

Check = tuple[str, bool, str]


def _known_b_checks(A: MatrixQ, Bs, targets, label: str, order: int, prec: PrecisionConfig) -> list[Check]:
    sol = cached_solution(A, prec)
    out = []
    for B in Bs:
        name = f"{label} B=({', '.join(fraction_str(b) for b in B)})"
        ok, C, _, residual = screen_candidate(A, B, sol, prec)
        if not ok:
            out.append((name, False, f"filter rejected (residual {mpmath.nstr(residual, 3)})"))
            continue
        target = match_series(nahm_sum(NahmDatum(A, B, C), order), targets, order)
        out.append((name, target is not None, f"C={fraction_str(C)} -> {target.name if target else 'no match'}"))
    return out


def _suite_minimal(prec: PrecisionConfig) -> list[Check]:
    out = []
    for n in (1, 2, 3):
        out += _known_b_checks(minimal_family_matrix(n), known_B_minimal(n), ch.minimal_targets(n), f"minimal n={n}", 20, prec)
    return out


def _suite_coset(prec: PrecisionConfig) -> list[Check]:
    out = []
    for k in range(2, 7):
        out += _known_b_checks(coset_family_matrix(k), known_B_coset(k), ch.predicted_combinations(k), f"coset k={k}", 20, prec)
    return out


def _suite_families(prec: PrecisionConfig) -> list[Check]:
    out = []
    for j in range(-2, 3):
        for variant in ("even", "odd"):
            res = infinite_family_identity(j, variant, 15, prec)
            out.append((f"family {variant} j={j}", res.equal, f"B=({', '.join(map(fraction_str, res.B))}) C={res.C}"))
    return out


def _suite_asymptotics(prec: PrecisionConfig) -> list[Check]:
    cases = [
        ([[2]], ["0"], "-1/60"),
        ([[2]], ["1"], "11/60"),
        ([[1]], ["0"], "-1/48"),
        ([[1]], ["-1/2"], "1/24"),
        ([["3/2", 1, "1/2"], [1, 2, 1], ["1/2", 1, "3/2"]], ["-1/4", "-1/2", "-3/4"], "1/48"),
    ]
    out = []
    for rows, B, expect in cases:
        A = MatrixQ.from_json(rows)
        B = tuple(as_fraction(b) for b in B)
        _, C = asymptotic_C(A, B, cached_solution(A, prec), prec)
        out.append((f"asymptotic C for A={rows} B={list(map(str, B))}", C == as_fraction(expect), f"got {C}, want {expect}"))
    for n in range(1, 9):
        for fam, spec in (("T", DynkinSpec("T", n)), ("A", DynkinSpec("A", n))):
            A = minimal_family_matrix(n) if fam == "T" else coset_family_matrix(n + 1)
            sol = cached_solution(A, prec)
            want = effective_central_charge(A1, spec)
            with mpmath.workdps(prec.working_digits):
                err = abs(dilog_ceff(sol.x, prec.working_digits) - mpmath.mpf(want.numerator) / want.denominator)
            out.append((f"dilogarithm c_eff (A1,{spec})", err <= mpmath.mpf(10) ** -30, f"|error| = {mpmath.nstr(err, 2)}"))
    return out


def _suite_characters(prec: PrecisionConfig) -> list[Check]:
    def first(series, n):
        base = series.offset
        return [int(series.coefficient(base + i)) for i in range(n)]

    goldens = [
        ("chi_{1,2}^(5,2)", ch.minimal_character(5, 2, 10), "-1/60", [1, 1, 1, 1, 2, 2, 3]),
        ("chi_{1,1}^(5,2)", ch.minimal_character(5, 1, 10), "11/60", [1, 0, 1, 1, 1, 1, 2]),
        ("chi_{0;0} k=2", ch.coset_character(2, 0, 0, 10), "-1/48", [1, 0, 1, 1, 2, 2, 3, 3, 5, 5, 7]),
        ("chi_{1;1} k=2", ch.coset_character(2, 1, 1, 10), "1/24", [1, 1, 1, 2, 2, 3, 4, 5, 6, 8]),
        ("chi_{0;2} k=2", ch.coset_character(2, 0, 2, 10), "23/48", [1, 1, 1, 1, 2, 2, 3, 4, 5, 6]),
    ]
    out = []
    for name, s, lead, coeffs in goldens:
        ok = s.offset == as_fraction(lead) and first(s, len(coeffs)) == coeffs
        out.append((f"expansion {name}", ok, f"q^{fraction_str(s.offset)}"))
    for k in range(2, 7):
        for l in range(k + 1):
            total = None
            for m in range(-k + 1, k + 1):
                if (l + m) % 2 == 0:
                    term = ch.u1_character(k, m, 10) * ch.coset_character(k, l, m, 10)
                    total = term if total is None else total + term
            aff = ch.affine_su2_character(k, l, 10)
            ok = total.agrees_with(aff) and total.precision >= aff.precision
            out.append((f"recomposition k={k} l={l}", ok, ""))
    return out


def _suite_duality(prec: PrecisionConfig) -> list[Check]:
    out = []
    for k in range(2, 7):
        A = coset_family_matrix(k)
        sol = cached_solution(A, prec)
        for B in known_B_coset(k)[1:]:
            _, C = asymptotic_C(A, B, sol, prec)
            As, Bs, Cs = dual_transform(A, B, C)
            back = dual_transform(As, Bs, Cs)
            half = all(b in (0, Fraction(-1, 2)) for b in Bs) and sum(Bs) == Fraction(-1, 2)
            ok, Cd, _, _ = screen_candidate(As, Bs, cached_solution(As, prec), prec)
            good = half and back == (A, tuple(B), C) and ok and Cd == Cs
            out.append((f"dual k={k} B*=({', '.join(map(fraction_str, Bs))})", good, f"C*={fraction_str(Cs)}"))
    return out


SUITES: dict[str, Callable[[PrecisionConfig], list[Check]]] = {
    "minimal": _suite_minimal,
    "coset": _suite_coset,
    "families": _suite_families,
    "asymptotics": _suite_asymptotics,
    "characters": _suite_characters,
    "duality": _suite_duality,
}


def cmd_verify(args) -> int:
    prec = _precision(args)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    failures = 0
    lines = []
    for name in names:
        for check, ok, detail in SUITES[name](prec):
            failures += not ok
            lines.append(f"{'PASS' if ok else 'FAIL'}  [{name}] {check}" + (f"  {detail}" if detail else ""))
    lines.append(f"{len(lines) - failures} passed, {failures} failed")
    _emit("\n".join(lines) + "\n", args.out)
    return 1 if failures else 0


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nahmsearch", description="Nahm sums, characters and the B-value search.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log progress (repeat for debug)")
    sub = parser.add_subparsers(dest="command", required=True)

    def datum_flags(p):
        p.add_argument("--A", type=_matrix, help='matrix as JSON, e.g. "[[2]]" or [["3/2",1],[1,2]]')
        p.add_argument("--B", type=_rational_list, help='comma-separated rationals, e.g. "-1/2,0"')
        p.add_argument("--C", type=_rational, help='rational, e.g. "-1/60"')
        p.add_argument("--input", help="JSON file with keys A, B, C")

    def family_flags(p, explicit: bool):
        choices = ["minimal", "coset"] + (["explicit"] if explicit else [])
        p.add_argument("--family", choices=choices, required=True)
        p.add_argument("--n", type=int, help="rank of the (A1, T_n) family")
        p.add_argument("--k", type=int, help="level of the su(2)_k/u(1) family")
        p.add_argument("--A", type=_matrix, help="matrix for --family explicit")

    def common(p):
        p.add_argument("--out", help="write output to this file instead of stdout")

    p = sub.add_parser("series", help="expand a Nahm sum")
    datum_flags(p)
    p.add_argument("--order", type=int, default=20, help="terms past the leading exponent (default 20)")
    p.add_argument("--json", action="store_true", help="print JSON instead of 'q^e: c' lines")
    common(p)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("characters", help="dump character series")
    p.add_argument("--model", choices=["minimal", "coset"])
    p.add_argument("--p", type=int, help="minimal model (p, 2)")
    p.add_argument("--k", type=int, help="coset level")
    p.add_argument("--l", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--label", action="append", help='explicit label, e.g. "coset:k=4,l=2,m=0" (repeatable)')
    p.add_argument("--order", type=int, default=20)
    p.add_argument("--json", action="store_true")
    common(p)
    p.set_defaults(func=cmd_characters)

    p = sub.add_parser("search", help="search B-values for a matrix family")
    family_flags(p, explicit=True)
    p.add_argument("--target", type=_target, action="append", help='target for --family explicit, e.g. "2*coset:k=2,l=1,m=1"')
    p.add_argument("--range", type=_range, help="per-coordinate range LO:HI (default -8:8, or -2:2 for rank >= 4)")
    p.add_argument("--denoms", type=_int_list, default=(1, 2, 3, 4), help="denominators to sweep (default 1,2,3,4)")
    p.add_argument("--order", type=int, default=20, help="comparison order (default 20)")
    p.add_argument("--digits", type=int, default=60, help="working precision in decimal digits (default 60)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--no-prefilter", action="store_true", help="skip the float64 screening pass")
    p.add_argument("--csv", help="also write a B,C,matched CSV summary here")
    common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("tba", help="solve x = (1-x)^A and report the dilogarithm central charge")
    family_flags(p, explicit=True)
    p.add_argument("--digits", type=int, default=60)
    p.add_argument("--F", action="store_true", help="include the F matrix")
    common(p)
    p.set_defaults(func=cmd_tba)

    p = sub.add_parser("dual", help="apply A -> A^-1, B -> A^-1 B, C -> B.A^-1.B/2 - r/24 - C")
    datum_flags(p)
    common(p)
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("verify", help="replay the built-in golden checks")
    p.add_argument("--suite", choices=["all", *SUITES], default="all")
    p.add_argument("--digits", type=int, default=60)
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def _join_value_options(argv: Sequence[str]) -> list[str]:
    """Turn ``--C -1/60`` into ``--C=-1/60`` so argparse does not read a flag."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_OPTIONS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_join_value_options(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ch.LabelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NoConvergenceError, SearchAborted, SeriesError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
