"""Command-line front end.

Subcommands: height, bound, certify, torsion, galois, chain, sweep.
Exit codes: 0 success (and, for sweep, no inconsistent verdicts);
1 malformed input or runtime failure (diagnostic on stderr);
2 unknown subcommand (usage text).

Input grammars (shared with the library's external interfaces):
  curve   five a-invariants "a1;a2;a3;a4;a6" (rationals)
  field   "Q" | "Q(sqrt,D)" | "Q(zeta,n)"
  point   "inf", or "x ; y" with each coordinate a comma-separated rational
          power-basis tuple ("x,y" works for rational points)
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .bounds import (
    certify_point,
    compute_C1,
    inequality_chain_check,
    intermediate_bound,
    main_bound,
    prime_window,
)
from .elliptic import CurvePoint, EllipticCurve, torsion_test
from .galois import galois_table_row
from .heights import canonical_height_doubling, canonical_height_local_sum
from .intervals import format_midrad
from .numberfields import make_field
from .sampling import ExperimentConfig, parse_curve, run_sweep


def parse_point(E: EllipticCurve, text: str) -> CurvePoint:
    text = text.strip()
    if text == "inf":
        return E.infinity()
    field = E.field
    if ";" in text:
        xs, ys = text.split(";")
        x = field.element_from_string(xs)
        y = field.element_from_string(ys)
    else:
        parts = [p.strip() for p in text.split(",")]
        d = field.degree
        if len(parts) == 2 and d == 1:
            x = field.element_from_string(parts[0])
            y = field.element_from_string(parts[1])
        elif len(parts) == 2 * d:
            x = field.element([Fraction(p) for p in parts[:d]])
            y = field.element([Fraction(p) for p in parts[d:]])
        else:
            raise ValueError(f"cannot parse point {text!r} over {field.descriptor()}")
    return E.point(x, y)


def _tolerance(text: str) -> Fraction:
    tol = Fraction(text)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    return tol


def cmd_height(args) -> int:
    E = parse_curve(args.curve, args.field)
    P = parse_point(E, args.point)
    tol = _tolerance(args.tolerance)
    methods = ("doubling", "local_sum") if args.method == "both" else (args.method,)
    for method in methods:
        if method == "doubling":
            res = canonical_height_doubling(E, P, tol)
        else:
            res = canonical_height_local_sum(E, P, tol)
        print(f"hhat[{res.method}] = {format_midrad(res.value)}")
    return 0


def cmd_bound(args) -> int:
    d = args.d
    j = Fraction(args.j)
    j_abs = abs(j)
    c1 = compute_C1(j_abs)
    lo, hi, p = prime_window(d, j_abs=j_abs)
    inter = intermediate_bound(p, d, c1)
    main = main_bound(d, j_abs)
    print(f"C1 = {format_midrad(c1)}")
    print(f"window = [{format_midrad(lo, 6)}, {format_midrad(hi, 6)})  p = {p}")
    print(f"intermediate_bound(q={p}) = {format_midrad(inter, 6)}")
    print(f"main_bound = {format_midrad(main, 6)}")
    return 0


def cmd_certify(args) -> int:
    E = parse_curve(args.curve, "Q")
    field = make_field(args.field)
    target = E if field.kind == "rational" else E.base_change(field)
    P = parse_point(target, args.point)
    cert = certify_point(E, P, tolerance=_tolerance(args.tolerance),
                         include_chain=not args.no_chain)
    text = cert.to_json()
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        print(text)
    return 0


def cmd_torsion(args) -> int:
    E = parse_curve(args.curve, "Q")
    field = make_field(args.field)
    target = E if field.kind == "rational" else E.base_change(field)
    P = parse_point(target, args.point)
    is_tors, order = torsion_test(P)
    if is_tors:
        print(f"torsion of order {order}")
    else:
        print("non-torsion")
    return 0


def cmd_galois(args) -> int:
    gens = None
    if args.gens:
        gens = []
        for part in args.gens.split(";"):
            a, b = part.split(",")
            gens.append((int(a), int(b)))
    row = galois_table_row(args.disc, args.qprime, gens=gens, d=args.d)
    print(f"D_K = {row.disc}  q' = {row.qprime}  |C(q')| = {row.unit_count}  "
          f"splitting = {row.splitting}")
    print(f"scalar pair: (g1, g2) = ({row.pair.g1}, {row.pair.g2})  "
          f"gap = {row.pair.gap}")
    return 0


def cmd_chain(args) -> int:
    rep = inequality_chain_check(args.d, Fraction(args.j).__abs__())
    for link in rep.links:
        status = "pass" if link.passed else "FAIL"
        print(f"[{status}] {link.link}: lhs = {link.lhs}  rhs = {link.rhs}")
    print("all links pass" if rep.all_pass else "CHAIN FAILURE")
    return 0 if rep.all_pass else 1


def cmd_sweep(args) -> int:
    with open(args.config, "r", encoding="ascii") as fh:
        config = ExperimentConfig.from_json(fh.read())
    def progress(i, n):
        print(f"  {i}/{n} points", file=sys.stderr)
    result = run_sweep(config, progress=progress if args.verbose else None)
    verdicts = {}
    for row in result.rows:
        verdicts[row.verdict] = verdicts.get(row.verdict, 0) + 1
    print(f"{len(result.rows)} certificates: " +
          ", ".join(f"{k}={v}" for k, v in sorted(verdicts.items())))
    if not config.csv_path:
        from .sampling import csv_text

        print(csv_text(result), end="")
    return result.exit_code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cmheights",
        description="canonical heights on CM elliptic curves with certified "
                    "explicit lower-bound certificates")
    sub = ap.add_subparsers(dest="command")

    h = sub.add_parser("height", help="canonical height of a point")
    h.add_argument("--curve", required=True)
    h.add_argument("--field", default="Q")
    h.add_argument("--point", required=True)
    h.add_argument("--tolerance", default="1/100000000")
    h.add_argument("--method", choices=("doubling", "local_sum", "both"),
                   default="doubling")
    h.set_defaults(func=cmd_height)

    b = sub.add_parser("bound", help="evaluate the explicit bound pipeline")
    b.add_argument("--d", type=int, required=True)
    b.add_argument("--j", required=True)
    b.set_defaults(func=cmd_bound)

    c = sub.add_parser("certify", help="emit a certificate for one point")
    c.add_argument("--curve", required=True)
    c.add_argument("--field", default="Q")
    c.add_argument("--point", required=True)
    c.add_argument("--tolerance", default="1/1000000")
    c.add_argument("--no-chain", action="store_true")
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)

    t = sub.add_parser("torsion", help="height-free torsion oracle")
    t.add_argument("--curve", required=True)
    t.add_argument("--field", default="Q")
    t.add_argument("--point", required=True)
    t.set_defaults(func=cmd_torsion)

    g = sub.add_parser("galois", help="residue unit group table and scalar pair")
    g.add_argument("--disc", type=int, required=True)
    g.add_argument("--qprime", type=int, required=True)
    g.add_argument("--gens", help='generators "a,b;a,b" of the simulated image')
    g.add_argument("--d", type=int, default=1)
    g.set_defaults(func=cmd_galois)

    ch = sub.add_parser("chain", help="audit the inequality chain")
    ch.add_argument("--d", type=int, required=True)
    ch.add_argument("--j", required=True)
    ch.set_defaults(func=cmd_chain)

    s = sub.add_parser("sweep", help="batch certification sweep from a config")
    s.add_argument("--config", required=True)
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if not getattr(args, "command", None):
        ap.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ValueError, ArithmeticError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
