"""Command-line front end.

Exit codes: 0 ok, 2 usage or malformed input, 3 capacity guard.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import List, Optional

from . import bounds, expsum, farey, moduli
from .errors import CapacityExceeded, InputFormatError, max_work
from .sweep import SweepConfig, dumps
from .sweep import write as write_sweep

EXIT_OK, EXIT_INPUT, EXIT_CAPACITY = 0, 2, 3


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    """Parse '0.2', '1/5' or '3' exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None


def float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}") from None


def _add_moduli_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=("squares", "primes", "file"), required=True)
    p.add_argument("--q1", type=int, help="squares family: moduli q^2 with q <= Q1")
    p.add_argument("--q", type=int, help="primes family: primes up to Q")
    p.add_argument("--moduli", help="file family: moduli file with '# M=<int> Q=<int>' header")


def _add_coeff_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--coeffs", choices=expsum.FAMILIES + ("file",), default="ones")
    p.add_argument("--n", type=int, help="length N of generated coefficients")
    p.add_argument("--seed", type=int, help="seed (required for --coeffs random)")
    p.add_argument("--coeff-file", help="coefficient file with '# N=<int>' header")


def _moduli_from(args) -> moduli.ModuliSet:
    if args.family == "squares":
        if args.q1 is None or args.q1 < 1:
            raise UsageError("--family squares needs --q1 >= 1")
        return moduli.squares_up_to(args.q1)
    if args.family == "primes":
        if args.q is None or args.q < 2:
            raise UsageError("--family primes needs --q >= 2")
        return moduli.primes_up_to(args.q)
    if not args.moduli:
        raise UsageError("--family file needs --moduli PATH")
    return moduli.load_moduli(args.moduli)


def _coeffs_from(args) -> expsum.CoefficientSequence:
    if args.coeffs == "file":
        if not args.coeff_file:
            raise UsageError("--coeffs file needs --coeff-file PATH")
        return expsum.load_coefficients(args.coeff_file)
    if args.n is None or args.n < 1:
        raise UsageError("--n must be a positive integer")
    if args.coeffs == "random" and args.seed is None:
        raise UsageError("--coeffs random needs an explicit --seed")
    return expsum.make_sequence(args.coeffs, args.n, args.seed)


def _guard(S: moduli.ModuliSet) -> None:
    limit = max_work()
    work = S.farey_size()
    if work > limit:
        raise CapacityExceeded(f"{work} reduced fractions exceed the work guard {limit}")


def _params(args, S, seq) -> bounds.BoundParams:
    return bounds.BoundParams(
        N=seq.N,
        Q=S.Q,
        Z=seq.Z,
        M=S.M,
        Q1=args.q1 if args.family == "squares" else None,
        eps=getattr(args, "eps", 0.1),
        C=getattr(args, "c", 1.0),
        X=getattr(args, "x", None),
    )


def cmd_lhs(args) -> int:
    S = _moduli_from(args)
    seq = _coeffs_from(args)
    _guard(S)
    report = bounds.ratio_report(seq, S, _params(args, S, seq), seed=args.seed, verify_rewrite=False, formulas=("classical",))
    print(dumps(report.to_dict()))
    return EXIT_OK


def cmd_bounds(args) -> int:
    S = _moduli_from(args)
    seq = _coeffs_from(args)
    _guard(S)
    report = bounds.ratio_report(
        seq,
        S,
        _params(args, S, seq),
        seed=args.seed,
        verify_rewrite=not args.no_verify_rewrite,
        thm1_grid=args.thm1_grid,
    )
    print(dumps(report.to_dict()))
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        cfg = SweepConfig(
            family=args.family,
            N_list=tuple(args.n_list),
            Q1_list=tuple(args.q1_list or ()),
            Q1_exponents=tuple(args.q1_exponents or ()),
            Q_list=tuple(args.q_list or ()),
            moduli_path=args.moduli,
            coeffs=args.coeffs,
            seed=args.seed,
            eps=args.eps,
            z_grid_per_octave=args.z_grid,
            format=args.format,
            jobs=args.jobs,
            verify_rewrite=not args.no_verify_rewrite,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.output and args.output != "-":
        with open(args.output, "w", newline="") as fh:
            return write_sweep(cfg, fh)
    return write_sweep(cfg, sys.stdout)


def cmd_farey(args) -> int:
    S = _moduli_from(args)
    _guard(S)
    points = farey.enumerate_farey(S)
    out: dict = {"fractions": len(points)}
    if args.kdelta is not None:
        out["K"] = farey.k_delta(points, args.kdelta)
        if args.lemma2:
            out["lemma2"] = bounds.lemma2_fit(S, args.kdelta, out["K"], args.z_grid)
    if args.alpha is not None:
        if args.delta is None:
            raise UsageError("--alpha needs --delta")
        out["P"] = farey.count_in_interval(points, farey.FareyQuery(args.alpha, args.delta))
    if args.dirichlet is not None:
        alpha, tau = args.dirichlet
        d = farey.dirichlet_approx(alpha, tau)
        out["dirichlet"] = {"b": d.b, "r": d.r, "z": float(d.z), "z_exact": str(d.z)}
    print(dumps(out))
    return EXIT_OK


def cmd_congruence(args) -> int:
    if args.k < 1 or args.t < 1:
        raise UsageError("--t and --k must be positive")
    sols = moduli.delta_squares_solutions(args.t, args.k, args.l)
    print(dumps({"count": moduli.delta_squares(args.t, args.k, args.l), "solutions": sols}))
    return EXIT_OK


def cmd_conditions(args) -> int:
    if args.family == "file":
        raise UsageError("conditions supports the squares and primes families")
    S = _moduli_from(args)
    if args.n is None or args.n < 1:
        raise UsageError("--n must be a positive integer")
    _guard(S)
    delta_fn = moduli.delta_squares if args.family == "squares" else moduli.delta_primes
    if args.x is not None:
        X = args.x
    elif args.family == "squares":
        X = bounds.square_family_X(args.n)
    else:
        X = bounds.fitted_X(S, args.n)
    report = bounds.check_conditions(S, args.n, delta_fn, C=args.c, X=X)
    out = {"family": args.family, "N": args.n, "Q": S.Q, "M": S.M}
    out.update(report.to_dict())
    print(dumps(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparse-sieve", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lhs", help="large-sieve left-hand side over a moduli set")
    _add_moduli_args(p)
    _add_coeff_args(p)
    p.set_defaults(func=cmd_lhs)

    p = sub.add_parser("bounds", help="left-hand side with every applicable bound")
    _add_moduli_args(p)
    _add_coeff_args(p)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--c", type=float, default=1.0, help="constant C of the first condition")
    p.add_argument("--x", type=float, default=None, help="X of the third condition (default: fitted)")
    p.add_argument("--thm1-grid", type=int, default=None, help="run the window-sum (thm1) search with this z-grid density")
    p.add_argument("--no-verify-rewrite", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="bound ratios over an (N, Q1) grid")
    p.add_argument("--family", choices=("squares", "primes", "file"), required=True)
    p.add_argument("--n-list", type=int_list, required=True)
    p.add_argument("--q1-list", type=int_list)
    p.add_argument("--q1-exponents", type=float_list, help="Q1 = round(N^e) per exponent")
    p.add_argument("--q-list", type=int_list)
    p.add_argument("--moduli")
    p.add_argument("--coeffs", choices=expsum.FAMILIES, default="ones")
    p.add_argument("--seed", type=int)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--z-grid", type=int, default=None, help="include the window-sum (thm1) search at this z-grid density")
    p.add_argument("--output", default="-")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-verify-rewrite", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("farey", help="Farey counts: K(Delta), P(alpha), Dirichlet approximation")
    _add_moduli_args(p)
    p.add_argument("--kdelta", type=rational)
    p.add_argument("--alpha", type=rational)
    p.add_argument("--delta", type=rational)
    p.add_argument("--dirichlet", type=rational, nargs=2, metavar=("ALPHA", "TAU"))
    p.add_argument("--lemma2", action="store_true", help="fit the short-interval constant at --kdelta")
    p.add_argument("--z-grid", type=int, default=4)
    p.set_defaults(func=cmd_farey)

    p = sub.add_parser("congruence", help="solutions of x^2 g_t = l (mod k)")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.set_defaults(func=cmd_congruence)

    p = sub.add_parser("conditions", help="check the three distribution conditions")
    _add_moduli_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--x", type=float, default=None)
    p.set_defaults(func=cmd_conditions)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapacityExceeded as exc:
        print(f"sparse-sieve: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (UsageError, InputFormatError, ValueError, OSError) as exc:
        print(f"sparse-sieve: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
