"""Command-line front end.

Exit codes: 0 success, 1 argument error, 2 resource error, 3 failed
verification.  Errors are printed as one line: ``error[kind]: message``.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Sequence

from . import arith, conic, ec_fp, ec_q, galois, verify
from .errors import ArgumentError, ClassificationError, ResourceError, VerificationError

# flags that change how a run executes or where it writes, not what it computes
_NOT_ECHOED = {"command", "config", "format", "output", "jobs", "gl2_action", "func"}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ArgumentError(message)


# --- argument types -----------------------------------------------------------

def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _curve(text: str) -> ec_q.RationalCurve:
    try:
        return ec_q.RationalCurve.parse(text)
    except ArgumentError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _point(text: str) -> ec_q.RationalPoint:
    if text.strip().upper() == "O":
        return None
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected a point 'x,y' or 'O', got {text!r}")
    return (_rational(parts[0]), _rational(parts[1]))


def _congruence(text: str) -> tuple[int, int]:
    try:
        m, r = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected M:R, got {text!r}") from None
    return m, r


# --- commands -----------------------------------------------------------------

def _bundle(args) -> conic.ChateletBundle:
    return conic.ChateletBundle(args.curve, args.a, tuple(args.f))


def cmd_count(args) -> Any:
    datum = ec_fp.count_points(args.curve.reduction(args.p), args.method)
    return f"p={datum.p} order={datum.order} trace={datum.trace}"


def cmd_omega(args) -> Any:
    X = _bundle(args)
    primes = conic.omega_sieve(X, args.pmax)
    params = {**conic._bundle_params(X), "pmax": args.pmax}
    return conic.ScanReport("p", [{"p": p} for p in primes], params, {"count": len(primes)})


def cmd_fibers(args) -> Any:
    return conic.zs_scan(
        _bundle(args), args.base, args.gen, args.range, args.primes, args.digit_limit
    )


def cmd_gcd_scan(args) -> Any:
    return conic.gcd_criterion_scan(_bundle(args), args.n, args.pmax, jobs=args.jobs)


def cmd_coset_scan(args) -> Any:
    return conic.coset_meet_scan(
        _bundle(args),
        args.point,
        args.coset_gen or [],
        args.primes,
        args.radius,
        window_gens=args.window_gen,
        window_radius=args.window_radius,
        digit_limit=args.digit_limit,
    )


def cmd_torsion(args) -> Any:
    points = sorted(ec_q.rational_n_torsion(args.curve, args.n))
    lines = [conic.format_point(P) for P in points] or ["none"]
    if args.certificate is not None:
        cert = ec_q.torsion_triviality_certificate(args.curve, args.certificate)
        if cert is None:
            lines.append("certificate=none")
        else:
            pairs = ",".join(f"{p}:{o}" for p, o in zip(cert.primes, cert.orders))
            lines.append(f"certificate={pairs}")
    return "\n".join(lines)


def cmd_galois(args) -> Any:
    report = galois.image_report(args.curve, args.ell, args.pmax, jobs=args.jobs)
    if args.format == "json":
        return json.dumps({
            "ell": report.ell,
            "primes_sampled": report.primes_sampled,
            "ruled_out": report.ruled_out,
            "det_full": report.det_full,
            "verdict": report.verdict,
            "remaining": list(report.remaining),
            "ratio_values": list(report.ratio_values),
        }, sort_keys=True)
    return str(report)


def cmd_gl2(args) -> Any:
    return f"{args.target}: {verify.run(args.target)}"


def cmd_recip(args) -> Any:
    places = sorted(arith.quaternion_ramified_places(args.a, args.b), key=arith.place_sort_key)
    product = 1
    for v in arith.candidate_places(args.a, args.b):
        product *= arith.hilbert_symbol(args.a, args.b, v)
    if product != 1:
        raise VerificationError(f"Hilbert symbols of ({args.a}, {args.b}) multiply to {product}")
    return "ramified=" + (",".join(map(str, places)) or "none")


def cmd_find_prime(args) -> Any:
    p = arith.find_congruence_prime(args.mod, args.bound)
    return "none" if p is None else str(p)


def cmd_quad_eval(args) -> Any:
    if len(args.elt) != 2:
        raise ArgumentError("--elt takes U,V")
    elt = arith.QuadRingElement(args.d, Fraction(args.elt[0]), Fraction(args.elt[1]))
    return str(arith.quad_ring_eval(args.poly, elt))


# --- parser -------------------------------------------------------------------

def _add_bundle(p: argparse.ArgumentParser) -> None:
    p.add_argument("--curve", type=_curve, required=True, help="b,c for y^2 = x^3 + bx + c")
    p.add_argument("--a", type=int, required=True, help="square-free non-square a")
    p.add_argument(
        "--f", type=_ints, required=True,
        help="f coefficients, highest degree first (x - 4 is 1,-4)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chatelet", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--output", type=Path, help="write the result here instead of stdout")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for prime scans")
    parser.add_argument("--config", type=Path, help="key=value file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("count", help="#E(F_p) and the Frobenius trace")
    p.add_argument("--curve", type=_curve, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--method", choices=("naive", "bsgs"), default="naive")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("omega", help="primes where a is a nonsquare and reduction is good")
    _add_bundle(p)
    p.add_argument("--pmax", type=int, required=True)
    p.set_defaults(func=cmd_omega)

    p = sub.add_parser("fibers", help="local solubility of fibers above base + k*gen")
    _add_bundle(p)
    p.add_argument("--base", type=_point, required=True)
    p.add_argument("--gen", type=_point, required=True)
    p.add_argument("--range", type=int, required=True)
    p.add_argument("--primes", type=_ints, required=True)
    p.add_argument("--digit-limit", type=int, default=conic.DEFAULT_DIGIT_LIMIT)
    p.set_defaults(func=cmd_fibers)

    p = sub.add_parser("gcd-scan", help="gcd(n, #E_p(F_p)) over the Omega primes")
    _add_bundle(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pmax", type=int, required=True)
    p.set_defaults(func=cmd_gcd_scan)

    p = sub.add_parser("coset-scan", help="does red_p(P + H) meet red_p(R_p)? (finite sample)")
    _add_bundle(p)
    p.add_argument("--point", type=_point, required=True)
    p.add_argument("--coset-gen", type=_point, action="append", help="repeatable")
    p.add_argument("--window-gen", type=_point, action="append", help="repeatable")
    p.add_argument("--window-radius", type=int)
    p.add_argument("--primes", type=_ints, required=True)
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--digit-limit", type=int, default=conic.DEFAULT_DIGIT_LIMIT)
    p.set_defaults(func=cmd_coset_scan)

    p = sub.add_parser("torsion", help="rational n-torsion points")
    p.add_argument("--curve", type=_curve, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--certificate", type=int, metavar="BUDGET",
                   help="also search for a trivial-torsion certificate")
    p.set_defaults(func=cmd_torsion)

    p = sub.add_parser("galois", help="mod-ell image from Frobenius sampling")
    p.add_argument("--curve", type=_curve, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--pmax", type=int, required=True)
    p.set_defaults(func=cmd_galois)

    p = sub.add_parser("gl2", help="group-theory checks")
    p.add_argument("gl2_action", choices=("verify",))
    p.add_argument("target", choices=sorted(verify.TARGETS))
    p.set_defaults(func=cmd_gl2)

    p = sub.add_parser("recip", help="places where (a, b) ramifies")
    p.add_argument("--a", type=_rational, required=True)
    p.add_argument("--b", type=_rational, required=True)
    p.set_defaults(func=cmd_recip)

    p = sub.add_parser("find-prime", help="least prime with the given congruences")
    p.add_argument("--mod", type=_congruence, nargs="+", required=True, metavar="M:R")
    p.add_argument("--bound", type=int, default=10**6)
    p.set_defaults(func=cmd_find_prime)

    p = sub.add_parser(
        "quad-eval",
        help="evaluate a polynomial at u + v*sqrt(d), e.g. --poly 1,0,-432,15120 --d 5 --elt 3,9",
    )
    p.add_argument("--poly", type=_ints, required=True, help="highest degree first")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--elt", type=_ints, required=True, help="U,V")
    p.set_defaults(func=cmd_quad_eval)
    return parser


# --- config files -----------------------------------------------------------

def read_config(path: Path) -> dict[str, str]:
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ArgumentError(f"cannot read config {path}: {exc.strerror}") from None
    config = {}
    for num, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ArgumentError(f"{path}:{num}: expected key=value")
        config[key.strip()] = value.strip()
    return config


_GLOBAL_WITH_VALUE = {"--format", "--output", "--jobs", "--config"}


def _command_index(argv: list[str], commands) -> int:
    skip = False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
        elif tok in _GLOBAL_WITH_VALUE:
            skip = True
        elif tok in commands:
            return i
    raise ArgumentError("missing command")


def _with_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Splice config entries in right after the subcommand so flags win."""
    pre = _Parser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return argv
    config = read_config(known.config)
    subparsers = _subparsers(parser)
    pos = _command_index(argv, subparsers.choices)
    command = argv[pos]
    options = {s for a in subparsers.choices[command]._actions for s in a.option_strings}
    injected = []
    for key, value in config.items():
        flag = "--" + key.replace("_", "-")
        if flag not in options or flag in ("-h", "--help"):
            raise ArgumentError(f"unknown config key {key!r} for {command}")
        for item in value.split(";") if flag in ("--coset-gen", "--window-gen") else [value]:
            injected.append(f"{flag}={item}")
    return argv[: pos + 1] + injected + argv[pos + 1 :]


def _join_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--curve -432,15120`` into ``--curve=-432,15120``.

    argparse would otherwise read the value as an unknown option.
    """
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (
            tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
            and len(argv[i + 1]) > 1 and argv[i + 1][0] == "-" and argv[i + 1][1].isdigit()
        ):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _subparsers(parser: argparse.ArgumentParser) -> argparse._SubParsersAction:
    return next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))


def _echo(value: Any) -> Any:
    if isinstance(value, ec_q.RationalCurve):
        return f"{value.b},{value.c}"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, tuple) and len(value) == 2 and all(isinstance(t, Fraction) for t in value):
        return conic.format_point(value)
    if isinstance(value, (list, tuple)):
        return [_echo(v) for v in value]
    return value


def _render(result: Any, args) -> str:
    if isinstance(result, conic.ScanReport):
        result.parameters = {
            **result.parameters,
            "command": args.command,
            "cli": {k: _echo(v) for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED},
        }
        return result.to_json() if args.format == "json" else result.to_csv()
    return str(result) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(_with_config(parser, argv))
        if args.jobs < 1:
            raise ArgumentError("--jobs must be >= 1")
        text = _render(args.func(args), args)
        if args.output:
            args.output.write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    except ArgumentError as exc:
        return _fail("argument", exc, 1)
    except ResourceError as exc:
        return _fail("resource", exc, 2)
    except (VerificationError, ClassificationError) as exc:
        return _fail("verification", exc, 3)


def _fail(kind: str, exc: Exception, code: int) -> int:
    message = " ".join(str(exc).split())
    print(f"error[{kind}]: {message}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())
