"""Chatelet conic bundles u^2 - a v^2 = f(x) w^2 over an elliptic curve.

The fiber above a rational point P is a conic over Q; it has a Q_v-point
exactly when the Hilbert symbol (a, f(x(P)))_v is +1.  Scans over primes or
over multiples of a point are returned as :class:`ScanReport` objects that
serialise to CSV and JSON.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Any, Iterable, Optional, Sequence

import sympy

from .arith import (
    REAL,
    Place,
    hilbert_symbol,
    is_prime,
    is_square,
    is_squarefree,
    legendre,
    poly_eval,
    valuation,
)
from .ec_fp import parallel_group_orders
from .ec_q import (
    RationalCurve,
    RationalPoint,
    _add,
    neg_q,
    point_digits,
    reduce_mod_p,
)
from .errors import ArgumentError, ResourceError, UnsupportedFiberError

DEFAULT_DIGIT_LIMIT = 10_000

_x = sympy.Symbol("x")


def _sympy_poly(coeffs: Sequence[int]) -> sympy.Poly:
    return sympy.Poly(list(coeffs), _x)


@dataclass(frozen=True)
class ChateletBundle:
    base: RationalCurve
    a: int
    f: tuple[int, ...]  # highest degree first

    def __post_init__(self) -> None:
        f = tuple(int(t) for t in self.f)
        object.__setattr__(self, "f", f)
        if self.a == 0 or is_square(self.a) or not is_squarefree(self.a):
            raise ArgumentError(f"a must be square-free, nonzero and not a square, got {self.a}")
        if not f or f[0] == 0:
            raise ArgumentError("f needs a nonzero leading coefficient")
        if not 1 <= len(f) - 1 <= 4:
            raise ArgumentError(f"f must have degree 1..4, got {len(f) - 1}")
        if self.disc_f == 0:
            raise ArgumentError("f is not separable")
        cubic = _sympy_poly([1, 0, self.base.b, self.base.c])
        if sympy.resultant(_sympy_poly(f), cubic) == 0:
            raise ArgumentError("f shares a root with x^3 + bx + c")

    @property
    def degree(self) -> int:
        return len(self.f) - 1

    @property
    def disc_f(self) -> int:
        if self.degree == 1:
            return 1
        return int(sympy.discriminant(_sympy_poly(self.f)))

    def f_at(self, P: RationalPoint) -> Fraction:
        """f(x(P)), or the leading coefficient at infinity for even degree."""
        if P is None:
            if self.degree % 2:
                raise UnsupportedFiberError("fiber at infinity needs even deg(f)")
            return Fraction(self.f[0])
        return poly_eval(self.f, P[0])


@dataclass(frozen=True)
class FiberVerdict:
    point: RationalPoint
    prime: Place
    soluble: bool
    valuation_of_f: Optional[int]
    singular_fiber: bool


def fiber_locally_soluble(X: ChateletBundle, P: RationalPoint, v: Place) -> FiberVerdict:
    value = X.f_at(P)
    if value == 0:
        # u = v = 0 gives a rational point on the degenerate conic
        return FiberVerdict(P, v, True, None, True)
    soluble = hilbert_symbol(X.a, value, v) == 1
    val = None if v == REAL else valuation(value, v)
    return FiberVerdict(P, v, soluble, val, False)


def in_Rp(X: ChateletBundle, P: RationalPoint, p: int) -> bool:
    """Whether the fiber above P has no Q_p-point."""
    if p == REAL or not isinstance(p, int):
        raise ArgumentError(f"R_p is defined at finite primes, got {p!r}")
    return not fiber_locally_soluble(X, P, p).soluble


def omega_sieve(X: ChateletBundle, bound: int) -> list[int]:
    """Primes 5 <= p <= bound of good reduction, prime to a*disc(f), with a a
    nonsquare mod p."""
    bad = X.a * X.disc_f
    return [
        p
        for p in X.base.good_primes(bound)
        if bad % p != 0 and legendre(X.a, p) == -1
    ]


# --- reports ---------------------------------------------------------------

Value = Optional[bool | int]


def _fmt(value: Value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _parse(text: str) -> Value:
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    return int(text)


@dataclass
class ScanReport:
    """Rows keyed by a strictly increasing integer (a prime ``p`` or a
    multiple ``k``), an optional group order and named flags."""

    key: str
    rows: list[dict[str, Value]]
    parameters: dict[str, Any] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        keys = [row[self.key] for row in self.rows]
        if any(k1 >= k2 for k1, k2 in zip(keys, keys[1:])):
            raise ValueError(f"rows must be strictly increasing in {self.key}")

    @property
    def columns(self) -> list[str]:
        cols = [self.key]
        names = set().union(*(row.keys() for row in self.rows)) - {self.key}
        if "order" in names:
            cols.append("order")
            names.discard("order")
        return cols + sorted(names)

    def _meta(self) -> dict[str, Any]:
        return {"config": self.parameters, "key": self.key, "summary": self.summary}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self._meta(), sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        cols = self.columns
        writer.writerow(cols)
        for row in self.rows:
            writer.writerow([_fmt(row.get(c)) for c in cols])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> ScanReport:
        head, _, body = text.partition("\n")
        if not head.startswith("# "):
            raise ValueError("missing '#' metadata line")
        meta = json.loads(head[2:])
        reader = csv.reader(io.StringIO(body))
        cols = next(reader)
        rows = [{c: _parse(t) for c, t in zip(cols, line)} for line in reader]
        return cls(meta["key"], rows, meta["config"], meta["summary"])

    def to_json(self) -> str:
        rows = [{c: row.get(c) for c in self.columns} for row in self.rows]
        return json.dumps({**self._meta(), "rows": rows}, sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> ScanReport:
        data = json.loads(text)
        return cls(data["key"], data["rows"], data["config"], data["summary"])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScanReport):
            return NotImplemented
        return self.to_json() == other.to_json()


def format_point(P: RationalPoint) -> str:
    return "O" if P is None else f"({P[0]},{P[1]})"


def _bundle_params(X: ChateletBundle) -> dict[str, Any]:
    return {"curve": f"{X.base.b},{X.base.c}", "a": X.a, "f": list(X.f)}


def _check_digits(P: RationalPoint, limit: int, label: str) -> None:
    if point_digits(P) > limit:
        raise ResourceError(
            f"coordinate size exceeds {limit} digits at {label}"
        )


def _soluble_or_none(X: ChateletBundle, P: RationalPoint, p: int) -> Optional[bool]:
    try:
        return fiber_locally_soluble(X, P, p).soluble
    except UnsupportedFiberError:
        return None


def zs_scan(
    X: ChateletBundle,
    base_point: RationalPoint,
    generator: RationalPoint,
    k_range: int,
    S: Iterable[int],
    digit_limit: int = DEFAULT_DIGIT_LIMIT,
) -> ScanReport:
    """Local solubility at each p in S of the fibers above base + k*generator.

    A point whose fiber cannot be decided (infinity with odd deg f) gets empty
    flags.
    """
    S = sorted(set(S))
    for p in S:
        if not isinstance(p, int) or not is_prime(p):
            raise ArgumentError(f"S must contain primes, got {p!r}")
    if k_range < 0:
        raise ArgumentError("k_range must be >= 0")
    E = X.base
    for Q in (base_point, generator):
        if not E.contains(Q):
            raise ArgumentError(f"{format_point(Q)} is not on the base curve")
    points: dict[int, RationalPoint] = {0: base_point}
    for sign in (1, -1):
        step = generator if sign > 0 else neg_q(generator)
        P = base_point
        for k in range(1, k_range + 1):
            P = _add(P, step, E.b)
            _check_digits(P, digit_limit, f"k={sign * k}")
            points[sign * k] = P
    rows = []
    for k in sorted(points):
        row: dict[str, Value] = {"k": k}
        flags = [_soluble_or_none(X, points[k], p) for p in S]
        for p, ok in zip(S, flags):
            row[f"soluble_at_{p}"] = ok
        row["in_ZS"] = None if None in flags else all(flags)
        rows.append(row)
    params = {
        **_bundle_params(X),
        "base": format_point(base_point),
        "generator": format_point(generator),
        "k_range": k_range,
        "S": S,
        "digit_limit": digit_limit,
    }
    members = [r["k"] for r in rows if r["in_ZS"]]
    return ScanReport("k", rows, params, {"in_ZS": members})


def gcd_criterion_scan(
    X: ChateletBundle, n: int, bound: int, jobs: int = 1
) -> ScanReport:
    """#E_p(F_p) over the Omega sieve, flagging primes with gcd(n, order) = 1."""
    if n < 2:
        raise ArgumentError(f"n must be >= 2, got {n}")
    primes = omega_sieve(X, bound)
    orders = parallel_group_orders(X.base.b, X.base.c, primes, jobs)
    rows = [
        {"p": p, "order": order, "gcd_one": gcd(n, order) == 1}
        for p, order in zip(primes, orders)
    ]
    params = {**_bundle_params(X), "n": n, "pmax": bound}
    witnesses = [r["p"] for r in rows if r["gcd_one"]]
    return ScanReport("p", rows, params, {"witnesses": witnesses})


def _span(
    E: RationalCurve,
    start: RationalPoint,
    gens: Sequence[RationalPoint],
    radius: int,
    digit_limit: int,
) -> list[RationalPoint]:
    """start + sum k_i g_i over |k_i| <= radius."""
    layer = [start]
    for g in gens:
        nxt = []
        for P in layer:
            nxt.append(P)
            for step in (g, neg_q(g)):
                Q = P
                for k in range(1, radius + 1):
                    Q = _add(Q, step, E.b)
                    _check_digits(Q, digit_limit, f"k={k} along {format_point(g)}")
                    nxt.append(Q)
        layer = nxt
    return layer


def coset_meet_scan(
    X: ChateletBundle,
    P: RationalPoint,
    coset_gens: Sequence[RationalPoint],
    primes: Iterable[int],
    sample_radius: int,
    window_gens: Optional[Sequence[RationalPoint]] = None,
    window_radius: Optional[int] = None,
    digit_limit: int = DEFAULT_DIGIT_LIMIT,
) -> ScanReport:
    """Finite-sample probe of whether red_p(P + H) meets red_p(R_p).

    The coset sample is P + sum k_i g_i with |k_i| <= sample_radius.  R_p
    witnesses are drawn from the coset sample itself, or, when
    ``window_gens`` is given, from sum k_i w_i with |k_i| <= ``window_radius``
    (default max(sample_radius, 1)).
    A reported meet is conclusive; an empty meet only covers the sample.
    """
    if sample_radius < 0:
        raise ArgumentError("sample_radius must be >= 0")
    E = X.base
    for Q in [P, *coset_gens, *(window_gens or [])]:
        if not E.contains(Q):
            raise ArgumentError(f"{format_point(Q)} is not on the base curve")
    primes = sorted(set(primes))
    for p in primes:
        E.reduction(p)
    coset = _span(E, P, coset_gens, sample_radius, digit_limit)
    if window_gens is None:
        window = coset
    else:
        if window_radius is None:
            window_radius = max(sample_radius, 1)
        window = _span(E, None, window_gens, window_radius, digit_limit)
    rows = []
    for p in primes:
        reduced_coset = {reduce_mod_p(Q, E, p) for Q in coset}
        witnesses = {
            reduce_mod_p(Q, E, p)
            for Q in window
            if _soluble_or_none(X, Q, p) is False
        }
        rows.append({
            "p": p,
            "coset_size": len(reduced_coset),
            "meets": bool(reduced_coset & witnesses),
            "witness_count": len(witnesses),
        })
    params = {
        **_bundle_params(X),
        "P": format_point(P),
        "coset_gens": [format_point(g) for g in coset_gens],
        "window_gens": None if window_gens is None else [format_point(g) for g in window_gens],
        "sample_radius": sample_radius,
        "window_radius": window_radius,
        "primes": primes,
    }
    return ScanReport("p", rows, params, {"meets_at": [r["p"] for r in rows if r["meets"]]})
