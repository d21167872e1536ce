"""Elliptic curves y^2 = x^3 + bx + c over Q with exact rational points.

Covers reduction modulo good primes, the kernel of reduction E_1(Q_p) and
its formal-group valuation, translation by kernel points, division
polynomials and rational torsion.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
from typing import Optional, Sequence

import numpy as np
from sympy import factorint

from .arith import as_rational, primes_up_to, prime_factors, valuation
from .ec_fp import FpCurve, FpPoint, count_points
from .errors import ArgumentError, VerificationError

RationalPoint = Optional[tuple[Fraction, Fraction]]

_LOG10_2 = 0.30102999566398120


@dataclass(frozen=True)
class RationalCurve:
    b: int
    c: int
    discriminant: int = field(init=False)
    bad_primes: frozenset[int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        disc = -16 * (4 * self.b**3 + 27 * self.c**2)
        if disc == 0:
            raise ArgumentError(f"y^2 = x^3 + {self.b}x + {self.c} is singular")
        object.__setattr__(self, "discriminant", disc)
        object.__setattr__(self, "bad_primes", frozenset(prime_factors(disc)))

    @classmethod
    def parse(cls, text: str) -> RationalCurve:
        """Parse the ``"b,c"`` curve format."""
        try:
            b, c = (int(t) for t in text.split(","))
        except ValueError:
            raise ArgumentError(f"curve must be 'b,c' with integers, got {text!r}") from None
        return cls(b, c)

    def rhs(self, x: Fraction | int) -> Fraction:
        x = as_rational(x)
        return x * x * x + self.b * x + self.c

    def contains(self, P: RationalPoint) -> bool:
        return P is None or P[1] * P[1] == self.rhs(P[0])

    def is_good(self, p: int) -> bool:
        return p not in self.bad_primes

    def reduction(self, p: int) -> FpCurve:
        if p in self.bad_primes or p < 5:
            raise ArgumentError(f"{p} is not a good prime >= 5 for {self}")
        return FpCurve(p, self.b, self.c)

    def good_primes(self, bound: int, start: int = 5) -> list[int]:
        return [p for p in primes_up_to(bound) if p >= start and p not in self.bad_primes]

    def __str__(self) -> str:
        return f"y^2 = x^3 + ({self.b})x + ({self.c})"


def point(x, y) -> tuple[Fraction, Fraction]:
    return (as_rational(x), as_rational(y))


def neg_q(P: RationalPoint) -> RationalPoint:
    return None if P is None else (P[0], -P[1])


def _add(P: RationalPoint, Q: RationalPoint, b: int) -> RationalPoint:
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if y1 + y2 == 0:
            return None
        lam = (3 * x1 * x1 + b) / (2 * y1)
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = lam * lam - x1 - x2
    return (x3, lam * (x1 - x3) - y1)


def add_q(P: RationalPoint, Q: RationalPoint, E: RationalCurve) -> RationalPoint:
    for R in (P, Q):
        if not E.contains(R):
            raise ArgumentError(f"{R} is not on {E}")
    return _add(P, Q, E.b)


def mul_q(k: int, P: RationalPoint, E: RationalCurve) -> RationalPoint:
    if not E.contains(P):
        raise ArgumentError(f"{P} is not on {E}")
    if k < 0:
        k, P = -k, neg_q(P)
    result: RationalPoint = None
    while k:
        if k & 1:
            result = _add(result, P, E.b)
        P = _add(P, P, E.b)
        k >>= 1
    return result


def point_digits(P: RationalPoint) -> int:
    """Decimal size of the largest numerator or denominator of P (estimated
    from the bit length, which avoids a costly str conversion)."""
    if P is None:
        return 0
    bits = max(n.bit_length() for t in P for n in (t.numerator, t.denominator))
    return int(bits * _LOG10_2) + 1


def search_points(E: RationalCurve, bound: int = 10_000) -> list[tuple[Fraction, Fraction]]:
    """Affine points with integer x in [-bound, bound], found by naive search."""
    found = []
    for x in range(-bound, bound + 1):
        r = x**3 + E.b * x + E.c
        if r < 0:
            continue
        y = isqrt(r)
        if y * y == r:
            found.append(point(x, y))
            if y:
                found.append(point(x, -y))
    return found


def reduce_mod_p(P: RationalPoint, E: RationalCurve, p: int) -> FpPoint:
    """red_p: E(Q) -> E_p(F_p)."""
    E.reduction(p)
    if P is None or P[0].denominator % p == 0:
        return None
    x, y = P
    return (
        x.numerator * pow(x.denominator, -1, p) % p,
        y.numerator * pow(y.denominator, -1, p) % p,
    )


@dataclass(frozen=True)
class LocalProfile:
    """Position of a point relative to the kernel of reduction at p.

    ``xi_valuation`` is v_p(-x/y), which equals i when v_p(x) = -2i.
    """

    p: int
    in_kernel: bool
    xi_valuation: Optional[int]
    x_valuation: int
    y_valuation: Optional[int]


def local_profile(P: RationalPoint, E: RationalCurve, p: int) -> LocalProfile:
    if P is None:
        raise ArgumentError("the point at infinity has no local profile")
    E.reduction(p)
    x, y = P
    vx = valuation(x, p) if x != 0 else None
    vy = valuation(y, p) if y != 0 else None
    if vx is not None and vx < 0:
        i = -vx // 2
        # 3 v(x) = 2 v(y) = -6i on E_1
        if vx != -2 * i or vy != -3 * i:
            raise VerificationError(f"valuations v(x)={vx}, v(y)={vy} break the 2:3 law at {p}")
        return LocalProfile(p, True, valuation(-x / y, p), vx, vy)
    return LocalProfile(p, False, None, vx if vx is not None else 0, vy)


def check_translation_valuation(
    P: RationalPoint, Q: RationalPoint, E: RationalCurve, p: int
) -> bool:
    """Check that x(P + Q) differs from x(Q) by exactly p**i.

    P must lie in E_1(Q_p) with v_p(x(P)) = -2i, and Q must have p-adic unit
    coordinates (so its reduction is not 2-torsion).
    """
    if P is None or Q is None:
        raise ArgumentError("both points must be affine")
    prof = local_profile(P, E, p)
    if not prof.in_kernel:
        raise ArgumentError(f"{P} is not in the kernel of reduction at {p}")
    w, z = Q
    if w == 0 or z == 0 or valuation(w, p) != 0 or valuation(z, p) != 0:
        raise ArgumentError(f"{Q} must have p-adic unit coordinates at {p}")
    S = add_q(P, Q, E)
    if S is None:
        raise ArgumentError("P + Q is the point at infinity")
    diff = S[0] - w
    return diff != 0 and valuation(diff, p) == prof.xi_valuation


# --- division polynomials ----------------------------------------------------
# Integer polynomials are coefficient lists, lowest degree first, internally.

def _pmul(f: list[int], g: list[int]) -> list[int]:
    if not f or not g:
        return []
    return [int(t) for t in np.convolve(np.array(f, dtype=object), np.array(g, dtype=object))]


def _psub(f: list[int], g: list[int]) -> list[int]:
    n = max(len(f), len(g))
    out = [(f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0) for i in range(n)]
    while out and out[-1] == 0:
        out.pop()
    return out


def _division_polys(b: int, c: int, n: int) -> list[list[int]]:
    """g_0..g_n with psi_k = g_k (k odd) and psi_k = 2y g_k (k even)."""
    F = [c, b, 0, 1]
    F2x16 = [16 * t for t in _pmul(F, F)]
    g: list[list[int]] = [
        [],
        [1],
        [1],
        [-b * b, 12 * c, 6 * b, 0, 3],
        [2 * t for t in (-8 * c * c - b**3, -4 * b * c, -5 * b * b, 20 * c, 5 * b, 0, 1)],
    ]
    for k in range(5, n + 1):
        m = k // 2
        if k % 2:
            a = _pmul(g[m + 2], _pmul(g[m], _pmul(g[m], g[m])))
            d = _pmul(g[m - 1], _pmul(g[m + 1], _pmul(g[m + 1], g[m + 1])))
            if m % 2 == 0:
                a = _pmul(F2x16, a)
            else:
                d = _pmul(F2x16, d)
            g.append(_psub(a, d))
        else:
            inner = _psub(
                _pmul(g[m + 2], _pmul(g[m - 1], g[m - 1])),
                _pmul(g[m - 2], _pmul(g[m + 1], g[m + 1])),
            )
            g.append(_pmul(g[m], inner))
    return g


def division_polynomial(E: RationalCurve, n: int) -> list[int]:
    """Integer polynomial in x (highest degree first) vanishing exactly at the
    x-coordinates of the nonzero n-torsion points.

    For odd n this is psi_n.  For even n it is (psi_n / psi_2)(x^3 + bx + c),
    so the 2-torsion x-coordinates are included; n = 2 gives x^3 + bx + c.
    """
    if not 2 <= n <= 10:
        raise ArgumentError(f"division polynomials are supported for 2 <= n <= 10, got {n}")
    g = _division_polys(E.b, E.c, n)[n]
    if n % 2 == 0:
        g = _pmul(g, [E.c, E.b, 0, 1])
    return g[::-1]


def _integer_cubic_roots(b: int, c: int) -> list[int]:
    roots = set()
    for r in np.roots([1, 0, b, c]):
        if abs(r.imag) < 1e-6 * max(1.0, abs(r.real)):
            base = int(round(r.real))
            roots.update(t for t in range(base - 2, base + 3) if t**3 + b * t + c == 0)
    return sorted(roots)


def _torsion_candidates(E: RationalCurve) -> list[tuple[int, int]]:
    """Integral points with y = 0 or y^2 | 4b^3 + 27c^2 (Nagell-Lutz)."""
    D = abs(4 * E.b**3 + 27 * E.c**2)
    ys = [0] + [y for y in _square_divisor_roots(D)]
    found = []
    for y in ys:
        for x in _integer_cubic_roots(E.b, E.c - y * y):
            found.append((x, y))
            if y:
                found.append((x, -y))
    return found


def _square_divisor_roots(D: int) -> list[int]:
    roots = [1]
    for q, e in factorint(D).items():
        roots = [r * q**k for r in roots for k in range(e // 2 + 1)]
    return sorted(roots)


def rational_n_torsion(E: RationalCurve, n: int) -> set[tuple[Fraction, Fraction]]:
    """Rational points P != O with nP = O.

    Rational torsion points are integral (Nagell-Lutz), so the candidate
    x-values are the integer roots of the n-division polynomial with a
    rational y.
    """
    poly = division_polynomial(E, n)
    out = set()
    for x, y in _torsion_candidates(E):
        if _eval_int(poly, x) == 0:
            P = point(x, y)
            if mul_q(n, P, E) is None:
                out.add(P)
    return out


def _eval_int(poly: Sequence[int], x: int) -> int:
    acc = 0
    for coeff in poly:
        acc = acc * x + coeff
    return acc


@dataclass(frozen=True)
class TorsionCertificate:
    """Good primes whose group orders have gcd 1, so E(Q)_tors is trivial."""

    primes: tuple[int, ...]
    orders: tuple[int, ...]

    def is_valid(self, E: RationalCurve) -> bool:
        g = 0
        for p, order in zip(self.primes, self.orders):
            if not E.is_good(p) or p < 5 or count_points(E.reduction(p)).order != order:
                return False
            g = gcd(g, order)
        return g == 1


def torsion_triviality_certificate(
    E: RationalCurve, prime_budget: int
) -> Optional[TorsionCertificate]:
    """Scan up to ``prime_budget`` good primes for group orders with gcd 1.

    Prime-to-p torsion injects into E_p(F_p), so gcd 1 over good primes rules
    out every rational torsion point.  The returned prime set is pruned so no
    prime can be dropped from it.
    """
    if prime_budget < 2:
        raise ArgumentError(f"prime_budget must be >= 2, got {prime_budget}")
    kept: list[tuple[int, int]] = []
    g = 0
    bound = 64
    primes: list[int] = []
    while len(primes) < prime_budget:
        primes = E.good_primes(bound)[:prime_budget]
        bound *= 2
    for p in primes:
        order = count_points(E.reduction(p)).order
        # keep a prime only when it shrinks the running gcd
        if not kept or gcd(g, order) != g:
            kept.append((p, order))
            g = gcd(g, order)
        if g == 1:
            break
    if g != 1:
        return None
    # drop earlier primes that the later ones make redundant
    for idx in range(len(kept) - 2, -1, -1):
        rest = kept[:idx] + kept[idx + 1 :]
        if _gcd_all(o for _, o in rest) == 1:
            kept = rest
    return TorsionCertificate(tuple(p for p, _ in kept), tuple(o for _, o in kept))


def _gcd_all(values) -> int:
    g = 0
    for v in values:
        g = gcd(g, v)
    return g
