"""Elliptic curves y^2 = x^3 + bx + c over prime fields F_p, p >= 5.

Points are ``None`` (the point at infinity) or ``(x, y)`` tuples of residues
in ``[0, p)``.
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt
from typing import Iterator, Optional, Sequence

import numpy as np
from sympy.ntheory import sqrt_mod

from .arith import is_prime, legendre, prime_factors
from .errors import ArgumentError

log = logging.getLogger(__name__)

INFINITY = None
FpPoint = Optional[tuple[int, int]]


@dataclass(frozen=True)
class FpCurve:
    p: int
    b: int
    c: int

    def __post_init__(self) -> None:
        if self.p < 5 or not is_prime(self.p):
            raise ArgumentError(f"p must be a prime >= 5, got {self.p}")
        object.__setattr__(self, "b", self.b % self.p)
        object.__setattr__(self, "c", self.c % self.p)
        if (4 * self.b**3 + 27 * self.c**2) % self.p == 0:
            raise ArgumentError(f"y^2 = x^3 + {self.b}x + {self.c} is singular mod {self.p}")

    def rhs(self, x: int) -> int:
        return (x * x * x + self.b * x + self.c) % self.p

    def contains(self, P: FpPoint) -> bool:
        if P is None:
            return True
        x, y = P
        return 0 <= x < self.p and 0 <= y < self.p and (y * y - self.rhs(x)) % self.p == 0

    def neg(self, P: FpPoint) -> FpPoint:
        if P is None:
            return None
        return (P[0], -P[1] % self.p)

    def add(self, P: FpPoint, Q: FpPoint) -> FpPoint:
        """Chord-tangent addition; no membership check."""
        if P is None:
            return Q
        if Q is None:
            return P
        p = self.p
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2:
            if (y1 + y2) % p == 0:
                return None
            lam = (3 * x1 * x1 + self.b) * pow(2 * y1, -1, p) % p
        else:
            lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
        x3 = (lam * lam - x1 - x2) % p
        return (x3, (lam * (x1 - x3) - y1) % p)

    def mul(self, k: int, P: FpPoint) -> FpPoint:
        if k < 0:
            return self.mul(-k, self.neg(P))
        result: FpPoint = None
        addend = P
        while k:
            if k & 1:
                result = self.add(result, addend)
            addend = self.add(addend, addend)
            k >>= 1
        return result

    def points(self) -> Iterator[FpPoint]:
        """Every point, infinity first.  O(p log p); meant for small p."""
        yield None
        for x in range(self.p):
            r = self.rhs(x)
            if r == 0:
                yield (x, 0)
            elif legendre(r, self.p) == 1:
                y = sqrt_mod(r, self.p)
                yield (x, min(y, self.p - y))
                yield (x, max(y, self.p - y))

    def random_point(self, rng: random.Random) -> tuple[int, int]:
        while True:
            x = rng.randrange(self.p)
            r = self.rhs(x)
            if r == 0:
                return (x, 0)
            if legendre(r, self.p) == 1:
                y = sqrt_mod(r, self.p)
                return (x, y if rng.random() < 0.5 else self.p - y)

    def twist(self) -> FpCurve:
        """The quadratic twist by the least quadratic nonresidue."""
        d = next(d for d in range(2, self.p) if legendre(d, self.p) == -1)
        return FpCurve(self.p, self.b * d * d, self.c * d * d * d)


@dataclass(frozen=True)
class FrobeniusDatum:
    p: int
    order: int
    trace: int


def _check_on(E: FpCurve, *points: FpPoint) -> None:
    for P in points:
        if not E.contains(P):
            raise ArgumentError(f"{P} is not on {E}")


def add(P: FpPoint, Q: FpPoint, E: FpCurve) -> FpPoint:
    _check_on(E, P, Q)
    return E.add(P, Q)


def scalar_mul(k: int, P: FpPoint, E: FpCurve) -> FpPoint:
    _check_on(E, P)
    return E.mul(k, P)


def hasse_interval(p: int) -> tuple[int, int]:
    w = isqrt(4 * p)
    return p + 1 - w, p + 1 + w


def _naive_order(E: FpCurve) -> int:
    p = E.p
    residues = np.arange(p, dtype=np.int64)
    # roots[r] = number of y with y^2 = r, i.e. 1 + legendre(r, p)
    roots = np.bincount(residues * residues % p, minlength=p)
    f = ((residues * residues % p) * residues + E.b * residues + E.c) % p
    return 1 + int(roots[f].sum())


def _multiple_in_interval(E: FpCurve, P: FpPoint, lo: int, hi: int) -> int:
    """Some N in [lo, hi] with N*P = O, by baby-step giant-step."""
    m = isqrt(hi - lo) + 1
    baby: dict[FpPoint, int] = {}
    R: FpPoint = None
    for j in range(m):
        baby.setdefault(R, j)
        R = E.add(R, P)
    step = E.mul(m, P)
    G = E.mul(lo, P)
    for i in range(m + 1):
        j = baby.get(E.neg(G))
        if j is not None and lo + i * m + j <= hi:
            return lo + i * m + j
        G = E.add(G, step)
    raise AssertionError("no multiple of the point order in the Hasse interval")


def point_order(E: FpCurve, P: FpPoint, multiple: int | None = None) -> int:
    """Exact order of P, given any multiple of it (found by BSGS if omitted)."""
    if P is None:
        return 1
    if multiple is None:
        multiple = _multiple_in_interval(E, P, *hasse_interval(E.p))
    n = multiple
    for q in prime_factors(n):
        while n % q == 0 and E.mul(n // q, P) is None:
            n //= q
    return n


def _bsgs_order(E: FpCurve, max_points: int = 40) -> int:
    p = E.p
    lo, hi = hasse_interval(p)
    twist = E.twist()
    rng = random.Random(p * 1_000_003 + E.b * 1009 + E.c)
    lcm_e = lcm_t = 1
    for _ in range(max_points):
        lcm_e = _lcm(lcm_e, point_order(E, E.random_point(rng)))
        lcm_t = _lcm(lcm_t, point_order(twist, twist.random_point(rng)))
        # the twist has order 2p + 2 - N
        candidates = [
            n for n in range(lo - lo % lcm_e, hi + 1, lcm_e)
            if n >= lo and (2 * p + 2 - n) % lcm_t == 0
        ]
        if len(candidates) == 1:
            return candidates[0]
    log.debug("bsgs ambiguous for %s after %d points; enumerating", E, max_points)
    return _naive_order(E)


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


@lru_cache(maxsize=65536)
def count_points(E: FpCurve, method: str = "naive") -> FrobeniusDatum:
    """#E(F_p) and the Frobenius trace a_p = p + 1 - #E(F_p)."""
    if method == "naive":
        order = _naive_order(E)
    elif method == "bsgs":
        order = _bsgs_order(E)
    else:
        raise ArgumentError(f"unknown counting method {method!r}")
    return FrobeniusDatum(E.p, order, E.p + 1 - order)


def has_n_torsion(E: FpCurve, n: int) -> bool:
    """Whether E(F_p) has a nonzero point killed by n.

    By Cauchy's theorem this happens iff gcd(n, #E(F_p)) > 1.
    """
    if n < 1:
        raise ArgumentError(f"n must be >= 1, got {n}")
    return gcd(n, count_points(E).order) > 1


def group_orders(b: int, c: int, primes: Sequence[int]) -> list[int]:
    """#E(F_p) for each p; module-level so worker processes can run it."""
    return [count_points(FpCurve(p, b, c)).order for p in primes]


def parallel_group_orders(b: int, c: int, primes: Sequence[int], jobs: int = 1) -> list[int]:
    """group_orders split over ``jobs`` processes; the result is independent of jobs."""
    if jobs < 1:
        raise ArgumentError(f"jobs must be >= 1, got {jobs}")
    primes = list(primes)
    if jobs == 1 or len(primes) < 2 * jobs:
        return group_orders(b, c, primes)
    chunks = [primes[i::jobs] for i in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(group_orders, [b] * jobs, [c] * jobs, chunks))
    found = {p: order for chunk, res in zip(chunks, results) for p, order in zip(chunk, res)}
    return [found[p] for p in primes]
