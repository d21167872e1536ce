"""Exact arithmetic over Z and Q.

Primality, Legendre and Hilbert symbols, evaluation in Q(sqrt d), and
congruence-constrained prime search.  Rationals are ``fractions.Fraction``,
which normalise eagerly, so equality is structural.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Iterator, Sequence, Union

from sympy import factorint
from sympy.ntheory.modular import solve_congruence

from .errors import ArgumentError

Rational = Fraction
RationalLike = Union[int, Fraction]

#: The archimedean place of Q.  Finite places are plain ``int`` primes.
REAL = "real"
Place = Union[int, str]

# Deterministic Miller-Rabin: these bases are exact for n < 3.3 * 10**24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def as_rational(q: RationalLike) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    raise TypeError(f"expected int or Fraction, got {type(q).__name__}")


def is_prime(n: int) -> bool:
    """Deterministic primality test (exact below 2**64 and well beyond)."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(bound: int) -> list[int]:
    """Sieve of Eratosthenes."""
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, bound + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


def prime_factors(n: int) -> list[int]:
    """Sorted distinct primes dividing ``n`` (``n != 0``)."""
    if n == 0:
        raise ArgumentError("0 has no finite prime factorisation")
    return sorted(p for p in factorint(abs(n)) if p > 1)


@lru_cache(maxsize=1024)
def is_squarefree(n: int) -> bool:
    if n == 0:
        return False
    return all(e == 1 for e in factorint(abs(n)).values())


def is_square(q: RationalLike) -> bool:
    """True iff ``q`` is the square of a rational number."""
    q = as_rational(q)
    if q < 0:
        return False
    num, den = q.numerator, q.denominator
    return isqrt(num) ** 2 == num and isqrt(den) ** 2 == den


def legendre(a: int, p: int) -> int:
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise ArgumentError(f"legendre symbol needs an odd prime, got {p}")
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def valuation(q: RationalLike, p: int) -> int:
    """Exponent of ``p`` in the nonzero rational ``q``."""
    q = as_rational(q)
    if q == 0:
        raise ArgumentError("valuation of 0 is +infinity; branch before calling")
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _split(n: int, p: int) -> tuple[int, int]:
    """Write n = p**k * u with p not dividing u."""
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k, n


def _square_class_int(q: Fraction) -> int:
    # n/d and n*d differ by the square d**2
    return q.numerator * q.denominator


def hilbert_symbol(a: RationalLike, b: RationalLike, v: Place) -> int:
    """Hilbert symbol (a, b)_v over Q.

    Returns +1 when u**2 - a*v**2 = b*w**2 has a nonzero solution over the
    completion of Q at ``v`` and -1 otherwise.
    """
    a, b = as_rational(a), as_rational(b)
    if a == 0 or b == 0:
        raise ArgumentError("Hilbert symbol needs nonzero arguments")
    if v == REAL:
        return -1 if (a < 0 and b < 0) else 1
    if not isinstance(v, int) or not is_prime(v):
        raise ArgumentError(f"not a place of Q: {v!r}")
    p = v
    alpha, u = _split(_square_class_int(a), p)
    beta, w = _split(_square_class_int(b), p)
    if p == 2:
        eps_u = ((u - 1) // 2) % 2
        eps_w = ((w - 1) // 2) % 2
        om_u = ((u * u - 1) // 8) % 2
        om_w = ((w * w - 1) // 8) % 2
        e = eps_u * eps_w + alpha * om_w + beta * om_u
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    if beta % 2:
        sign *= legendre(u, p)
    if alpha % 2:
        sign *= legendre(w, p)
    return sign


def candidate_places(a: RationalLike, b: RationalLike) -> list[Place]:
    """Places where (a, b)_v can be -1: 2, the real place, primes of a and b."""
    a, b = as_rational(a), as_rational(b)
    primes = {2}
    for n in (a.numerator, a.denominator, b.numerator, b.denominator):
        primes.update(prime_factors(n))
    return [*sorted(primes), REAL]


def quaternion_ramified_places(a: RationalLike, b: RationalLike) -> set[Place]:
    return {v for v in candidate_places(a, b) if hilbert_symbol(a, b, v) == -1}


def place_sort_key(v: Place) -> tuple[int, int]:
    return (1, 0) if v == REAL else (0, int(v))


@dataclass(frozen=True)
class QuadRingElement:
    """u + v*sqrt(d) with rational u, v and square-free d not in {0, 1}."""

    d: int
    u: Fraction
    v: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if self.d in (0, 1) or not is_squarefree(self.d):
            raise ArgumentError(f"d must be square-free and not 0 or 1, got {self.d}")
        object.__setattr__(self, "u", as_rational(self.u))
        object.__setattr__(self, "v", as_rational(self.v))

    def _coerce(self, other: QuadRingElement | RationalLike) -> QuadRingElement:
        if isinstance(other, QuadRingElement):
            if other.d != self.d:
                raise ArgumentError("elements live in different quadratic rings")
            return other
        return QuadRingElement(self.d, as_rational(other))

    def __add__(self, other):
        o = self._coerce(other)
        return QuadRingElement(self.d, self.u + o.u, self.v + o.v)

    __radd__ = __add__

    def __mul__(self, other):
        o = self._coerce(other)
        return QuadRingElement(
            self.d,
            self.u * o.u + self.d * self.v * o.v,
            self.u * o.v + self.v * o.u,
        )

    __rmul__ = __mul__

    def conjugate(self) -> QuadRingElement:
        return QuadRingElement(self.d, self.u, -self.v)

    def norm(self) -> Fraction:
        return self.u * self.u - self.d * self.v * self.v

    def __str__(self) -> str:
        return f"{self.u} + {self.v}*sqrt({self.d})"


def quad_ring_eval(poly: Sequence[int], elt: QuadRingElement) -> QuadRingElement:
    """Evaluate ``poly`` (highest degree first) at ``elt`` by Horner's rule."""
    acc = QuadRingElement(elt.d, Fraction(0))
    for coeff in poly:
        acc = acc * elt + coeff
    return acc


def poly_eval(poly: Sequence[int], x: RationalLike) -> Fraction:
    """Exact evaluation of an integer polynomial, highest degree first."""
    x = as_rational(x)
    acc = Fraction(0)
    for coeff in poly:
        acc = acc * x + coeff
    return acc


def find_congruence_prime(
    constraints: Iterable[tuple[int, int]], bound: int
) -> int | None:
    """Smallest prime p <= bound with p = r_i (mod m_i) for every constraint."""
    constraints = list(constraints)
    for m, _ in constraints:
        if m < 2:
            raise ArgumentError(f"modulus must be >= 2, got {m}")
    if not constraints:
        residue, modulus = 0, 1
    else:
        solved = solve_congruence(*[(r % m, m) for m, r in constraints])
        if solved is None:
            return None
        residue, modulus = (int(t) for t in solved)
    if gcd(residue, modulus) > 1:
        # every candidate shares a factor with the modulus; only that prime can work
        g = gcd(residue, modulus)
        if is_prime(g) and g <= bound and all(g % m == r % m for m, r in constraints):
            return g
        return None
    for n in _progression(residue, modulus, bound):
        if is_prime(n):
            return n
    return None


def _progression(residue: int, modulus: int, bound: int) -> Iterator[int]:
    n = residue % modulus
    while n <= bound:
        yield n
        n += modulus
