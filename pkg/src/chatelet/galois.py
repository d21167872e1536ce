"""Mod-ell Galois images from Frobenius sampling.

For a good prime p != ell, Frobenius acts on E[ell] with trace a_p and
determinant p (mod ell).  Each sampled pair can prove that the image is not
contained in a Borel subgroup, a Cartan normaliser, or an exceptional group.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arith import is_prime, legendre
from .ec_fp import count_points, parallel_group_orders
from .ec_q import RationalCurve
from .errors import ArgumentError

BOREL = "borel"
SPLIT_NORMALIZER = "split_normalizer"
NONSPLIT_NORMALIZER = "nonsplit_normalizer"
EXCEPTIONAL = "exceptional"
MAXIMAL_TYPES = (BOREL, SPLIT_NORMALIZER, NONSPLIT_NORMALIZER, EXCEPTIONAL)

SURJECTIVE = "surjective_certified"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class FrobeniusPair:
    p: int
    ell: int
    trace_mod: int
    det_mod: int


def _check_ell(ell: int) -> None:
    if ell < 3 or not is_prime(ell):
        raise ArgumentError(f"ell must be an odd prime, got {ell}")


def frobenius_pair(E: RationalCurve, ell: int, p: int) -> FrobeniusPair:
    _check_ell(ell)
    if p == ell:
        raise ArgumentError(f"p must differ from ell = {ell}")
    Ep = E.reduction(p)
    trace = count_points(Ep).trace
    return FrobeniusPair(p, ell, trace % ell, p % ell)


def exceptional_values(ell: int) -> frozenset[int]:
    """tr^2/det for projective element orders 1, 2, 3, 4 and 5.

    Order 1, 2, 3, 4 give 4, 0, 1, 2; order 5 gives the roots of z^2 - 3z + 1.
    """
    values = {4 % ell, 0, 1, 2 % ell}
    values.update(z for z in range(ell) if (z * z - 3 * z + 1) % ell == 0)
    return frozenset(values)


def rule_out_flags(trace: int, det: int, ell: int) -> frozenset[str]:
    """Maximal-subgroup types that cannot contain an element with this
    trace and determinant."""
    trace %= ell
    disc = (trace * trace - 4 * det) % ell
    chi = legendre(disc, ell) if disc else 0
    out = set()
    if chi == -1:
        # irreducible characteristic polynomial: no eigenvector over F_ell
        out.add(BOREL)
        if trace:
            # outside the split Cartan, and off-Cartan normaliser elements have trace 0
            out.add(SPLIT_NORMALIZER)
    if chi == 1 and trace:
        # distinct eigenvalues in F_ell: not in a nonsplit Cartan, and trace != 0
        out.add(NONSPLIT_NORMALIZER)
    u = trace * trace * pow(det, -1, ell) % ell
    if u not in exceptional_values(ell):
        out.add(EXCEPTIONAL)
    return frozenset(out)


def psi3_root_count(E: RationalCurve, p: int) -> int:
    """Roots in F_p of 3x^4 + 6bx^2 + 12cx - b^2, the x-coordinates of E[3].

    Each root is one of the four lines of E[3], so exactly one root means
    Frobenius permutes the lines as a 3-cycle: projective order 3.
    """
    E.reduction(p)
    x = np.arange(p, dtype=np.int64)
    b, c = E.b % p, E.c % p
    x2 = x * x % p
    vals = (3 * x2 % p * x2 + 6 * b * x2 + 12 * c * x - b * b) % p
    return int(np.count_nonzero(vals == 0))


def _unit_span(values: set[int], ell: int) -> set[int]:
    span = {1}
    frontier = {1}
    while frontier:
        frontier = {s * v % ell for s in frontier for v in values} - span
        span |= frontier
    return span


@dataclass(frozen=True)
class ImageReport:
    ell: int
    primes_sampled: int
    ruled_out: dict[str, bool]
    det_full: bool
    verdict: str
    remaining: tuple[str, ...]
    ratio_values: tuple[int, ...] = field(default=())  # every tr^2/det seen

    def __str__(self) -> str:
        if self.verdict == SURJECTIVE:
            return f"ell={self.ell} {SURJECTIVE} primes={self.primes_sampled}"
        return (
            f"ell={self.ell} {INCONCLUSIVE}({','.join(self.remaining)}) "
            f"primes={self.primes_sampled} det_full={str(self.det_full).lower()}"
        )


def _required(ell: int) -> tuple[str, ...]:
    # for ell = 3 every element passes the exceptional test, and the split
    # normaliser lies inside a nonsplit one (a 2-Sylow), so two flags suffice
    if ell == 3:
        return (BOREL, NONSPLIT_NORMALIZER)
    return MAXIMAL_TYPES


def image_report(
    E: RationalCurve, ell: int, p_max: int, jobs: int = 1
) -> ImageReport:
    """Sample Frobenius at every good prime 5 <= p <= p_max, p != ell."""
    _check_ell(ell)
    if p_max < 11:
        raise ArgumentError(f"p_max must be >= 11, got {p_max}")
    primes = [p for p in E.good_primes(p_max) if p != ell]
    orders = parallel_group_orders(E.b, E.c, primes, jobs)
    ruled = {t: False for t in MAXIMAL_TYPES}
    dets = set()
    ratios = set()
    for p, order in zip(primes, orders):
        trace, det = (p + 1 - order) % ell, p % ell
        dets.add(det)
        ratios.add(trace * trace * pow(det, -1, ell) % ell)
        for t in rule_out_flags(trace, det, ell):
            ruled[t] = True
        if ell == 3 and not ruled[NONSPLIT_NORMALIZER] and psi3_root_count(E, p) == 1:
            # trace and det cannot see projective order 3 mod 3; the
            # 3-division polynomial can, and no 2-group has such an element
            ruled[NONSPLIT_NORMALIZER] = ruled[SPLIT_NORMALIZER] = True
    det_full = _unit_span(dets, ell) == set(range(1, ell))
    required = _required(ell)
    remaining = tuple(t for t in required if not ruled[t])
    verdict = SURJECTIVE if det_full and not remaining else INCONCLUSIVE
    return ImageReport(ell, len(primes), ruled, det_full, verdict, remaining, tuple(sorted(ratios)))

