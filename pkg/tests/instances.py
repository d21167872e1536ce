"""Generated inputs shared by the formal-group tests and the acceptance run."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from chatelet.arith import valuation
from chatelet.ec_fp import point_order
from chatelet.ec_q import RationalCurve, mul_q, point, reduce_mod_p

# (b, c) and a point of infinite order on y^2 = x^3 + bx + c
BASE_POINTS = [
    ((-432, 15120), (4, 116)),
    ((0, -2), (3, 5)),
    ((0, 17), (-2, 3)),
    ((-1, 1), (1, 1)),
    ((0, 3), (1, 2)),
]
PRIMES_PER_CURVE = 4


@dataclass(frozen=True)
class KernelInstance:
    E: RationalCurve
    p: int
    G: tuple[Fraction, Fraction]
    m: int  # order of red_p(G), so P = mG lies in E_1(Q_p)
    P: tuple[Fraction, Fraction]
    Q: tuple[Fraction, Fraction]  # a multiple of G with p-adic unit coordinates


def _unit_coords(Q, p) -> bool:
    if Q is None or 0 in Q:
        return False
    return valuation(Q[0], p) == 0 and valuation(Q[1], p) == 0


def _unit_translate(E, G, p, m):
    for k in range(1, m):
        Q = mul_q(k, G, E)
        if _unit_coords(Q, p):
            return Q
    return None


@lru_cache(maxsize=1)
def kernel_instances() -> tuple[KernelInstance, ...]:
    """Per base point, the first good primes p >= 5 where some multiple of G
    has unit coordinates (so both kernel checks apply)."""
    out = []
    for (b, c), (x, y) in BASE_POINTS:
        E = RationalCurve(b, c)
        G = point(x, y)
        assert E.contains(G)
        found = 0
        for p in E.good_primes(100):
            m = point_order(E.reduction(p), reduce_mod_p(G, E, p))
            Q = _unit_translate(E, G, p, m)
            if Q is None:
                continue
            out.append(KernelInstance(E, p, G, m, mul_q(m, G, E), Q))
            found += 1
            if found == PRIMES_PER_CURVE:
                break
    return tuple(out)
