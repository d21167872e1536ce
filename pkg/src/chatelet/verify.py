"""Named group-theory checks behind ``chatelet gl2 verify``.

Each target returns a one-line ``key=value`` summary and raises
VerificationError when the statement it checks does not hold.
"""

from __future__ import annotations

from math import gcd
from typing import Callable

from . import gl2
from .errors import VerificationError


def _expect(cond: bool, message: str) -> None:
    if not cond:
        raise VerificationError(message)


def sl2_normals(q: int) -> str:
    orders = gl2.normal_subgroup_survey(q)
    sl2 = len(gl2.full_sl2(q))
    _expect(orders == [1, 2, sl2], f"SL2(F_{q}) normal subgroup orders {orders}")
    return "orders=" + ",".join(map(str, orders))


def h8_quotient() -> str:
    H = gl2.h8()
    G = gl2.full_gl2(3)
    normal = gl2.is_normal(H, G)
    _expect(H.order == 8 and normal, f"H8 order={H.order} normal={normal}")
    info = gl2.quotient_info(G, H)
    _expect(info.name == "S3" and not info.abelian, f"quotient is {info.name}")
    return f"order={H.order} normal=true quotient={info.name}"


def nf_witness_exhaustive(limit: int = 50) -> str:
    checked = 0
    for n in range(2, limit + 1):
        for a in range(n):
            if gcd(a, n) != 1:
                continue
            M = gl2.nf_witness(n, a)
            x, y, z, w = M.entries
            _expect(((x - 1) * (w - 1) - y * z) % n == 1 % n, f"det(M - I) != 1 for n={n}, a={a}")
            checked += 1
    return f"checked={checked} n_max={limit}"


def nf2n_witness() -> str:
    first, second = gl2.nf2n_witness(15, 4)
    _expect(first.entries == (2, 1, 0, 2) and second.entries == (4, 1, 1, 0), "unexpected components")
    k = gl2.quotient_element_order(first.entries, gl2.h8())
    _expect(k == 3, f"quotient order {k}")
    return f"components={first};{second} quotient_order={k}"


def exceptional_5() -> str:
    S4 = gl2.family(gl2.FamilyDescriptor("S4_exceptional", 5))
    kind = gl2.projective_image_type(S4, 5)
    ratios = sorted({(e[0] + e[3]) ** 2 * pow(e[0] * e[3] - e[1] * e[2], -1, 5) % 5 for e in S4.elements})
    _expect(S4.order == 96, f"order {S4.order}")
    _expect(kind.kind == "S4", f"projective image {kind}")
    _expect(set(ratios) <= {0, 1, 2, 4}, f"tr^2/det values {ratios}")
    return f"order=96 projective=S4 ratios={','.join(map(str, ratios))}"


def families(ell: int) -> str:
    descs = gl2.all_descriptors(ell)
    for desc in descs:
        F = gl2.family(desc)
        _expect(F.order == desc.expected_order(), f"{desc} has order {F.order}")
        found = gl2.classify(F, ell)
        _expect(found is not None and found.descriptor == desc, f"{desc} classified as {found}")
    return f"families={len(descs)} ell={ell}"


def crt_15() -> str:
    G = gl2.gl2_by_closure(15)
    _expect(G.order == 48 * 480 == gl2.gl2_order(15), f"|GL2(Z/15)| = {G.order}")
    for M in G.matrices():
        _expect(gl2.crt_join(gl2.crt_split(M)) == M, f"CRT round trip failed at {M}")
    return f"order={G.order} roundtrip=true"


def abelian_quotient(moduli=(3, 5, 7, 11, 13, 15)) -> str:
    for n in moduli:
        G = gl2.gl2_by_closure(n)
        C = gl2.commutator_subgroup(G)
        sl2_order = gl2.gl2_order(n) // sum(1 for u in range(n) if gcd(u, n) == 1)
        _expect(
            C.order == sl2_order and all(gl2._det(e, n) == 1 for e in C.elements),
            f"[GL2, GL2] != SL2 mod {n}",
        )
    return "commutator=SL2 moduli=" + ",".join(map(str, moduli))


def normal_index(ell: int) -> str:
    """Proper normal subgroups of GL_2(F_ell) with full determinant image have
    index divisible by ell."""
    G = gl2.full_gl2(ell)
    units = frozenset(range(1, ell))
    count = 0
    for H in gl2.normal_subgroups(G):
        if H.order < G.order and H.det_image() == units:
            _expect((G.order // H.order) % ell == 0, f"index {G.order // H.order} mod {ell}")
            count += 1
    return f"full_det_normals={count} ell={ell}"


TARGETS: dict[str, Callable[[], str]] = {
    "sl2-normals-5": lambda: sl2_normals(5),
    "sl2-normals-7": lambda: sl2_normals(7),
    "h8-quotient": h8_quotient,
    "nf-witness": nf_witness_exhaustive,
    "nf2n-witness": nf2n_witness,
    "exceptional-5": exceptional_5,
    "families-5": lambda: families(5),
    "families-7": lambda: families(7),
    "crt-15": crt_15,
    "abelian-quotient": abelian_quotient,
}


def run(target: str) -> str:
    return TARGETS[target]()
