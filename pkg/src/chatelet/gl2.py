"""Finite subgroups of GL_2(Z/nZ).

Matrices are stored as entry tuples ``(a, b, c, d)`` for [[a, b], [c, d]]
with residues in [0, n).  :class:`Gl2Matrix` wraps one for the public API;
the group algorithms work on the bare tuples for speed.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import gcd
from typing import Iterable, Optional, Sequence

import numpy as np
from sympy.ntheory.modular import crt

from .arith import is_prime, is_squarefree, prime_factors
from .errors import ArgumentError, ClassificationError, ResourceError, VerificationError

Entries = tuple[int, int, int, int]

DEFAULT_CAP = 100_000


# --- raw tuple arithmetic ---------------------------------------------------

def _mul(A: Entries, B: Entries, n: int) -> Entries:
    a, b, c, d = A
    e, f, g, h = B
    return ((a * e + b * g) % n, (a * f + b * h) % n, (c * e + d * g) % n, (c * f + d * h) % n)


def _det(A: Entries, n: int) -> int:
    return (A[0] * A[3] - A[1] * A[2]) % n


def _inv(A: Entries, n: int) -> Entries:
    a, b, c, d = A
    k = pow(_det(A, n), -1, n)
    return (d * k % n, -b * k % n, -c * k % n, a * k % n)


def _identity(n: int) -> Entries:
    return (1 % n, 0, 0, 1 % n)


def _pow(A: Entries, k: int, n: int) -> Entries:
    if k < 0:
        A, k = _inv(A, n), -k
    result = _identity(n)
    while k:
        if k & 1:
            result = _mul(result, A, n)
        A = _mul(A, A, n)
        k >>= 1
    return result


def _order(A: Entries, n: int) -> int:
    I = _identity(n)
    k, B = 1, A
    while B != I:
        B = _mul(B, A, n)
        k += 1
    return k


def _conj(C: Entries, A: Entries, n: int) -> Entries:
    """C^-1 A C."""
    return _mul(_mul(_inv(C, n), A, n), C, n)


# --- public matrix type -----------------------------------------------------

_LITERAL = re.compile(
    r"^\s*\[\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*,\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\]\s*mod\s*(\d+)\s*$"
)


@dataclass(frozen=True, order=True)
class Gl2Matrix:
    n: int
    entries: Entries

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ArgumentError(f"modulus must be >= 2, got {self.n}")
        e = tuple(int(t) % self.n for t in self.entries)
        if len(e) != 4:
            raise ArgumentError("a 2x2 matrix needs four entries")
        object.__setattr__(self, "entries", e)
        if gcd(_det(e, self.n), self.n) != 1:
            raise ArgumentError(f"{self} is not invertible mod {self.n}")

    @classmethod
    def of(cls, rows: Sequence[Sequence[int]], n: int) -> Gl2Matrix:
        (a, b), (c, d) = rows
        return cls(n, (a, b, c, d))

    @classmethod
    def parse(cls, text: str) -> Gl2Matrix:
        """Parse ``"[[a,b],[c,d]] mod n"``."""
        m = _LITERAL.match(text)
        if not m:
            raise ArgumentError(f"expected '[[a,b],[c,d]] mod n', got {text!r}")
        a, b, c, d, n = (int(t) for t in m.groups())
        return cls(n, (a, b, c, d))

    def __str__(self) -> str:
        a, b, c, d = self.entries
        return f"[[{a},{b}],[{c},{d}]] mod {self.n}"

    def _same(self, other: Gl2Matrix) -> None:
        if other.n != self.n:
            raise ArgumentError("matrices have different moduli")

    def __matmul__(self, other: Gl2Matrix) -> Gl2Matrix:
        self._same(other)
        return Gl2Matrix(self.n, _mul(self.entries, other.entries, self.n))

    def __pow__(self, k: int) -> Gl2Matrix:
        return Gl2Matrix(self.n, _pow(self.entries, k, self.n))

    def inverse(self) -> Gl2Matrix:
        return Gl2Matrix(self.n, _inv(self.entries, self.n))

    @property
    def det(self) -> int:
        return _det(self.entries, self.n)

    @property
    def trace(self) -> int:
        return (self.entries[0] + self.entries[3]) % self.n

    def order(self) -> int:
        return _order(self.entries, self.n)

    def reduce(self, m: int) -> Gl2Matrix:
        if self.n % m:
            raise ArgumentError(f"{m} does not divide {self.n}")
        return Gl2Matrix(m, self.entries)


def identity(n: int) -> Gl2Matrix:
    return Gl2Matrix(n, (1, 0, 0, 1))


# --- subgroups ----------------------------------------------------------------

@dataclass(frozen=True)
class Gl2Subgroup:
    n: int
    elements: tuple[Entries, ...]  # sorted
    generators: tuple[Entries, ...] = field(default=(), compare=False)
    _members: frozenset[Entries] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_members", frozenset(self.elements))

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, M: Gl2Matrix | Entries) -> bool:
        if isinstance(M, Gl2Matrix):
            return M.n == self.n and M.entries in self._members
        return M in self._members

    def matrices(self) -> list[Gl2Matrix]:
        return [Gl2Matrix(self.n, e) for e in self.elements]

    @property
    def gens(self) -> tuple[Entries, ...]:
        return self.generators or self.elements

    def is_subgroup_of(self, other: Gl2Subgroup) -> bool:
        return self._members <= other._members

    def det_image(self) -> frozenset[int]:
        return frozenset(_det(e, self.n) for e in self.elements)


def _subgroup(n: int, elements: Iterable[Entries], gens: Iterable[Entries] = ()) -> Gl2Subgroup:
    return Gl2Subgroup(n, tuple(sorted(elements)), tuple(gens))


def _closure_raw(gens: Sequence[Entries], n: int, cap: int, seed: Iterable[Entries] = ()) -> set[Entries]:
    I = _identity(n)
    group = {I, *seed}
    frontier = list(group)
    while frontier:
        nxt = []
        for A in frontier:
            for g in gens:
                B = _mul(A, g, n)
                if B not in group:
                    group.add(B)
                    nxt.append(B)
        if len(group) > cap:
            raise ResourceError(f"closure exceeded cap {cap} (partial size {len(group)})")
        frontier = nxt
    return group


def closure(generators: Sequence[Gl2Matrix], cap: int = DEFAULT_CAP) -> Gl2Subgroup:
    """Subgroup generated by ``generators``, by breadth-first closure."""
    if not generators:
        raise ArgumentError("need at least one generator")
    n = generators[0].n
    if any(g.n != n for g in generators):
        raise ArgumentError("generators have different moduli")
    gens = [g.entries for g in generators]
    return _subgroup(n, _closure_raw(gens, n, cap), gens)


def gl2_order(n: int) -> int:
    """|GL_2(Z/nZ)| = n^4 * prod over p | n of (1 - 1/p)(1 - 1/p^2)."""
    order = n**4
    for p in prime_factors(n):
        order = order * (p - 1) * (p * p - 1) // p**3
    return order


@lru_cache(maxsize=None)
def _all_gl2(n: int) -> tuple[Entries, ...]:
    return tuple(
        e for e in product(range(n), repeat=4) if gcd(_det(e, n), n) == 1
    )


def full_gl2(n: int) -> Gl2Subgroup:
    """GL_2(Z/nZ) by enumeration (meant for n up to a few dozen)."""
    return _subgroup(n, _all_gl2(n), _gl2_generators(n))


def full_sl2(n: int) -> Gl2Subgroup:
    elems = [e for e in _all_gl2(n) if _det(e, n) == 1 % n]
    return _subgroup(n, elems, [(1, 1, 0, 1), (1, 0, 1, 1)])


def _unit_generators(n: int) -> list[int]:
    units = {u for u in range(1, n) if gcd(u, n) == 1} or {0}
    gens: list[int] = []
    span = {1 % n}
    for u in sorted(units):
        if u not in span:
            gens.append(u)
            frontier = set(span)
            while frontier:
                frontier = {s * g % n for s in frontier for g in gens} - span
                span |= frontier
    return gens


def _gl2_generators(n: int) -> list[Entries]:
    # the two transvections generate SL_2; diag(u, 1) adds every determinant
    gens = [(1, 1, 0, 1), (1, 0, 1, 1)]
    gens += [(u, 0, 0, 1) for u in _unit_generators(n)]
    return gens


def gl2_by_closure(n: int, cap: int = 10**6) -> Gl2Subgroup:
    gens = _gl2_generators(n)
    return _subgroup(n, _closure_raw(gens, n, cap), gens)


def is_normal(H: Gl2Subgroup, G: Gl2Subgroup) -> bool:
    """Whether H is normal in G; conjugating by generators of G suffices."""
    if not H.is_subgroup_of(G):
        return False
    n = G.n
    return all(_conj(g, h, n) in H for g in G.gens for h in H.gens)


def normal_closure(S: Iterable[Entries], G: Gl2Subgroup, cap: int = DEFAULT_CAP) -> Gl2Subgroup:
    n = G.n
    gens = set(S) or {_identity(n)}
    frontier = list(gens)
    while frontier:
        nxt = []
        for s in frontier:
            for g in G.gens:
                t = _conj(g, s, n)
                if t not in gens:
                    gens.add(t)
                    nxt.append(t)
        frontier = nxt
    gens_list = sorted(gens)
    return _subgroup(n, _closure_raw(gens_list, n, cap), gens_list)


def conjugacy_classes(G: Gl2Subgroup) -> list[frozenset[Entries]]:
    n = G.n
    seen: set[Entries] = set()
    classes = []
    for x in G.elements:
        if x in seen:
            continue
        cls = {x}
        frontier = [x]
        while frontier:
            nxt = []
            for y in frontier:
                for g in G.gens:
                    z = _conj(g, y, n)
                    if z not in cls:
                        cls.add(z)
                        nxt.append(z)
            frontier = nxt
        seen |= cls
        classes.append(frozenset(cls))
    return classes


def normal_subgroups(G: Gl2Subgroup) -> list[Gl2Subgroup]:
    """Every normal subgroup of G.

    A normal subgroup is the join of the normal closures of the classes it
    contains, so closing the set of class closures under joins finds them all.
    """
    n = G.n
    atoms: dict[frozenset[Entries], list[Entries]] = {}
    for c in conjugacy_classes(G):
        # the class generates its normal closure; keep a few members that suffice
        gens: list[Entries] = []
        span = {_identity(n)}
        for e in sorted(c):
            if e not in span:
                gens.append(e)
                span = _closure_raw(gens, n, len(G))
        atoms.setdefault(frozenset(span), gens)
    found = set(atoms)
    frontier = set(atoms)
    while frontier:
        nxt = set()
        for A in frontier:
            for B, gens in atoms.items():
                if B <= A:
                    continue
                J = frozenset(_closure_raw(gens, n, len(G), seed=A))
                if J not in found:
                    found.add(J)
                    nxt.add(J)
        frontier = nxt
    return sorted((_subgroup(n, S) for S in found), key=lambda H: (H.order, H.elements))


def normal_subgroup_survey(q: int, ambient: str = "SL2") -> list[int]:
    """Orders of the normal subgroups of SL_2(F_q), q in {5, 7}."""
    if q not in (5, 7):
        raise ArgumentError(f"q must be 5 or 7, got {q}")
    if ambient != "SL2":
        raise ArgumentError(f"only the SL2 ambient group is supported, got {ambient!r}")
    return sorted({H.order for H in normal_subgroups(full_sl2(q))})


def commutator_subgroup(G: Gl2Subgroup) -> Gl2Subgroup:
    """[G, G] as the normal closure of commutators of generators."""
    n = G.n
    comms = {
        _mul(_mul(_inv(s, n), _inv(t, n), n), _mul(s, t, n), n)
        for s in G.gens
        for t in G.gens
    }
    return normal_closure(comms, G, cap=len(G))


# --- quotients ----------------------------------------------------------------

@dataclass(frozen=True)
class QuotientInfo:
    order: int
    abelian: bool
    element_orders: tuple[int, ...]  # sorted multiset over cosets
    name: str


_SMALL_GROUPS = {
    (1, ()): "trivial",
    (2, (1, 2)): "C2",
    (3, (1, 3, 3)): "C3",
    (6, (1, 2, 3, 3, 6, 6)): "C6",
    (6, (1, 2, 2, 2, 3, 3)): "S3",
}


def quotient_element_order(M: Entries, H: Gl2Subgroup) -> int:
    n = H.n
    k, B = 1, M
    while B not in H:
        B = _mul(B, M, n)
        k += 1
    return k


def quotient_info(G: Gl2Subgroup, H: Gl2Subgroup) -> QuotientInfo:
    if not is_normal(H, G):
        raise ArgumentError("H is not normal in G")
    n = G.n
    reps = []
    covered: set[Entries] = set()
    for g in G.elements:
        if g not in covered:
            reps.append(g)
            covered.update(_mul(g, h, n) for h in H.elements)
    orders = tuple(sorted(quotient_element_order(g, H) for g in reps))
    abelian = all(
        _mul(_mul(_inv(s, n), _inv(t, n), n), _mul(s, t, n), n) in H
        for s in G.gens
        for t in G.gens
    )
    key = (len(reps), orders if len(reps) > 1 else ())
    return QuotientInfo(len(reps), abelian, orders, _SMALL_GROUPS.get(key, f"order {len(reps)}"))


H8_GENERATORS = ((0, 1, 2, 0), (2, 2, 2, 1))  # [[0,1],[-1,0]], [[-1,-1],[-1,1]] mod 3


def h8() -> Gl2Subgroup:
    """The order-8 normal subgroup of GL_2(F_3) with quotient S_3."""
    return _subgroup(3, _closure_raw(H8_GENERATORS, 3, 48), H8_GENERATORS)


# --- NF_n -----------------------------------------------------------------

def in_NF(M: Gl2Matrix) -> bool:
    """True iff M fixes no nonzero vector of (Z/nZ)^2, i.e. det(M - I) is a unit."""
    a, b, c, d = M.entries
    return gcd(((a - 1) * (d - 1) - b * c) % M.n, M.n) == 1


def nf_witness(n: int, a: int) -> Gl2Matrix:
    """[[a, -a], [1, 0]]: determinant a and det(M - I) = 1."""
    if n < 2:
        raise ArgumentError(f"modulus must be >= 2, got {n}")
    if gcd(a, n) != 1:
        raise ArgumentError(f"{a} is not a unit mod {n}")
    M = Gl2Matrix(n, (a, -a, 1, 0))
    if not in_NF(M) or M.det != a % n:
        raise VerificationError(f"nf_witness({n}, {a}) failed its own check")
    return M


NF3_WITNESS = (2, 1, 0, 2)  # [[-1,1],[0,-1]] mod 3


def nf2n_witness(n: int, a: int) -> tuple[Gl2Matrix, Gl2Matrix]:
    """The pair ([[-1,1],[0,-1]] mod 3, [[a,-a],[1,0]] mod n/3).

    Requires n odd with n = 3m, gcd(3, m) = 1, m >= 2, and a a unit mod n with
    a = 1 (mod 3).
    """
    if n % 2 == 0 or n % 3:
        raise ArgumentError(f"n must be odd and divisible by 3, got {n}")
    m = n // 3
    if m < 2 or m % 3 == 0:
        raise ArgumentError(f"n/3 must be >= 2 and prime to 3, got {m}")
    if gcd(a, n) != 1 or a % 3 != 1:
        raise ArgumentError(f"a must be a unit mod {n} with a = 1 mod 3, got {a}")
    first = Gl2Matrix(3, NF3_WITNESS)
    second = nf_witness(m, a)
    if not in_NF(first):
        raise VerificationError("mod-3 component is not in NF_3")
    if quotient_element_order(first.entries, h8()) != 3:
        raise VerificationError("mod-3 component does not have order 3 modulo H8")
    if not in_NF(second):
        raise VerificationError(f"second component is not in NF_{m}")
    return first, second


# --- CRT ------------------------------------------------------------------

def crt_split(M: Gl2Matrix) -> list[Gl2Matrix]:
    n = M.n
    if not is_squarefree(n) or is_prime(n):
        raise ArgumentError(f"n must be square-free and composite, got {n}")
    return [M.reduce(p) for p in prime_factors(n)]


def crt_join(components: Sequence[Gl2Matrix]) -> Gl2Matrix:
    moduli = [C.n for C in components]
    n = 1
    for m in moduli:
        if gcd(n, m) != 1:
            raise ArgumentError("component moduli must be pairwise coprime")
        n *= m
    entries = tuple(
        int(crt(moduli, [C.entries[i] for C in components])[0]) for i in range(4)
    )
    return Gl2Matrix(n, entries)


# --- subgroup families ----------------------------------------------------------

FAMILY_IDS = ("G", "B_upper", "Cs", "B_lower", "Ns", "S4_exceptional")

S4_GENERATORS = ((0, 3, 3, 4), (2, 0, 0, 2), (3, 0, 4, 4))  # mod 5


@dataclass(frozen=True)
class FamilyDescriptor:
    family_id: str
    ell: int
    d: Optional[int] = None

    def __post_init__(self) -> None:
        f, ell, d = self.family_id, self.ell, self.d
        if f not in FAMILY_IDS:
            raise ArgumentError(f"unknown family {f!r}")
        if ell < 3 or not is_prime(ell):
            raise ArgumentError(f"ell must be an odd prime, got {ell}")
        if f in ("B_upper", "Cs"):
            if d is None or d < 1 or (ell - 1) % d:
                raise ArgumentError(f"{f} needs d dividing {ell - 1}, got {d}")
        elif f == "B_lower":
            if d is None or d % ell or (ell * ell - ell) % d:
                raise ArgumentError(f"B_lower needs {ell} | d | {ell * ell - ell}, got {d}")
        elif d is not None:
            raise ArgumentError(f"{f} takes no d parameter")
        if f == "S4_exceptional" and ell != 5:
            raise ArgumentError("S4_exceptional exists only for ell = 5")

    def expected_order(self) -> int:
        ell, d = self.ell, self.d
        return {
            "G": (ell * ell - 1) * (ell * ell - ell),
            "B_upper": (d or 0) * ell * (ell - 1),
            "Cs": (d or 0) * (ell - 1),
            "B_lower": (ell - 1) * (d or 0),
            "Ns": 2 * (ell - 1) ** 2,
            "S4_exceptional": 96,
        }[self.family_id]

    def canonical(self) -> FamilyDescriptor:
        # with d = ell^2 - ell this is the full Borel, already listed as B_upper with d = ell - 1
        if self.family_id == "B_lower" and self.d == self.ell * (self.ell - 1):
            return FamilyDescriptor("B_upper", self.ell, self.ell - 1)
        return self

    def __str__(self) -> str:
        return f"{self.family_id}(ell={self.ell}" + (f", d={self.d})" if self.d else ")")


def _power_subgroup(ell: int, size: int) -> list[int]:
    """The subgroup of F_ell^x of the given order."""
    k = (ell - 1) // size
    return sorted({pow(x, k, ell) for x in range(1, ell)})


def family_elements(desc: FamilyDescriptor) -> set[Entries]:
    ell, d = desc.ell, desc.d
    units = range(1, ell)
    f = desc.family_id
    if f == "G":
        return set(_all_gl2(ell))
    if f == "B_upper":
        return {(x, s, 0, y) for x in _power_subgroup(ell, d) for y in units for s in range(ell)}
    if f == "Cs":
        return {(x, 0, 0, y) for x in _power_subgroup(ell, d) for y in units}
    if f == "B_lower":
        return {(x, s, 0, y) for x in units for y in _power_subgroup(ell, d // ell) for s in range(ell)}
    if f == "Ns":
        return {(x, 0, 0, y) for x in units for y in units} | {
            (0, x, y, 0) for x in units for y in units
        }
    return _closure_raw(S4_GENERATORS, 5, 480)


@lru_cache(maxsize=None)
def family(desc: FamilyDescriptor) -> Gl2Subgroup:
    """The literal matrix group of the given family, checked to be closed."""
    elems = family_elements(desc)
    n = desc.ell
    if not all(_mul(A, B, n) in elems for A in elems for B in _family_gens(desc, elems)):
        raise VerificationError(f"{desc} is not closed")
    if len(elems) != desc.expected_order():
        raise VerificationError(f"{desc} has order {len(elems)}, expected {desc.expected_order()}")
    return _subgroup(n, elems, _family_gens(desc, elems))


def _family_gens(desc: FamilyDescriptor, elems: set[Entries]) -> list[Entries]:
    if desc.family_id == "S4_exceptional":
        return list(S4_GENERATORS)
    if desc.family_id == "G":
        return _gl2_generators(desc.ell)
    # a small generating set found greedily
    n = desc.ell
    gens: list[Entries] = []
    span = {_identity(n)}
    for e in sorted(elems, key=lambda e: (-_order(e, n), e)):
        if e not in span:
            gens.append(e)
            span = _closure_raw(gens, n, len(elems))
            if len(span) == len(elems):
                break
    return gens


def all_descriptors(ell: int) -> list[FamilyDescriptor]:
    """Every descriptor for ell, with the duplicate full Borel removed."""
    divs = [d for d in range(1, ell) if (ell - 1) % d == 0]
    out = [FamilyDescriptor("G", ell)]
    out += [FamilyDescriptor("B_upper", ell, d) for d in divs]
    out += [FamilyDescriptor("Cs", ell, d) for d in divs]
    out += [FamilyDescriptor("B_lower", ell, ell * d) for d in divs if d < ell - 1]
    out.append(FamilyDescriptor("Ns", ell))
    if ell == 5:
        out.append(FamilyDescriptor("S4_exceptional", 5))
    return out


# --- classification -----------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    descriptor: FamilyDescriptor
    conjugator: Gl2Matrix  # C with C^-1 G C = family(descriptor)


def _code(arr: np.ndarray, n: int) -> np.ndarray:
    return ((arr[..., 0] * n + arr[..., 1]) * n + arr[..., 2]) * n + arr[..., 3]


@lru_cache(maxsize=None)
def _gl2_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    elems = np.array(_all_gl2(n), dtype=np.int64)
    a, b, c, d = elems.T
    k = np.array([pow(int(t), -1, n) for t in (a * d - b * c) % n], dtype=np.int64)
    inv = np.stack([d * k, -b * k, -c * k, a * k], axis=1) % n
    return elems, inv


def _np_mul(A: np.ndarray, B: np.ndarray, n: int) -> np.ndarray:
    a, b, c, d = (A[..., i] for i in range(4))
    e, f, g, h = (B[..., i] for i in range(4))
    return np.stack([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h], axis=-1) % n


def find_conjugator(gens: Sequence[Entries], target: Gl2Subgroup) -> Optional[Entries]:
    """Lexicographically least C in GL_2 with C^-1 g C in target for all gens."""
    n = target.n
    elems, inv = _gl2_arrays(n)
    member = np.zeros(n**4, dtype=bool)
    member[_code(np.array(target.elements, dtype=np.int64), n)] = True
    ok = np.ones(len(elems), dtype=bool)
    for g in gens:
        conj = _np_mul(_np_mul(inv, np.array(g, dtype=np.int64), n), elems, n)
        ok &= member[_code(conj, n)]
    hits = np.flatnonzero(ok)
    return tuple(int(t) for t in elems[hits[0]]) if len(hits) else None


def _trace_det_profile(elements: Iterable[Entries], n: int) -> Counter:
    return Counter(((e[0] + e[3]) % n, _det(e, n)) for e in elements)


def satisfies_hypothesis(Gs: Gl2Subgroup) -> bool:
    """Some nonzero vector has a stabiliser whose determinants cover F_ell^x."""
    ell = Gs.n
    units = set(range(1, ell))
    for v in product(range(ell), repeat=2):
        if v == (0, 0):
            continue
        x, y = v
        dets = {
            _det(e, ell)
            for e in Gs.elements
            if (e[0] * x + e[1] * y) % ell == x and (e[2] * x + e[3] * y) % ell == y
        }
        if dets == units:
            return True
    return False


def classify(Gs: Gl2Subgroup, ell: int) -> Optional[Classification]:
    """Match Gs to a family up to conjugacy, or None if the hypothesis on
    stabiliser determinants fails."""
    if ell < 3 or not is_prime(ell) or Gs.n != ell:
        raise ArgumentError(f"modulus must be the odd prime ell, got n={Gs.n}, ell={ell}")
    if not satisfies_hypothesis(Gs):
        return None
    profile = _trace_det_profile(Gs.elements, ell)
    for desc in all_descriptors(ell):
        if desc.expected_order() != Gs.order:
            continue
        F = family(desc)
        if _trace_det_profile(F.elements, ell) != profile:
            continue
        C = find_conjugator(Gs.gens, F)
        if C is not None:
            return Classification(desc, Gl2Matrix(ell, C))
    raise ClassificationError(
        f"order {Gs.order} subgroup satisfies the hypothesis but matches no family"
    )


def conjugate(Gs: Gl2Subgroup, C: Gl2Matrix) -> Gl2Subgroup:
    """C^-1 Gs C."""
    n = Gs.n
    c = C.entries
    return _subgroup(n, (_conj(c, e, n) for e in Gs.elements), (_conj(c, g, n) for g in Gs.gens))


# --- projective images --------------------------------------------------------

def _projective_key(e: Entries, ell: int) -> Entries:
    lead = next(t for t in e if t)
    k = pow(lead, -1, ell)
    return tuple(t * k % ell for t in e)


def projective_order(e: Entries, ell: int) -> int:
    k, B = 1, e
    while not (B[1] == 0 and B[2] == 0 and B[0] == B[3]):
        B = _mul(B, e, ell)
        k += 1
    return k


@dataclass(frozen=True)
class ProjectiveType:
    kind: str  # cyclic, dihedral, A4, S4, A5, PSL2, PGL2
    order: int

    def __str__(self) -> str:
        if self.kind in ("cyclic", "dihedral"):
            return f"{self.kind} of order {self.order}"
        return self.kind


_EXCEPTIONAL = {
    "A4": (12, {1: 1, 2: 3, 3: 8}),
    "S4": (24, {1: 1, 2: 9, 3: 8, 4: 6}),
    "A5": (60, {1: 1, 2: 15, 3: 20, 5: 24}),
}


def projective_image_type(Gs: Gl2Subgroup, ell: int) -> ProjectiveType:
    if not is_prime(ell) or Gs.n != ell:
        raise ArgumentError(f"modulus must be the prime ell, got n={Gs.n}, ell={ell}")
    reps: dict[Entries, Entries] = {}
    for e in Gs.elements:
        reps.setdefault(_projective_key(e, ell), e)
    order = len(reps)
    counts = Counter(projective_order(e, ell) for e in reps.values())
    if order == ell * (ell * ell - 1):
        return ProjectiveType("PGL2", order)
    if ell > 3 and order == ell * (ell * ell - 1) // 2:
        return ProjectiveType("PSL2", order)
    if counts.get(order):
        return ProjectiveType("cyclic", order)
    if order % 2 == 0:
        m = order // 2
        involutions = counts.get(2, 0)
        if counts.get(m) and involutions == m + (1 if m % 2 == 0 else 0):
            return ProjectiveType("dihedral", order)
        if m == 2 and involutions == 3:
            return ProjectiveType("dihedral", order)
    for kind, (size, profile) in _EXCEPTIONAL.items():
        if order == size and dict(counts) == profile:
            return ProjectiveType(kind, order)
    raise ClassificationError(
        f"unrecognised projective image: order {order}, element orders {dict(sorted(counts.items()))}"
    )


# --- subgroup lattice up to conjugacy -------------------------------------------

class _Table:
    """GL_2(Z/nZ) with elements numbered, for fast closure and conjugation."""

    def __init__(self, n: int) -> None:
        elems, inv = _gl2_arrays(n)
        self.n = n
        self.elems = elems
        size = len(elems)
        index = np.full(n**4, -1, dtype=np.int64)
        index[_code(elems, n)] = np.arange(size)
        self.mul = index[_code(_np_mul(elems[:, None, :], elems[None, :, :], n), n)]
        inv_idx = index[_code(inv, n)]
        # conj[c, x] = c^-1 x c
        self.conj = self.mul[self.mul[inv_idx], np.arange(size)[:, None]]
        self.identity = int(index[_code(np.array(_identity(n)), n)])

    def close(self, gens: Sequence[int]) -> np.ndarray:
        member = np.zeros(len(self.elems), dtype=bool)
        member[self.identity] = True
        member[list(gens)] = True
        count = int(member.sum())
        while True:
            member[self.mul[np.ix_(np.flatnonzero(member), list(gens))].ravel()] = True
            new = int(member.sum())
            if new == count:
                return member
            count = new

    def canonical(self, member: np.ndarray) -> bytes:
        """Least bitset among the conjugates of a subgroup."""
        images = self.conj[:, np.flatnonzero(member)]
        bits = np.zeros((len(self.elems), len(self.elems)), dtype=bool)
        bits[np.arange(len(self.elems))[:, None], images] = True
        packed = np.packbits(bits, axis=1)
        return min(row.tobytes() for row in packed)


def subgroup_classes(ell: int) -> list[Gl2Subgroup]:
    """One subgroup from each conjugacy class of subgroups of GL_2(F_ell).

    Starts from the cyclic subgroups and joins one more cyclic generator per
    round until no new class appears, so every subgroup is reached.
    """
    if ell not in (3, 5):
        raise ArgumentError(f"full subgroup enumeration is only offered for ell in (3, 5), got {ell}")
    T = _Table(ell)
    cyclic: dict[bytes, int] = {}
    for i in range(len(T.elems)):
        cyclic.setdefault(np.packbits(T.close([i])).tobytes(), i)
    cyclic_gens = list(cyclic.values())
    classes: dict[bytes, tuple[np.ndarray, list[int]]] = {}
    seen: set[bytes] = set()
    frontier = []
    for key, g in cyclic.items():
        member = T.close([g])
        canon = T.canonical(member)
        if canon not in classes:
            classes[canon] = (member, [g])
            frontier.append(canon)
        seen.add(key)
    while frontier:
        nxt = []
        for canon in frontier:
            member, gens = classes[canon]
            for g in cyclic_gens:
                if member[g]:
                    continue
                J = T.close(gens + [g])
                key = np.packbits(J).tobytes()
                if key in seen:
                    continue
                seen.add(key)
                jc = T.canonical(J)
                if jc not in classes:
                    classes[jc] = (J, gens + [g])
                    nxt.append(jc)
        frontier = nxt
    out = []
    for member, gens in classes.values():
        elems = [tuple(int(t) for t in T.elems[i]) for i in np.flatnonzero(member)]
        out.append(_subgroup(ell, elems, [tuple(int(t) for t in T.elems[g]) for g in gens]))
    return sorted(out, key=lambda H: (H.order, H.elements))


@dataclass(frozen=True)
class ConverseAudit:
    ell: int
    classes: int  # conjugacy classes of subgroups
    hypothesis_classes: int  # those satisfying the stabiliser hypothesis
    families_hit: frozenset[str]


def converse_audit(ell: int = 5) -> ConverseAudit:
    """Check that every subgroup satisfying the hypothesis is conjugate to a
    family member; raises ClassificationError otherwise."""
    groups = subgroup_classes(ell)
    hits = []
    for H in groups:
        found = classify(H, ell)
        if found is not None:
            hits.append(found.descriptor)
    return ConverseAudit(ell, len(groups), len(hits), frozenset(str(d) for d in hits))
