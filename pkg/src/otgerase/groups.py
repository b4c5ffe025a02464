"""Finite Abelian 2-groups: elements, subgroups, characters.

Elements are coordinate tuples over the invariant factors.  The integer index
of an element is its big-endian mixed-radix encoding; with power-of-two
factors this is exactly the bit string held by a qubit register, so
``Z2xZ4`` element ``(1, 3)`` lives on basis state ``|111>``.
"""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np


class GroupError(ValueError):
    """Malformed group, or elements from different groups were mixed."""


def is_power_of_two(x: int) -> bool:
    return x >= 1 and x & (x - 1) == 0


def log2_exact(x: int) -> int:
    if not is_power_of_two(x):
        raise GroupError(f"{x} is not a power of two")
    return x.bit_length() - 1


@dataclass(frozen=True)
class AbelianGroup:
    """``Z/a_1 x ... x Z/a_m`` with ``a_1 | a_2 | ... | a_m``, all powers of two."""

    invariant_factors: tuple[int, ...]

    def __post_init__(self) -> None:
        factors = tuple(int(a) for a in self.invariant_factors)
        object.__setattr__(self, "invariant_factors", factors)
        if not factors:
            raise GroupError("a group needs at least one invariant factor")
        for a in factors:
            if not is_power_of_two(a):
                raise GroupError(f"invariant factor {a} is not a power of two")
        for a, b in zip(factors, factors[1:]):
            if b % a:
                raise GroupError(f"invariant factors {factors} violate a_i | a_(i+1)")

    @classmethod
    def parse(cls, text: str) -> "AbelianGroup":
        """Parse ``"Z8"``, ``"Z2xZ4"`` or ``"Z/8 x Z/8"``."""
        parts = re.split(r"\s*[x×*]\s*", text.strip())
        factors = []
        for part in parts:
            m = re.fullmatch(r"Z/?(\d+)(?:Z)?", part)
            if m is None:
                raise GroupError(f"cannot parse group {text!r}")
            factors.append(int(m.group(1)))
        return cls(tuple(factors))

    @classmethod
    def cyclic(cls, n: int) -> "AbelianGroup":
        return cls((n,))

    def __str__(self) -> str:
        return "x".join(f"Z{a}" for a in self.invariant_factors)

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @cached_property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @cached_property
    def n_qubits(self) -> int:
        return log2_exact(self.order)

    @cached_property
    def exponent(self) -> int:
        return self.invariant_factors[-1]

    @property
    def identity(self) -> "GroupElement":
        return GroupElement(self, (0,) * self.rank)

    def element(self, value: int | Sequence[int] | "GroupElement") -> "GroupElement":
        """Build an element from an index, a coordinate sequence, or an element."""
        if isinstance(value, GroupElement):
            if value.group != self:
                raise GroupError(f"element of {value.group} is not in {self}")
            return value
        if isinstance(value, (int, np.integer)):
            return self.from_index(int(value))
        return GroupElement(self, tuple(int(c) for c in value))

    def from_index(self, index: int) -> "GroupElement":
        if not 0 <= index < self.order:
            raise GroupError(f"index {index} out of range for {self}")
        coords = []
        for a in reversed(self.invariant_factors):
            index, r = divmod(index, a)
            coords.append(r)
        return GroupElement(self, tuple(reversed(coords)))

    def elements(self) -> list["GroupElement"]:
        return [self.from_index(i) for i in range(self.order)]

    def __iter__(self) -> Iterator["GroupElement"]:
        return iter(self.elements())

    def __len__(self) -> int:
        return self.order


@dataclass(frozen=True, order=False)
class GroupElement:
    group: AbelianGroup
    coords: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.coords) != self.group.rank:
            raise GroupError(f"{self.coords} has wrong length for {self.group}")
        for c, a in zip(self.coords, self.group.invariant_factors):
            if not 0 <= c < a:
                raise GroupError(f"coordinate {c} out of range for Z{a}")

    @cached_property
    def index(self) -> int:
        i = 0
        for c, a in zip(self.coords, self.group.invariant_factors):
            i = i * a + c
        return i

    def _check(self, other: "GroupElement") -> None:
        if not isinstance(other, GroupElement) or other.group != self.group:
            raise GroupError("elements belong to different groups")

    def __add__(self, other: "GroupElement") -> "GroupElement":
        self._check(other)
        return GroupElement(
            self.group,
            tuple((x + y) % a for x, y, a in zip(self.coords, other.coords, self.group.invariant_factors)),
        )

    def __neg__(self) -> "GroupElement":
        return GroupElement(self.group, tuple((-x) % a for x, a in zip(self.coords, self.group.invariant_factors)))

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return self + (-other)

    def __mul__(self, k: int) -> "GroupElement":
        return GroupElement(self.group, tuple((k * x) % a for x, a in zip(self.coords, self.group.invariant_factors)))

    __rmul__ = __mul__

    def __lt__(self, other: "GroupElement") -> bool:
        self._check(other)
        return self.coords < other.coords

    def is_identity(self) -> bool:
        return not any(self.coords)

    @property
    def order(self) -> int:
        k = 1
        for c, a in zip(self.coords, self.group.invariant_factors):
            k = max(k, a // math.gcd(a, c))
        return k

    def __repr__(self) -> str:
        if self.group.rank == 1:
            return str(self.coords[0])
        return "(" + ",".join(map(str, self.coords)) + ")"


def add(a: GroupElement, b: GroupElement) -> GroupElement:
    return a + b


class Subgroup:
    """A subgroup stored as its sorted, fully enumerated element list."""

    def __init__(self, parent: AbelianGroup, generators: Iterable[GroupElement], elements: Iterable[GroupElement]):
        self.parent = parent
        self.generators = tuple(generators)
        self.elements = tuple(sorted(elements))
        self._index = {e: i for i, e in enumerate(self.elements)}

    def __contains__(self, g: GroupElement) -> bool:
        return g in self._index

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.parent == other.parent and self.elements == other.elements

    def __hash__(self) -> int:
        return hash((self.parent, self.elements))

    def __le__(self, other: "Subgroup") -> bool:
        return self.parent == other.parent and all(e in other for e in self.elements)

    def __repr__(self) -> str:
        body = ", ".join(map(repr, self.elements[:8]))
        if len(self.elements) > 8:
            body += ", ..."
        return f"Subgroup({self.parent}, order={self.order}, {{{body}}})"

    def indices(self) -> list[int]:
        return [e.index for e in self.elements]

    def position(self, g: GroupElement) -> int:
        """Rank of ``g`` within the sorted element list."""
        return self._index[g]

    @cached_property
    def invariant_factors(self) -> tuple[int, ...]:
        """Invariant factors of this subgroup as an abstract group."""
        # a 2-group is fixed by the sizes of its 2^j-torsion subgroups
        counts = [1]
        j = 1
        while counts[-1] < self.order:
            counts.append(sum(1 for e in self.elements if (e * (2**j)).is_identity()))
            j += 1
        rank_ge = [0] + [log2_exact(counts[i] // counts[i - 1]) for i in range(1, len(counts))]
        factors = []
        for j in range(1, len(rank_ge)):
            nxt = rank_ge[j + 1] if j + 1 < len(rank_ge) else 0
            factors.extend([2**j] * (rank_ge[j] - nxt))
        return tuple(sorted(factors)) or (1,)

    @cached_property
    def basis(self) -> tuple[GroupElement, ...]:
        """Independent generators ``x_i`` with ``ord(x_i)`` equal to the invariant factors.

        Candidates aligned with a single parent coordinate are tried first, so
        a coordinate subgroup such as ``K = G`` or ``<2>`` in ``Z8`` gets the
        obvious basis and its encoding coincides with the parent's.
        """
        factors = self.invariant_factors
        if factors == (1,):
            return (self.parent.identity,)
        t, m = len(factors), self.parent.rank

        def key(e: GroupElement, slot: int) -> tuple:
            nz = [i for i, c in enumerate(e.coords) if c]
            return (len(nz), abs(nz[0] - (m - t + slot)), e.coords)

        chosen: dict[int, GroupElement] = {}

        def search(slots: list[int], spanned: set[GroupElement]) -> bool:
            if not slots:
                return True
            slot, rest = slots[0], slots[1:]
            b = factors[slot]
            cands = sorted((e for e in self.elements if e.order == b), key=lambda e: key(e, slot))
            for x in cands:
                new = {s + x * j for s in spanned for j in range(b)}
                if len(new) != len(spanned) * b:
                    continue
                chosen[slot] = x
                if search(rest, new):
                    return True
            return False

        if not search(list(range(t - 1, -1, -1)), {self.parent.identity}):
            raise GroupError("no basis found")  # unreachable for finite abelian groups
        return tuple(chosen[i] for i in range(t))

    @cached_property
    def abstract(self) -> AbelianGroup:
        return AbelianGroup(self.invariant_factors)

    @cached_property
    def embedding(self) -> tuple[GroupElement, ...]:
        """``embedding[i]`` is the parent element encoded by index ``i`` of :attr:`abstract`."""
        out = []
        for a in self.abstract.elements():
            g = self.parent.identity
            for c, x in zip(a.coords, self.basis):
                g = g + x * c
            out.append(g)
        return tuple(out)

    @cached_property
    def coordinates(self) -> dict[GroupElement, GroupElement]:
        """Inverse of :attr:`embedding`."""
        return {g: self.abstract.from_index(i) for i, g in enumerate(self.embedding)}

    def pullback(self, sub: "Subgroup") -> "Subgroup":
        """Express a subgroup of this one inside :attr:`abstract`."""
        coords = self.coordinates
        return span(self.abstract, [coords[g] for g in sub.elements])

    def pushforward(self, sub: "Subgroup") -> "Subgroup":
        """Map a subgroup of :attr:`abstract` back into the parent."""
        return span(self.parent, [self.embedding[a.index] for a in sub.elements])


def span(parent: AbelianGroup, generators: Iterable[GroupElement | int | Sequence[int]]) -> Subgroup:
    kept = []
    seen = {parent.identity}
    for g in generators:
        g = parent.element(g)
        if g in seen:
            continue
        # abelian: <S, g> = S + <g>
        seen = {s + g * j for s in seen for j in range(g.order)}
        kept.append(g)
    return Subgroup(parent, kept, seen)


def trivial_subgroup(parent: AbelianGroup) -> Subgroup:
    return span(parent, [])


def whole_group(parent: AbelianGroup) -> Subgroup:
    gens = []
    for i in range(parent.rank):
        coords = [0] * parent.rank
        coords[i] = 1
        gens.append(tuple(coords))
    return span(parent, gens)


def coset_decompose(g: GroupElement, K: Subgroup) -> tuple[GroupElement, GroupElement]:
    """Split ``g = rep + k`` with ``rep`` the lexicographically smallest element of ``g + K``."""
    if g.group != K.parent:
        raise GroupError("element and subgroup live in different groups")
    rep = min(g + k for k in K.elements)
    return rep, g - rep


def coset_representatives(K: Subgroup) -> list[GroupElement]:
    return sorted({coset_decompose(g, K)[0] for g in K.parent.elements()})


def chi_phase(g: GroupElement, h: GroupElement) -> int:
    """Exponent ``t`` with ``chi_g(h) = exp(2 pi i t / exponent(G))``."""
    g._check(h)
    e = g.group.exponent
    return sum(x * y * (e // a) for x, y, a in zip(g.coords, h.coords, g.group.invariant_factors)) % e


def chi(g: GroupElement, h: GroupElement) -> complex:
    t = chi_phase(g, h)
    if t == 0:
        return 1.0 + 0.0j
    return cmath.exp(2j * math.pi * t / g.group.exponent)


def character_table(G: AbelianGroup) -> np.ndarray:
    """``T[g, h] = chi_g(h)`` indexed by element index."""
    els = G.elements()
    e = G.exponent
    phases = np.array([[chi_phase(g, h) for h in els] for g in els])
    return np.exp(2j * np.pi * phases / e)


def kernel(g: GroupElement) -> Subgroup:
    G = g.group
    return span(G, [h for h in G.elements() if chi_phase(h, g) == 0])


def h_perp(G: AbelianGroup, H: Subgroup) -> Subgroup:
    return span(G, [g for g in G.elements() if all(chi_phase(g, h) == 0 for h in H.generators or H.elements)])


def reconstruct_subgroup(G: AbelianGroup, samples: Iterable[GroupElement]) -> Subgroup:
    """Intersect the kernels ``{h : chi_h(s) = 1}`` over all samples ``s``."""
    samples = list({G.element(s) for s in samples})
    return span(G, [h for h in G.elements() if all(chi_phase(h, s) == 0 for s in samples)])


@lru_cache(maxsize=None)
def _all_subgroups(G: AbelianGroup) -> tuple[Subgroup, ...]:
    found = {span(G, [g]) for g in G.elements()}
    frontier = set(found)
    while frontier:
        new = set()
        for A in frontier:
            for B in list(found):
                C = span(G, A.generators + B.generators)
                if C not in found and C not in new:
                    new.add(C)
        found |= new
        frontier = new
    return tuple(sorted(found, key=lambda S: (S.order, S.indices())))


def all_subgroups(G: AbelianGroup) -> list[Subgroup]:
    """Every subgroup of ``G``, sorted by order then elements."""
    return list(_all_subgroups(G))


def intermediate_subgroups(H: Subgroup) -> list[Subgroup]:
    """Subgroups ``K`` with ``H <= K <= G``."""
    return [K for K in all_subgroups(H.parent) if H <= K]
