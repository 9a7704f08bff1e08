"""Finite abelian groups, their characters up to kernel equivalence, the
simple components chi(T) of the localized group ring, and the maximal
ideals of each component.

Elements of a group with invariant factors (n_1, ..., n_k) are tuples
(x_1, ..., x_k) with 0 <= x_i < n_i.  A character is an exponent tuple
(e_1, ..., e_k) and sends x to exp(2 pi i sum e_i x_i / n_i).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property

from sympy import factorint

from .arith import euler_phi, multiplicative_order


@dataclass(frozen=True)
class GroupSpec:
    cyclic_orders: tuple[int, ...]

    def __post_init__(self):
        orders = self.cyclic_orders
        if not orders:
            raise ValueError("empty cyclic decomposition")
        if any(n < 1 for n in orders):
            raise ValueError(f"cyclic orders must be >= 1, got {orders}")
        for a, b in zip(orders, orders[1:]):
            if b % a:
                raise ValueError(f"{orders} is not in invariant-factor form")

    @property
    def order(self) -> int:
        return math.prod(self.cyclic_orders)

    @property
    def exponent(self) -> int:
        return self.cyclic_orders[-1]

    def elements(self):
        return itertools.product(*(range(n) for n in self.cyclic_orders))

    def element_order(self, x) -> int:
        self._check_element(x)
        return math.lcm(*(n // math.gcd(xi, n) for xi, n in zip(x, self.cyclic_orders)))

    def _check_element(self, x):
        if len(x) != len(self.cyclic_orders) or any(
            not 0 <= xi < n for xi, n in zip(x, self.cyclic_orders)
        ):
            raise ValueError(f"{x} is not an element of {self}")

    def characters(self) -> list["Character"]:
        return [Character(self, e) for e in self.elements()]

    def involutions(self) -> list[tuple[int, ...]]:
        return [x for x in self.elements() if self.element_order(x) == 2]

    def __str__(self):
        return "x".join(f"C{n}" for n in self.cyclic_orders)


def build_group(cyclic_orders) -> GroupSpec:
    """Normalize any cyclic decomposition into invariant-factor form.

    >>> build_group([4, 2]).cyclic_orders
    (2, 4)
    >>> build_group([6]).order
    6
    """
    orders = [int(n) for n in cyclic_orders]
    if not orders:
        raise ValueError("empty cyclic decomposition")
    if any(n < 1 for n in orders):
        raise ValueError(f"cyclic orders must be >= 1, got {orders}")
    # elementary divisors, grouped per prime
    by_prime: dict[int, list[int]] = {}
    for n in orders:
        for p, e in factorint(n).items():
            by_prime.setdefault(p, []).append(p**e)
    length = max([len(v) for v in by_prime.values()], default=0)
    factors = [1] * length
    for powers in by_prime.values():
        powers.sort(reverse=True)
        for i, q in enumerate(powers):
            factors[length - 1 - i] *= q
    return GroupSpec(tuple(factors) if factors else (1,))


@dataclass(frozen=True)
class Character:
    group: GroupSpec
    exponents: tuple[int, ...]

    def __post_init__(self):
        self.group._check_element(self.exponents)

    def exponent_at(self, x) -> int:
        """k with chi(x) = zeta_E^k, E the group exponent."""
        E = self.group.exponent
        return sum(e * xi * (E // n) for e, xi, n in zip(self.exponents, x, self.group.cyclic_orders)) % E

    @property
    def order(self) -> int:
        return self.group.element_order(self.exponents)

    @cached_property
    def kernel(self) -> frozenset:
        return frozenset(x for x in self.group.elements() if self.exponent_at(x) == 0)

    def value_at_involution(self, c) -> int:
        k = self.exponent_at(c)
        E = self.group.exponent
        if 2 * k % E:
            raise ValueError(f"{c} is not an involution")
        return 1 if k == 0 else -1


@dataclass(frozen=True)
class GroupComponent:
    """One simple factor Z_(S)[chi(G)] of the group ring, indexed by a
    kernel-equivalence class of characters."""

    character: Character
    n: int
    degree: int
    group_order: int
    minus_flag: bool | None = None
    members: tuple[tuple[int, ...], ...] = field(default=(), compare=False)

    @property
    def id(self) -> str:
        return "chi" + "_".join(map(str, self.character.exponents))


def components(G: GroupSpec) -> list[GroupComponent]:
    classes: dict[frozenset, list[Character]] = {}
    for chi in G.characters():
        classes.setdefault(chi.kernel, []).append(chi)
    comps = []
    for members in classes.values():
        rep = min(members, key=lambda c: c.exponents)
        n = rep.order
        comps.append(
            GroupComponent(
                character=rep,
                n=n,
                degree=euler_phi(n),
                group_order=G.order,
                members=tuple(sorted(c.exponents for c in members)),
            )
        )
    comps.sort(key=lambda c: (c.n, c.character.exponents))
    return comps


def minus_components(G: GroupSpec, c) -> list[GroupComponent]:
    """Components on which the involution c acts as -1."""
    c = tuple(c)
    if G.element_order(c) != 2:
        raise ValueError(f"{c} does not have order 2 in {G}")
    out = []
    for comp in components(G):
        if comp.character.value_at_involution(c) == -1:
            out.append(
                GroupComponent(comp.character, comp.n, comp.degree, comp.group_order, True, comp.members)
            )
    return out


@dataclass(frozen=True)
class MaximalIdeal:
    component_id: str
    p: int
    f: int
    j: int
    n: int

    @property
    def norm(self) -> int:
        return self.p**self.f

    @property
    def id(self) -> str:
        return f"{self.component_id}:p{self.p}:{self.j}"


def frobenius_orbits(comp: GroupComponent, p: int) -> list[tuple[tuple[int, ...], ...]]:
    """Orbits of psi -> psi^p on the characters of the component, ordered by
    their least member.  Orbit j labels the ideal m_{p, psi} with index j."""
    orders = comp.character.group.cyclic_orders
    left = set(comp.members)
    orbits = []
    while left:
        start = min(left)
        orbit, x = [], start
        while x not in orbit:
            orbit.append(x)
            x = tuple(p * e % n for e, n in zip(x, orders))
        left -= set(orbit)
        orbits.append(tuple(sorted(orbit)))
    return orbits


def ideal_of_character(comp: GroupComponent, p: int, psi) -> MaximalIdeal:
    """The maximal ideal m_{p, psi} of the component, psi one of its characters."""
    psi = tuple(psi)
    for m, orbit in zip(maximal_ideals(comp, [p]), frobenius_orbits(comp, p)):
        if psi in orbit:
            return m
    raise ValueError(f"character {psi} does not belong to component {comp.id}")


def maximal_ideals(comp: GroupComponent, S) -> list[MaximalIdeal]:
    """Primes of chi(T) above each p in S: g = phi(n)/f of them, each of
    norm p^f with f the order of p mod n.  Index j refers to the j-th
    Frobenius orbit of characters (see frobenius_orbits)."""
    ideals = []
    for p in sorted(set(S)):
        if comp.group_order % p == 0:
            raise ValueError(f"prime {p} divides #G = {comp.group_order}")
        f = multiplicative_order(p, comp.n)
        g = comp.degree // f
        ideals.extend(MaximalIdeal(comp.id, p, f, j, comp.n) for j in range(g))
    return ideals


def cyclic_involution(G: GroupSpec) -> tuple[int, ...]:
    """The unique involution of a group whose 2-part is cyclic."""
    invs = G.involutions()
    if len(invs) != 1:
        raise ValueError(f"{G} has {len(invs)} involutions, expected exactly one")
    return invs[0]


def group_from_json(doc) -> tuple[GroupSpec, tuple[int, ...] | None, list[int]]:
    """Parse {"cyclic_orders": [...], "involution": [...], "primes": [...]}."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    G = build_group(doc["cyclic_orders"])
    inv = doc.get("involution")
    inv = tuple(inv) if inv is not None else None
    if inv is not None and G.element_order(inv) != 2:
        raise ValueError(f"involution {inv} does not have order 2")
    primes = [int(p) for p in doc.get("primes", [])]
    bad = [p for p in primes if G.order % p == 0]
    if bad:
        raise ValueError(f"primes {bad} divide #G = {G.order}")
    return G, inv, primes


def group_to_json(G: GroupSpec, involution=None, primes=()) -> dict:
    return {
        "cyclic_orders": list(G.cyclic_orders),
        "involution": list(involution) if involution is not None else None,
        "primes": sorted(primes),
    }
