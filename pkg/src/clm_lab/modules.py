"""Finite modules over R = prod chi(T), stored as partition-valued maps on
maximal ideals plus a projective rank vector.

All counts are exact integers or Fractions.  Local modules over a
discrete valuation ring with residue field of size q are classified by a
partition lambda; the module of type lambda is sum_i R/m^{lambda_i}.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .groups import MaximalIdeal


@dataclass(frozen=True, order=True)
class Partition:
    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(x) for x in self.parts)
        if any(x <= 0 for x in parts):
            raise ValueError(f"parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"parts must be non-increasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, *parts) -> "Partition":
        return cls(tuple(sorted(parts, reverse=True)))

    @property
    def size(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def conjugate(self) -> tuple[int, ...]:
        if not self.parts:
            return ()
        return tuple(sum(1 for x in self.parts if x > i) for i in range(self.parts[0]))

    def multiplicities(self) -> dict[int, int]:
        return dict(Counter(self.parts))

    def __add__(self, other: "Partition") -> "Partition":
        return Partition(tuple(sorted(self.parts + other.parts, reverse=True)))

    def __bool__(self):
        return bool(self.parts)

    def __str__(self):
        return "(" + ",".join(map(str, self.parts)) + ")"


def partitions_of(n: int):
    """Partitions of n, largest first part first."""
    def rec(n, maxpart):
        if n == 0:
            yield ()
            return
        for k in range(min(n, maxpart), 0, -1):
            for rest in rec(n - k, k):
                yield (k,) + rest
    for parts in rec(n, n):
        yield Partition(parts)


def partitions_up_to(n: int):
    for k in range(n + 1):
        yield from partitions_of(k)


def _check_q(q):
    if q < 2:
        raise ValueError(f"residue field size must be >= 2, got {q}")


def _min_sum(a, b) -> int:
    return sum(min(x, y) for x in a for y in b)


def hom_count(lam: Partition, mu: Partition, q: int) -> int:
    _check_q(q)
    return q ** _min_sum(lam.parts, mu.parts)


def aut_count(lam: Partition, q: int) -> int:
    """#Aut of the local module of type lam: q^{sum min(l_i,l_j)} times
    prod over part sizes k of prod_{j<=m_k} (1 - q^-j)."""
    _check_q(q)
    exp = _min_sum(lam.parts, lam.parts)
    units = 1
    for m in lam.multiplicities().values():
        exp -= m * (m + 1) // 2
        for j in range(1, m + 1):
            units *= q**j - 1
    return q**exp * units


def sur_count(lam: Partition, q: int, u: int) -> int:
    """Surjections from a free rank-u local module onto the module of type lam."""
    _check_q(q)
    if u < 0:
        raise ValueError("rank must be nonnegative")
    r = lam.length
    if u < r:
        return 0
    exp = u * lam.size - sum(u - i for i in range(r))
    return q**exp * math.prod(q ** (u - i) - 1 for i in range(r))


def sur_count_between(lam: Partition, alpha: Partition, q: int) -> int:
    """Surjections from the module of type lam onto the module of type alpha.

    A map is surjective iff it is surjective modulo m.  Each generator e_i
    (of order q^lam_i) can go to the elements killed by m^lam_i; their
    reductions fill the coordinate subspace F_L spanned by the parts of
    alpha that are <= lam_i, with uniform fibres.  The spanning tuples are
    counted by a walk over the relative position of the span to the flag
    F_1 < F_2 < ..., recorded by dims(W cap F_j).
    """
    _check_q(q)
    levels = sorted(set(alpha.parts))
    mult = [alpha.parts.count(v) for v in levels]
    s = len(levels)
    flag = [0]
    for m in mult:
        flag.append(flag[-1] + m)  # flag[j] = dim F_j
    r = flag[-1]
    if lam.length < r:
        return 0
    fibre_exp = 0
    steps = []
    for li in lam.parts:
        L = sum(1 for v in levels if v <= li)
        fibre_exp += sum(min(a, li) for a in alpha.parts) - flag[L]
        steps.append(L)
    states = {(0,) * (s + 1): 1}
    for L in steps:
        new: Counter = Counter()
        for d, ways in states.items():
            # v in W cap F_L: span unchanged
            new[d] += ways * q ** d[L]
            prev = q ** (flag[0] + d[L] - d[0])
            for j in range(1, L + 1):
                cur = q ** (flag[j] + d[L] - d[j])
                count = cur - prev
                prev = cur
                if count:
                    nd = tuple(d[i] + 1 if i >= j else d[i] for i in range(s + 1))
                    new[nd] += ways * count
        states = new
    full = tuple(flag)
    return q**fibre_exp * states.get(full, 0)


# ---------------------------------------------------------------- oracle

BRUTE_FORCE_CAP = 2**12


class _QGroup:
    """The abelian group sum_i Z/q^{lam_i}, enumerated explicitly."""

    def __init__(self, lam: Partition, q: int):
        self.lam, self.q = lam, q
        self.mods = tuple(q**x for x in lam.parts)
        self.order = math.prod(self.mods)
        if self.order > BRUTE_FORCE_CAP:
            raise ValueError(f"module of order {self.order} exceeds the brute-force cap {BRUTE_FORCE_CAP}")
        self.elements = list(itertools.product(*(range(m) for m in self.mods)))

    def order_of(self, x) -> int:
        return math.lcm(1, *(m // math.gcd(xi, m) for xi, m in zip(x, self.mods)))

    def killed_by(self, k: int) -> list:
        e = self.q**k
        return [x for x in self.elements if all(e * xi % m == 0 for xi, m in zip(x, self.mods))]

    def reduce(self, x):
        """Image in the Frattini quotient A/qA, as a tuple over F_q."""
        return tuple(xi % self.q for xi in x)

    def generated(self, gens) -> int:
        """Order of the subgroup generated by gens (closure by BFS)."""
        seen = {tuple(0 for _ in self.mods)}
        frontier = list(seen)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = tuple((a + b) % m for a, b, m in zip(x, g, self.mods))
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return len(seen)


def _rank_mod_p(vectors, p: int) -> int:
    rows = [list(v) for v in vectors]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] % p), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] % p:
                f = rows[i][col]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


@lru_cache(maxsize=4096)
def _qgroup(lam: Partition, q: int) -> _QGroup:
    return _QGroup(lam, q)


@lru_cache(maxsize=None)
def _kernel_size(lam: Partition, q: int, k: int) -> int:
    return len(_qgroup(lam, q).killed_by(k))


def _brute_hom(A: _QGroup, B: _QGroup) -> int:
    # a map out of sum Z/q^{a_i} is a free choice of images killed by q^{a_i}
    return math.prod(_kernel_size(B.lam, B.q, a) for a in A.lam.parts)


def _brute_aut(A: _QGroup) -> int:
    """Explicit enumeration of endomorphisms when that is small; otherwise
    orbit-stabilizer on an element of maximal order, recursively."""
    lam = A.lam
    if not lam:
        return 1
    n_end = math.prod(len(A.killed_by(a)) for a in lam.parts)
    if n_end * A.order <= 200_000:
        images = [A.killed_by(a) for a in lam.parts]
        count = 0
        for imgs in itertools.product(*images):
            if A.generated(imgs) == A.order:
                count += 1
        return count
    top = lam.parts[0]
    n_max = sum(1 for x in A.elements if A.order_of(x) == A.q**top)
    rest = Partition(lam.parts[1:])
    Rest = _QGroup(rest, A.q)
    cyc = _QGroup(Partition((top,)), A.q)
    return n_max * _brute_hom(Rest, cyc) * _brute_aut(Rest)


def _brute_sur(A: _QGroup, u: int) -> int:
    if A.order ** (u + 1) <= 1_000_000:
        return sum(1 for t in itertools.product(A.elements, repeat=u) if A.generated(t) == A.order)
    # Burnside basis theorem: a tuple generates A iff it spans A/qA
    r = A.lam.length
    if u < r:
        return 0
    fibre = A.order // A.q**r
    quotient = list(itertools.product(range(A.q), repeat=r))
    spanning = sum(1 for t in itertools.product(quotient, repeat=u) if _rank_mod_p(t, A.q) == r)
    return spanning * fibre**u


def brute_force_counts(lam: Partition, mu: Partition | None, q: int, mode: str, u: int = 0) -> int:
    """Independent oracle for hom/aut/sur counts over Z/q, q prime,
    computed from explicitly enumerated abelian q-groups."""
    from sympy import isprime

    if not isprime(q):
        raise ValueError("the oracle needs q prime")
    A = _qgroup(lam, q)
    if mode == "hom":
        return _brute_hom(A, _qgroup(mu, q))
    if mode == "aut":
        return _brute_aut(A)
    if mode == "sur":
        return _brute_sur(A, u)
    if mode == "sur_between":
        B = _QGroup(mu, q)
        # tuples of images of generators of A, one per part, generating B
        images = [B.killed_by(a) for a in lam.parts]
        return sum(1 for t in itertools.product(*images) if B.generated(t) == B.order)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------- shapes


@dataclass(frozen=True)
class ModuleShape:
    """P_V + M_0: torsion maps maximal ideals to partitions, ranks maps
    component ids to the rank of the projective part."""

    torsion: tuple[tuple[MaximalIdeal, Partition], ...] = ()
    ranks: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        tors = tuple(sorted(((m, lam) for m, lam in dict(self.torsion).items() if lam), key=lambda t: t[0].id))
        ranks = tuple(sorted((c, int(u)) for c, u in dict(self.ranks).items() if u))
        if any(u < 0 for _, u in ranks):
            raise ValueError("ranks must be nonnegative")
        object.__setattr__(self, "torsion", tors)
        object.__setattr__(self, "ranks", ranks)

    @classmethod
    def build(cls, torsion=None, ranks=None) -> "ModuleShape":
        return cls(tuple((torsion or {}).items()), tuple((ranks or {}).items()))

    def local(self, m: MaximalIdeal) -> Partition:
        return dict(self.torsion).get(m, Partition())

    @property
    def order(self) -> int:
        return math.prod(m.norm**lam.size for m, lam in self.torsion)

    @property
    def length(self) -> int:
        return sum(lam.size for _, lam in self.torsion)

    def order_at_component(self, component_id: str) -> int:
        return math.prod(m.norm**lam.size for m, lam in self.torsion if m.component_id == component_id)

    def finite_part(self) -> "ModuleShape":
        return ModuleShape(self.torsion)

    def __add__(self, other: "ModuleShape") -> "ModuleShape":
        tors = dict(self.torsion)
        for m, lam in other.torsion:
            tors[m] = tors.get(m, Partition()) + lam
        ranks = dict(self.ranks)
        for c, u in other.ranks:
            ranks[c] = ranks.get(c, 0) + u
        return ModuleShape.build(tors, ranks)

    def to_json(self) -> dict:
        return {
            "ranks": dict(self.ranks),
            "torsion": [{"ideal": m.id, "parts": list(lam.parts)} for m, lam in self.torsion],
        }

    @classmethod
    def from_json(cls, doc, ideals) -> "ModuleShape":
        if isinstance(doc, str):
            doc = json.loads(doc)
        by_id = {m.id: m for m in ideals}
        tors = {}
        for entry in doc.get("torsion", []):
            if entry["ideal"] not in by_id:
                raise KeyError(f"unknown ideal {entry['ideal']}")
            tors[by_id[entry["ideal"]]] = Partition(tuple(entry["parts"]))
        return cls.build(tors, doc.get("ranks", {}))


def _hom_from_projective(ranks: dict, M0: ModuleShape) -> int:
    # Hom(R_chi^u, M) = M^u, ideal by ideal
    return math.prod(m.norm ** (ranks.get(m.component_id, 0) * lam.size) for m, lam in M0.torsion)


def module_aut_count(M0: ModuleShape) -> int:
    return math.prod(aut_count(lam, m.norm) for m, lam in M0.torsion)


def ia_index(L0: ModuleShape, M0: ModuleShape, P) -> Fraction:
    """ia(P + L0, P + M0) = #Hom(P,M0) #Aut M0 / (#Hom(P,L0) #Aut L0).

    P is a rank vector {component id: rank}."""
    P = dict(P)
    num = _hom_from_projective(P, M0) * module_aut_count(M0)
    den = _hom_from_projective(P, L0) * module_aut_count(L0)
    return Fraction(num, den)


# ---------------------------------------------------------------- classes


def _invariant_factor_elements(orders):
    return itertools.product(*(range(n) for n in orders))


@dataclass(frozen=True)
class ClassDatum:
    """A finite abelian group C = sum Z/c_i with the ideal class of each
    maximal ideal.  Stands in for Cl of the components."""

    C: tuple[int, ...]
    ideal_class: dict = field(hash=False)

    def __post_init__(self):
        for m, x in self.ideal_class.items():
            if len(x) != len(self.C) or any(not 0 <= a < n for a, n in zip(x, self.C)):
                raise ValueError(f"class {x} of {m} is not in C = {self.C}")

    @property
    def exponent(self) -> int:
        return math.lcm(1, *self.C)

    @property
    def zero(self) -> tuple[int, ...]:
        return tuple(0 for _ in self.C)

    def add(self, x, y):
        return tuple((a + b) % n for a, b, n in zip(x, y, self.C))

    def scale(self, k: int, x):
        return tuple(k * a % n for a, n in zip(x, self.C))

    def characters(self) -> list[tuple[int, ...]]:
        return list(_invariant_factor_elements(self.C))

    def character_exponent(self, phi, x) -> int:
        """k with phi(x) = zeta_E^k, E the exponent of C."""
        E = self.exponent
        return sum(e * a * (E // n) for e, a, n in zip(phi, x, self.C)) % E

    def character_order(self, phi) -> int:
        return math.lcm(1, *(n // math.gcd(e, n) for e, n in zip(phi, self.C)))

    def class_of_ideal(self, m: MaximalIdeal):
        try:
            return self.ideal_class[m]
        except KeyError:
            raise KeyError(f"ideal {m.id} is not covered by the class datum") from None


@dataclass(frozen=True)
class GrothendieckClass:
    ranks: tuple[tuple[str, int], ...]
    torsion: tuple[int, ...]


def class_of(M: ModuleShape, datum: ClassDatum) -> GrothendieckClass:
    """Image of [M] in G(R) = Cl + Z^components.

    The residue module R/m has class [R] - [m], whose torsion part is the
    negative of the ideal class of m; so a local module of type lambda
    contributes -|lambda| [m]."""
    t = datum.zero
    for m, lam in M.torsion:
        t = datum.add(t, datum.scale(-lam.size, datum.class_of_ideal(m)))
    return GrothendieckClass(M.ranks, t)
