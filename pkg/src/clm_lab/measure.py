"""The Cohen-Lenstra-Martinet measures P_V on finite modules and P on
P_V + (finite), with certified normalizers, sampling and expectation
brackets.

A measure is a finite list of maximal ideals, each carrying the rank u of
P_V at its component.  The weight of a finite module M is
prod_m q_m^{-u_m |lambda_m|} / #Aut(lambda_m), and the normalizer of each
ideal is prod_{k > u} (1 - q^{-k})^{-1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .arith import partition_tail_bound, primes_up_to
from .groups import GroupSpec, MaximalIdeal, components, maximal_ideals, minus_components
from .modules import (
    ModuleShape,
    Partition,
    aut_count,
    partitions_of,
    sur_count_between,
)


@dataclass(frozen=True)
class Certified:
    """A real number known to lie in [lower, upper]."""

    lower: Fraction
    upper: Fraction

    @property
    def value(self) -> float:
        return float((self.lower + self.upper) / 2)

    @property
    def error(self) -> float:
        return float(self.upper - self.lower)

    def __contains__(self, x) -> bool:
        return self.lower <= Fraction(x) <= self.upper

    def __mul__(self, other: "Certified") -> "Certified":
        # both factors positive here
        return Certified(self.lower * other.lower, self.upper * other.upper)


def local_normalizer(q: int, u: int, tol: float = 2.0**-60) -> Certified:
    """prod_{k>u} (1 - q^-k)^{-1}, truncated with a certified remainder.

    For K terms the remainder factor lies in [1, 1/(1-y)] with
    y = q^-K / ((q-1)(1 - q^-(K+1))) >= sum_{k>K} -log(1 - q^-k).
    """
    if q < 2 or u < 0:
        raise ValueError("need q >= 2 and u >= 0")
    tol = Fraction(tol)
    partial = Fraction(1)
    K = u
    while True:
        y = Fraction(1, q**K * (q - 1)) / (1 - Fraction(1, q ** (K + 1)))
        if K > u and y / (1 - y) <= tol:
            break
        K += 1
        partial *= Fraction(q**K, q**K - 1)
    return Certified(partial, partial / (1 - y))


def eta_lower_bound(q: int, J: int = 30) -> Fraction:
    """Lower bound for prod_{j>=1} (1 - q^-j), independent of local_normalizer."""
    x = Fraction(1, q)
    head = Fraction(1)
    for j in range(1, J + 1):
        head *= 1 - x**j
    # prod_{j>J} (1-x^j) >= exp(-s) >= 1 - s
    s = x ** (J + 1) / ((1 - x) * (1 - x ** (J + 1)))
    return head * (1 - s)


def normalizer_partition_sum(q: int, u: int, N: int) -> tuple[Fraction, float]:
    """Direct sum of q^{-u|lam|}/#Aut(lam) over |lam| <= N, with a bound on
    the omitted terms (1/#Aut(lam) <= q^-|lam| / eta_q)."""
    total = Fraction(0)
    for n in range(N + 1):
        for lam in partitions_of(n):
            total += Fraction(1, q ** (u * n) * aut_count(lam, q))
    tail = partition_tail_bound(float(q) ** -(u + 1), N + 1) / float(eta_lower_bound(q))
    return total, tail


@dataclass(frozen=True)
class ClmMeasure:
    ideals: tuple[MaximalIdeal, ...]
    ranks: tuple[tuple[str, int], ...]
    S: tuple[int, ...] = ()
    component_ids: tuple[str, ...] = ()
    tol: float = 2.0**-60
    normalizers: tuple[Certified, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.normalizers:
            norms = tuple(local_normalizer(m.norm, self.rank_at(m), self.tol) for m in self.ideals)
            object.__setattr__(self, "normalizers", norms)

    def rank_at(self, m: MaximalIdeal) -> int:
        return dict(self.ranks).get(m.component_id, 0)

    @property
    def total_normalizer(self) -> Certified:
        out = Certified(Fraction(1), Fraction(1))
        for z in self.normalizers:
            out = out * z
        return out

    def normalizer_of(self, m: MaximalIdeal) -> Certified:
        return self.normalizers[self.ideals.index(m)]

    def to_json(self) -> dict:
        return {
            "S": list(self.S),
            "components": list(self.component_ids),
            "ranks": dict(self.ranks),
            "ideals": [{"id": m.id, "norm": m.norm} for m in self.ideals],
        }


def _finite_prime_set(S) -> tuple[int, ...]:
    if isinstance(S, (str, bytes)) or not hasattr(S, "__len__"):
        raise ValueError(f"S must be an explicit finite set of primes, got {S!r}")
    from sympy import isprime

    S = tuple(sorted({int(p) for p in S}))
    bad = [p for p in S if not isprime(p)]
    if bad:
        raise ValueError(f"not prime: {bad}")
    return S


def make_measure(
    G: GroupSpec,
    S,
    u=0,
    selection="all",
    involution=None,
    tol: float = 2.0**-60,
) -> ClmMeasure:
    """Measure for the components of Z_(S)[G] picked by `selection`.

    selection is "all", "minus" (needs an involution) or a list of
    component ids; u is an int (same rank everywhere) or {id: rank}.
    """
    S = _finite_prime_set(S)
    if selection == "minus":
        if involution is None:
            raise ValueError("minus selection needs an involution")
        comps = minus_components(G, involution)
    else:
        comps = components(G)
        if selection != "all":
            wanted = set(selection)
            comps = [c for c in comps if c.id in wanted]
            if len(comps) != len(wanted):
                raise ValueError(f"unknown components in {selection}")
    ranks = {c.id: (u if isinstance(u, int) else int(u.get(c.id, 0))) for c in comps}
    ideals = tuple(m for c in comps for m in maximal_ideals(c, S))
    return ClmMeasure(ideals, tuple(ranks.items()), S, tuple(c.id for c in comps), tol)


def local_measure(q: int, u: int) -> ClmMeasure:
    """One ideal of norm q (a prime power) with rank u, detached from any group."""
    from sympy import factorint

    (p, f), = factorint(q).items()
    m = MaximalIdeal("local", p, f, 0, 1)
    return ClmMeasure((m,), (("local", u),), (p,), ("local",))


def _check_shape(M: ModuleShape, measure: ClmMeasure):
    known = set(measure.ideals)
    for m, _ in M.torsion:
        if m not in known:
            raise ValueError(f"ideal {m.id} is not part of the measure")
    if M.ranks and dict(M.ranks) != {c: u for c, u in measure.ranks if u}:
        raise ValueError("projective part of the shape does not match the measure's P_V")


def local_mass(lam: Partition, q: int, u: int) -> Fraction:
    return Fraction(1, q ** (u * lam.size) * aut_count(lam, q))


def shape_mass(M: ModuleShape, measure: ClmMeasure) -> Fraction:
    """Unnormalized mass 1/(#Hom(P_V, M_0) #Aut M_0)."""
    _check_shape(M, measure)
    mass = Fraction(1)
    for m, lam in M.torsion:
        mass *= local_mass(lam, m.norm, measure.rank_at(m))
    return mass


def shape_probability(M: ModuleShape, measure: ClmMeasure) -> Certified:
    mass = shape_mass(M, measure)
    Z = measure.total_normalizer
    return Certified(mass / Z.upper, mass / Z.lower)


def probability_ratio(L: ModuleShape, M: ModuleShape, measure: ClmMeasure) -> Fraction:
    """P(L)/P(M), exact (the normalizer cancels)."""
    return shape_mass(L, measure) / shape_mass(M, measure)


# ---------------------------------------------------------------- sampling


class _LocalSampler:
    """Inverse-CDF over partitions listed by non-decreasing size."""

    MAX_SIZE = 400

    def __init__(self, q: int, u: int, Z: float, initial_residual: float = 1e-9):
        self.q, self.u, self.Z = q, u, Z
        self.shapes: list[Partition] = []
        self.cdf: list[float] = []
        self.size = -1
        self._acc = Fraction(0)
        while self.size < 3 or 1 - float(self._acc) / Z > initial_residual:
            if not self._extend():
                break
        self._cdf_array = np.array(self.cdf)

    def _extend(self) -> bool:
        if self.size >= self.MAX_SIZE:
            return False
        self.size += 1
        for lam in partitions_of(self.size):
            self._acc += local_mass(lam, self.q, self.u)
            self.shapes.append(lam)
            self.cdf.append(float(self._acc) / self.Z)
        return True

    def draw(self, uniforms: np.ndarray) -> list[Partition]:
        idx = np.searchsorted(self._cdf_array, uniforms, side="right")
        out = []
        for x, i in zip(uniforms, idx):
            while i >= len(self.shapes):
                # overflow path: extend the enumeration, reuse the same draw
                if not self._extend():
                    raise RuntimeError("sampler exhausted its partition enumeration")
                self._cdf_array = np.array(self.cdf)
                i = int(np.searchsorted(self._cdf_array, x, side="right"))
            out.append(self.shapes[i])
        return out


_SAMPLERS: dict[tuple[int, int], _LocalSampler] = {}


def _sampler(q: int, u: int, Z: Certified) -> _LocalSampler:
    key = (q, u)
    if key not in _SAMPLERS:
        _SAMPLERS[key] = _LocalSampler(q, u, Z.value)
    return _SAMPLERS[key]


def task_rng(seed: int, task: int = 0) -> np.random.Generator:
    """Independent stream for (seed, task), reproducible in any order."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(task,)))


def sample_shapes(measure: ClmMeasure, n: int, seed: int, task: int = 0) -> list[ModuleShape]:
    rng = task_rng(seed, task)
    per_ideal = []
    for m, Z in zip(measure.ideals, measure.normalizers):
        sampler = _sampler(m.norm, measure.rank_at(m), Z)
        per_ideal.append(sampler.draw(rng.random(n)))
    ranks = {c: u for c, u in measure.ranks if u}
    out = []
    for i in range(n):
        tors = {m: col[i] for m, col in zip(measure.ideals, per_ideal)}
        out.append(ModuleShape.build(tors, ranks))
    return out


def sample_shape(measure: ClmMeasure, seed: int, task: int = 0) -> ModuleShape:
    return sample_shapes(measure, 1, seed, task)[0]


# ---------------------------------------------------------------- expectations


@dataclass(frozen=True)
class ShapeFunction:
    """A function on shapes with the certificate needed to bracket its mean.

    Either `bound` = (lo, hi) with lo <= f <= hi everywhere, or `tail`:
    N -> upper bound on sum over shapes of length > N of |f| * P (for f >= 0).
    """

    func: Callable[[ModuleShape], object]
    bound: tuple[float, float] | None = None
    tail: Callable[[int], float] | None = None
    name: str = "f"


@dataclass(frozen=True)
class ExpectationBracket:
    lower: float
    upper: float
    N: int
    exact_lower: Fraction | None = field(default=None, repr=False)
    exact_upper: Fraction | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("empty bracket")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def __contains__(self, x) -> bool:
        if self.exact_lower is not None and isinstance(x, (int, Fraction)):
            return self.exact_lower <= x <= self.exact_upper
        return self.lower <= x <= self.upper

    def to_json(self, **extra) -> dict:
        return {"lower": self.lower, "upper": self.upper, "N": self.N, **extra}


def enumerate_shapes(ideals: Sequence[MaximalIdeal], N: int, ranks=None):
    """All finite shapes on `ideals` of total length <= N."""
    ranks = dict(ranks or {})

    def rec(i, budget, acc):
        if i == len(ideals):
            yield ModuleShape.build(dict(acc), {c: u for c, u in ranks.items() if u})
            return
        for n in range(budget + 1):
            for lam in partitions_of(n):
                acc.append((ideals[i], lam))
                yield from rec(i + 1, budget - n, acc)
                acc.pop()

    yield from rec(0, N, [])


def expectation_bracket(f: ShapeFunction, measure: ClmMeasure, N: int) -> ExpectationBracket:
    """Bracket for E(f) from all shapes of length <= N plus a certified tail."""
    if f.bound is None and f.tail is None:
        raise ValueError(f"{f.name} has neither a bound nor a tail certificate")
    S = Fraction(0)
    mass = Fraction(0)
    for M in enumerate_shapes(measure.ideals, N, measure.ranks):
        w = shape_mass(M, measure)
        mass += w
        S += Fraction(f.func(M)) * w
    Z = measure.total_normalizer
    ys = (1 / Z.upper, 1 / Z.lower)
    if f.bound is not None:
        a, b = (Fraction(x) for x in f.bound)
        lo = a + min((S - a * mass) * y for y in ys)
        hi = b + max((S - b * mass) * y for y in ys)
    else:
        lo = S * ys[0]
        hi = S * ys[1] + Fraction(f.tail(N))
    return ExpectationBracket(float(lo), float(hi), N, lo, hi)


def indicator(pred: Callable[[ModuleShape], bool], name: str = "indicator") -> ShapeFunction:
    return ShapeFunction(lambda M: 1 if pred(M) else 0, (0, 1), name=name)


# ---------------------------------------------------------------- moments


def surjection_moment_check(A: ModuleShape, measure: ClmMeasure, N: int | None = None) -> ExpectationBracket:
    """Bracket for E[#Sur(X, A)] under P_V; the expected value is 1/#Hom(P_V, A).

    Both X and #Sur(X, A) split over maximal ideals, so the bracket is the
    product of local brackets, each with a certified tail: for A local of
    size q^a, #Sur(lam, A)/#Aut(lam) <= q^{(a+1+c)^2/4 - |lam|} with
    c = log_q(1/eta_q).
    """
    _check_shape(A, measure)
    if A.order > 10**4:
        raise ValueError(f"#A = {A.order} is too large for the moment check")
    lo, hi = Fraction(1), Fraction(1)
    used = 0
    for m, alpha in A.torsion:
        q, u = m.norm, measure.rank_at(m)
        n_max = N if N is not None else _default_moment_cutoff(q)
        used = max(used, n_max)
        Z = measure.normalizer_of(m)
        s = sum((t / q ** (u * n) for n, t in enumerate(_moment_terms(q, alpha, n_max))), Fraction(0))
        tail = _sur_moment_tail(q, u, alpha, n_max)
        lo *= s / Z.upper
        hi *= (s + Fraction(tail)) / Z.lower
    return ExpectationBracket(float(lo), float(hi), used, lo, hi)


@lru_cache(maxsize=None)
def _moment_terms(q: int, alpha: Partition, N: int) -> tuple[Fraction, ...]:
    """sum_{|lam| = n} #Sur(lam, alpha)/#Aut(lam) for n = 0..N."""
    out = []
    for n in range(N + 1):
        t = Fraction(0)
        for lam in partitions_of(n):
            # a quotient of lam has a type contained in lam
            if lam.length >= alpha.length and all(x >= y for x, y in zip(lam.parts, alpha.parts)):
                t += Fraction(sur_count_between(lam, alpha, q), aut_count(lam, q))
        out.append(t)
    return tuple(out)


@lru_cache(maxsize=None)
def _sur_moment_tail(q: int, u: int, alpha: Partition, N: int, extra: int = 150) -> float:
    """Bound on sum_{|lam| > N} #Sur(lam, alpha) q^{-u|lam|} / #Aut(lam).

    #Sur <= #Hom = q^{sum_k c_k alpha'_k} and #Aut(lam) >= q^{sum_k c_k^2} eta^{c_1},
    with c = lam' the conjugate partition (c_1 = length).  The resulting bound
    sum_lam eta^{-c_1} prod_k q^{alpha'_k c_k - c_k^2 - u c_k} is evaluated
    exactly for N < |lam| <= N + extra by a transfer over the columns of lam,
    and #Sur = 0 unless c_1 >= alpha'_1.  Larger lam are covered by the
    envelope q^{(a+1+c)^2/4} p(n) q^{-(u+1)n}, |alpha| = q^a, eta = q^-c.
    """
    a = alpha.size
    cols = alpha.conjugate()
    K = max(len(cols), 1)
    eta = float(eta_lower_bound(q))
    M = N + extra
    c = np.arange(M + 1, dtype=np.float64)
    lq = math.log(q)

    def weight(alpha_k: int) -> np.ndarray:
        with np.errstate(under="ignore"):
            return np.exp((alpha_k * c - c * c - u * c) * lq)

    # state[s, p]: total weight of the first k columns with sum s and last column p
    first = cols[0] if cols else 0
    w1 = weight(first) * np.exp(-c * math.log(eta))
    w1[: max(first, 1)] = 0.0
    state = np.zeros((M + 1, M + 1))
    state[np.arange(M + 1), np.arange(M + 1)] = w1
    for k in range(1, K):
        w = weight(cols[k])
        ge = np.cumsum(state[:, ::-1], axis=1)[:, ::-1]  # ge[s, p] = sum_{p' >= p} state[s, p']
        new = np.zeros_like(state)
        new[:, 0] = ge[:, 0]  # a zero column ends the partition
        for p in range(1, M + 1):
            new[p:, p] = w[p] * ge[: M + 1 - p, p]
        state = new
    # remaining columns carry alpha'_k = 0: partitions with parts <= p, weight q^{-c^2-uc}
    w0 = weight(0)
    T = np.zeros((M + 1, M + 1))  # T[m, p]
    T[0, :] = 1.0
    for p in range(1, M + 1):
        T[:, p] = T[:, p - 1]
        for m in range(p, M + 1):  # ascending: T[m - p, p] already counts repeated parts
            T[m, p] += w0[p] * T[m - p, p]
    total = 0.0
    for s in range(M + 1):
        row = state[s]
        for p in np.nonzero(row)[0]:
            rem = np.arange(N + 1 - s, M + 1 - s) if s <= N else np.arange(0, M + 1 - s)
            rem = rem[rem >= 0]
            if rem.size:
                total += float(row[p] * T[rem, p].sum())
    cq = -math.log(eta, q)
    crude = q ** ((a + 1 + cq) ** 2 / 4) * partition_tail_bound(float(q) ** -(u + 1), M + 1)
    return total * (1 + 1e-9) + crude


def _default_moment_cutoff(q: int) -> int:
    return 24 if q == 2 else 16 if q == 3 else 12


# ---------------------------------------------------------------- truncation order


@dataclass(frozen=True)
class TruncationRatios:
    ratio: float
    swapped: float
    B1: int
    B2: int


def _aut_weight_table(B: int) -> np.ndarray:
    """a[n] = sum over abelian groups of order n of 1/#Aut, for n <= B."""
    a = np.ones(B + 1)
    a[0] = 0.0
    for p in primes_up_to(B):
        p = int(p)
        prev, pk, k = 1.0, p, 1
        while pk <= B:
            ck = math.fsum(1.0 / aut_count(lam, p) for lam in partitions_of(k))
            a[pk::pk] *= ck / prev
            prev, pk, k = ck, pk * p, k + 1
    return a


def truncation_shape_demo(B1: int, B2: int) -> TruncationRatios:
    """Two components T = T' = Z_(S), P = 0, S = primes <= max(B1, B2).

    Returns the partial-sum ratio of f(M) = [#(T M) > #(T' M)] over
    {#(T M) <= B1, #(T' M) <= B2}, and the same with B1, B2 swapped.
    """
    B = max(B1, B2)
    a = _aut_weight_table(B)
    cum = np.cumsum(a)

    def ratio(b1, b2):
        # sum_{n1<=b1} a(n1) * A(min(n1 - 1, b2))
        n1 = np.arange(1, b1 + 1)
        inner = cum[np.minimum(n1 - 1, b2)]
        num = math.fsum(a[1 : b1 + 1] * inner)
        return num / (cum[b1] * cum[b2])

    return TruncationRatios(float(ratio(B1, B2)), float(ratio(B2, B1)), B1, B2)
