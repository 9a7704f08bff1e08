"""Partial Euler products L^(S)(phi^-1, s), Dirichlet coefficients of the
weighted module series Z_u(f, s), and exact checks of

    Z_{u+v}(f, s) = Z_u(f, s) Z_v(f, u + s),
    Z_u(f, s)     = prod_chi prod_{k <= u_chi} L^(S)(phi_chi^-1, s + k),

with f(M) = phi([M]).  All coefficients are exact elements of Q(zeta_E),
E the exponent of the class group.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .cyclotomic import CycloElement
from .groups import GroupComponent, MaximalIdeal, build_group, components, maximal_ideals
from .arith import primes_up_to
from .measure import ClmMeasure
from .modules import ClassDatum, ModuleShape, Partition, aut_count, class_of, partitions_of, sur_count


def _phi_inverse_at(datum: ClassDatum, phi, m: MaximalIdeal) -> CycloElement:
    k = datum.character_exponent(phi, datum.class_of_ideal(m))
    return CycloElement.root(datum.exponent, -k)


@dataclass(frozen=True)
class EulerProduct:
    """prod (1 - v N^-s)^-1 over finitely many (N, v), v a root of unity."""

    factors: tuple[tuple[int, CycloElement], ...]
    s: complex

    def value(self):
        s = self.s
        exact = isinstance(s, int) and all(v.is_rational() for _, v in self.factors)
        if exact:
            out = Fraction(1)
            for N, v in self.factors:
                t = v.to_rational() * Fraction(1, N**s) if s >= 0 else v.to_rational() * N ** (-s)
                if t == 1:
                    raise ZeroDivisionError(f"pole: Euler factor at norm {N} vanishes")
                out /= 1 - t
            return out
        out = 1 + 0j
        for N, v in self.factors:
            t = v.to_complex() * cmath.exp(-s * math.log(N))
            if abs(1 - t) < 1e-15:
                raise ZeroDivisionError(f"pole: Euler factor at norm {N} vanishes")
            out /= 1 - t
        return out


def euler_product(ideals, datum: ClassDatum, phi, s) -> EulerProduct:
    return EulerProduct(tuple((m.norm, _phi_inverse_at(datum, phi, m)) for m in ideals), s)


def partial_L(component: GroupComponent, datum: ClassDatum, phi, s, S):
    """L^(S)(phi^-1, s) of the component: the product over its maximal
    ideals above the primes in S.  Exact (a Fraction) when s is an integer
    and phi takes values +-1 on the ideals, complex otherwise."""
    return euler_product(maximal_ideals(component, S), datum, phi, s).value()


# ---------------------------------------------------------------- Dirichlet series


@dataclass
class DirichletCoefficients:
    """Coefficients a(n), n <= B, of sum a(n) n^-s in Q(zeta_m)."""

    B: int
    m: int
    coeffs: dict[int, CycloElement] = field(default_factory=dict)

    @classmethod
    def one(cls, B: int, m: int) -> "DirichletCoefficients":
        return cls(B, m, {1: CycloElement.rational(m, 1)})

    def __getitem__(self, n: int) -> CycloElement:
        if n > self.B:
            raise KeyError(f"{n} is beyond the cutoff {self.B}")
        return self.coeffs.get(n, CycloElement.rational(self.m, 0))

    def nonzero(self) -> dict[int, CycloElement]:
        return {n: a for n, a in self.coeffs.items() if not a.is_zero()}

    def __mul__(self, other: "DirichletCoefficients") -> "DirichletCoefficients":
        if self.m != other.m:
            raise ValueError("coefficient fields differ")
        B = min(self.B, other.B)
        out: dict[int, CycloElement] = {}
        right = sorted(other.nonzero().items())
        for n, a in self.nonzero().items():
            for k, b in right:
                if n * k > B:
                    break
                nk = n * k
                out[nk] = out[nk] + a * b if nk in out else a * b
        return DirichletCoefficients(B, self.m, out)

    def shifted(self, u: int) -> "DirichletCoefficients":
        """Coefficients of the series at s + u: a(n) n^-u."""
        return DirichletCoefficients(self.B, self.m, {n: a * Fraction(1, n**u) for n, a in self.coeffs.items()})

    def times_geometric(self, q: int, c: CycloElement) -> "DirichletCoefficients":
        """Multiply by (1 - c q^-s)^-1, truncated at B."""
        out = dict(self.coeffs)
        for n0, a in self.coeffs.items():
            n, t = n0, a
            while n * q <= self.B:
                n *= q
                t = t * c
                out[n] = out[n] + t if n in out else t
        return DirichletCoefficients(self.B, self.m, out)

    def max_deviation(self, other: "DirichletCoefficients") -> float:
        keys = set(self.coeffs) | set(other.coeffs)
        return max((abs((self[n] - other[n]).to_complex()) for n in keys if n <= min(self.B, other.B)), default=0.0)

    def equals(self, other: "DirichletCoefficients") -> bool:
        keys = set(self.coeffs) | set(other.coeffs)
        B = min(self.B, other.B)
        return all(self[n] == other[n] for n in keys if n <= B)


def _enumerate_torsion(ideals: list[MaximalIdeal], B: int):
    """Every finite shape supported on `ideals` with #M <= B."""
    ideals = sorted(ideals, key=lambda m: (m.norm, m.id))
    acc: list[tuple[MaximalIdeal, Partition]] = []

    def rec(start: int, budget: int):
        yield acc
        for i in range(start, len(ideals)):
            m = ideals[i]
            q = m.norm
            if q > budget:
                break
            k, qk = 1, q
            while qk <= budget:
                for lam in partitions_of(k):
                    acc.append((m, lam))
                    yield from rec(i + 1, budget // qk)
                    acc.pop()
                k, qk = k + 1, qk * q

    for torsion in rec(0, B):
        yield ModuleShape(tuple(torsion))


@lru_cache(maxsize=None)
def _local_weight(lam: Partition, q: int, u: int) -> Fraction:
    return Fraction(sur_count(lam, q, u), q ** (u * lam.size) * aut_count(lam, q))


def module_weight(M: ModuleShape, ranks: dict, shift: dict | None = None) -> Fraction:
    """w_u(M) = S_u(M) / (#Hom(Q, M) #Aut M), times prod_chi #M_chi^-shift_chi."""
    shift = shift or {}
    w = Fraction(1)
    for m, lam in M.torsion:
        w *= _local_weight(lam, m.norm, ranks.get(m.component_id, 0))
        if not w:
            return w
    for cid, v in shift.items():
        if v:
            w /= M.order_at_component(cid) ** v
    return w


def _as_rank_map(measure: ClmMeasure, u) -> dict:
    if u is None:
        return dict(measure.ranks)
    if isinstance(u, int):
        return {cid: u for cid in measure.component_ids}
    return {cid: int(u.get(cid, 0)) for cid in measure.component_ids}


def z_series_coeffs(
    measure: ClmMeasure,
    datum: ClassDatum,
    phi,
    B: int,
    u=None,
    shift=None,
    f: Callable[[ModuleShape], CycloElement] | None = None,
) -> DirichletCoefficients:
    """Coefficients sum_{#M = n} w_u(M) f(M) |M|^-shift, n <= B, by direct
    enumeration of the finite modules on the measure's ideals.

    f defaults to phi([M]).  u and shift default to the measure's ranks and
    zero; either may be an int or a per-component map.
    """
    if B > 10**5:
        raise ValueError("norm cutoff above 10^5 is not supported")
    if f is not None and len(measure.component_ids) > 1:
        raise ValueError("a custom f must be multiplicative; only phi([M]) is accepted across components")
    ranks = _as_rank_map(measure, u)
    shifts = _as_rank_map(measure, shift) if shift is not None else {}
    E = datum.exponent
    ideals = [m for m in measure.ideals if m.norm <= B]
    out: dict[int, CycloElement] = {}
    for M in _enumerate_torsion(ideals, B):
        w = module_weight(M, ranks, shifts)
        if not w:
            continue
        if f is None:
            k = datum.character_exponent(phi, class_of(M, datum).torsion)
            val = CycloElement.root(E, k) * w
        else:
            val = f(M) * w
        n = M.order
        out[n] = out[n] + val if n in out else val
    return DirichletCoefficients(B, E, out)


def l_product_coeffs(measure: ClmMeasure, datum: ClassDatum, phi, B: int, u=None) -> DirichletCoefficients:
    """Expanded prod_chi prod_{k=1}^{u_chi} L^(S)(phi^-1, s + k), n <= B."""
    ranks = _as_rank_map(measure, u)
    series = DirichletCoefficients.one(B, datum.exponent)
    for m in measure.ideals:
        if m.norm > B:
            continue
        psi = _phi_inverse_at(datum, phi, m)
        for k in range(1, ranks.get(m.component_id, 0) + 1):
            series = series.times_geometric(m.norm, psi * Fraction(1, m.norm**k))
    return series


@dataclass(frozen=True)
class IdentityReport:
    identity: bool
    B: int
    max_norm_checked: int
    max_deviation: float
    terms: int

    def to_json(self) -> dict:
        return {
            "identity": self.identity,
            "B": self.B,
            "max_norm_checked": self.max_norm_checked,
            "max_deviation": self.max_deviation,
            "terms": self.terms,
        }


def _report(lhs: DirichletCoefficients, rhs: DirichletCoefficients, B: int) -> IdentityReport:
    keys = set(lhs.nonzero()) | set(rhs.nonzero())
    return IdentityReport(lhs.equals(rhs), B, max(keys, default=1), lhs.max_deviation(rhs), len(keys))


def verify_analytic_identity(measure: ClmMeasure, datum: ClassDatum, phi, B: int, u=None) -> IdentityReport:
    """Compare Z_u(f, s) with prod_k L^(S)(phi^-1, s + k) coefficient by coefficient."""
    lhs = z_series_coeffs(measure, datum, phi, B, u=u)
    rhs = l_product_coeffs(measure, datum, phi, B, u=u)
    return _report(lhs, rhs, B)


def verify_rank_additivity(measure: ClmMeasure, datum: ClassDatum, phi, B: int, u, v) -> IdentityReport:
    """Compare Z_{u+v}(f, s) with Z_u(f, s) Z_v(f, u + s)."""
    U = _as_rank_map(measure, u)
    V = _as_rank_map(measure, v)
    UV = {c: U[c] + V[c] for c in U}
    lhs = z_series_coeffs(measure, datum, phi, B, u=UV)
    rhs = z_series_coeffs(measure, datum, phi, B, u=U) * z_series_coeffs(measure, datum, phi, B, u=V, shift=U)
    return _report(lhs, rhs, B)


def synthetic_class_datum(ideals, C: tuple[int, ...], seed: int = 0) -> ClassDatum:
    """Classes drawn uniformly from C, one independent stream per ideal
    (keyed by prime and index), so the class of an ideal does not depend
    on which other ideals are present."""
    classes = {}
    for m in ideals:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(m.p, m.j, m.n)))
        classes[m] = tuple(int(rng.integers(n)) for n in C)
    return ClassDatum(tuple(C), classes)


# ---------------------------------------------------------------- C58 demo

C58_CLASS_GROUP = (2, 2, 2)


def c58_component() -> GroupComponent:
    G = build_group([58])
    (comp,) = [c for c in components(G) if c.n == 58]
    return comp


def _log_ratio_bracket(xs: np.ndarray, K: int = 60) -> tuple[float, float]:
    """Bracket for sum over x of sum_{k>=1} log((1 - x^k)/(1 + x^k)), all terms negative.

    Uses k <= K exactly; for k > K, log((1-y)/(1+y)) >= -2y/(1-y), summed as
    a geometric bound."""
    total = 0.0
    for k in range(1, K + 1):
        y = xs**k
        total += float(np.sum(np.log1p(-y) - np.log1p(y)))
    y = xs ** (K + 1)
    tail = float(np.sum(2 * y / ((1 - xs) * (1 - y))))
    return total - tail, total


def c58_equidistribution_demo(Ns, phi, seed: int = 0, K: int = 60) -> list[dict]:
    """prod_k L^(<=N)(phi^-1, k) / prod_k zeta^(<=N)(k) on the order-58
    component, for each cutoff N, with a synthetic (seeded, uniform) class
    datum on (Z/2)^3.  The demo is qualitative: the classes are not the
    true ideal classes of Z[zeta_29].

    For characters of order <= 2 each ideal with phi^-1 = -1 contributes
    prod_k (1 - q^-k)/(1 + q^-k) and every other ideal contributes 1.
    """
    phi = tuple(int(e) % 2 for e in phi)
    if len(phi) != 3:
        raise ValueError("phi must be an exponent triple on (Z/2)^3")
    comp = c58_component()
    out = []
    for N in sorted(int(N) for N in Ns):
        S = [int(p) for p in primes_up_to(N) if 58 % int(p)]
        ideals = maximal_ideals(comp, S)
        datum = synthetic_class_datum(ideals, C58_CLASS_GROUP, seed)
        minus = [m.norm for m in ideals if _phi_inverse_at(datum, phi, m) != 1]
        if not any(phi):
            lo = hi = 0.0
        else:
            lo, hi = _log_ratio_bracket(1.0 / np.array(minus, dtype=float), K)
        out.append(
            {
                "N": N,
                "ratio": math.exp((lo + hi) / 2),
                "lower": math.exp(lo),
                "upper": math.exp(hi),
                "ideals": len(ideals),
                "ideals_with_phi_minus_one": len(minus),
                "synthetic_class_datum": True,
            }
        )
    return out
