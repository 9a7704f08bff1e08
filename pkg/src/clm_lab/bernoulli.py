"""Generalized Bernoulli numbers beta(chi) = sum_{(t, f) = 1} (t/f) chi(t)^-1
as exact cyclotomic numbers, Teichmueller lifts, the valuation comparison
v_p(h) = v_p(beta) for imaginary quadratic fields, and the class of the
roots of unity in the Grothendieck group of the minus part."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy import isprime, primitive_root

from .arith import valuation
from .cyclotomic import CycloElement
from .groups import GroupSpec, components, ideal_of_character
from .modules import ClassDatum, GrothendieckClass, ModuleShape, Partition, class_of
from .quadforms import class_number_definite, is_fundamental_discriminant


@dataclass(frozen=True)
class DirichletCharacterData:
    """A primitive Dirichlet character of conductor f and order m, stored
    as t -> k with chi(t) = zeta_m^k for t coprime to f."""

    conductor: int
    order: int
    log: tuple[tuple[int, int], ...]

    @property
    def table(self) -> dict[int, int]:
        return dict(self.log)

    @property
    def parity(self) -> int:
        if self.conductor <= 2:
            return 1
        return 1 if self.table[self.conductor - 1] == 0 else -1

    def is_odd(self) -> bool:
        return self.parity == -1

    def is_trivial(self) -> bool:
        return all(k == 0 for _, k in self.log)

    def value(self, t: int) -> CycloElement:
        t %= self.conductor
        if math.gcd(t, self.conductor) != 1:
            return CycloElement.rational(self.order, 0)
        return CycloElement.root(self.order, self.table[t])


def _kronecker_at_prime(d: int, p: int) -> int:
    if p == 2:
        return 0 if d % 2 == 0 else 1 if d % 8 in (1, 7) else -1
    r = pow(d % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def quadratic_character(d: int) -> DirichletCharacterData:
    """t -> (d/t), the character of the quadratic field of discriminant d."""
    if not is_fundamental_discriminant(d):
        raise ValueError(f"{d} is not a fundamental discriminant")
    f = abs(d)
    # completely multiplicative in t: fill from the values at primes
    chi = [0] * f
    if f > 1:
        chi[1] = 1
    spf = list(range(f))
    for p in range(2, f):
        if spf[p] == p:
            chi[p] = _kronecker_at_prime(d, p)
            for k in range(p * p, f, p):
                if spf[k] == k:
                    spf[k] = p
        else:
            chi[p] = chi[spf[p]] * chi[p // spf[p]]
    log = tuple((t, 0 if chi[t] == 1 else 1) for t in range(1, f) if chi[t])
    return DirichletCharacterData(f, 2, log)


def power_character(q: int, k: int) -> DirichletCharacterData:
    """g^i -> zeta_{q-1}^{k i} mod the prime q, g the least primitive root.

    With the embedding zeta_{q-1} -> Teichmueller lift of g this is omega^k."""
    if not isprime(q) or q == 2:
        raise ValueError("q must be an odd prime")
    g = primitive_root(q)
    m = q - 1
    log, x = [], 1
    for i in range(m):
        log.append((x, k * i % m))
        x = x * g % q
    order = m // math.gcd(k, m)
    # re-express the exponents in Z/order
    log = tuple(sorted((t, e // (m // order)) for t, e in log))
    chi = DirichletCharacterData(q, order, log)
    if chi.is_trivial():
        return DirichletCharacterData(1, 1, ((0, 0),))
    return chi


def beta_chi(chi: DirichletCharacterData) -> CycloElement:
    if chi.is_trivial():
        raise ValueError("beta is defined here for nontrivial characters only")
    if not chi.is_odd():
        raise ValueError("beta is defined here for odd characters only")
    f, m = chi.conductor, chi.order
    if m == 2:
        return CycloElement.rational(2, Fraction(sum(t if k == 0 else -t for t, k in chi.log), f))
    total = CycloElement.rational(m, 0)
    for t, k in chi.log:
        total = total + CycloElement.root(m, -k) * Fraction(t, f)
    return total


def roots_of_unity_count(d: int) -> int:
    return 6 if d == -3 else 4 if d == -4 else 2


@lru_cache(maxsize=None)
def quadratic_beta(d: int) -> Fraction:
    """beta(chi_d) for an imaginary quadratic discriminant d (a rational number)."""
    return beta_chi(quadratic_character(d)).to_rational()


def class_number_from_beta(d: int) -> int:
    """(w/2)|beta(chi_d)| for d < 0 fundamental."""
    beta = quadratic_beta(d)
    h = Fraction(roots_of_unity_count(d), 2) * abs(beta)
    if h.denominator != 1:
        raise ArithmeticError(f"non-integral class number {h} for d = {d}")
    return int(h)


def rational_valuation(x: Fraction, p: int) -> int:
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    return valuation(abs(x.numerator), p) - valuation(x.denominator, p)


# ---------------------------------------------------------------- Teichmueller


def teichmuller_lift(t: int, q: int, precision: int) -> int:
    """The (q-1)-th root of unity mod q^precision congruent to t."""
    mod = q**precision
    x = t % mod
    for _ in range(precision):
        x = pow(x, q, mod)
    return x


@dataclass(frozen=True)
class TeichmullerCheck:
    q: int
    precision: int
    residue: int
    ok: bool


def teichmuller_unit_check(q: int, precision: int = 1) -> TeichmullerCheck:
    """sum_{t=1}^{q-1} t T(t)^-1 mod q^precision, which must be -1 mod q,
    so q beta(omega) is a q-adic unit."""
    if q == 2 or not isprime(q):
        raise ValueError("q must be an odd prime")
    if precision < 1:
        raise ValueError("precision must be >= 1")
    mod = q**precision
    total = 0
    for t in range(1, q):
        T = teichmuller_lift(t, q, precision)
        if pow(T, q - 1, mod) != 1:
            raise ArithmeticError(f"lift of {t} is not a (q-1)-th root of unity")
        total += t * pow(T, -1, mod)
    residue = total % mod
    return TeichmullerCheck(q, precision, residue, residue % q == q - 1)


# ---------------------------------------------------------------- valuations


@dataclass(frozen=True)
class StickelbergerRow:
    d: int
    p: int
    v_h: int
    v_beta: int
    passed: bool
    exception: bool = False

    def to_json(self) -> dict:
        return {"d": self.d, "p": self.p, "v_h": self.v_h, "v_beta": self.v_beta,
                "pass": self.passed, "exception": self.exception}


def stickelberger_valuation_test(d: int, p: int) -> StickelbergerRow:
    """Compare v_p(h(d)) with v_p(beta(chi_d)) at an odd prime p not dividing 2d.

    The pair d = -3, p = 3 is the exceptional case where Q(sqrt -3) contains
    zeta_3: there beta = -1/3 has valuation -1 and 3 does not divide h."""
    if d >= 0 or not is_fundamental_discriminant(d):
        raise ValueError(f"{d} is not a negative fundamental discriminant")
    if p == 2 or not isprime(p):
        raise ValueError("p must be an odd prime")
    h = class_number_definite(d)
    beta = quadratic_beta(d)
    v_h, v_beta = valuation(h, p), rational_valuation(beta, p)
    if (d, p) == (-3, 3):
        return StickelbergerRow(d, p, v_h, v_beta, v_beta == -1 and h % 3 != 0, True)
    if (2 * d) % p == 0:
        raise ValueError(f"p = {p} divides 2d = {2 * d}")
    return StickelbergerRow(d, p, v_h, v_beta, v_h == v_beta)


# ---------------------------------------------------------------- roots of unity


def mu_minus_class(G: GroupSpec, S, U: dict, datum: ClassDatum, involution=None) -> GrothendieckClass:
    """Class of the minus part of mu_F: the sum over q in U of [chi_q(T)/p_q],
    with p_q = m_{q, chi_q} the ideal above q cut out by the designated
    character chi_q of order q - 1 (given as an exponent tuple)."""
    S = set(S)
    torsion = {}
    comps = components(G)
    for q, chi_q in U.items():
        if q not in S:
            raise ValueError(f"{q} is in U but not in S")
        if G.order % q == 0:
            raise ValueError(f"{q} divides #G")
        chi_q = tuple(chi_q)
        if G.element_order(chi_q) != q - 1:
            raise ValueError(f"chi_{q} must have order {q - 1}")
        comp = next(c for c in comps if chi_q in c.members)
        if involution is not None and comp.character.value_at_involution(involution) != -1:
            raise ValueError(f"chi_{q} is not odd")
        torsion[ideal_of_character(comp, q, chi_q)] = Partition.of(1)
    return class_of(ModuleShape.build(torsion), datum)
