"""Cyclic quartic fields ordered by discriminant.

A cyclic quartic field whose quadratic subfield has discriminant
d = 2^beta d' (beta in {0, 3}, d' a product of distinct primes = 1 mod 4)
has discriminant n = 2^alpha d'^3 a^2 with a odd, squarefree and coprime
to d', and alpha = 11 if beta = 3, alpha in {0, 4, 6} if beta = 0.  The
number of such fields of discriminant n is 2 s(d'), s(d'), s(d')/2 for
alpha = 11, 6, {0, 4}, where s is the divisor-count function.

Counts are exact enumerations; limits use the constant t, bracketed by a
partial Euler product with a certified tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sympy import factorint

from .arith import primes_up_to, sigma0, squarefree_mask
from .quadforms import FormClassTable, TableGap, is_fundamental_discriminant

ALPHAS = (0, 4, 6, 11)
HEURISTIC_VALUE = 0.8402  # prod_{k>=2} (1 - 3^-k), the prediction the count disagrees with
OBSERVED_VALUE = 0.9914
MAX_X = 10**12


@dataclass(frozen=True)
class QuarticDisc:
    alpha: int
    d_prime: int
    a: int

    def __post_init__(self):
        if self.alpha not in ALPHAS:
            raise ValueError(f"alpha must be one of {ALPHAS}")
        if not _is_d_prime(self.d_prime) or (self.d_prime == 1 and self.alpha != 11):
            raise ValueError(f"d' = {self.d_prime} is not admissible for alpha = {self.alpha}")
        a = self.a
        if a < 1 or a % 2 == 0 or math.gcd(a, self.d_prime) != 1 or not _is_squarefree(a):
            raise ValueError(f"a = {a} must be odd, squarefree and coprime to d'")

    @property
    def n(self) -> int:
        return 2**self.alpha * self.d_prime**3 * self.a**2

    @property
    def subfield_discriminant(self) -> int:
        return 8 * self.d_prime if self.alpha == 11 else self.d_prime

    @classmethod
    def from_int(cls, n: int) -> "QuarticDisc":
        if n < 1:
            raise ValueError("discriminant must be positive")
        alpha = (n & -n).bit_length() - 1
        odd = n >> alpha
        d_prime, a = 1, 1
        for p, e in factorint(odd).items():
            if e == 3:
                d_prime *= p
            elif e == 2:
                a *= p
            else:
                raise ValueError(f"{n} is not a cyclic quartic discriminant")
        return cls(alpha, d_prime, a)


def _is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(n).values())


def _is_d_prime(n: int) -> bool:
    return n >= 1 and all(e == 1 and p % 4 == 1 for p, e in factorint(n).items())


def h_of_disc(n) -> int:
    """Number of cyclic quartic fields of discriminant n."""
    D = n if isinstance(n, QuarticDisc) else QuarticDisc.from_int(int(n))
    s = sigma0(D.d_prime)
    if D.alpha == 11:
        return 2 * s
    if D.alpha == 6:
        return s
    return s // 2  # s is even since d' > 1


# ---------------------------------------------------------------- enumeration


def d_prime_mask(n: int) -> np.ndarray:
    """mask[k]: k is squarefree with every prime factor = 1 mod 4."""
    mask = squarefree_mask(n)
    mask[0::2] = False
    for p in primes_up_to(n):
        p = int(p)
        if p % 4 == 3:
            mask[p::p] = False
    return mask


def admissible_subfield_discriminants(D: int) -> list[int]:
    """Fundamental d <= D that occur as quadratic subfields of cyclic quartic fields."""
    D = int(D)
    mask = d_prime_mask(D)
    odd = [int(k) for k in np.nonzero(mask)[0] if k > 1]
    even = [8 * int(k) for k in np.nonzero(mask[: D // 8 + 1])[0]]
    return sorted(odd + even)


class _CoprimeSquarefreeCounter:
    """#{a <= y : a odd, squarefree, coprime to m} via prefix sums."""

    def __init__(self, ymax: int):
        self.ymax = ymax
        base = squarefree_mask(ymax)
        base[0::2] = False
        self.base = base

    def count(self, y: int, m: int) -> int:
        y = min(int(y), self.ymax)
        if y < 1:
            return 0
        mask = self.base[: y + 1].copy()
        for p in factorint(m):
            mask[p::p] = False
        return int(mask.sum())


def _isqrt_floor_div(x: int, k: int) -> int:
    """floor(sqrt(x / k)) for integers."""
    return math.isqrt(x // k)


def _x_int(x) -> int:
    x = int(x)
    if x > MAX_X:
        raise ValueError(f"x above {MAX_X:.0e} is not supported")
    return x


def count_by_subfield(x) -> dict[int, int]:
    """#C_k(x) for every quadratic subfield discriminant d that occurs."""
    x = _x_int(x)
    out: dict[int, int] = {}
    if x < 125:
        return out
    counter = _CoprimeSquarefreeCounter(math.isqrt(x // 125) + 1)
    dmax = round(x ** (1 / 3)) + 2
    mask = d_prime_mask(dmax)
    for dp in np.nonzero(mask)[0]:
        dp = int(dp)
        s = sigma0(dp)
        cube = dp**3
        if dp > 1:
            total = 0
            for alpha, weight in ((0, Fraction(s, 2)), (4, Fraction(s, 2)), (6, Fraction(s))):
                k = 2**alpha * cube
                if k <= x:
                    total += weight * counter.count(_isqrt_floor_div(x, k), dp)
            if total:
                out[dp] = int(total)
        k = 2**11 * cube
        if k <= x:
            c = 2 * s * counter.count(_isqrt_floor_div(x, k), dp)
            if c:
                out[8 * dp] = c
    return out


def count_fields(x, restrict_subfield: int | None = None) -> int:
    """Exact #C(x), or #C_k(x) when the subfield discriminant is given."""
    if restrict_subfield is None:
        return sum(count_by_subfield(x).values())
    d = int(restrict_subfield)
    if not is_fundamental_discriminant(d):
        raise ValueError(f"{d} is not a fundamental discriminant")
    return count_by_subfield(x).get(d, 0)


# ---------------------------------------------------------------- limits


@dataclass(frozen=True)
class Bracket:
    lower: float
    upper: float

    @property
    def mid(self) -> float:
        return (self.lower + self.upper) / 2

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def __contains__(self, v) -> bool:
        return self.lower <= v <= self.upper


_REL = 1e-12  # slack for floating rounding in long products


def t_constant(P=10**8) -> Bracket:
    """t = (24 + sqrt 2)/24 prod_{p = 1 mod 4} (1 + 2/((p+1) sqrt p)) - 1.

    The primes beyond P change the log of the product by at most
    sum_{n > P} 2 n^-3/2 <= 4/sqrt(P)."""
    P = int(P)
    if P < 10**4:
        raise ValueError("P must be at least 10^4")
    ps = primes_up_to(P)
    ps = ps[ps % 4 == 1].astype(np.float64)
    log_prod = math.fsum(np.log1p(2.0 / ((ps + 1.0) * np.sqrt(ps))).tolist())
    c = (24 + math.sqrt(2)) / 24
    lo = c * math.exp(log_prod) * (1 - _REL) - 1
    hi = c * math.exp(log_prod + 4 / math.sqrt(P)) * (1 + _REL) - 1
    return Bracket(lo, hi)


def p_k_coefficient(d: int) -> float:
    """The limit proportion of fields containing Q(sqrt d), times t."""
    if not is_fundamental_discriminant(d):
        raise ValueError(f"{d} is not a fundamental discriminant")
    if d < 0:
        return 0.0
    ps = list(factorint(d))
    if any(p % 4 == 3 for p in ps):
        return 0.0
    denom = math.prod((p + 1) * math.sqrt(p) for p in ps)
    value = sigma0(d) / denom
    return value / 16 if d % 2 == 0 else value


def p_k_limit(d: int, t: Bracket) -> Bracket:
    c = p_k_coefficient(d)
    return Bracket(c / t.upper, c / t.lower)


@dataclass(frozen=True)
class DensityBracket:
    lower: float
    upper: float
    D: int
    mass_accounted: float
    mass_three_divides: float
    fields_counted: int
    t: Bracket

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def __contains__(self, v) -> bool:
        return self.lower <= v <= self.upper

    def to_json(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "width": self.width,
            "D": self.D,
            "mass_accounted": self.mass_accounted,
            "mass_three_divides_h": self.mass_three_divides,
            "quadratic_fields_used": self.fields_counted,
            "t_lower": self.t.lower,
            "t_upper": self.t.upper,
        }


def density_bracket(D, t: Bracket, table: FormClassTable) -> DensityBracket:
    """Bracket for lim #C'(x)/#C(x) from the quadratic fields with d <= D.

    Since the limits p_k sum to 1 over all real quadratic fields,
    lower = sum_{d <= D, 3 not | h} p_k and upper = 1 - sum_{d <= D, 3 | h} p_k,
    with every p_k taken at its lower end."""
    D = int(D)
    ds = admissible_subfield_discriminants(D)
    missing = table.covers(ds)
    if missing:
        raise TableGap(f"class numbers missing for {len(missing)} discriminants, e.g. {missing[:5]}")
    good, bad = [], []
    for d in ds:
        c = p_k_coefficient(d)
        (bad if table.h_narrow(d) % 3 == 0 else good).append(c)
    good_mass = math.fsum(good) / t.upper
    bad_mass = math.fsum(bad) / t.upper
    return DensityBracket(
        lower=good_mass * (1 - _REL),
        upper=1 - bad_mass * (1 - _REL),
        D=D,
        mass_accounted=good_mass + bad_mass,
        mass_three_divides=bad_mass,
        fields_counted=len(ds),
        t=t,
    )


def subfields_needed(x) -> list[int]:
    return sorted(count_by_subfield(x))


def empirical_density(x, table: FormClassTable) -> Fraction:
    """Exact #C'(x)/#C(x): the share of fields whose quadratic subfield has
    class number prime to 3."""
    counts = count_by_subfield(x)
    if not counts:
        raise ValueError(f"no cyclic quartic fields of discriminant <= {x}")
    missing = table.covers(counts)
    if missing:
        raise TableGap(f"class numbers missing for {missing[:5]}")
    good = sum(c for d, c in counts.items() if table.h_narrow(d) % 3)
    return Fraction(good, sum(counts.values()))
