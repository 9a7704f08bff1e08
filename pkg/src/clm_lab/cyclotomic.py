"""Exact arithmetic in Q(zeta_m), elements stored in the power basis
1, zeta, ..., zeta^(phi(m)-1) and reduced modulo the m-th cyclotomic
polynomial."""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache

from sympy import Poly, cyclotomic_poly, symbols

_x = symbols("x")


@lru_cache(maxsize=None)
def _reduction(m: int) -> tuple[int, tuple[int, ...]]:
    """(d, r) with zeta^d = sum_i r[i] zeta^i, d = phi(m)."""
    coeffs = [int(c) for c in Poly(cyclotomic_poly(m, _x), _x).all_coeffs()]  # leading first
    d = len(coeffs) - 1
    low = coeffs[::-1][:d]
    return d, tuple(-c for c in low)


class CycloElement:
    __slots__ = ("m", "c")

    def __init__(self, m: int, coeffs):
        d, _ = _reduction(m)
        c = [Fraction(a) for a in coeffs]
        if len(c) > d:
            c = _reduce(m, c)
        c += [Fraction(0)] * (d - len(c))
        self.m = m
        self.c = tuple(c)

    @classmethod
    def rational(cls, m: int, a) -> "CycloElement":
        return cls(m, [a])

    @classmethod
    def root(cls, m: int, k: int) -> "CycloElement":
        """zeta_m^k."""
        k %= m
        c = [0] * (k + 1)
        c[k] = 1
        return cls(m, c)

    def _coerce(self, other) -> "CycloElement":
        if isinstance(other, CycloElement):
            if other.m != self.m:
                raise ValueError(f"mixing Q(zeta_{self.m}) and Q(zeta_{other.m})")
            return other
        return CycloElement.rational(self.m, other)

    def __add__(self, other):
        other = self._coerce(other)
        return CycloElement(self.m, [a + b for a, b in zip(self.c, other.c)])

    __radd__ = __add__

    def __neg__(self):
        return CycloElement(self.m, [-a for a in self.c])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, CycloElement):
            f = Fraction(other)
            return CycloElement(self.m, [a * f for a in self.c])
        other = self._coerce(other)
        prod = [Fraction(0)] * (2 * len(self.c) - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(other.c):
                    if b:
                        prod[i + j] += a * b
        return CycloElement(self.m, prod)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are only defined for roots of unity via root()")
        out = CycloElement.rational(self.m, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.c == other.c

    def __hash__(self):
        return hash((self.m, self.c))

    def is_zero(self) -> bool:
        return not any(self.c)

    def is_rational(self) -> bool:
        return not any(self.c[1:])

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.c[0]

    def to_complex(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.m)
        return sum((float(a) * z**i for i, a in enumerate(self.c)), 0j)

    def __repr__(self):
        terms = [f"{a}*z^{i}" if i else str(a) for i, a in enumerate(self.c) if a]
        return f"Cyclo{self.m}(" + (" + ".join(terms) or "0") + ")"


def _reduce(m: int, c: list[Fraction]) -> list[Fraction]:
    d, r = _reduction(m)
    c = list(c)
    for top in range(len(c) - 1, d - 1, -1):
        a = c[top]
        if a:
            c[top] = Fraction(0)
            for i, ri in enumerate(r):
                if ri:
                    c[top - d + i] += a * ri
    return c[:d]
