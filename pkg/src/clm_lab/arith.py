"""Small integer helpers shared across the package: sieves, squarefree
tests, divisor counts, and a rigorous bound on partition-weighted tails."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from sympy import factorint


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n as an int64 array (odd-only sieve)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    size = (n - 1) // 2  # index i <-> 2i + 3
    sieve = np.ones(size, dtype=bool)
    for i in range((math.isqrt(n) - 1) // 2):
        if sieve[i]:
            p = 2 * i + 3
            sieve[(p * p - 3) // 2 :: p] = False
    odd = 2 * np.nonzero(sieve)[0].astype(np.int64) + 3
    return np.concatenate(([2], odd)).astype(np.int64)


def smallest_prime_factors(n: int) -> np.ndarray:
    spf = np.zeros(n + 1, dtype=np.int64)
    for p in primes_up_to(math.isqrt(n)):
        p = int(p)
        block = spf[p * p :: p]
        block[block == 0] = p
    idx = np.arange(n + 1)
    missing = spf == 0
    spf[missing] = idx[missing]
    return spf


def squarefree_mask(n: int) -> np.ndarray:
    """mask[k] is True iff k is squarefree (mask[0] is False)."""
    mask = np.ones(n + 1, dtype=bool)
    mask[0] = False
    for p in primes_up_to(math.isqrt(n)):
        mask[int(p) * int(p) :: int(p) * int(p)] = False
    return mask


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(abs(n)).values())


def sigma0(n: int) -> int:
    return math.prod(e + 1 for e in factorint(n).values())


def prime_divisors(n: int) -> list[int]:
    return sorted(factorint(abs(n)))


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def multiplicative_order(a: int, n: int) -> int:
    if n == 1:
        return 1
    if math.gcd(a, n) != 1:
        raise ValueError(f"{a} is not a unit mod {n}")
    k, x = 1, a % n
    while x != 1:
        x = x * a % n
        k += 1
    return k


def euler_phi(n: int) -> int:
    result = n
    for p in factorint(n):
        result = result // p * (p - 1)
    return result


@lru_cache(maxsize=None)
def partition_count(n: int) -> int:
    # Euler's pentagonal recurrence
    if n < 0:
        return 0
    if n == 0:
        return 1
    total, k = 0, 1
    while True:
        g1 = k * (3 * k - 1) // 2
        if g1 > n:
            break
        sign = 1 if k % 2 else -1
        total += sign * partition_count(n - g1)
        g2 = k * (3 * k + 1) // 2
        if g2 <= n:
            total += sign * partition_count(n - g2)
        k += 1
    return total


def partition_tail_bound(x: float, n_min: int) -> float:
    """Upper bound for sum_{n >= n_min} p(n) x^n, with p(n) the partition count.

    Exact terms up to a cutoff M, then p(n) <= exp(c sqrt n) with
    c = pi sqrt(2/3) and sqrt(n) <= (n/sqrt(M) + sqrt(M))/2, which turns
    the remainder into a geometric series.
    """
    if not 0 <= x < 1:
        raise ValueError("need 0 <= x < 1")
    if x == 0:
        return 0.0
    c = math.pi * math.sqrt(2.0 / 3.0)
    M = max(n_min, 16)
    while x * math.exp(c / (2 * math.sqrt(M))) >= 0.9:
        M *= 2
    for n in range(M):
        partition_count(n)  # fill the cache bottom-up, no deep recursion
    exact = math.fsum(partition_count(n) * x**n for n in range(n_min, M))
    ratio = x * math.exp(c / (2 * math.sqrt(M)))
    first = math.exp(c * math.sqrt(M) / 2 + math.log(x) * M + c * M / (2 * math.sqrt(M)))
    return exact + first / (1 - ratio)
