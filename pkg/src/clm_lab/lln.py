"""I.i.d. streams from a discrete distribution, the points that appear
unusually early, and the function built from them whose sample averages
blow up along the stream although its expectation is finite.

For a stream y_1, y_2, ... and labels x_1, x_2, ... with first occurrence
i(n) <= n^-3 / p(x_n), the function f(x_n) = n^-2 / p(x_n) (zero elsewhere)
has E(f) = sum n^-2 <= pi^2/6, while the average of f(y_1..y_i(n)) is at
least f(x_n)/i(n) >= n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterator, Sequence

import numpy as np

from .measure import ClmMeasure, shape_probability, sample_shapes, task_rng

PI2_OVER_6 = math.pi**2 / 6


class DiscreteDist:
    """A probability on a countable label set with p(x) > 0 everywhere."""

    name = "dist"

    def prob(self, x) -> Fraction:
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator) -> Sequence:
        raise NotImplementedError

    def labels(self) -> Iterator:
        """The support in a fixed enumeration order."""
        raise NotImplementedError

    def mass_of(self, xs) -> Fraction:
        return sum((self.prob(x) for x in xs), Fraction(0))


@dataclass
class GeometricDist(DiscreteDist):
    """p(k) = (1 - r)^(k-1) r on k = 1, 2, ..."""

    r: Fraction = Fraction(1, 2)

    def __post_init__(self):
        self.r = Fraction(self.r)
        if not 0 < self.r < 1:
            raise ValueError("need 0 < r < 1")
        self.name = f"geometric:{float(self.r)}"

    def prob(self, k) -> Fraction:
        k = int(k)
        if k < 1:
            raise ValueError(f"{k} is not in the support")
        return (1 - self.r) ** (k - 1) * self.r

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.geometric(float(self.r), size=n).astype(np.int64)

    def labels(self) -> Iterator[int]:
        k = 1
        while True:
            yield k
            k += 1

    def tail(self, K: int) -> Fraction:
        """Mass of {k > K}."""
        return (1 - self.r) ** K


@dataclass
class FiniteDist(DiscreteDist):
    probs: dict

    def __post_init__(self):
        self.probs = {x: Fraction(p) for x, p in self.probs.items()}
        if any(p <= 0 for p in self.probs.values()) or sum(self.probs.values()) != 1:
            raise ValueError("probabilities must be positive and sum to 1")
        self._keys = list(self.probs)
        self.name = "finite"

    def prob(self, x) -> Fraction:
        return self.probs[x]

    def sample(self, n: int, rng: np.random.Generator) -> list:
        p = np.array([float(self.probs[k]) for k in self._keys])
        idx = rng.choice(len(self._keys), size=n, p=p / p.sum())
        return [self._keys[i] for i in idx]

    def labels(self) -> Iterator:
        return iter(self._keys)


@dataclass
class MeasureDist(DiscreteDist):
    """Shapes drawn from a Cohen-Lenstra-Martinet measure.  prob returns the
    upper end of the certified probability, which keeps early-hitter and
    adversarial tests conservative."""

    measure: ClmMeasure
    name: str = "clm-measure"

    def prob(self, x) -> Fraction:
        return shape_probability(x, self.measure).upper

    def sample(self, n: int, rng: np.random.Generator) -> list:
        seed = int(rng.integers(2**63))
        return sample_shapes(self.measure, n, seed)

    def labels(self):
        from .measure import enumerate_shapes

        N = 0
        while True:
            for M in enumerate_shapes(self.measure.ideals, N, self.measure.ranks):
                if M.length == N:
                    yield M
            N += 1


def parse_dist(spec: str) -> DiscreteDist:
    """'geometric:0.5' style names."""
    kind, _, arg = spec.partition(":")
    if kind == "geometric":
        return GeometricDist(Fraction(arg or "0.5"))
    raise ValueError(f"unknown distribution {spec!r}")


@dataclass
class Stream:
    seed: int
    n: int
    values: Sequence
    dist: DiscreteDist = field(repr=False)

    def first_indices(self) -> dict:
        """x -> least (1-based) index i with y_i = x."""
        vals = self.values
        if isinstance(vals, np.ndarray):
            uniq, idx = np.unique(vals, return_index=True)
            return {int(x): int(i) + 1 for x, i in zip(uniq, idx)}
        first: dict = {}
        for i, x in enumerate(vals, 1):
            first.setdefault(x, i)
        return first


def sample_stream(dist: DiscreteDist, n: int, seed: int) -> Stream:
    if n > 10**8:
        raise ValueError("stream length above 10^8 is not supported")
    return Stream(seed, n, dist.sample(n, task_rng(seed)), dist)


def early_hitters(stream: Stream, eps) -> list[tuple[Hashable, int]]:
    """(x, i) with i the first index of x and i <= eps/p(x), sorted by i."""
    eps = Fraction(eps)
    out = [(x, i) for x, i in stream.first_indices().items() if i * stream.dist.prob(x) <= eps]
    out.sort(key=lambda t: (t[1], str(t[0])))
    return out


def expected_early_hitters(dist: GeometricDist, eps, n: int) -> float:
    """E #{x : first index i(x) <= min(eps/p(x), n)} for a geometric law."""
    eps = float(eps)
    total = 0.0
    for k in dist.labels():
        p = float(dist.prob(k))
        m = min(math.floor(eps / p), n)
        if p * n < 1e-12:
            break
        if m >= 1:
            total += -math.expm1(m * math.log1p(-p))
    return total


@dataclass(frozen=True)
class AdversarialPoint:
    n: int
    x: Hashable
    first_index: int
    p: Fraction
    f_value: Fraction


@dataclass
class AdversarialFunction:
    points: list[AdversarialPoint]

    def __call__(self, x) -> Fraction:
        return self.values.get(x, Fraction(0))

    @property
    def values(self) -> dict:
        return {pt.x: pt.f_value for pt in self.points}

    @property
    def expectation_partial_sum(self) -> Fraction:
        """sum p(x_n) f(x_n) = sum_{found n} n^-2."""
        return sum((pt.p * pt.f_value for pt in self.points), Fraction(0))

    def certificate(self) -> dict:
        s = self.expectation_partial_sum
        return {
            "points": len(self.points),
            "expectation_partial_sum": float(s),
            "bound": PI2_OVER_6,
            "ok": float(s) <= PI2_OVER_6 and s == sum(Fraction(1, pt.n**2) for pt in self.points),
        }


def adversarial_function(stream: Stream) -> AdversarialFunction:
    """Choose x_1, x_2, ... in turn, each unused with i(n) p(x_n) <= n^-3,
    until some n has no candidate.  The thresholds shrink with n, so each
    step takes the qualifying label with the largest i p and keeps the
    better ones for later."""
    first = stream.first_indices()
    cands = sorted(((i, x, stream.dist.prob(x)) for x, i in first.items()), key=lambda t: (t[0], str(t[1])))
    used = set()
    points = []
    n = 1
    while True:
        bound = Fraction(1, n**3)
        ok = [(i * p, i, x, p) for i, x, p in cands if x not in used and i * p <= bound]
        if not ok:
            break
        _, i, x, p = max(ok, key=lambda t: (t[0], -t[1]))
        used.add(x)
        points.append(AdversarialPoint(n, x, i, p, Fraction(1, n**2) / p))
        n += 1
    return AdversarialFunction(points)


@dataclass(frozen=True)
class Spike:
    n: int
    index: int
    average: Fraction

    @property
    def ok(self) -> bool:
        return self.average >= self.n


def running_average_profile(f, stream: Stream, checkpoints: Sequence[int] | None = None, spikes_for=None):
    """Running averages (1/i) sum_{j<=i} f(y_j) at the checkpoints, plus the
    exact averages at each i(n) when an AdversarialFunction is given."""
    vals = stream.values
    if isinstance(f, AdversarialFunction):
        table = f.values
        fv = [table.get(int(y) if isinstance(vals, np.ndarray) else y, 0) for y in vals] if table else None
    else:
        fv = [f(y) for y in vals]
    if checkpoints is None:
        checkpoints = sorted({min(stream.n, 10**k) for k in range(int(math.log10(max(stream.n, 1))) + 1)} | {stream.n})
    profile = []
    if fv is None:
        profile = [(i, 0.0) for i in checkpoints]
    else:
        csum = np.cumsum(np.array([float(v) for v in fv]))
        profile = [(i, float(csum[i - 1] / i)) for i in checkpoints]
    spikes = []
    if isinstance(f, AdversarialFunction):
        for pt in f.points:
            i = pt.first_index
            prefix = vals[:i]
            # exact: f is supported on the chosen points, so count their occurrences
            total = Fraction(0)
            for other in f.points:
                if isinstance(vals, np.ndarray):
                    hits = int(np.count_nonzero(prefix == other.x))
                else:
                    hits = sum(1 for y in prefix if y == other.x)
                total += hits * other.f_value
            spikes.append(Spike(pt.n, i, total / i))
    return profile, spikes


def indicator_average(stream: Stream, subset) -> float:
    vals = stream.values
    if isinstance(vals, np.ndarray):
        return float(np.isin(vals, np.array(sorted(subset))).mean())
    s = set(subset)
    return sum(1 for y in vals if y in s) / len(vals)


def bounded_suite(dist: GeometricDist, n: int, seed: int, count: int = 10, max_label: int = 12) -> list[dict]:
    """Random finite indicator functions: running average at n vs exact P(set)."""
    stream = sample_stream(dist, n, seed)
    rng = task_rng(seed, 1)
    out = []
    for _ in range(count):
        size = int(rng.integers(1, max_label))
        subset = sorted(int(x) for x in rng.choice(np.arange(1, max_label + 1), size=size, replace=False))
        expect = dist.mass_of(subset)
        avg = indicator_average(stream, subset)
        out.append({"set": subset, "average": avg, "expectation": float(expect), "deviation": abs(avg - float(expect))})
    return out
