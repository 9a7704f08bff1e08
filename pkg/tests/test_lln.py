import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clm_lab.groups import build_group, cyclic_involution
from clm_lab.lln import (
    PI2_OVER_6,
    AdversarialFunction,
    FiniteDist,
    GeometricDist,
    MeasureDist,
    adversarial_function,
    bounded_suite,
    early_hitters,
    expected_early_hitters,
    indicator_average,
    parse_dist,
    running_average_profile,
    sample_stream,
)
from clm_lab.measure import make_measure
from clm_lab.modules import ModuleShape

N = 10**6
SEED = 7


@pytest.fixture(scope="module")
def stream():
    return sample_stream(GeometricDist(), N, SEED)


def test_frequency_of_one(stream):
    freq = float(np.mean(stream.values == 1))
    assert abs(freq - 0.5) < 3 * math.sqrt(0.25 / N)


def test_reproducible():
    a = sample_stream(GeometricDist(), 1000, 3)
    b = sample_stream(GeometricDist(), 1000, 3)
    c = sample_stream(GeometricDist(), 1000, 4)
    assert np.array_equal(a.values, b.values) and not np.array_equal(a.values, c.values)
    with pytest.raises(ValueError):
        sample_stream(GeometricDist(), 10**9, 1)


def test_distributions():
    g = parse_dist("geometric:0.25")
    assert g.prob(1) == Fraction(1, 4) and g.prob(3) == Fraction(9, 64)
    assert g.mass_of(range(1, 11)) == 1 - g.tail(10)
    with pytest.raises(ValueError):
        parse_dist("poisson:1")
    with pytest.raises(ValueError):
        GeometricDist(Fraction(3, 2))
    with pytest.raises(ValueError):
        FiniteDist({"a": Fraction(1, 2), "b": Fraction(1, 3)})


def test_measure_stream():
    G = build_group([2])
    meas = make_measure(G, [3], 1, "minus", cyclic_involution(G))
    dist = MeasureDist(meas)
    s = sample_stream(dist, 200, 5)
    assert len(s.values) == 200 and all(isinstance(M, ModuleShape) for M in s.values)
    assert s.values == sample_stream(dist, 200, 5).values
    zero = ModuleShape.build({}, dict(meas.ranks))
    assert 0 < dist.prob(zero) <= 1
    labels = dist.labels()
    assert next(labels).order == 1


def test_early_hitters(stream):
    counts = [len(early_hitters(stream, eps)) for eps in (0.01, 0.1, 0.5, 1)]
    assert counts == sorted(counts)
    assert counts[0] >= 1
    hitters = early_hitters(stream, 1)
    y1 = int(stream.values[0])
    assert (y1, 1) in hitters
    assert [i for _, i in hitters] == sorted(i for _, i in hitters)
    for x, i in early_hitters(stream, 0.1):
        assert i * GeometricDist().prob(x) <= Fraction(1, 10)


def test_expected_hitters_formula():
    """Each label k with p n >> 1 is an early hitter with probability 1 - (1-p)^floor(eps/p) ~ 1 - e^-eps."""
    g = GeometricDist()
    e = expected_early_hitters(g, 1, N)
    assert 10 < e < 25
    assert expected_early_hitters(g, 0.01, N) < expected_early_hitters(g, 0.1, N) < e


@settings(max_examples=20)
@given(st.integers(0, 10_000), st.sampled_from([0.05, 0.3, 1.0]))
def test_hitters_monotone_small(seed, eps):
    s = sample_stream(GeometricDist(), 2000, seed)
    small = set(early_hitters(s, eps))
    assert small <= set(early_hitters(s, 2 * eps))


def test_adversarial_function(stream):
    f = adversarial_function(stream)
    assert f.points, "no adversarial point found"
    g = GeometricDist()
    for pt in f.points:
        assert pt.first_index * g.prob(pt.x) <= Fraction(1, pt.n**3)
        assert pt.f_value == Fraction(1, pt.n**2) / g.prob(pt.x)
        assert int(stream.values[pt.first_index - 1]) == pt.x
        assert pt.x not in set(stream.values[: pt.first_index - 1].tolist())
    assert [pt.n for pt in f.points] == list(range(1, len(f.points) + 1))
    assert len({pt.x for pt in f.points}) == len(f.points)
    cert = f.certificate()
    assert cert["ok"] and cert["expectation_partial_sum"] <= PI2_OVER_6
    assert f.expectation_partial_sum == sum(Fraction(1, pt.n**2) for pt in f.points)


def test_spikes(stream):
    f = adversarial_function(stream)
    profile, spikes = running_average_profile(f, stream)
    assert len(spikes) == len(f.points)
    assert all(s.ok and s.average >= s.n for s in spikes)
    assert profile[-1][0] == N


def test_spike_is_exact_on_small_stream():
    s = sample_stream(FiniteDist({"a": Fraction(1, 2), "b": Fraction(1, 4), "c": Fraction(1, 4)}), 50, 1)
    f = adversarial_function(s)
    _, spikes = running_average_profile(f, s)
    for pt, sp in zip(f.points, spikes):
        prefix = s.values[: pt.first_index]
        brute = sum((f(y) for y in prefix), Fraction(0)) / pt.first_index
        assert sp.average == brute


def test_zero_function():
    s = sample_stream(GeometricDist(Fraction(9, 10)), 100, 2)
    f = AdversarialFunction([])
    profile, spikes = running_average_profile(f, s)
    assert spikes == [] and all(avg == 0 for _, avg in profile)
    assert f(1) == 0 and f.certificate()["ok"]


@settings(max_examples=10)
@given(st.integers(0, 1000), st.fractions(Fraction(1, 10), Fraction(5)))
def test_bounded_functions_stay_bounded(seed, c):
    s = sample_stream(GeometricDist(), 2000, seed)
    profile, _ = running_average_profile(lambda y: c if y % 2 else -c, s, checkpoints=[1, 10, 100, 2000])
    assert all(abs(avg) <= float(c) + 1e-12 for _, avg in profile)


def test_bounded_suite():
    rows = bounded_suite(GeometricDist(), N, SEED)
    assert len(rows) == 10
    for r in rows:
        sigma = math.sqrt(r["expectation"] * (1 - r["expectation"]) / N)
        assert r["deviation"] < 5e-3
        assert r["deviation"] <= 3 * sigma + 1e-12 or r["expectation"] in (0.0, 1.0)


def test_indicator_average_list_stream():
    s = sample_stream(FiniteDist({1: Fraction(1, 2), 2: Fraction(1, 2)}), 1000, 3)
    assert indicator_average(s, {1, 2}) == 1.0
