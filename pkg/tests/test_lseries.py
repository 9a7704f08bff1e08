import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from clm_lab.arith import primes_up_to
from clm_lab.cyclotomic import CycloElement
from clm_lab.groups import build_group, components, maximal_ideals
from clm_lab.lseries import (
    DirichletCoefficients,
    c58_component,
    c58_equidistribution_demo,
    euler_product,
    l_product_coeffs,
    partial_L,
    synthetic_class_datum,
    verify_analytic_identity,
    verify_rank_additivity,
    z_series_coeffs,
)
from clm_lab.measure import make_measure
from clm_lab.modules import ClassDatum


def _measure(orders, B, u=0, selection="all"):
    G = build_group(orders)
    S = [int(p) for p in primes_up_to(B) if G.order % int(p)]
    return make_measure(G, S, u, selection)


def _single_ideal_measure(q, u=1):
    """The trivial component of C1 with S = {q}."""
    return make_measure(build_group([1]), [q], u)


def test_cyclotomic_arithmetic():
    z = CycloElement.root(12, 1)
    assert z**12 == 1 and z**6 == -1
    assert (z**4) ** 3 == 1 and z**4 != 1
    x = z + 2
    assert x * x - 4 * x - z * z + 4 == 0
    assert CycloElement.root(4, 1) * CycloElement.root(4, 1) == -1
    assert abs(CycloElement.root(5, 2).to_complex() - complex(math.cos(4 * math.pi / 5), math.sin(4 * math.pi / 5))) < 1e-12
    with pytest.raises(ValueError):
        CycloElement.root(4, 1) + CycloElement.root(3, 1)


@given(st.integers(1, 24), st.integers(-50, 50), st.integers(-50, 50))
def test_roots_multiply(m, a, b):
    assert CycloElement.root(m, a) * CycloElement.root(m, b) == CycloElement.root(m, a + b)


def test_partial_L_examples():
    G = build_group([1])
    (triv,) = components(G)
    (m,) = maximal_ideals(triv, [3])
    trivial_datum = ClassDatum((2,), {m: (0,)})
    assert partial_L(triv, trivial_datum, (1,), 1, [3]) == Fraction(3, 2)
    odd = ClassDatum((2,), {m: (1,)})
    for s in (1, 2, 3):
        assert partial_L(triv, odd, (1,), s, [3]) == 1 / (1 + Fraction(1, 3**s))
    ideals = maximal_ideals(triv, [3, 5])
    datum = ClassDatum((2,), {ideals[0]: (1,), ideals[1]: (0,)})
    both = euler_product(ideals, datum, (1,), 2).value()
    assert both == euler_product(ideals[:1], datum, (1,), 2).value() * euler_product(ideals[1:], datum, (1,), 2).value()
    complex_value = euler_product(ideals, datum, (1,), 2.0).value()
    assert abs(complex_value - float(both)) < 1e-12
    with pytest.raises(ZeroDivisionError):
        partial_L(triv, trivial_datum, (0,), 0, [3])


def test_z_series_examples():
    for q in (2, 3, 5):
        meas = _single_ideal_measure(q, 1)
        datum = ClassDatum((1,), {m: (0,) for m in meas.ideals})
        Z = z_series_coeffs(meas, datum, (0,), q**6)
        for j in range(7):
            assert Z[q**j] == Fraction(1, q**j)
    meas0 = _measure([4], 200, 0)
    datum = synthetic_class_datum(meas0.ideals, (2,), 3)
    Z0 = z_series_coeffs(meas0, datum, (1,), 200)
    assert Z0.nonzero() == {1: CycloElement.rational(2, 1)}


def test_convolution_matches_product():
    meas = _measure([3], 300, 1)
    datum = synthetic_class_datum(meas.ideals, (3,), 1)
    Z1 = z_series_coeffs(meas, datum, (1,), 300)
    Z2 = Z1 * Z1
    for n in range(1, 301):
        conv = sum((Z1[d] * Z1[n // d] for d in range(1, n + 1) if n % d == 0), CycloElement.rational(3, 0))
        assert Z2[n] == conv


@pytest.mark.parametrize("orders", [[4], [6]])
@pytest.mark.parametrize("u", [0, 1, 2, 3])
def test_analytic_identity_small(orders, u):
    meas = _measure(orders, 600)
    for C, phis in (((2,), [(0,), (1,)]), ((3,), [(1,)]), ((2, 2), [(1, 1)])):
        datum = synthetic_class_datum(meas.ideals, C, 0)
        for phi in phis:
            assert verify_analytic_identity(meas, datum, phi, 600, u=u).identity


def test_identity_q2_u3():
    meas = _single_ideal_measure(2, 3)
    datum = ClassDatum((1,), {m: (0,) for m in meas.ideals})
    rep = verify_analytic_identity(meas, datum, (0,), 2**12)
    assert rep.identity and rep.max_deviation == 0


@settings(max_examples=10)
@given(st.integers(0, 2), st.integers(0, 2), st.integers(0, 5))
def test_rank_additivity_small(u, v, seed):
    meas = _measure([4], 400)
    datum = synthetic_class_datum(meas.ideals, (4,), seed)
    assert verify_rank_additivity(meas, datum, (1,), 400, u, v).identity


def test_landau_positivity():
    meas = _measure([6], 500, 2)
    datum = synthetic_class_datum(meas.ideals, (2,), 0)
    Z = z_series_coeffs(meas, datum, (0,), 500)
    assert all(a.to_rational() > 0 for a in Z.nonzero().values())


def test_broken_identity_is_detected():
    meas = _measure([4], 300, 1)
    datum = synthetic_class_datum(meas.ideals, (2,), 0)
    lhs = z_series_coeffs(meas, datum, (1,), 300)
    rhs = l_product_coeffs(meas, datum, (0,), 300)
    assert not lhs.equals(rhs) and lhs.max_deviation(rhs) > 0


def test_custom_f_needs_single_component():
    meas = _measure([4], 100, 1)
    datum = synthetic_class_datum(meas.ideals, (2,), 0)
    with pytest.raises(ValueError):
        z_series_coeffs(meas, datum, (0,), 100, f=lambda M: CycloElement.rational(2, 1))
    with pytest.raises(ValueError):
        z_series_coeffs(meas, datum, (0,), 10**6)


def test_dirichlet_coefficients_basic():
    one = DirichletCoefficients.one(100, 2)
    geo = one.times_geometric(3, CycloElement.rational(2, Fraction(1, 3)))
    assert geo[9] == Fraction(1, 9) and geo[2] == 0
    assert (one * geo).equals(geo)


def test_synthetic_datum_is_local():
    meas_small = _measure([4], 50)
    meas_big = _measure([4], 500)
    a = synthetic_class_datum(meas_small.ideals, (2, 2), 9)
    b = synthetic_class_datum(meas_big.ideals, (2, 2), 9)
    assert all(a.ideal_class[m] == b.ideal_class[m] for m in meas_small.ideals)


def test_c58_demo():
    comp = c58_component()
    assert (comp.n, comp.degree) == (58, 28)
    seq = c58_equidistribution_demo([100, 1000], (1, 0, 1))
    assert seq[1]["upper"] < seq[0]["lower"]
    assert all(0 < r["lower"] <= r["upper"] <= 1 for r in seq)
    assert all(r["synthetic_class_datum"] for r in seq)
    triv = c58_equidistribution_demo([100, 1000], (0, 0, 0))
    assert [r["ratio"] for r in triv] == [1.0, 1.0]
