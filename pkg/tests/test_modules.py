import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from clm_lab.groups import build_group, components, maximal_ideals
from clm_lab.modules import (
    ClassDatum,
    ModuleShape,
    Partition,
    aut_count,
    brute_force_counts,
    class_of,
    hom_count,
    ia_index,
    partitions_of,
    sur_count,
    sur_count_between,
)

P = Partition.of


def partitions(max_size):
    return st.integers(0, max_size).flatmap(lambda n: st.sampled_from(list(partitions_of(n))))


def test_hom_examples():
    for q in (2, 3, 4, 9):
        assert hom_count(P(2), P(1), q) == q
        assert hom_count(P(), P(3, 1), q) == 1
    assert hom_count(P(2, 1), P(1, 1), 2) == 16
    with pytest.raises(ValueError):
        hom_count(P(1), P(1), 1)


def test_aut_examples():
    for q in (2, 3, 5, 4):
        assert aut_count(P(1), q) == q - 1
    assert aut_count(P(1, 1), 2) == 6
    assert aut_count(P(2), 3) == 6
    assert aut_count(P(1, 1, 1), 2) == 168
    assert aut_count(P(), 7) == 1


def test_sur_examples():
    for q in (2, 3, 8):
        assert sur_count(P(1), q, 1) == q - 1
        assert sur_count(P(1), q, 0) == 0
    assert sur_count(P(1, 1), 2, 2) == 6
    assert sur_count(P(), 5, 0) == 1


def test_oracle_examples():
    assert brute_force_counts(P(2, 1), P(1, 1), 2, "hom") == 16
    assert brute_force_counts(P(1, 1, 1), None, 2, "aut") == 168
    assert brute_force_counts(P(1), None, 3, "sur", 2) == 8
    with pytest.raises(ValueError):
        brute_force_counts(P(13), None, 2, "aut")
    with pytest.raises(ValueError):
        brute_force_counts(P(1), None, 4, "aut")


@settings(max_examples=25)
@given(st.sampled_from([2, 3, 5]), st.data())
def test_formulas_match_oracle(q, data):
    cap = {2: 12, 3: 7, 5: 5}[q]
    lam = data.draw(partitions(cap))
    mu = data.draw(partitions(cap))
    u = data.draw(st.integers(0, 3))
    assert hom_count(lam, mu, q) == brute_force_counts(lam, mu, q, "hom")
    assert aut_count(lam, q) == brute_force_counts(lam, None, q, "aut")
    if q ** (lam.size * (u + 1)) <= 10**6 or lam.size <= 4:
        assert sur_count(lam, q, u) == brute_force_counts(lam, None, q, "sur", u)


@given(partitions(6), partitions(6))
def test_sur_between_matches_oracle(lam, alpha):
    if hom_count(lam, alpha, 2) > 20_000:
        return
    assert sur_count_between(lam, alpha, 2) == brute_force_counts(lam, alpha, 2, "sur_between")


@given(partitions(10), partitions(10), st.sampled_from([2, 3, 4, 5, 7, 9]))
def test_hom_symmetric(lam, mu, q):
    assert hom_count(lam, mu, q) == hom_count(mu, lam, q)


@given(partitions(8), st.integers(0, 5), st.sampled_from([2, 3, 5, 8]))
def test_sur_bounded_by_hom(lam, u, q):
    free_hom = q ** (u * lam.size)  # Hom from the free rank-u module
    s = sur_count(lam, q, u)
    assert s <= free_hom
    assert (s == free_hom) == (not lam)


def _pool(seed=0, size=20):
    G = build_group([4])
    ideals = [m for c in components(G) for m in maximal_ideals(c, [3, 5])]
    rng = random.Random(seed)
    pool = []
    for _ in range(size):
        tors = {}
        for m in rng.sample(ideals, rng.randint(0, 3)):
            tors[m] = rng.choice(list(partitions_of(rng.randint(1, 4))))
        pool.append(ModuleShape.build(tors))
    return G, ideals, pool


def test_ia_index_examples():
    G, ideals, pool = _pool()
    m = ideals[0]
    L0 = ModuleShape.build()
    M0 = ModuleShape.build({m: P(1)})
    for u in range(4):
        assert ia_index(L0, M0, {m.component_id: u}) == m.norm**u * (m.norm - 1)
    for M in pool:
        assert ia_index(M, M, {"chi0": 2}) == 1


def test_ia_index_cocycle_on_pool():
    G, ideals, pool = _pool(1)
    P_rank = {c.id: r for c, r in zip(components(G), (0, 1, 2))}
    for L, M, N in itertools.product(pool, repeat=3):
        assert ia_index(L, M, P_rank) * ia_index(M, N, P_rank) == ia_index(L, N, P_rank)
    for L, M in itertools.product(pool, repeat=2):
        assert ia_index(L, M, P_rank) * ia_index(M, L, P_rank) == 1


def test_class_of_examples():
    G = build_group([4])
    ideals = [m for c in components(G) for m in maximal_ideals(c, [3, 5])]
    m, m2 = ideals[0], ideals[1]
    datum = ClassDatum((4,), {x: ((1 + i) % 4,) for i, x in enumerate(ideals)} | {m: (1,), m2: (2,)})
    assert class_of(ModuleShape.build(), datum).torsion == (0,)
    # R/m has class [R] - [m]: a local module of type (2) gives -2[m]
    assert class_of(ModuleShape.build({m: P(2)}), datum).torsion == (-2 % 4,)
    assert class_of(ModuleShape.build({m: P(1, 1)}), datum).torsion == (-2 % 4,)
    assert class_of(ModuleShape.build({m: P(1), m2: P(1)}), datum).torsion == (-(1 + 2) % 4,)
    with pytest.raises(KeyError):
        class_of(ModuleShape.build({m: P(1)}), ClassDatum((4,), {}))


@given(st.lists(st.integers(0, 3), min_size=4, max_size=4), st.lists(st.integers(0, 3), min_size=4, max_size=4))
def test_class_of_additive(a, b):
    G = build_group([4])
    ideals = [m for c in components(G) for m in maximal_ideals(c, [3, 5])][:4]
    datum = ClassDatum((2, 4), {x: (i % 2, i % 4) for i, x in enumerate(ideals)})
    A = ModuleShape.build({m: P(k) if k else P() for m, k in zip(ideals, a)})
    B = ModuleShape.build({m: P(k) if k else P() for m, k in zip(ideals, b)})
    ca, cb, cab = (class_of(X, datum).torsion for X in (A, B, A + B))
    assert cab == datum.add(ca, cb)


def test_module_shape_json_round_trip():
    G, ideals, pool = _pool(2)
    for M in pool:
        M2 = ModuleShape.build(dict(M.torsion), {"chi0": 1})
        assert ModuleShape.from_json(M2.to_json(), ideals) == M2
    assert ia_index(pool[0], pool[0], {}) == Fraction(1)
