import math

import pytest
from hypothesis import given, strategies as st

from clm_lab.quadforms import (
    FormClassRow,
    FormClassTable,
    build_table,
    cf_period_length,
    class_number_definite,
    compute_row,
    fundamental_discriminants,
    is_fundamental_discriminant,
    narrow_class_number_indefinite,
    ordinary_class_number,
    reduced_definite_forms,
    reduced_indefinite_forms,
    rho,
)

# h(-d) for the first imaginary quadratic fields, and h(d) (ordinary) for real ones
KNOWN_DEFINITE = {-3: 1, -4: 1, -7: 1, -8: 1, -11: 1, -15: 2, -20: 2, -23: 3, -47: 5, -71: 7, -163: 1, -3299: 27}
KNOWN_REAL = {5: 1, 8: 1, 12: 1, 13: 1, 60: 2, 79 * 4: 3, 229: 3, 401: 5, 1345: 6}


def test_fundamental_examples():
    assert is_fundamental_discriminant(5)
    assert is_fundamental_discriminant(12)
    assert not is_fundamental_discriminant(9)
    assert not is_fundamental_discriminant(1)
    assert not is_fundamental_discriminant(0)
    assert is_fundamental_discriminant(-4) and not is_fundamental_discriminant(-16)


def test_definite_examples():
    for d, h in KNOWN_DEFINITE.items():
        assert class_number_definite(d) == h
    assert [(f.a, f.b, f.c) for f in reduced_definite_forms(-23)] == [(1, 1, 6), (2, -1, 3), (2, 1, 3)]
    with pytest.raises(ValueError):
        class_number_definite(-12)
    with pytest.raises(ValueError):
        class_number_definite(5)


def test_indefinite_examples():
    assert narrow_class_number_indefinite(5) == 1
    assert narrow_class_number_indefinite(12) == 2
    assert narrow_class_number_indefinite(40) == 2
    assert ordinary_class_number(5) == (1, -1)
    assert ordinary_class_number(12) == (1, 1)
    assert ordinary_class_number(229) == (3, -1)
    for d, h in KNOWN_REAL.items():
        assert ordinary_class_number(d)[0] == h
    with pytest.raises(ValueError):
        narrow_class_number_indefinite(9)


def test_229_is_least_real_with_three_dividing_h():
    ds = [d for d in fundamental_discriminants(2, 229)]
    assert [d for d in ds if narrow_class_number_indefinite(d) % 3 == 0] == [229]


def test_cf_period():
    assert cf_period_length(2) == 1
    assert cf_period_length(3) == 2
    assert cf_period_length(7) == 4
    assert cf_period_length(13) == 5


@given(st.integers(2, 10_000))
def test_indefinite_invariants(d):
    if not is_fundamental_discriminant(d):
        return
    hn = narrow_class_number_indefinite(d)
    h, norm = ordinary_class_number(d)
    assert hn // h in (1, 2) and hn % h == 0
    assert (hn % 3 == 0) == (h % 3 == 0)
    assert (h == hn) == (norm == -1)
    for f in reduced_indefinite_forms(d):
        a, b, c = f
        assert b * b - 4 * a * c == d
        assert rho(f, d) in set(reduced_indefinite_forms(d))


@given(st.integers(-10_000, -3))
def test_definite_forms_are_reduced(d):
    if not is_fundamental_discriminant(d):
        return
    for f in reduced_definite_forms(d):
        assert abs(f.b) <= f.a <= f.c and f.discriminant == d
        if abs(f.b) == f.a or f.a == f.c:
            assert f.b >= 0


def test_genus_parity():
    """2-rank of the narrow class group: h_narrow is even iff d has >= 2 prime factors."""
    for d in fundamental_discriminants(5, 3000):
        t = len({p for p in range(2, d + 1) if d % p == 0 and all(p % r for r in range(2, math.isqrt(p) + 1))})
        assert (narrow_class_number_indefinite(d) % 2 == 0) == (t >= 2)


def test_cache_round_trip(tmp_path):
    ds = fundamental_discriminants(-500, 500)
    table = build_table(ds)
    path = tmp_path / "forms.csv"
    table.write_csv(path)
    back = FormClassTable.read_csv(path)
    assert back.rows == table.rows
    back.write_csv(tmp_path / "again.csv")
    assert (tmp_path / "again.csv").read_bytes() == path.read_bytes()


def test_build_resumes_and_skips_torn_lines(tmp_path):
    path = tmp_path / "forms.csv"
    build_table(fundamental_discriminants(2, 300), path=path)
    with open(path, "a") as fh:
        fh.write("401,5,")  # interrupted writer
    t = FormClassTable.read_csv(path)
    assert 401 not in t and 229 in t
    path.write_text(path.read_text().rsplit("\n", 1)[0] + "\n")
    t2 = build_table(fundamental_discriminants(2, 600), path=path)
    assert t2[401] == compute_row(401)
    assert FormClassTable.read_csv(path).rows == t2.rows


def test_verify_catches_tampering(tmp_path):
    table = build_table(fundamental_discriminants(2, 400))
    assert table.verify(1.0)["ok"]
    rows = dict(table.rows)
    rows[229] = FormClassRow(229, 1, 1, -1)
    bad = FormClassTable(rows.values())
    rep = bad.verify(1.0)
    assert not rep["ok"] and any(e.startswith("229") for e in rep["errors"])
    rows[229] = FormClassRow(229, 3, 2, -1)
    assert any(e.startswith("229") for e in FormClassTable(rows.values()).verify(0.0)["errors"])


def test_merge_rules():
    a = build_table(fundamental_discriminants(2, 100))
    b = build_table(fundamental_discriminants(101, 200))
    assert len(a.merge(b)) == len(a) + len(b)
    c = FormClassTable([FormClassRow(5, 2, 2, -1)])
    with pytest.raises(ValueError):
        a.merge(c)
