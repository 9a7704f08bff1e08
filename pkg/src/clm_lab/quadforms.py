"""Class numbers of quadratic fields from reduced binary quadratic forms.

Definite discriminants: count reduced forms |b| <= a <= c.  Indefinite
discriminants: the narrow class number is the number of cycles of reduced
forms under the reduction operator rho, and the ordinary class number
follows from the norm of the fundamental unit (read off the parity of the
continued-fraction period of sqrt(D)).

Tables of (d, h_narrow, h_ordinary, unit_norm) are kept as line-oriented
CSV so long runs can resume.
"""

from __future__ import annotations

import csv
import math
import os
import random
from bisect import bisect_left, bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import isqrt
from pathlib import Path
from typing import Iterable

import numpy as np
from sympy import divisors

from .arith import is_squarefree


@dataclass(frozen=True)
class QuadForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        d = self.discriminant
        if d == 0 or d % 4 not in (0, 1):
            raise ValueError(f"bad discriminant {d}")

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c


def is_fundamental_discriminant(d: int) -> bool:
    if d == 0 or d == 1:
        return False
    if d % 4 == 1:
        return is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def _require_fundamental(d: int):
    if not is_fundamental_discriminant(d):
        raise ValueError(f"{d} is not a fundamental discriminant")


def reduced_definite_forms(d: int) -> list[QuadForm]:
    if d >= 0:
        raise ValueError("definite forms need d < 0")
    forms = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b - d) % 2:
                continue
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            forms.append(QuadForm(a, b, c))
        a += 1
    return forms


def class_number_definite(d: int) -> int:
    _require_fundamental(d)
    if d >= 0:
        raise ValueError("class_number_definite needs d < 0")
    if -d > 10**7:
        raise ValueError("|d| above 10^7 is not supported")
    return len(reduced_definite_forms(d))


# ---------------------------------------------------------------- indefinite


class DivisorTable:
    """Sorted divisors of every N <= n in CSR layout."""

    def __init__(self, n: int):
        n = max(int(n), 1)
        cnt = np.zeros(n + 1, np.int64)
        for k in range(1, n + 1):
            cnt[k::k] += 1
        off = np.zeros(n + 2, np.int64)
        off[1:] = np.cumsum(cnt)
        flat = np.empty(off[-1], np.int64)
        pos = off[:-1].copy()
        for k in range(1, n + 1):
            idx = np.arange(k, n + 1, k)
            flat[pos[idx]] = k
            pos[idx] += 1
        self.n = n
        self._off = off.tolist()
        self._flat = flat.tolist()

    def divisors_in(self, N: int, lo: int, hi: int) -> list[int]:
        """Divisors of N in [lo, hi]."""
        divs = self._flat[self._off[N] : self._off[N + 1]]
        return divs[bisect_left(divs, lo) : bisect_right(divs, hi)]


def _divisors_in(N: int, lo: int, hi: int, table: DivisorTable | None) -> list[int]:
    if table is not None and N <= table.n:
        return table.divisors_in(N, lo, hi)
    return [a for a in divisors(N) if lo <= a <= hi]


def reduced_indefinite_forms(d: int, table: DivisorTable | None = None) -> list[tuple[int, int, int]]:
    """(a, b, c) with 0 < b < sqrt d and sqrt d - b < 2|a| < sqrt d + b."""
    r = isqrt(d)
    if r * r == d:
        raise ValueError("square discriminant")
    forms = []
    b = r if (r - d) % 2 == 0 else r - 1
    while b > 0:
        N = (d - b * b) // 4
        for a in _divisors_in(N, max((r - b) // 2, 1), (r + b) // 2 + 1, table):
            t1 = 2 * a + b
            if t1 * t1 <= d:
                continue
            t2 = 2 * a - b
            if t2 > 0 and t2 * t2 >= d:
                continue
            c = N // a
            forms.append((a, b, -c))
            forms.append((-a, b, c))
        b -= 2
    return forms


def rho(form: tuple[int, int, int], d: int) -> tuple[int, int, int]:
    """(a, b, c) -> (c, b', (b'^2 - d)/4c) with b' = -b mod 2|c| and
    sqrt d - 2|c| < b' < sqrt d."""
    a, b, c = form
    r = isqrt(d)
    m = 2 * abs(c)
    bp = (-b) % m
    bp += ((r - bp) // m) * m
    return (c, bp, (bp * bp - d) // (4 * c))


def narrow_class_number_indefinite(d: int, table: DivisorTable | None = None, check: bool = True) -> int:
    if check:
        _require_fundamental(d)
        if d < 0:
            raise ValueError("narrow_class_number_indefinite needs d > 0")
        if d > 10**7:
            raise ValueError("d above 10^7 is not supported")
    forms = reduced_indefinite_forms(d, table)
    seen: set = set()
    cycles = 0
    for f in forms:
        if f in seen:
            continue
        cycles += 1
        g = f
        while g not in seen:
            seen.add(g)
            g = rho(g, d)
        if g != f:
            raise ArithmeticError(f"rho orbit of {f} does not close up (d = {d})")
    return cycles


def cf_period_length(D: int) -> int:
    """Period length of the continued fraction of sqrt(D), D not a square."""
    a0 = isqrt(D)
    if a0 * a0 == D:
        raise ValueError("square argument")
    m, q, a, k = 0, 1, a0, 0
    while True:
        m = a * q - m
        q = (D - m * m) // q
        a = (a0 + m) // q
        k += 1
        if a == 2 * a0:
            return k


def unit_norm(d: int) -> int:
    """Norm of the fundamental unit of the real quadratic field of discriminant d."""
    D = d if d % 4 == 1 else d // 4
    return -1 if cf_period_length(D) % 2 else 1


def ordinary_class_number(d: int, table: DivisorTable | None = None) -> tuple[int, int]:
    """(h, unit norm) for a positive fundamental discriminant."""
    hn = narrow_class_number_indefinite(d, table)
    nu = unit_norm(d)
    if nu == 1:
        if hn % 2:
            raise ArithmeticError(f"odd narrow class number {hn} with a unit of norm +1 (d = {d})")
        return hn // 2, nu
    return hn, nu


# ---------------------------------------------------------------- tables


@dataclass(frozen=True)
class FormClassRow:
    d: int
    h_narrow: int
    h_ordinary: int
    unit_norm: int


def compute_row(d: int, table: DivisorTable | None = None) -> FormClassRow:
    _require_fundamental(d)
    if d < 0:
        h = class_number_definite(d)
        return FormClassRow(d, h, h, 1)
    hn = narrow_class_number_indefinite(d, table)
    nu = unit_norm(d)
    return FormClassRow(d, hn, hn if nu == -1 else hn // 2, nu)


class TableGap(KeyError):
    pass


class FormClassTable:
    HEADER = ("d", "h_narrow", "h_ordinary", "unit_norm")

    def __init__(self, rows: Iterable[FormClassRow] = ()):
        self.rows: dict[int, FormClassRow] = {}
        for r in rows:
            self.add(r)

    def add(self, row: FormClassRow):
        old = self.rows.get(row.d)
        if old is not None and old != row:
            raise ValueError(f"conflicting rows for d = {row.d}: {old} vs {row}")
        self.rows[row.d] = row

    def __contains__(self, d: int) -> bool:
        return d in self.rows

    def __len__(self) -> int:
        return len(self.rows)

    def __getitem__(self, d: int) -> FormClassRow:
        try:
            return self.rows[d]
        except KeyError:
            raise TableGap(f"no class number stored for d = {d}") from None

    def h_narrow(self, d: int) -> int:
        return self[d].h_narrow

    def covers(self, ds: Iterable[int]) -> list[int]:
        """The elements of ds that are missing."""
        return [d for d in ds if d not in self.rows]

    # io

    @classmethod
    def read_csv(cls, path) -> "FormClassTable":
        table = cls()
        path = Path(path)
        if not path.exists():
            return table
        with open(path, newline="") as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0] == "d":
                    continue
                if len(rec) != 4:
                    continue  # torn final line from an interrupted writer
                table.add(FormClassRow(*(int(x) for x in rec)))
        return table

    def write_csv(self, path):
        path = Path(path)
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.HEADER)
            for d in sorted(self.rows):
                r = self.rows[d]
                w.writerow((r.d, r.h_narrow, r.h_ordinary, r.unit_norm))
        os.replace(tmp, path)

    # checks

    def structural_errors(self) -> list[str]:
        errs = []
        for r in self.rows.values():
            if not is_fundamental_discriminant(r.d):
                errs.append(f"{r.d}: not fundamental")
            elif r.d > 0:
                if r.unit_norm not in (1, -1):
                    errs.append(f"{r.d}: unit norm {r.unit_norm}")
                expected = r.h_narrow if r.unit_norm == -1 else r.h_narrow / 2
                if r.h_ordinary != expected:
                    errs.append(f"{r.d}: h_ordinary {r.h_ordinary} vs narrow {r.h_narrow}, norm {r.unit_norm}")
            elif r.h_narrow != r.h_ordinary:
                errs.append(f"{r.d}: definite rows need h_narrow = h_ordinary")
            if r.h_ordinary < 1:
                errs.append(f"{r.d}: class number {r.h_ordinary}")
        return errs

    def verify(self, sample_fraction: float = 0.01, seed: int = 0) -> dict:
        """Structural invariants on every row, recomputation on a sample."""
        errs = self.structural_errors()
        ds = sorted(self.rows)
        k = min(len(ds), max(1, math.ceil(sample_fraction * len(ds)))) if ds else 0
        sample = random.Random(seed).sample(ds, k)
        for d in sample:
            fresh = compute_row(d)
            if fresh != self.rows[d]:
                errs.append(f"{d}: stored {self.rows[d]} recomputed {fresh}")
        return {"rows": len(ds), "recomputed": len(sample), "errors": errs, "ok": not errs}

    def merge(self, other: "FormClassTable") -> "FormClassTable":
        out = FormClassTable(self.rows.values())
        for r in other.rows.values():
            out.add(r)
        return out


def _compute_chunk(ds: list[int]) -> list[FormClassRow]:
    positive = [d for d in ds if d > 0]
    table = DivisorTable(max(positive) // 4) if positive else None
    return [compute_row(d, table) for d in ds]


def build_table(
    ds: Iterable[int],
    path=None,
    workers: int = 1,
    chunk: int = 5000,
    progress=None,
) -> FormClassTable:
    """Class numbers for every d in ds, resuming from (and appending to)
    the CSV at `path` if given.  Chunks are computed in parallel and
    written by this process only, in d order."""
    table = FormClassTable.read_csv(path) if path else FormClassTable()
    todo = sorted(d for d in set(ds) if d not in table)
    for d in todo:
        _require_fundamental(d)
    chunks = [todo[i : i + chunk] for i in range(0, len(todo), chunk)]
    if path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fresh = not path.exists() or path.stat().st_size == 0
        fh = open(path, "a", newline="")
        w = csv.writer(fh, lineterminator="\n")
        if fresh:
            w.writerow(FormClassTable.HEADER)
    else:
        fh = w = None

    def sink(rows):
        for r in rows:
            table.add(r)
            if w is not None:
                w.writerow((r.d, r.h_narrow, r.h_ordinary, r.unit_norm))
        if fh is not None:
            fh.flush()
        if progress:
            progress(len(table))

    try:
        if workers > 1 and len(chunks) > 1:
            with ProcessPoolExecutor(workers) as pool:
                for rows in pool.map(_compute_chunk, chunks):
                    sink(rows)
        else:
            for c in chunks:
                sink(_compute_chunk(c))
    finally:
        if fh is not None:
            fh.close()
    return table


def fundamental_discriminants(lo: int, hi: int) -> list[int]:
    return [d for d in range(lo, hi + 1) if is_fundamental_discriminant(d)]
