"""Share of cyclic quartic fields whose quadratic subfield has class number
prime to 3: exact counts by discriminant against the certified limit bracket
and the value 0.8402 that a naive heuristic predicts.

    python demos/quartic_disproof.py [--D 100000]
"""

import argparse

from clm_lab.cli import default_cache
from clm_lab.measure import local_normalizer
from clm_lab.quadforms import FormClassTable, build_table
from clm_lab.quartic import (
    admissible_subfield_discriminants,
    count_by_subfield,
    density_bracket,
    empirical_density,
    subfields_needed,
    t_constant,
)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--D", type=int, default=10**5, help="largest quadratic subfield discriminant used")
    ap.add_argument("--x", type=int, default=10**10, help="largest quartic discriminant counted")
    args = ap.parse_args()

    path = default_cache()
    table = FormClassTable.read_csv(path) if path.exists() else FormClassTable()
    needed = sorted(set(admissible_subfield_discriminants(args.D)) | set(subfields_needed(args.x)))
    if table.covers(needed):
        print(f"computing class numbers for {len(table.covers(needed))} discriminants ...")
        table = build_table(needed, path=path)

    t = t_constant(10**7)
    br = density_bracket(args.D, t, table)
    z = local_normalizer(3, 1)
    print(f"t in [{t.lower:.7f}, {t.upper:.7f}]")
    print(f"limit share in [{br.lower:.5f}, {br.upper:.5f}] using {br.fields_counted} quadratic fields")
    print(f"heuristic prediction 1/Z_3(1) = {float(1 / z.lower):.5f}")
    print()
    print(f"{'x':>14} {'#C(x)':>9} {'share':>9}")
    x = 10**4
    while x <= args.x:
        total = sum(count_by_subfield(x).values())
        print(f"{x:>14.0e} {total:>9} {float(empirical_density(x, table)):>9.5f}")
        x *= 10


if __name__ == "__main__":
    main()
