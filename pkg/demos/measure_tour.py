"""A walk through the measure on modules over Z[C2] with the sign character:
normalizers, masses, sampling, the 3-coprime probability and moments.

    python demos/measure_tour.py
"""

import math
from collections import Counter

from clm_lab.groups import build_group, cyclic_involution
from clm_lab.measure import (
    enumerate_shapes,
    expectation_bracket,
    indicator,
    local_measure,
    local_normalizer,
    make_measure,
    sample_shapes,
    shape_probability,
    surjection_moment_check,
    truncation_shape_demo,
)
from clm_lab.modules import ModuleShape, Partition


def main() -> None:
    for q, u in ((2, 0), (3, 0), (3, 1)):
        z = local_normalizer(q, u)
        print(f"Z_{q}({u}) = {z.value:.12f}  (certified width {float(z.upper - z.lower):.1e})")

    G = build_group([2])
    meas = make_measure(G, [3, 5], 1, "minus", cyclic_involution(G))
    print("\nmost likely modules (S = {3, 5}, rank 1 on the minus part):")
    shapes = sorted(enumerate_shapes(meas.ideals, 3), key=lambda M: -shape_probability(M, meas).lower)[:6]
    draws = Counter(M.finite_part() for M in sample_shapes(meas, 50_000, seed=1))
    for M in shapes:
        p = float(shape_probability(M, meas).lower)
        desc = ", ".join(f"{m.id}:{lam.parts}" for m, lam in M.torsion) or "0"
        print(f"  {desc:<28} P = {p:.5f}   sampled {draws[M] / 50_000:.5f}")

    coprime = expectation_bracket(indicator(lambda M: M.order % 3 != 0), meas, 10)
    closed = math.prod(1 - 3.0**-k for k in range(2, 200))
    print(f"\nP(3 does not divide #M) in [{coprime.lower:.10f}, {coprime.upper:.10f}]; product formula {closed:.10f}")

    loc = local_measure(2, 1)
    (m,) = loc.ideals
    A = ModuleShape.build({m: Partition.of(2, 1)})
    br = surjection_moment_check(A, loc)
    print(f"E #Sur(M, Z/4 + Z/2) over F_2-type measure, rank 1: [{br.lower:.8f}, {br.upper:.8f}], expected 1/8")

    r = truncation_shape_demo(1, 10**5)
    print(f"\norder of truncation matters: ratio {r.ratio:.4f} one way, {r.swapped:.4f} the other")


if __name__ == "__main__":
    main()
