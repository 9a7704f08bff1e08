"""On the order-58 component the products of partial L-values over a
quadratic character of the class group keep shrinking as more primes are
included, while the trivial character stays at 1.  Ideal classes are drawn
from a seeded uniform stand-in, so the picture is qualitative.

    python demos/c58_equidistribution.py
"""

import itertools

from clm_lab.lseries import c58_component, c58_equidistribution_demo


def main() -> None:
    comp = c58_component()
    print(f"component of order {comp.n}, degree {comp.degree}")
    Ns = [10**2, 10**3, 10**4]
    print(f"{'phi':<12}" + "".join(f"{'N=' + str(N):>12}" for N in Ns))
    for phi in itertools.product((0, 1), repeat=3):
        seq = c58_equidistribution_demo(Ns, phi)
        print(f"{str(phi):<12}" + "".join(f"{r['ratio']:>12.6f}" for r in seq))


if __name__ == "__main__":
    main()
