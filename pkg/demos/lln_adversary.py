"""Sample averages of an integrable function that blow up along a stream.

    python demos/lln_adversary.py [--n 1000000] [--seed 7]
"""

import argparse

from clm_lab.lln import (
    GeometricDist,
    adversarial_function,
    bounded_suite,
    early_hitters,
    expected_early_hitters,
    running_average_profile,
    sample_stream,
)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=10**6)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    dist = GeometricDist()
    stream = sample_stream(dist, args.n, args.seed)
    print("labels seen unusually early (first index i <= eps / p(x)):")
    for eps in (1, 0.5, 0.1, 0.01):
        hits = early_hitters(stream, eps)
        print(f"  eps = {eps:<5} {len(hits):>3} found, {expected_early_hitters(dist, eps, args.n):6.2f} expected")

    f = adversarial_function(stream)
    print(f"\nf(x_n) = n^-2 / p(x_n) on {len(f.points)} points; E(f) partial sum {float(f.expectation_partial_sum):.4f} <= pi^2/6")
    _, spikes = running_average_profile(f, stream)
    for pt, s in zip(f.points, spikes):
        print(f"  n = {pt.n}: x = {pt.x:>3}, first seen at {pt.first_index:>7}, running average there {float(s.average):8.3f} >= {s.n}")

    print("\nbounded functions behave: indicator averages vs probabilities")
    for row in bounded_suite(dist, args.n, args.seed, count=5):
        print(f"  {str(row['set']):<40} {row['average']:.5f} vs {row['expectation']:.5f}")


if __name__ == "__main__":
    main()
